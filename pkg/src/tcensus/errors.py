"""Exception hierarchy.

Every error carries a short ``category`` used by the CLI to print a
machine-parseable one-line failure.
"""


class TCensusError(Exception):
    category = "Error"


class ImageTooSmall(TCensusError):
    category = "ImageTooSmall"


class OutOfBounds(TCensusError):
    category = "OutOfBounds"


class InsufficientData(TCensusError):
    category = "InsufficientData"


class DegenerateData(TCensusError):
    category = "DegenerateData"


class NoNegatives(TCensusError):
    category = "NoNegatives"


class LayoutNotGridded(TCensusError):
    category = "LayoutNotGridded"


class WindowTooLarge(TCensusError):
    category = "WindowTooLarge"


class EmptyReference(TCensusError):
    category = "EmptyReference"


class EmptySet(TCensusError):
    category = "EmptySet"


class EmptyScores(TCensusError):
    category = "EmptyScores"


class DecodeError(TCensusError):
    category = "DecodeError"


class UnsupportedFormat(TCensusError):
    category = "UnsupportedFormat"


class ConfigError(TCensusError):
    category = "ConfigError"
