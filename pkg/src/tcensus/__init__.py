"""Transformed census-transform (T-CENTRIST) pedestrian detection."""

from .census import ct_image, utct_images
from .classifier import LinearModel, train_linear_svm
from .detector import Detection, PyramidConfig, detect
from .errors import TCensusError
from .features import BlockLayout, extract, grid_layout
from .imagefile import load_image, save_image

__version__ = "0.1.0"

__all__ = ["ct_image", "utct_images", "LinearModel", "train_linear_svm", "Detection",
           "PyramidConfig", "detect", "TCensusError", "BlockLayout", "extract",
           "grid_layout", "load_image", "save_image", "__version__"]
