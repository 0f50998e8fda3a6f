"""Similarity-score analysis and classification ROC."""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyReference, EmptyScores, EmptySet, InsufficientData


def hik(M, N) -> float:
    """Histogram intersection normalized by the mass of ``M`` (asymmetric)."""
    M = np.asarray(M, dtype=np.float64)
    N = np.asarray(N, dtype=np.float64)
    if M.shape != N.shape:
        raise ValueError("histograms must have the same length")
    mass = M.sum()
    if mass <= 0:
        raise EmptyReference("reference histogram has no mass")
    return float(np.minimum(M, N).sum() / mass)


def hik_to_all(s, X) -> np.ndarray:
    """hik(s, x) for every row x of ``X``."""
    s = np.asarray(s, dtype=np.float64)
    mass = s.sum()
    if mass <= 0:
        raise EmptyReference("reference histogram has no mass")
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(len(X))
    return np.minimum(X, s[None, :]).sum(axis=1) / mass


def diff_score(s, same, other) -> float:
    """Best same-class similarity minus best other-class similarity.

    ``same`` must not contain ``s`` itself. Ties in the arg-max resolve to
    the first index, which does not change the returned value.
    """
    same = np.atleast_2d(np.asarray(same, dtype=np.float64))
    other = np.atleast_2d(np.asarray(other, dtype=np.float64))
    if same.size == 0 or other.size == 0:
        raise EmptySet("both comparison sets must be non-empty")
    s_in = int(np.argmax(hik_to_all(s, same)))
    s_out = int(np.argmax(hik_to_all(s, other)))
    return hik(s, same[s_in]) - hik(s, other[s_out])


@dataclass
class LabeledFeatureSet:
    features: np.ndarray
    labels: np.ndarray
    descriptor: str = "tcentrist"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2 or len(self.features) != len(self.labels):
            raise ValueError("features must be 2-D with one row per label")
        self._gram: np.ndarray | None = None
        self._gram_done = False

    def gram(self) -> np.ndarray | None:
        """Cached ``intersection_gram`` of the features (None if not applicable)."""
        if not self._gram_done:
            self._gram = intersection_gram(self.features)
            self._gram_done = True
        return self._gram


# Above this many unary columns the thermometer expansion is not worth it.
_MAX_UNARY_WIDTH = 5_000_000


def intersection_gram(X, chunk: int = 4096) -> np.ndarray | None:
    """Matrix of sum_k min(X[i, k], X[j, k]) for non-negative integer rows.

    Each count c is written in unary as c ones (a thermometer code), so
    the sum of minima becomes a dot product and the whole matrix a few
    dense products. Every partial sum is an integer below 2**24, so the
    float32 products are exact. Returns None when ``X`` is not integral or
    the expansion would be too wide.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0 or X.min() < 0 or not np.array_equal(X, np.round(X)):
        return None
    Xi = X.astype(np.int32)
    cap = Xi.max(axis=0)
    width = int(cap.sum())
    if width > _MAX_UNARY_WIDTH or int(Xi.sum(axis=1).max()) >= 2 ** 24:
        return None
    columns = np.repeat(np.arange(Xi.shape[1]), cap)
    # Level t of column k is set when X[i, k] >= t, for t = 1..cap[k].
    starts = np.repeat(np.cumsum(cap) - cap, cap)
    levels = np.arange(width) - starts + 1
    gram = np.zeros((len(Xi), len(Xi)), dtype=np.float64)
    for a in range(0, width, chunk):
        U = (Xi[:, columns[a:a + chunk]] >= levels[a:a + chunk]).astype(np.float32)
        gram += U @ U.T
    return gram


def diff_scores(data: LabeledFeatureSet, cls) -> np.ndarray:
    """Diff_s of every member of ``cls`` against the rest of the set."""
    X, y = data.features, data.labels
    members = np.flatnonzero(y == cls)
    others = np.flatnonzero(y != cls)
    if len(members) < 2:
        raise InsufficientData(f"class {cls!r} needs at least 2 members")
    if len(others) == 0:
        raise EmptySet("no samples outside the class")
    mass = X.sum(axis=1)
    if np.any(mass[members] <= 0):
        raise EmptyReference("a reference histogram has no mass")
    gram = data.gram()
    out = np.empty(len(members))
    for n, i in enumerate(members):
        sims = hik_to_all(X[i], X) if gram is None else gram[i] / mass[i]
        sims_same = np.delete(sims[members], n)
        out[n] = sims_same.max() - sims[others].max()
    return out


def diff_negative_fraction(data: LabeledFeatureSet, cls) -> float:
    """Percentage of ``cls`` members whose Diff_s is negative."""
    d = diff_scores(data, cls)
    return 100.0 * float(np.mean(d < 0))


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    positive_scores: np.ndarray
    negative_scores: np.ndarray


def roc(positive_scores, negative_scores) -> RocCurve:
    """Sweep ``score >= threshold`` over every distinct score, highest first.

    The curve starts at (0, 0) with an infinite threshold.
    """
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    neg = np.asarray(negative_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise EmptyScores("both score lists must be non-empty")
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    pos_sorted = np.sort(pos)
    neg_sorted = np.sort(neg)
    tp = pos.size - np.searchsorted(pos_sorted, thresholds, side="left")
    fp = neg.size - np.searchsorted(neg_sorted, thresholds, side="left")
    return RocCurve(
        fpr=np.concatenate([[0.0], fp / neg.size]),
        tpr=np.concatenate([[0.0], tp / pos.size]),
        thresholds=np.concatenate([[np.inf], thresholds]),
        positive_scores=pos,
        negative_scores=neg,
    )


def detection_rate_at_fpr(curve: RocCurve, fpr: float) -> float:
    """Best detection rate among curve points whose FPR does not exceed ``fpr``."""
    ok = curve.fpr <= fpr
    return float(curve.tpr[ok].max())


def roc_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "fpr", "detection_rate"])
    for t, f, r in zip(curve.thresholds, curve.fpr, curve.tpr):
        w.writerow([repr(float(t)), repr(float(f)), repr(float(r))])
    return buf.getvalue()


def diff_csv(rows) -> str:
    """CSV of ``(descriptor, class, index, diff)`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["descriptor", "class", "index", "diff"])
    for desc, cls, idx, d in rows:
        w.writerow([desc, cls, idx, repr(float(d))])
    return buf.getvalue()


def roc_summary(curves: dict[str, RocCurve], fprs=(1e-2, 1e-1)) -> str:
    doc = {tag: {f"{f:g}": detection_rate_at_fpr(c, f) for f in fprs}
           for tag, c in curves.items()}
    return json.dumps(doc, sort_keys=True, indent=1)
