"""Quick built-in consistency checks behind ``tcensus selftest``."""

import numpy as np

from . import census, oracles
from .classifier import LinearModel, naive_score_map, score_map
from .evaluation import detection_rate_at_fpr, hik, roc
from .features import BlockLayout, extension_block, grid_layout, grid_rects


def _codes(rng, n: int = 50) -> bool:
    for _ in range(n):
        img = rng.integers(0, 256, size=rng.integers(3, 20, size=2), dtype=np.uint8)
        if not np.array_equal(census.ct_image(img), oracles.ct_image(img)):
            return False
        pair = census.utct_images(img)
        i1, i2 = oracles.utct_images(img)
        if not (np.array_equal(pair.i1, i1) and np.array_equal(pair.i2, i2)):
            return False
    return True


def _uniform_count() -> bool:
    return len(oracles.UNIFORM_CODES) == 58 == int((census.UNIFORM_LUT < 58).sum())


def _layouts():
    yield grid_layout((24, 12), (12, 12), (12, 12))
    yield grid_layout((24, 12), (12, 12), (6, 6))
    base = grid_rects((24, 18), (12, 12), (12, 6))
    yield BlockLayout((24, 18), tuple(extension_block(r, v) for r, v in
                                      zip(base, ("ExtendDown", "Base", "ExtendUp", "Base"))))


def _fast_score(rng) -> bool:
    for layout in _layouts():
        for scheme in ("tcentrist", "centrist"):
            lay = layout.with_scheme(scheme)
            model = LinearModel(rng.normal(size=lay.dim), float(rng.normal()), lay)
            img = rng.integers(0, 256, size=(32, 28), dtype=np.uint8)
            codes = census.utct_images(img) if scheme == "tcentrist" else census.ct_image(img)
            _, _, fast = score_map(model, codes)
            _, _, slow = naive_score_map(model, codes)
            if not np.allclose(fast, slow, rtol=1e-6, atol=1e-9):
                return False
    return True


def _identities() -> bool:
    a = np.array([1.0, 2.0, 3.0])
    curve = roc([0.9, 0.8, 0.7, 0.4, 0.2], [0.6, 0.5, 0.3, 0.1, 0.05])
    return (hik(a, a) == 1.0 and hik(a, a[::-1]) == 4.0 / 6.0
            and detection_rate_at_fpr(curve, 0.2) == 0.6)


def run(emit=print, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    checks = [("codes-vs-oracle", lambda: _codes(rng)),
              ("uniform-pattern-count", _uniform_count),
              ("fast-score-vs-naive", lambda: _fast_score(rng)),
              ("hik-and-roc-identities", _identities)]
    ok = True
    for name, fn in checks:
        passed = bool(fn())
        ok &= passed
        emit(f"{'PASS' if passed else 'FAIL'} {name}")
    return ok
