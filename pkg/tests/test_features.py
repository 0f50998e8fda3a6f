import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcensus import census, oracles
from tcensus.features import (BASE, EXTEND_DOWN, EXTEND_LEFT, EXTEND_RIGHT, EXTEND_UP,
                              VARIANTS, BlockLayout, BlockStructure, Rect, block_histogram,
                              extension_block, extract, extract_centrist, extract_tcentrist,
                              grid_layout, grid_rects, select_local_optimal_blocks,
                              stratified_split)
from tcensus.errors import InsufficientData, OutOfBounds


def base_layout(rects, window, scheme="tcentrist"):
    return BlockLayout(window, tuple(BlockStructure(BASE, (r,)) for r in rects), scheme)


def test_rect_interior():
    r = Rect(2, 3, 12, 12)
    assert r.interior() == (3, 4, 10, 10)
    assert r.interior_area == 100
    with pytest.raises(ValueError):
        Rect(0, 0, 2, 5)


def test_extension_geometry():
    base = Rect(12, 12, 12, 12)
    assert extension_block(base, BASE).rects == (base,)
    assert extension_block(base, EXTEND_UP).rects == (Rect(6, 12, 6, 12), base)
    assert extension_block(base, EXTEND_DOWN).rects == (base, Rect(24, 12, 6, 12))
    assert extension_block(base, EXTEND_LEFT).rects == (Rect(12, 6, 12, 6), base)
    assert extension_block(base, EXTEND_RIGHT).rects == (base, Rect(12, 24, 12, 6))
    for v in VARIANTS[1:]:
        assert extension_block(base, v).interior_area == 100 + 40


def test_overlapping_rects_rejected():
    with pytest.raises(ValueError):
        BlockStructure(BASE, (Rect(0, 0, 6, 6), Rect(3, 3, 6, 6)))


def test_constant_block_histogram():
    img = np.full((16, 16), 9, dtype=np.uint8)
    h1, h2 = block_histogram(census.utct_images(img), BlockStructure(BASE, (Rect(2, 2, 8, 8),)))
    assert h1[0] == h2[0] == 36 and h1.sum() == h2.sum() == 36


def test_degenerate_3x3_rect_counts_one_pixel():
    img = np.full((5, 5), 1, dtype=np.uint8)
    h1, h2 = block_histogram(census.utct_images(img), BlockStructure(BASE, (Rect(0, 0, 3, 3),)))
    assert h1[0] == 1 and h1.sum() == 1 and h2.sum() == 1


def test_extend_down_matches_oracle(rng):
    img = rng.integers(0, 256, size=(24, 24), dtype=np.uint8)
    pair = census.utct_images(img)
    structure = extension_block(Rect(4, 6, 12, 12), EXTEND_DOWN)
    h1, h2 = block_histogram(pair, structure)
    i1, i2 = oracles.utct_images(img)
    rects = [r.to_list() for r in structure.rects]
    assert h1.tolist() == oracles.block_counts(i1, rects, (0, 0), 59)
    assert h2.tolist() == oracles.block_counts(i2, rects, (0, 0), 59)


def test_two_block_constant_vector():
    layout = base_layout([Rect(0, 0, 12, 12), Rect(12, 0, 12, 12)], (24, 12))
    x = extract(np.full((24, 12), 200, dtype=np.uint8), layout)
    assert x.shape == (236,)
    assert np.flatnonzero(x).tolist() == [0, 59, 118, 177]
    assert set(x[x > 0]) == {100.0}


def test_default_dimensions():
    layout = grid_layout()
    assert len(layout.blocks) == 55
    assert layout.dim == 6490
    assert layout.with_scheme("centrist").dim == 14080
    assert not layout.is_gridded()
    assert grid_layout(stride=(12, 12)).is_gridded()


def test_centrist_constant_block():
    layout = base_layout([Rect(0, 0, 12, 12)], (12, 12), "centrist")
    x = extract(np.zeros((12, 12), dtype=np.uint8), layout)
    assert x.shape == (256,) and x[0] == 100 and x.sum() == 100


def test_vectors_match_oracle(rng):
    img = rng.integers(0, 256, size=(30, 20), dtype=np.uint8)
    layout = BlockLayout((24, 18), (
        extension_block(Rect(0, 0, 12, 12), EXTEND_DOWN),
        extension_block(Rect(6, 0, 12, 12), EXTEND_RIGHT),
        extension_block(Rect(12, 0, 12, 12), EXTEND_UP),
    ))
    blocks = [[r.to_list() for r in b.rects] for b in layout.blocks]
    origin = (3, 1)
    i1, i2 = oracles.utct_images(img)
    got = extract_tcentrist(census.utct_images(img), layout, origin)
    assert got.tolist() == oracles.tcentrist_vector(i1, i2, blocks, origin)
    ct = oracles.ct_image(img)
    got = extract_centrist(census.ct_image(img), layout, origin)
    assert got.tolist() == oracles.centrist_vector(ct, blocks, origin)


def test_window_out_of_bounds():
    with pytest.raises(OutOfBounds):
        extract(np.zeros((70, 36), dtype=np.uint8), grid_layout())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_mass_conservation(seed, normalize):
    img = np.random.default_rng(seed).integers(0, 256, size=(36, 24), dtype=np.uint8)
    layout = grid_layout((36, 24), (12, 12), (6, 6))
    x = extract(img, layout, normalize=normalize).reshape(len(layout.blocks), 2, 59)
    expected = 1.0 if normalize else 100.0
    np.testing.assert_allclose(x.sum(axis=2), expected)


def test_layout_round_trip():
    layout = BlockLayout((24, 18), (extension_block(Rect(6, 0, 12, 12), EXTEND_UP),
                                    extension_block(Rect(6, 6, 12, 12), EXTEND_LEFT)),
                         "centrist")
    again = BlockLayout.from_dict(layout.to_dict())
    assert again == layout
    assert again.to_json() == layout.to_json()
    assert again.digest() == layout.digest()


def test_stratified_split_is_deterministic_and_stratified():
    labels = [1] * 10 + [-1] * 20
    a = stratified_split(labels, 0.2, seed=3)
    b = stratified_split(labels, 0.2, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    test = np.asarray(labels)[a[1]]
    assert (test == 1).sum() == 2 and (test == -1).sum() == 4
    assert not set(a[0]) & set(a[1])


# --- block selection on constructed data ---------------------------------------------

BASE_RECT = Rect(6, 6, 12, 12)
WINDOW = (24, 24)


def _selection_set(rng, texture_rows, n=40, base_noise=False):
    windows, labels = [], []
    for i in range(2 * n):
        w = np.full(WINDOW, 128, dtype=np.uint8)
        if base_noise:
            w[6:18, 6:18] = rng.integers(0, 256, size=(12, 12))
        if i < n:
            r0, r1 = texture_rows
            w[r0:r1, 6:18] = rng.integers(0, 256, size=(r1 - r0, 12))
        windows.append(w)
        labels.append(1 if i < n else -1)
    return windows, labels


def test_selection_prefers_base_on_tie(rng):
    windows, labels = _selection_set(rng, (6, 18))
    report = []
    layout = select_local_optimal_blocks(windows, labels, [BASE_RECT], WINDOW, report=report)
    assert layout.blocks[0].variant == BASE
    acc = report[0]["accuracy"]
    assert len(acc) == 5 and len(set(acc.values())) == 1


def test_selection_finds_signal_above_block(rng):
    windows, labels = _selection_set(rng, (0, 6), base_noise=True)
    report = []
    layout = select_local_optimal_blocks(windows, labels, [BASE_RECT], WINDOW, report=report)
    acc = report[0]["accuracy"]
    assert layout.blocks[0].variant == EXTEND_UP
    assert acc[EXTEND_UP] == 1.0 and acc[BASE] < 1.0


def test_single_candidate(rng):
    windows, labels = _selection_set(rng, (0, 6), n=6, base_noise=True)
    grid = [r for r in grid_rects(WINDOW, (12, 12), (6, 6)) if r.bottom + 6 <= WINDOW[0]]
    layout = select_local_optimal_blocks(windows, labels, grid, WINDOW,
                                         candidates=[EXTEND_DOWN], scheme="centrist")
    assert all(b.variant == EXTEND_DOWN for b in layout.blocks)


def test_selection_needs_two_classes(rng):
    windows = [np.zeros(WINDOW, dtype=np.uint8)] * 4
    with pytest.raises(InsufficientData):
        select_local_optimal_blocks(windows, [1, 1, 1, 1], [BASE_RECT], WINDOW)
