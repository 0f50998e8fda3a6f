import numpy as np
import pytest

from tcensus import synthetic
from tcensus.classifier import train_linear_svm
from tcensus.dataset import RunConfig, sample_negatives
from tcensus.errors import NoNegatives
from tcensus.features import grid_layout
from tcensus.training import bootstrap_train, features_of

LAYOUT = grid_layout((24, 12), (6, 6), (6, 6))


def small_config(**kw):
    base = dict(window_height=24, window_width=12, block_size=6, block_stride=6,
                n_negatives=100, hard_negative_cap=200, scan_stride=2)
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture(scope="module")
def small_data():
    rng = np.random.default_rng(0)
    pos = [synthetic.positive_window(rng, 24, 12) for _ in range(150)]
    images = []
    for i in range(20):
        img = synthetic.noise_field(rng, (48, 48))
        if i % 2:
            # Confusers: squat figures, too wide for the window's aspect ratio.
            for top, left in ((2, 2), (22, 26)):
                synthetic.plant(img, top, left, 24, 18, rng)
        images.append(np.clip(np.round(img), 0, 255).astype(np.uint8))
    return pos, images


def test_cap_zero_is_single_round(small_data):
    pos, images = small_data
    cfg = small_config(hard_negative_cap=0)
    model = bootstrap_train(pos, images, LAYOUT, cfg)
    negs = sample_negatives(images, cfg.n_negatives, LAYOUT.window, cfg.seed)
    X = np.vstack([features_of(pos, LAYOUT), features_of(negs, LAYOUT)])
    y = [1] * len(pos) + [-1] * len(negs)
    single = train_linear_svm(X, y, cfg.svm_c, cfg.seed, LAYOUT)
    assert model.weights.tobytes() == single.weights.tobytes()
    assert model.meta["n_mined"] == 0


def test_no_false_positives_keeps_round_one(small_data):
    pos, images = small_data
    report = {}
    model = bootstrap_train(pos, images, LAYOUT, small_config(mining_threshold=1e9), report)
    assert report["mined"] == []
    np.testing.assert_allclose(model.weights, report["round1"].weights, rtol=1e-9)


def test_mining_prefers_confusers(small_data):
    pos, images = small_data
    report = {}
    model = bootstrap_train(pos, images, LAYOUT, small_config(), report)
    mined = report["mined"]
    assert mined, "round one should produce false positives on confuser images"
    share = np.mean([m[1] % 2 == 1 for m in mined])
    assert share > 0.5
    scores = [m[0] for m in mined]
    assert scores == sorted(scores, reverse=True)
    assert model.meta["rounds"] == 2 and model.meta["n_mined"] == len(mined) <= 200


def test_training_is_reproducible(small_data):
    pos, images = small_data
    a = bootstrap_train(pos, images, LAYOUT, small_config())
    b = bootstrap_train(pos, images, LAYOUT, small_config())
    assert a.to_json() == b.to_json()


def test_no_negatives(small_data):
    pos, images = small_data
    with pytest.raises(NoNegatives):
        bootstrap_train(pos, images, LAYOUT, small_config(n_negatives=0))
