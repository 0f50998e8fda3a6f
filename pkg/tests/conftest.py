import time

import numpy as np
import pytest

from tcensus import synthetic
from tcensus.dataset import RunConfig, positive_windows
from tcensus.training import bootstrap_train

# Acceptance outcomes, filled by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, passed: bool | None, detail: str = "") -> None:
    """Store one summary line; ``passed=None`` marks a criterion that was not run."""
    status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    ACCEPTANCE[criterion] = f"{status} {criterion}" + (f" ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synthetic_run():
    """One trained T-CENTRIST model on the default synthetic set, shared across modules."""
    t0 = time.perf_counter()
    data = synthetic.make_dataset(seed=0, n_pos=300, n_neg_images=60,
                                  n_test_pos=100, n_test_neg_images=20)
    cfg = RunConfig(n_negatives=2000, hard_negative_cap=1000)
    positives = positive_windows(data["positives"], cfg.window, cfg.mirror)
    model = bootstrap_train(positives, data["negatives"], cfg.layout(), cfg)
    return {"data": data, "config": cfg, "model": model,
            "train_seconds": time.perf_counter() - t0}
