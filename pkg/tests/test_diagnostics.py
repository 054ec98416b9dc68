import math

import numpy as np
import pytest

from hyperphase.diagnostics import concentration_scan, window_scan
from hyperphase.errors import InvalidInputError
from hyperphase.exploration import ExplorationConfig, run_exploration


def test_window_all_zero():
    assert window_scan([0] * 50, 10, 2) == []


def test_window_all_one():
    assert window_scan([1] * 30, 10, 2) == list(range(21))


def test_window_threshold_case():
    # t=10, c=3: need sum >= ceil(10/3 - 1) = 3
    need = math.ceil(10 / 3 - 1)
    at = [1] * need + [0] * (10 - need)
    assert window_scan(at, 10, 3) == [0]
    below = [1] * (need - 1) + [0] * (11 - need)
    assert window_scan(below, 10, 3) == []


def test_window_against_brute_force():
    rng = np.random.default_rng(0)
    x = (rng.random(200) < 0.3).astype(int)
    for t, c in [(5, 2.0), (17, 3.5), (40, 4.0)]:
        brute = [s for s in range(len(x) - t + 1) if x[s:s + t].sum() >= t / c - 1]
        assert window_scan(x, t, c) == brute


def test_window_too_long():
    with pytest.raises(InvalidInputError):
        window_scan([0, 1], 3, 2)


def test_concentration_examples():
    r = concentration_scan([], 0.1, 0.5, 10, 1)
    assert r.max_deviation == 0 and r.holds
    r = concentration_scan([0] * 40, 0.25, 0.5, 10, 1)
    assert r.max_deviation == pytest.approx(10.0) and r.argmax_t == 40
    assert r.limit == pytest.approx(2.5) and r.first_violation == 11


def test_concentration_synthetic():
    x = [1, 1, 0, 0, 0, 1, 0, 0]
    p = 0.3
    dev = [abs(sum(x[:t]) - p * t) for t in range(1, len(x) + 1)]
    r = concentration_scan(x, p, 1.0, 1, 1)
    assert r.max_deviation == pytest.approx(max(dev))
    assert r.argmax_t == int(np.argmax(dev)) + 1


def test_scans_accept_exact_traces_only():
    res = run_exploration(ExplorationConfig("DFS2", n=8, k=3, j=1, p=0.1, seed=3))
    assert isinstance(window_scan(res.trace, 1, 2), list)
    skip = run_exploration(ExplorationConfig("DFS2", "skip", n=8, k=3, j=1, p=0.1, seed=3))
    with pytest.raises(InvalidInputError):
        window_scan(skip.trace, 1, 2)
