"""Scans over realised query traces and degree audits of exploration runs."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .exploration import ExplorationConfig, QueryTrace, run_exploration
from .hypergraph import DegreeProfile


def _bits(trace) -> np.ndarray:
    if isinstance(trace, QueryTrace):
        if trace.backend != "exact":
            raise InvalidInputError("trace scans need an exact-backend trace")
        return trace.bits()
    return np.asarray(trace, dtype=np.int64)


def window_scan(trace, t_window: int, c: float) -> list[int]:
    """Start offsets (0-based) of length-``t_window`` windows whose outcome sum
    reaches ``t_window / c - 1``. An empty list means no window does."""
    x = _bits(trace)
    if t_window < 1 or t_window > len(x):
        raise InvalidInputError(f"window {t_window} does not fit a trace of length {len(x)}")
    csum = np.concatenate(([0], np.cumsum(x)))
    sums = csum[t_window:] - csum[:-t_window]
    # integer sums: s >= t/c - 1  <=>  s >= ceil(t/c - 1)
    need = math.ceil(t_window / c - 1)
    return np.flatnonzero(sums >= need).tolist()


@dataclass
class ConcentrationReport:
    max_deviation: float
    argmax_t: int
    limit: float
    first_violation: int | None

    @property
    def holds(self) -> bool:
        return self.first_violation is None


def concentration_scan(trace, p: float, alpha: float, n: int, j: int) -> ConcentrationReport:
    """Largest |prefix sum - p t| over the trace, against the limit alpha^2 n^j."""
    x = _bits(trace)
    limit = alpha * alpha * float(n) ** j
    if len(x) == 0:
        return ConcentrationReport(0.0, 0, limit, None)
    t = np.arange(1, len(x) + 1)
    dev = np.abs(np.cumsum(x) - p * t)
    i = int(np.argmax(dev))
    over = np.flatnonzero(dev > limit)
    first = int(over[0]) + 1 if len(over) else None
    return ConcentrationReport(float(dev[i]), i + 1, limit, first)


def audit_degrees(config: ExplorationConfig,
                  checkpoints: Sequence[int]) -> list[tuple[int, DegreeProfile]]:
    """Degree profiles of the discovered j-sets at each checkpoint time."""
    cps = list(checkpoints)
    if cps != sorted(cps):
        raise InvalidInputError("checkpoints must be ascending")
    res = run_exploration(replace(config, checkpoints=tuple(cps), audit=True))
    return [(c.t, c.profile) for c in res.checkpoints]
