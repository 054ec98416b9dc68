"""Branching processes with clustered binomial offspring.

An individual makes ``m`` independent trials with success probability ``q``;
each success contributes a cluster of ``r`` children. Simulation runs
generation by generation: ``g`` individuals together produce
``r * Bin(g*m, q)`` children, which is exact. Binomial draws come from
numpy (inversion for small means, BTPE acceptance otherwise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinat import binom
from .errors import InvalidInputError
from .model import threshold_p

DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class OffspringLaw:
    r: int
    m: int
    q: float

    def __post_init__(self):
        if self.r < 0 or self.m < 0 or not 0.0 <= self.q <= 1.0:
            raise InvalidInputError(f"bad offspring law {self}")

    @property
    def mean(self) -> float:
        return self.r * self.m * self.q

    @property
    def subcritical(self) -> bool:
        return self.mean < 1.0

    @classmethod
    def for_threshold(cls, n: int, k: int, j: int, ratio: float) -> "OffspringLaw":
        """Law of the j-set exploration at ``p = ratio * threshold_p(n,k,j)``."""
        return cls(binom(k, j) - 1, binom(n - j, k - j), ratio * threshold_p(n, k, j))


@dataclass
class BranchingOutcome:
    tau: int
    capped: bool
    generations: int


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def simulate_totals(law: OffspringLaw, cap: int, runs: int, seed) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised: total sizes, capped flags and generation counts of ``runs`` trees."""
    if cap < 1:
        raise InvalidInputError("cap must be at least 1")
    rng = _rng(seed)
    total = np.ones(runs, dtype=np.int64)
    current = np.ones(runs, dtype=np.int64)
    gens = np.zeros(runs, dtype=np.int64)
    alive = total < cap
    alive &= current > 0
    while alive.any():
        idx = np.flatnonzero(alive)
        succ = rng.binomial(current[idx] * law.m, law.q)
        kids = succ * law.r
        gens[idx[kids > 0]] += 1
        current[idx] = kids
        total[idx] += kids
        alive[idx] = (kids > 0) & (total[idx] < cap)
    capped = total >= cap
    total = np.minimum(total, cap)
    return total, capped, gens


def simulate_total(law: OffspringLaw, cap: int = DEFAULT_CAP, seed=None) -> BranchingOutcome:
    tau, capped, gens = simulate_totals(law, cap, 1, seed)
    return BranchingOutcome(int(tau[0]), bool(capped[0]), int(gens[0]))


def _radius(frac: float, runs: int, z: float) -> float:
    # floored so an all-0 or all-1 sample still gets a non-zero radius
    return z * math.sqrt(max(frac * (1.0 - frac), 0.25 / runs) / runs)


def survival_estimate(law: OffspringLaw, cap: int, runs: int, seed=None,
                      z: float = 3.0) -> tuple[float, float]:
    """Fraction of ``runs`` trees reaching ``cap`` and a ``z``-sigma radius."""
    if runs < 1:
        raise InvalidInputError("runs must be at least 1")
    if law.mean == 0:
        return 0.0, 0.0
    _, capped, _ = simulate_totals(law, cap, runs, seed)
    frac = float(capped.mean())
    return frac, _radius(frac, runs, z)


def pgf_survival(law: OffspringLaw, tol: float = 1e-12, max_iter: int = 10**6) -> float:
    """1 - (smallest fixed point of s -> ((1-q) + q s^r)^m), iterating from 0."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    if law.mean <= 1.0:
        return 0.0
    if law.q >= 1.0:
        return 1.0
    r, m, q = law.r, law.m, law.q
    s = 0.0
    for _ in range(max_iter):
        nxt = math.exp(m * math.log1p(q * (s ** r - 1.0)))
        if abs(nxt - s) < tol:
            s = nxt
            break
        s = nxt
    return 1.0 - s


@dataclass
class DominationResult:
    lhs: float
    lhs_radius: float
    rhs: float
    rhs_radius: float
    holds: bool


def domination_check(r: int, m: int, q: float, s: int, runs: int, seed=None,
                     z: float = 3.0) -> DominationResult:
    """Estimate Pr(tau[r*Bin(m,q)] <= r*s) and Pr(tau[Bin(rm,q)] <= s).

    The first should dominate the second whenever ``q <= 1/r``.
    """
    if r < 1 or q * r > 1.0:
        raise InvalidInputError(f"need r >= 1 and q <= 1/r, got r={r}, q={q}")
    ss = np.random.SeedSequence(seed).spawn(2)
    lhs_tau, _, _ = simulate_totals(OffspringLaw(r, m, q), r * s + 1, runs, ss[0])
    rhs_tau, _, _ = simulate_totals(OffspringLaw(1, r * m, q), s + 1, runs, ss[1])
    lhs = float((lhs_tau <= r * s).mean())
    rhs = float((rhs_tau <= s).mean())
    lr, rr = _radius(lhs, runs, z), _radius(rhs, runs, z)
    return DominationResult(lhs, lr, rhs, rr, lhs + lr >= rhs - rr)
