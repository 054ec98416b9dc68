"""Closed-form quantities: thresholds, giant fractions, Chernoff tails and
the constant system behind the bounded-degree argument."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .combinat import binom
from .errors import InvalidInputError, NumericError


def _check_kj(k: int, j: int, n: int | None = None) -> None:
    if not 1 <= j < k:
        raise InvalidInputError(f"need 1 <= j < k, got k={k}, j={j}")
    if n is not None and n < k:
        raise InvalidInputError(f"need k <= n, got k={k}, n={n}")


def threshold_ratio(k: int, j: int) -> tuple[int, int]:
    """The exact pair ``((k-j)!, binom(k,j)-1)``; threshold = first/second * n^(j-k)."""
    _check_kj(k, j)
    return math.factorial(k - j), binom(k, j) - 1


def threshold_p(n: int, k: int, j: int) -> float:
    """Critical edge probability for a giant j-tuple component in H^k(n, p)."""
    _check_kj(k, j, n)
    num, den = threshold_ratio(k, j)
    return num / den * float(n) ** (j - k)


@dataclass(frozen=True)
class ModelParams:
    """Resolved parameter cell. Give exactly one of ``eps`` and ``p``.

    ``eps`` is signed: ``p = (1 + eps) * threshold_p(n, k, j)``.
    """
    n: int
    k: int
    j: int
    eps: float | None = None
    p: float | None = None

    def __post_init__(self):
        _check_kj(self.k, self.j, self.n)
        if (self.eps is None) == (self.p is None):
            raise InvalidInputError("give exactly one of eps and p")
        if self.eps is None:
            if not 0.0 <= self.p <= 1.0:
                raise InvalidInputError(f"p={self.p} outside [0, 1]")
            object.__setattr__(self, "eps", self.p / threshold_p(self.n, self.k, self.j) - 1.0)
        else:
            p = (1.0 + self.eps) * threshold_p(self.n, self.k, self.j)
            if not 0.0 <= p <= 1.0:
                raise InvalidInputError(f"eps={self.eps} gives p={p} outside [0, 1]")
            object.__setattr__(self, "p", p)


def critical_window_p(n: int, lam: float) -> tuple[float, bool]:
    """Graph-case window ``1/n + lam/n^(4/3)``, clamped to [0, 1].

    Returns ``(p, clamped)``.
    """
    if n < 2:
        raise InvalidInputError("need n >= 2")
    p = 1.0 / n + lam / n ** (4.0 / 3.0)
    if p < 0.0:
        return 0.0, True
    if p > 1.0:
        return 1.0, True
    return p, False


def giant_residual(rho: float, c: float, k: int) -> float:
    return 1.0 - rho - math.exp(c * ((1.0 - rho) ** (k - 1) - 1.0))


def giant_fraction(c: float, k: int, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Vertex fraction of the giant of H^k(n, c/binom(n-1, k-1)).

    0 at or below the critical point ``c = 1/(k-1)``; otherwise the positive
    root of ``1 - rho = exp(c((1-rho)^(k-1) - 1))``, located by bisection.
    """
    if c <= 0 or k < 2:
        raise InvalidInputError(f"need c > 0 and k >= 2, got c={c}, k={k}")
    if c * (k - 1) <= 1.0:
        return 0.0
    # The residual is positive on (0, rho*) and negative on (rho*, 1].
    lo = 0.5
    while giant_residual(lo, c, k) <= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    hi = 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if giant_residual(mid, c, k) > 0.0:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"bisection did not converge for c={c}, k={k}")


def chernoff_upper(t: float, p: float, a: float) -> float:
    """Bound on ``Pr[X >= tp + a]`` for X ~ Bin(t, p)."""
    _check_chernoff(t, p, a)
    if a == 0:
        return 1.0
    return math.exp(-a * a / (2.0 * (t * p + a / 3.0)))


def chernoff_lower(t: float, p: float, a: float) -> float:
    """Bound on ``Pr[X <= tp - a]`` for X ~ Bin(t, p)."""
    _check_chernoff(t, p, a)
    if a == 0:
        return 1.0
    if t * p == 0:
        return 0.0
    return math.exp(-a * a / (2.0 * t * p))


def _check_chernoff(t, p, a):
    if t < 1 or not 0.0 <= p <= 1.0 or a < 0:
        raise InvalidInputError(f"need t >= 1, 0 <= p <= 1, a >= 0; got {t}, {p}, {a}")


@dataclass
class BDLConstants:
    """Constant system of the bounded-degree argument.

    Lists ``c_hat``, ``c_star`` and ``c_main`` are indexed by ``ell = 0..j-1``;
    ``c_ell`` by ``ell = 1..j-1`` (so ``c_ell[0]`` is c_1). For ``j = 1`` there
    is no c_1 and ``c_dagger`` is None.
    """
    k: int
    j: int
    eps: float
    c_ell: list[Fraction] = field(default_factory=list)
    c_dagger: Fraction | None = None
    c_hat: list[Fraction] = field(default_factory=list)
    c_star: list[Fraction] = field(default_factory=list)
    c_main: list[Fraction] = field(default_factory=list)
    c_final: Fraction = Fraction(0)
    alpha_max: float = 0.0

    def as_dict(self) -> dict:
        def f(x):
            return None if x is None else float(x)
        return {
            "k": self.k, "j": self.j, "eps": self.eps,
            "c_ell": [f(x) for x in self.c_ell],
            "c_dagger": f(self.c_dagger),
            "c_hat": [f(x) for x in self.c_hat],
            "c_star": [f(x) for x in self.c_star],
            "c_main": [f(x) for x in self.c_main],
            "c_final": f(self.c_final),
            "alpha_max": self.alpha_max,
        }


def bdl_constants(k: int, j: int, eps: float) -> BDLConstants:
    _check_kj(k, j)
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f"need 0 < eps < 1, got {eps}")
    big = binom(k, j) - 1
    kf = math.factorial(k)
    c_ell = [Fraction(1, 2) + Fraction(binom(k - ell, j - ell) - 1, 2 * big)
             for ell in range(1, j)]
    c_dagger = Fraction(256) / (1 - c_ell[0]) ** 4 if c_ell else None

    c_hat = [Fraction(2)]
    c_star = [Fraction(2)]
    c_main: list[Fraction] = []
    prev = Fraction(0)
    for ell in range(j):
        starts = Fraction(8 * math.factorial(j) * math.factorial(k - j),
                          math.factorial(j - ell))
        cur = max(c_hat[ell] + c_star[ell] + starts, prev)
        c_main.append(cur)
        prev = cur
        if ell + 1 < j:
            nxt = max(Fraction(2 ** (ell + 2) * math.factorial(k - j), big) * cur,
                      Fraction(8))
            c_hat.append(nxt)
            c_star.append(2 * kf * nxt * c_dagger)
    c_final = max(c_main)
    alpha_max = eps / (32 * kf * 2 ** j * float(c_final))
    return BDLConstants(k, j, eps, c_ell, c_dagger, c_hat, c_star, c_main,
                        c_final, alpha_max)
