"""Exact binomials and colexicographic ranking of vertex subsets.

Vertices are ``0..n-1``. The colex rank of ``a_1 < ... < a_r`` is
``sum(binom(a_i, i))`` so ranks do not depend on ``n``; this is the one
canonical ordering of edges and j-sets used everywhere in the package.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from itertools import combinations
from typing import Iterator, Sequence

from .errors import CapacityError, InvalidInputError

#: Largest value any rank or binomial may take (signed 64-bit range).
MAX_EXACT = 2**63 - 1


def binom(a: int, b: int) -> int:
    """Exact ``binom(a, b)``; 0 when ``b > a``.

    Raises CapacityError if the value does not fit in a signed 64-bit word.
    """
    if a < 0 or b < 0:
        raise InvalidInputError(f"binom needs a >= 0 and b >= 0, got ({a}, {b})")
    value = math.comb(a, b)
    if value > MAX_EXACT:
        raise CapacityError(f"binom({a}, {b}) exceeds the 64-bit exact range")
    return value


class BinomialTable:
    """Pascal-triangle cache of ``binom(a, b)`` for ``a <= n_max``, ``b <= k_max``.

    ``row(b)`` is the list ``[binom(0, b), ..., binom(n_max, b)]``; it is
    non-decreasing, which lets :meth:`unrank` use bisection.
    """

    def __init__(self, n_max: int, k_max: int):
        if n_max < 0 or k_max < 0:
            raise InvalidInputError("table bounds must be non-negative")
        self.n_max = n_max
        self.k_max = k_max
        rows = [[1] * (n_max + 1)]
        for b in range(1, k_max + 1):
            prev = rows[-1]
            row = [0] * (n_max + 1)
            for a in range(1, n_max + 1):
                v = row[a - 1] + prev[a - 1]
                if v > MAX_EXACT:
                    raise CapacityError(
                        f"binom({a}, {b}) exceeds the 64-bit exact range; "
                        f"table ({n_max}, {k_max}) cannot be built")
                row[a] = v
            rows.append(row)
        self._rows = rows

    def __call__(self, a: int, b: int) -> int:
        if b > self.k_max or a > self.n_max:
            return binom(a, b)
        if a < 0 or b < 0:
            raise InvalidInputError(f"binom needs a >= 0 and b >= 0, got ({a}, {b})")
        return self._rows[b][a]

    def row(self, b: int) -> list[int]:
        return self._rows[b]

    def rank(self, subset: Sequence[int]) -> int:
        rows = self._rows
        return sum(rows[i][a] for i, a in enumerate(subset, 1))

    def unrank(self, rank: int, r: int) -> tuple[int, ...]:
        out = [0] * r
        for i in range(r, 0, -1):
            a = bisect_right(self._rows[i], rank) - 1
            out[i - 1] = a
            rank -= self._rows[i][a]
        return tuple(out)


_TABLES: dict[tuple[int, int], BinomialTable] = {}


def table_for(n: int, k: int) -> BinomialTable:
    """Shared table covering vertex count ``n`` and subset size ``k``."""
    key = (n, k)
    tab = _TABLES.get(key)
    if tab is None:
        if len(_TABLES) > 64:
            _TABLES.clear()
        tab = _TABLES[key] = BinomialTable(n, k)
    return tab


def _check_subset(subset: Sequence[int], n: int | None) -> None:
    prev = -1
    for a in subset:
        if not isinstance(a, (int,)) and not hasattr(a, "__index__"):
            raise InvalidInputError(f"non-integer vertex {a!r}")
        if a <= prev:
            raise InvalidInputError(
                f"subset must be strictly increasing, got {list(subset)}")
        prev = a
    if subset and subset[0] < 0:
        raise InvalidInputError("vertices must be non-negative")
    if n is not None and subset and subset[-1] >= n:
        raise InvalidInputError(f"vertex {subset[-1]} out of range for n={n}")


def rank_colex(subset: Sequence[int], n: int | None = None) -> int:
    """Colex rank of a strictly increasing vertex list."""
    _check_subset(subset, n)
    rank = sum(math.comb(a, i) for i, a in enumerate(subset, 1))
    if rank > MAX_EXACT:
        raise CapacityError("rank exceeds the 64-bit exact range")
    return rank


def unrank_colex(rank: int, r: int, n: int | None = None) -> tuple[int, ...]:
    """Inverse of :func:`rank_colex`."""
    if rank < 0 or r < 0:
        raise InvalidInputError("rank and r must be non-negative")
    if n is not None and rank >= binom(n, r):
        raise InvalidInputError(f"rank {rank} out of range for binom({n}, {r})")
    if r == 0:
        if rank:
            raise InvalidInputError("the only 0-subset has rank 0")
        return ()
    out = [0] * r
    for i in range(r, 0, -1):
        # largest a with comb(a, i) <= rank
        lo = i - 1
        hi = max(i, int((rank * math.factorial(i)) ** (1.0 / i)) + i + 1)
        while math.comb(hi, i) <= rank:
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if math.comb(mid, i) <= rank:
                lo = mid
            else:
                hi = mid
        out[i - 1] = lo
        rank -= math.comb(lo, i)
    return tuple(out)


def colex_combinations(N: int, r: int,
                       start: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield the r-subsets of ``range(N)`` in colex order, from ``start`` on."""
    if r == 0:
        if start is None:
            yield ()
        return
    if r > N:
        return
    c = list(start) if start is not None else list(range(r))
    last = r - 1
    while c[last] < N:
        yield tuple(c)
        i = 0
        while i < last and c[i] + 1 == c[i + 1]:
            c[i] = i
            i += 1
        c[i] += 1


def subsets_of(vertices: Sequence[int], size: int) -> list[tuple[int, ...]]:
    """All ``size``-subsets of a sorted vertex tuple, sorted by colex rank."""
    subs = list(combinations(vertices, size))
    subs.sort(key=lambda s: s[::-1])
    return subs


class SupersetStream:
    """The k-sets containing a j-set ``J``, in colex order.

    Position ``g`` holds ``J`` united with the g-th (k-j)-subset (colex) of the
    remaining ``n - j`` vertices; since ``J`` is common to all members this is
    also the colex order of the k-sets themselves. :meth:`advance` jumps ahead
    by unranking instead of iterating.
    """

    def __init__(self, J: Sequence[int], n: int, k: int,
                 table: BinomialTable | None = None):
        j = len(J)
        if not 0 <= j < k <= n:
            raise InvalidInputError(f"need |J| < k <= n, got j={j}, k={k}, n={n}")
        _check_subset(J, n)
        self.J = tuple(J)
        self.n = n
        self.k = k
        self.r = k - j
        self.table = table if table is not None else table_for(n, k)
        self.length = self.table(n - j, self.r)
        self.position = 0
        self._others = [v for v in range(n) if v not in set(self.J)]
        self._it = colex_combinations(n - j, self.r)

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return self

    def _compose(self, comp: Sequence[int]) -> tuple[int, ...]:
        others = self._others
        return tuple(sorted(self.J + tuple(others[c] for c in comp)))

    def __next__(self) -> tuple[int, ...]:
        comp = next(self._it)
        self.position += 1
        return self._compose(comp)

    def at(self, g: int) -> tuple[int, ...]:
        """The k-set at position ``g`` (0-based), without moving the cursor."""
        if not 0 <= g < self.length:
            raise InvalidInputError(f"position {g} outside stream of length {self.length}")
        return self._compose(self.table.unrank(g, self.r))

    def advance(self, g: int) -> None:
        """Skip ``g`` positions; the next element is the one ``g`` nexts later."""
        if g < 0:
            raise InvalidInputError("cannot move the cursor backwards")
        self.position = min(self.position + g, self.length)
        if self.position < self.length:
            start = self.table.unrank(self.position, self.r)
            self._it = colex_combinations(self.n - len(self.J), self.r, start)
        else:
            self._it = iter(())


def supersets(J: Sequence[int], n: int, k: int) -> SupersetStream:
    return SupersetStream(J, n, k)
