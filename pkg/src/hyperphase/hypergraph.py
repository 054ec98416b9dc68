"""Sampling H^k(n, p), the exact j-tuple component oracle and degree profiles."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .combinat import binom, subsets_of, table_for
from .errors import CapacityError, InvalidInputError

GENERATOR = "numpy.PCG64"
DENSE_LIMIT = 2**32
_CHUNK = 1 << 22


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class HypergraphSample:
    n: int
    k: int
    edges: np.ndarray          # sorted int64 colex ranks, no duplicates
    seed: int | None = None
    generator: str = GENERATOR
    p: float | None = None
    method: str | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.edges)

    def edge_sets(self) -> list[tuple[int, ...]]:
        tab = table_for(self.n, self.k)
        return [tab.unrank(int(r), self.k) for r in self.edges]

    def write(self, path: str | Path) -> None:
        Path(path).write_text(dumps(self))


def sample(n: int, k: int, p: float, seed: int | None,
           method: str = "sparse") -> HypergraphSample:
    """Draw H^k(n, p).

    ``dense`` flips one Bernoulli per rank in rank order. ``sparse`` draws the
    edge count from Bin(binom(n,k), p) and then a uniform set of that many
    ranks, which is the same distribution.
    """
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p={p} outside [0, 1]")
    total = binom(n, k)
    rng = make_rng(seed)
    if method == "dense":
        if total > DENSE_LIMIT:
            raise CapacityError(
                f"dense sampling needs binom(n,k) <= 2^32, got {total}; use method=sparse")
        parts = []
        for lo in range(0, total, _CHUNK):
            size = min(_CHUNK, total - lo)
            parts.append(np.flatnonzero(rng.random(size) < p) + lo)
        edges = np.concatenate(parts) if parts else np.empty(0, np.int64)
    elif method == "sparse":
        edges = _sparse_ranks(rng, total, p)
    else:
        raise InvalidInputError(f"unknown sampling method {method!r}")
    return HypergraphSample(n, k, edges.astype(np.int64), seed, GENERATOR, p, method)


def _sparse_ranks(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    m = int(rng.binomial(total, p)) if total else 0
    if 2 * m > total:
        # draw the complement instead; rejection would stall near m = total
        drop = _distinct_uniform(rng, total, total - m)
        mask = np.ones(total, dtype=bool)
        mask[drop] = False
        return np.flatnonzero(mask)
    return np.sort(_distinct_uniform(rng, total, m))


def _distinct_uniform(rng: np.random.Generator, total: int, m: int) -> np.ndarray:
    seen: set[int] = set()
    out: list[int] = []
    while len(out) < m:
        need = m - len(out)
        for r in rng.integers(0, total, size=need + 16).tolist():
            if r not in seen:
                seen.add(r)
                out.append(r)
                if len(out) == m:
                    break
    return np.array(out, dtype=np.int64)


def dumps(s: HypergraphSample) -> str:
    seed = "none" if s.seed is None else str(s.seed)
    lines = [f"{s.n} {s.k} {seed} {s.generator}"]
    lines.extend(" ".join(str(v + 1) for v in e) for e in s.edge_sets())
    return "\n".join(lines) + "\n"


def loads(text: str) -> HypergraphSample:
    rows = text.splitlines()
    if not rows:
        raise InvalidInputError("empty sample file")
    head = rows[0].split()
    if len(head) != 4:
        raise InvalidInputError(f"bad header {rows[0]!r}; expected 'n k seed generator'")
    n, k = int(head[0]), int(head[1])
    seed = None if head[2] == "none" else int(head[2])
    tab = table_for(n, k)
    ranks = []
    for line in rows[1:]:
        if not line.strip():
            continue
        verts = [int(x) - 1 for x in line.split()]
        if len(verts) != k or any(b <= a for a, b in zip(verts, verts[1:])) \
                or verts[0] < 0 or verts[-1] >= n:
            raise InvalidInputError(f"bad edge line {line!r}")
        ranks.append(tab.rank(verts))
    edges = np.array(sorted(set(ranks)), dtype=np.int64)
    if len(edges) != len(ranks):
        raise InvalidInputError("duplicate edges in sample file")
    return HypergraphSample(n, k, edges, seed, head[3])


def read_sample(path: str | Path) -> HypergraphSample:
    return loads(Path(path).read_text())


def from_edges(n: int, k: int, edges: Iterable[Sequence[int]], one_indexed: bool = False,
               seed: int | None = None) -> HypergraphSample:
    tab = table_for(n, k)
    off = 1 if one_indexed else 0
    ranks = sorted({tab.rank(sorted(v - off for v in e)) for e in edges})
    return HypergraphSample(n, k, np.array(ranks, dtype=np.int64), seed)


def aux_params(n: int, k: int, j: int) -> tuple[int, int, int]:
    """(vertices, edges, edge size) of the auxiliary hypergraph on j-sets."""
    if not 1 <= j < k <= n:
        raise InvalidInputError(f"need 1 <= j < k <= n, got n={n}, k={k}, j={j}")
    return binom(n, j), binom(n, k), binom(k, j)


@dataclass
class JSetPartition:
    """Components of the j-sets covered by at least one edge.

    ``labels`` maps j-set rank to component id; ids are ordered by each
    component's smallest rank. Uncovered j-sets are singletons and appear only
    in ``uncovered``.
    """
    n: int
    j: int
    labels: dict[int, int] = field(default_factory=dict)
    sizes: list[int] = field(default_factory=list)
    uncovered: int = 0

    @property
    def num_components(self) -> int:
        return len(self.sizes) + self.uncovered

    @property
    def largest(self) -> int:
        if self.sizes:
            return max(self.sizes)
        return 1 if self.uncovered else 0

    def components(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.sizes]
        for r, c in self.labels.items():
            out[c].append(r)
        for c in out:
            c.sort()
        return out

    @classmethod
    def from_groups(cls, n: int, j: int, groups: Iterable[Iterable[int]],
                    uncovered: int) -> "JSetPartition":
        comps = [sorted(g) for g in groups]
        comps.sort(key=lambda g: g[0])
        labels = {r: cid for cid, g in enumerate(comps) for r in g}
        return cls(n, j, labels, [len(g) for g in comps], uncovered)


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}
        self.size: dict[int, int] = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def components_oracle(sample: HypergraphSample, j: int,
                      order: Sequence[int] | None = None) -> JSetPartition:
    """Exact j-tuple components by union-find over each edge's j-subsets."""
    n, k = sample.n, sample.k
    if not 1 <= j < k:
        raise InvalidInputError(f"need 1 <= j < k, got j={j}, k={k}")
    tk = table_for(n, k)
    rows = [table_for(n, j).row(i) for i in range(j + 1)]
    idx = list(combinations(range(k), j))
    uf = _UnionFind()
    edges = sample.edges if order is None else [sample.edges[i] for i in order]
    for r in edges:
        K = tk.unrank(int(r), k)
        prev = None
        for pos in idx:
            jr = 0
            for i, p in enumerate(pos, 1):
                jr += rows[i][K[p]]
            uf.add(jr)
            if prev is not None:
                uf.union(prev, jr)
            prev = jr
    groups: dict[int, list[int]] = {}
    for x in uf.parent:
        groups.setdefault(uf.find(x), []).append(x)
    covered = len(uf.parent)
    return JSetPartition.from_groups(n, j, groups.values(), binom(n, j) - covered)


@dataclass
class DegreeProfile:
    """``deltas[ell]`` is the max number of recorded j-sets through one ell-set
    (``deltas[0]`` is the total count); ``argmax[ell]`` a maximising ell-set rank."""
    deltas: list[int]
    argmax: list[int | None]

    def __getitem__(self, ell: int) -> int:
        return self.deltas[ell]


def degree_profile(jsets: Iterable[int], n: int, j: int) -> DegreeProfile:
    tj = table_for(n, j)
    jsets = list(jsets)
    counters = [Counter() for _ in range(j)]
    for r in jsets:
        J = tj.unrank(int(r), j)
        for ell in range(1, j):
            c = counters[ell]
            for L in combinations(J, ell):
                c[tj.rank(L)] += 1
    deltas = [len(jsets)] + [0] * (j - 1)
    argmax: list[int | None] = [None] * j
    for ell in range(1, j):
        if counters[ell]:
            # ties broken by smallest rank for determinism
            best = min(counters[ell].items(), key=lambda kv: (-kv[1], kv[0]))
            argmax[ell], deltas[ell] = best
    return DegreeProfile(deltas, argmax)


__all__ = [
    "HypergraphSample", "JSetPartition", "DegreeProfile", "sample", "aux_params",
    "components_oracle", "degree_profile", "dumps", "loads", "read_sample",
    "from_edges", "subsets_of", "make_rng", "GENERATOR",
]
