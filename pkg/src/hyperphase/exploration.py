"""Search processes over j-sets driven by a coupled Bernoulli sequence.

Four algorithms share one engine:

* ``DFS1``/``BFS1`` query, from the current j-set ``x``, the smallest
  unqueried k-set containing ``x`` that still has a neutral j-subset; run to
  completion they recover the exact j-tuple components.
* ``DFS2``/``BFS2`` only query k-sets whose other j-subsets are all neutral,
  so every success activates ``binom(k,j) - 1`` new j-sets and the components
  they report are partial.

DFS takes ``x`` from the top of the frontier, BFS from the bottom. The
``exact`` backend realises every Bernoulli outcome; the ``skip`` backend (DFS2
and BFS2 only) jumps between successes with geometric gaps over the unfiltered
superset stream, treating ineligible positions as dummy queries.
"""
from __future__ import annotations

import math
from array import array
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .combinat import binom, colex_combinations, table_for
from .errors import ConfigError, ExhaustedError, CapacityError, UnsupportedError
from .hypergraph import DegreeProfile, JSetPartition

ALGORITHMS = ("DFS1", "DFS2", "BFS1", "BFS2")
BACKENDS = ("exact", "skip")
NEUTRAL_RULES = ("pseudocode", "prose")
START_RULES = ("random", "smallest")

ACTIVE = 1
EXPLORED = 2

#: Largest binom(n,k) for which the exact backend allocates its query bitmap.
EXACT_EDGE_LIMIT = 2**28

_BITS_CHUNK = 4096


@dataclass
class ExplorationConfig:
    algorithm: str = "DFS1"
    backend: str = "exact"
    n: int = 4
    k: int = 2
    j: int = 1
    p: float | None = None
    seed: int | None = None
    bits: Sequence[int] | None = None
    query_budget: int | None = None
    checkpoints: Sequence[int] = ()
    neutral_rule: str = "pseudocode"
    start_rule: str = "random"
    final_sweep: bool = True
    audit: bool = False
    record_trace: bool = True
    track_walk: bool = False

    def __post_init__(self):
        self.algorithm = self.algorithm.upper()
        self.checkpoints = tuple(sorted(int(c) for c in self.checkpoints))

    @property
    def depth_first(self) -> bool:
        return self.algorithm.startswith("DFS")

    @property
    def neutral_only(self) -> bool:
        return self.algorithm.endswith("2")

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.neutral_rule not in NEUTRAL_RULES:
            raise ConfigError(f"unknown neutral rule {self.neutral_rule!r}")
        if self.start_rule not in START_RULES:
            raise ConfigError(f"unknown start rule {self.start_rule!r}")
        if not 1 <= self.j < self.k <= self.n:
            raise ConfigError(f"need 1 <= j < k <= n, got n={self.n}, k={self.k}, j={self.j}")
        if self.backend == "skip":
            if not self.neutral_only:
                raise ConfigError("the skip backend supports DFS2 and BFS2 only")
            if self.bits is not None:
                raise ConfigError("explicit bit sequences need the exact backend")
        if self.bits is None:
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ConfigError("give p in [0, 1] or an explicit bit sequence")
        if self.query_budget is not None and self.query_budget < 0:
            raise ConfigError("query budget must be non-negative")
        if self.checkpoints and self.checkpoints[0] < 0:
            raise ConfigError("checkpoints must be non-negative")
        if self.backend == "exact" and binom(self.n, self.k) > EXACT_EDGE_LIMIT:
            raise CapacityError(
                f"exact backend needs binom(n,k) <= 2^28 (got {binom(self.n, self.k)}); "
                "use the skip backend with DFS2/BFS2")


@dataclass
class QueryTrace:
    """Realised queries in order.

    Exact backend: one record per Bernoulli outcome, ``outcome`` in {0, 1}.
    Skip backend: success landings only, ``outcome`` 1 = accepted,
    0 = discarded (already seen or no longer eligible).
    """
    backend: str
    t: array = field(default_factory=lambda: array("q"))
    rank: array = field(default_factory=lambda: array("q"))
    outcome: array = field(default_factory=lambda: array("b"))

    def __len__(self) -> int:
        return len(self.t)

    def append(self, t: int, rank: int, outcome: int) -> None:
        self.t.append(t)
        self.rank.append(rank)
        self.outcome.append(outcome)

    def bits(self) -> np.ndarray:
        return np.frombuffer(self.outcome, dtype=np.int8).astype(np.int64)

    def records(self) -> list[tuple[int, int, int]]:
        return list(zip(self.t, self.rank, self.outcome))

    def dumps(self) -> str:
        if self.backend == "skip":
            words = ("discarded", "accepted")
            lines = [f"{t} {r} {words[o]}" for t, r, o in self.records()]
        else:
            lines = [f"{t} {r} {o}" for t, r, o in self.records()]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def loads(cls, text: str) -> "QueryTrace":
        tr = None
        for line in text.splitlines():
            if not line.strip():
                continue
            t, r, o = line.split()
            if tr is None:
                tr = cls("exact" if o in "01" else "skip")
            tr.append(int(t), int(r), {"0": 0, "1": 1, "discarded": 0, "accepted": 1}[o])
        return tr if tr is not None else cls("exact")


class EventLog:
    """Per ell-set counters of new starts, jumps and branchings."""

    def __init__(self, n: int, k: int, j: int):
        self.n, self.k, self.j = n, k, j
        self.counters: dict[int, dict[int, list[int]]] = {ell: {} for ell in range(1, j)}

    def bump(self, ell: int, lrank: int, kind: int) -> None:
        c = self.counters[ell].get(lrank)
        if c is None:
            c = self.counters[ell][lrank] = [0, 0, 0]
        c[kind] += 1

    def get(self, ell: int, lrank: int) -> tuple[int, int, int]:
        return tuple(self.counters[ell].get(lrank, (0, 0, 0)))

    def aggregates(self) -> dict[int, tuple[int, int, int]]:
        out = {}
        for ell, table in self.counters.items():
            vals = list(table.values())
            out[ell] = tuple(max((v[i] for v in vals), default=0) for i in range(3))
        return out

    def bound(self, ell: int, lrank: int) -> int:
        """Growth-accounting upper bound on the degree of the ell-set."""
        b = binom(self.k - ell, self.j - ell)
        d1, d2, d3 = self.get(ell, lrank)
        return d1 + b * d2 + (b - 1) * d3

    def to_csv(self) -> str:
        tab = table_for(self.n, max(self.j, 1))
        lines = ["ell,lset,new_starts,jumps,branchings"]
        for ell in sorted(self.counters):
            for lr in sorted(self.counters[ell]):
                d = self.counters[ell][lr]
                lset = "-".join(str(v + 1) for v in tab.unrank(lr, ell))
                lines.append(f"{ell},{lset},{d[0]},{d[1]},{d[2]}")
        return "\n".join(lines) + "\n"


@dataclass
class Checkpoint:
    t: int
    profile: DegreeProfile
    growth_ok: bool | None = None
    growth_exact: bool | None = None


@dataclass
class ExplorationState:
    n: int
    k: int
    j: int
    depth_first: bool = True
    status: dict[int, int] = field(default_factory=dict)
    frontier: deque = field(default_factory=deque)
    cursors: dict = field(default_factory=dict)
    queried: object = None
    t: int = 0
    edges: list[tuple[int, int]] = field(default_factory=list)
    component: dict[int, int] = field(default_factory=dict)
    comp_sizes: list[int] = field(default_factory=list)
    activated_by: dict[int, int | None] = field(default_factory=dict)

    @property
    def total_jsets(self) -> int:
        return binom(self.n, self.j)

    def counts(self) -> tuple[int, int, int]:
        """(neutral, active, explored) j-set counts."""
        active = sum(1 for s in self.status.values() if s == ACTIVE)
        explored = len(self.status) - active
        return self.total_jsets - len(self.status), active, explored

    def discovered(self) -> list[int]:
        return list(self.status)


@dataclass
class Walk:
    jsets: list[int]
    certificates: list[int | None]
    unverifiable: int

    def vertex_sets(self, n: int, j: int) -> list[tuple[int, ...]]:
        tab = table_for(n, j)
        return [tab.unrank(r, j) for r in self.jsets]


@dataclass
class ExplorationResult:
    config: ExplorationConfig
    state: ExplorationState
    trace: QueryTrace
    events: EventLog | None
    checkpoints: list[Checkpoint]
    max_frontier: int
    walk_at_max: list[int] | None
    halted: str

    @property
    def queries(self) -> int:
        return self.state.t

    @property
    def edges_found(self) -> int:
        return len(self.state.edges)

    @property
    def largest_component(self) -> int:
        return max(self.state.comp_sizes, default=0)

    def discovered_edges(self) -> set[int]:
        return {r for _, r in self.state.edges}

    def partition(self) -> JSetPartition:
        """Components as a JSetPartition; singleton loops count as uncovered."""
        st = self.state
        groups: dict[int, list[int]] = {}
        for r, c in st.component.items():
            if st.comp_sizes[c] > 1:
                groups.setdefault(c, []).append(r)
        labelled = sum(len(g) for g in groups.values())
        return JSetPartition.from_groups(st.n, st.j, groups.values(),
                                         st.total_jsets - labelled)

    def summary(self) -> dict:
        return {
            "algorithm": self.config.algorithm,
            "backend": self.config.backend,
            "edges_found": self.edges_found,
            "components": len(self.state.comp_sizes),
            "largest_component": self.largest_component,
            "max_frontier": self.max_frontier,
            "queries": self.queries,
            "halted": self.halted,
        }

    def profiles_csv(self) -> str:
        lines = ["t,ell,delta"]
        for cp in self.checkpoints:
            for ell, d in enumerate(cp.profile.deltas):
                lines.append(f"{cp.t},{ell},{d}")
        return "\n".join(lines) + "\n"


class _Bits:
    """Bernoulli source: explicit sequence or chunked draws from a generator."""

    def __init__(self, rng: np.random.Generator | None, p: float | None,
                 bits: Sequence[int] | None):
        self.rng = rng
        self.p = p
        self.explicit = None if bits is None else [1 if b else 0 for b in bits]
        self.buf = b""
        self.pos = 0

    def next(self) -> int:
        if self.explicit is not None:
            if self.pos >= len(self.explicit):
                raise ExhaustedError(
                    f"bit sequence exhausted after {self.pos} queries")
            b = self.explicit[self.pos]
            self.pos += 1
            return b
        if self.pos >= len(self.buf):
            self.buf = (self.rng.random(_BITS_CHUNK) < self.p).tobytes()
            self.pos = 0
        b = self.buf[self.pos]
        self.pos += 1
        return b

    def gap(self) -> float:
        """Geometric(p) number of trials up to and including the next success."""
        p = self.p
        if p <= 0.0:
            return math.inf
        if p >= 1.0:
            return 1
        u = 0.0
        while u == 0.0:
            u = self.rng.random()
        return max(1, math.ceil(math.log(u) / math.log1p(-p)))


def _supersets_gen(J: tuple[int, ...], n: int, k: int):
    """k-sets containing J in colex order (exact-backend cursor)."""
    others = [v for v in range(n) if v not in J]
    if k - len(J) == 1:
        for v in others:
            yield tuple(sorted(J + (v,)))
        return
    for comp in colex_combinations(len(others), k - len(J)):
        yield tuple(sorted(J + tuple(others[c] for c in comp)))


class _Engine:
    def __init__(self, cfg: ExplorationConfig):
        cfg.validate()
        self.cfg = cfg
        n, k, j = cfg.n, cfg.k, cfg.j
        self.n, self.k, self.j = n, k, j
        self.tk = table_for(n, k)
        self.tj = table_for(n, j)
        self.rows_k = [self.tk.row(i) for i in range(k + 1)]
        self.rows_j = [self.tj.row(i) for i in range(j + 1)]
        self.sub_idx = list(combinations(range(k), j))
        self.total_j = binom(n, j)
        self.total_k = binom(n, k)

        ss = np.random.SeedSequence(cfg.seed)
        bit_ss, tau_ss = ss.spawn(2)
        self.tau_rng = np.random.Generator(np.random.PCG64(tau_ss))
        bit_rng = np.random.Generator(np.random.PCG64(bit_ss))
        self.bits = _Bits(bit_rng, cfg.p, cfg.bits)

        self.state = ExplorationState(n, k, j, cfg.depth_first)
        self.trace = QueryTrace(cfg.backend)
        self.events = EventLog(n, k, j) if cfg.audit else None
        self.track_deg = cfg.audit or bool(cfg.checkpoints)
        self.deg = [dict() for _ in range(j)]
        self.deg_max = [0] * j
        self.deg_arg: list[int | None] = [None] * j
        self.checkpoints: list[Checkpoint] = []
        self.cp_next = 0
        self.max_frontier = 0
        self.walk_at_max: list[int] | None = None
        self.smallest_ptr = 0
        self.budget = cfg.query_budget

    # j-set helpers --------------------------------------------------------

    def jrank(self, vs) -> int:
        rows = self.rows_j
        r = 0
        for i, v in enumerate(vs, 1):
            r += rows[i][v]
        return r

    def krank(self, K) -> int:
        rows = self.rows_k
        r = 0
        for i, v in enumerate(K, 1):
            r += rows[i][v]
        return r

    def jsubsets(self, K) -> list[int]:
        rows = self.rows_j
        out = []
        for pos in self.sub_idx:
            r = 0
            for i, p in enumerate(pos, 1):
                r += rows[i][K[p]]
            out.append(r)
        return out

    def activate(self, r: int, comp: int, edge: int | None) -> None:
        st = self.state
        st.status[r] = ACTIVE
        st.frontier.append(r)
        st.component[r] = comp
        st.comp_sizes[comp] += 1
        st.activated_by[r] = edge
        if self.track_deg:
            J = self.tj.unrank(r, self.j)
            for ell in range(1, self.j):
                d = self.deg[ell]
                for L in combinations(J, ell):
                    lr = self.jrank(L)
                    v = d.get(lr, 0) + 1
                    d[lr] = v
                    if v > self.deg_max[ell] or (v == self.deg_max[ell] and lr < self.deg_arg[ell]):
                        self.deg_max[ell] = v
                        self.deg_arg[ell] = lr
        f = len(st.frontier)
        if f > self.max_frontier:
            self.max_frontier = f
            if self.cfg.track_walk and self.cfg.depth_first:
                self.walk_at_max = list(st.frontier)

    def pick_start(self) -> int | None:
        st = self.state
        if len(st.status) >= self.total_j:
            return None
        if self.cfg.start_rule == "smallest":
            while self.smallest_ptr in st.status:
                self.smallest_ptr += 1
            return self.smallest_ptr
        rng = self.tau_rng
        for _ in range(32):
            r = int(rng.integers(0, self.total_j))
            if r not in st.status:
                return r
        neutral = [r for r in range(self.total_j) if r not in st.status]
        return neutral[int(rng.integers(0, len(neutral)))]

    def new_start(self) -> bool:
        r = self.pick_start()
        if r is None:
            return False
        st = self.state
        st.comp_sizes.append(0)
        self.activate(r, len(st.comp_sizes) - 1, None)
        if self.events is not None:
            J = self.tj.unrank(r, self.j)
            for ell in range(1, self.j):
                for L in combinations(J, ell):
                    self.events.bump(ell, self.jrank(L), 0)
        return True

    def success(self, x: int, K, krank: int, subs: list[int]) -> None:
        st = self.state
        st.edges.append((st.t, krank))
        if self.events is not None:
            J = set(self.tj.unrank(x, self.j))
            for ell in range(1, self.j):
                for L in combinations(K, ell):
                    kind = 2 if J.issuperset(L) else 1
                    self.events.bump(ell, self.jrank(L), kind)
        comp = st.component[x]
        status = st.status
        for r in sorted(subs):
            if r not in status:
                self.activate(r, comp, krank)

    # checkpoints -----------------------------------------------------------

    def flush(self, upto: int, strict: bool = False) -> None:
        cps = self.cfg.checkpoints
        while self.cp_next < len(cps) and (cps[self.cp_next] < upto if strict
                                            else cps[self.cp_next] <= upto):
            self.snapshot(cps[self.cp_next])
            self.cp_next += 1

    def snapshot(self, t: int) -> None:
        deltas = [len(self.state.status)] + self.deg_max[1:]
        prof = DegreeProfile(list(deltas), [None] + list(self.deg_arg[1:]))
        ok = exact = None
        if self.events is not None:
            ok, exact = growth_accounting(self.events, self.deg)
        self.checkpoints.append(Checkpoint(t, prof, ok, exact))

    # main loops ------------------------------------------------------------

    def run(self) -> ExplorationResult:
        self.flush(0)
        if self.budget == 0:
            halted = "budget"
        elif self.cfg.backend == "exact":
            halted = self.run_exact()
        else:
            halted = self.run_skip()
        if halted == "complete":
            self.flush(math.inf)
        return ExplorationResult(self.cfg, self.state, self.trace, self.events,
                                 self.checkpoints, self.max_frontier,
                                 self.walk_at_max, halted)

    def _eligible_fn(self):
        rule2 = self.cfg.neutral_only
        prose = self.cfg.neutral_rule == "prose"

        def eligible(x, subs, status):
            if rule2:
                for r in subs:
                    if r != x and r in status:
                        return False
                return True
            has_neutral = False
            for r in subs:
                s = status.get(r)
                if s is None:
                    has_neutral = True
                elif prose and s == EXPLORED:
                    return False
            return has_neutral
        return eligible

    def run_exact(self) -> str:
        cfg = self.cfg
        st = self.state
        st.queried = queried = bytearray(self.total_k)
        status = st.status
        frontier = st.frontier
        cursors = st.cursors
        dfs = cfg.depth_first
        budget = self.budget
        eligible = self._eligible_fn()
        bits = self.bits
        record = cfg.record_trace
        trace = self.trace
        has_cps = bool(cfg.checkpoints)
        n, k, tj = self.n, self.k, self.tj
        while True:
            if budget is not None and st.t >= budget:
                return "budget"
            if not frontier:
                if not self.new_start():
                    break
                continue
            x = frontier[-1] if dfs else frontier[0]
            cur = cursors.get(x)
            if cur is None:
                cur = cursors[x] = _supersets_gen(tj.unrank(x, self.j), n, k)
            found = False
            for K in cur:
                kr = self.krank(K)
                if queried[kr]:
                    continue
                subs = self.jsubsets(K)
                if not eligible(x, subs, status):
                    continue
                b = bits.next()
                queried[kr] = 1
                st.t += 1
                if record:
                    trace.append(st.t, kr, b)
                if b:
                    self.success(x, K, kr, subs)
                if has_cps:
                    self.flush(st.t)
                found = True
                break
            if not found:
                status[x] = EXPLORED
                if dfs:
                    frontier.pop()
                else:
                    frontier.popleft()
                del cursors[x]
        if cfg.final_sweep and not cfg.neutral_only:
            return self.sweep()
        return "complete"

    def sweep(self) -> str:
        """Query every remaining edge in ascending rank order."""
        st = self.state
        queried = st.queried
        budget = self.budget
        for kr in range(self.total_k):
            if queried[kr]:
                continue
            if budget is not None and st.t >= budget:
                return "budget"
            b = self.bits.next()
            queried[kr] = 1
            st.t += 1
            if self.cfg.record_trace:
                self.trace.append(st.t, kr, b)
            if b:
                st.edges.append((st.t, kr))
        return "complete"

    def run_skip(self) -> str:
        cfg = self.cfg
        st = self.state
        st.queried = seen = set()
        status = st.status
        frontier = st.frontier
        cursors = st.cursors
        dfs = cfg.depth_first
        budget = self.budget
        bits = self.bits
        record = cfg.record_trace
        trace = self.trace
        has_cps = bool(cfg.checkpoints)
        r = self.k - self.j
        length = binom(self.n - self.j, r)
        tcomp = table_for(self.n, r)
        while True:
            if budget is not None and st.t >= budget:
                return "budget"
            if not frontier:
                if not self.new_start():
                    return "complete"
                continue
            x = frontier[-1] if dfs else frontier[0]
            cur = cursors.get(x)
            if cur is None:
                cur = cursors[x] = [0, None]
            pos = cur[0]
            gap = bits.gap()
            if pos + gap > length:
                spent = length - pos
                if budget is not None and st.t + spent >= budget:
                    st.t = budget
                    return "budget"
                st.t += spent
                status[x] = EXPLORED
                if dfs:
                    frontier.pop()
                else:
                    frontier.popleft()
                del cursors[x]
                continue
            tnew = st.t + gap
            if budget is not None and tnew > budget:
                if has_cps:
                    self.flush(budget)
                st.t = budget
                return "budget"
            if has_cps:
                self.flush(tnew, strict=True)
            land = pos + gap - 1
            cur[0] = land + 1
            st.t = tnew
            J = cur[1]
            if J is None:
                Jv = self.tj.unrank(x, self.j)
                J = cur[1] = (Jv, [v for v in range(self.n) if v not in Jv])
            comp = tcomp.unrank(land, r)
            others = J[1]
            K = tuple(sorted(J[0] + tuple(others[c] for c in comp)))
            kr = self.krank(K)
            subs = self.jsubsets(K)
            ok = kr not in seen
            if ok:
                for s in subs:
                    if s != x and s in status:
                        ok = False
                        break
            seen.add(kr)
            if record:
                trace.append(st.t, kr, 1 if ok else 0)
            if ok:
                self.success(x, K, kr, subs)
            if has_cps:
                self.flush(st.t)


def growth_accounting(events: EventLog, deg: list[dict]) -> tuple[bool, bool]:
    """Check degree <= d1 + b*d2 + (b-1)*d3 for every touched ell-set.

    Returns ``(inequality holds everywhere, equality holds everywhere)``.
    """
    ok = exact = True
    for ell in range(1, events.j):
        keys = set(deg[ell]) | set(events.counters[ell])
        for lr in keys:
            d = deg[ell].get(lr, 0)
            bound = events.bound(ell, lr)
            if d > bound:
                ok = False
            if d != bound:
                exact = False
    return ok, exact


def run_exploration(config: ExplorationConfig) -> ExplorationResult:
    return _Engine(config).run()


def replay(bits: Sequence[int], config: ExplorationConfig) -> ExplorationResult:
    """Re-run ``config`` on an explicit outcome sequence (exact backend)."""
    cfg = ExplorationConfig(**{**config.__dict__, "bits": list(bits), "backend": "exact"})
    return run_exploration(cfg)


# event classification ------------------------------------------------------

NEW_START = "NewStart"
JUMP = "Jump"
BRANCHING = "Branching"
NOT_APPLICABLE = "NotApplicable"


def classify_event(J: Iterable[int], K: Iterable[int], L: Iterable[int]) -> str:
    """How a success from j-set J on k-set K changes the degree of ell-set L."""
    J, K, L = set(J), set(K), set(L)
    if not L <= K:
        return NOT_APPLICABLE
    return BRANCHING if L <= J else JUMP


def classify_start(J: Iterable[int], L: Iterable[int]) -> str:
    return NEW_START if set(L) <= set(J) else NOT_APPLICABLE


# walks ---------------------------------------------------------------------

def extract_active_walk(state: ExplorationState) -> list[int]:
    """The DFS frontier, bottom to top."""
    if not state.depth_first:
        raise UnsupportedError("walk extraction needs a depth-first search")
    return list(state.frontier)


def certify_walk(walk: Sequence[int], state: ExplorationState) -> Walk:
    """Find, for each consecutive pair, a discovered edge containing both.

    Pairs for which no such edge is found are counted as unverifiable.
    """
    n, k, j = state.n, state.k, state.j
    tj, tk = table_for(n, j), table_for(n, k)
    certs: list[int | None] = []
    bad = 0
    for a, b in zip(walk, walk[1:]):
        need = set(tj.unrank(a, j)) | set(tj.unrank(b, j))
        cert = None
        for cand in (state.activated_by.get(b), state.activated_by.get(a)):
            if cand is not None and need <= set(tk.unrank(cand, k)):
                cert = cand
                break
        if cert is None:
            for _, e in state.edges:
                if need <= set(tk.unrank(e, k)):
                    cert = e
                    break
        if cert is None:
            bad += 1
        certs.append(cert)
    return Walk(list(walk), certs, bad)
