"""Reproducible experiment runs: seeding, execution, JSONL records, summaries."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .branching import OffspringLaw, simulate_total
from .combinat import binom
from .errors import CapacityError, ConfigError
from .exploration import EXACT_EDGE_LIMIT, ExplorationConfig, certify_walk, run_exploration
from .hypergraph import GENERATOR, components_oracle, sample
from .model import ModelParams

SCHEMA_VERSION = 1
WORKERS_ENV = "HYPERPHASE_WORKERS"

KINDS = ("subcritical-size", "supercritical-size", "threshold-sweep", "degree-audit",
         "walk-length", "branching-survival", "backend-agreement")
SIZE_KINDS = ("subcritical-size", "supercritical-size", "threshold-sweep")
DEFAULT_RATIOS = (0.5, 0.8, 1.0, 1.2, 1.5)

_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit words."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def run_seed(master_seed: int, run_index: int) -> int:
    return mix64((master_seed ^ run_index) & _MASK)


def acceptance_constants() -> dict:
    """Fitted acceptance thresholds shipped with the package."""
    text = resources.files("hyperphase").joinpath("acceptance.json").read_text()
    return json.loads(text)


@dataclass
class RunSpec:
    kind: str
    n: int
    k: int
    j: int
    eps: float | None = None
    p: float | None = None
    ratio: float | None = None
    ratios: list[float] | None = None
    method: str = "sparse"
    algorithm: str = "DFS2"
    backend: str = "exact"
    budget_alpha: float | None = None
    checkpoint_fractions: list[float] = field(default_factory=list)
    checkpoints: list[int] | None = None
    neutral_rule: str = "pseudocode"
    start_rule: str = "random"
    cap: int = 10**6
    master_seed: int = 0
    runs: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        given = [x is not None for x in (self.eps, self.p, self.ratio)]
        if self.kind == "threshold-sweep" and not any(given):
            if self.ratios is None:
                self.ratios = list(DEFAULT_RATIOS)
        elif sum(given) != 1:
            raise ConfigError("give exactly one of eps, p and ratio")
        if self.runs < 0:
            raise ConfigError("runs must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "RunSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown spec fields {sorted(unknown)}")
        return cls(**d)

    def cells(self) -> list["RunSpec"]:
        """Single-parameter cells (threshold sweeps expand over ``ratios``)."""
        if self.kind != "threshold-sweep" or self.ratios is None:
            return [self]
        return [RunSpec(**{**asdict(self), "ratios": None, "ratio": r, "kind": self.kind})
                for r in self.ratios]

    def params(self) -> ModelParams:
        if self.p is not None:
            return ModelParams(self.n, self.k, self.j, p=self.p)
        eps = self.eps if self.eps is not None else self.ratio - 1.0
        return ModelParams(self.n, self.k, self.j, eps=eps)

    def budget(self) -> int | None:
        if self.budget_alpha is None:
            return None
        return math.ceil(self.budget_alpha * self.n ** self.k)


@dataclass
class RunRecord:
    run_id: int
    seed: int
    kind: str
    n: int
    k: int
    j: int
    p: float
    eps: float
    alpha: float | None
    algorithm: str | None
    backend: str | None
    method: str | None
    neutral_rule: str | None
    start_rule: str | None
    budget: int | None
    checkpoints: list[int]
    cap: int | None
    edges_found: int | None
    components: int | None
    largest_component: int | None
    max_frontier: int | None
    queries: int | None
    wall_time_ms: float
    generator: str = GENERATOR
    extra: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)

    def outcome(self) -> dict:
        """Everything except the wall clock."""
        d = asdict(self)
        d.pop("wall_time_ms")
        return d


def _exploration_record(cell: RunSpec, prm: ModelParams, run_id: int, seed: int,
                        backend: str) -> RunRecord:
    budget = cell.budget()
    if cell.checkpoints is not None:
        cps = list(cell.checkpoints)
    else:
        cps = [math.floor(f * budget) for f in cell.checkpoint_fractions] if budget else []
    audit = cell.kind == "degree-audit"
    cfg = ExplorationConfig(
        algorithm=cell.algorithm, backend=backend, n=cell.n, k=cell.k, j=cell.j, p=prm.p,
        seed=seed, query_budget=budget, checkpoints=cps, neutral_rule=cell.neutral_rule,
        start_rule=cell.start_rule, audit=audit, record_trace=False,
        track_walk=cell.kind == "walk-length" and cell.algorithm.upper().startswith("DFS"))
    t0 = time.perf_counter()
    res = run_exploration(cfg)
    extra: dict = {"halted": res.halted}
    if audit:
        extra["checkpoints"] = [
            {"t": c.t, "deltas": c.profile.deltas, "growth_ok": c.growth_ok,
             "growth_exact": c.growth_exact} for c in res.checkpoints]
    if cfg.track_walk:
        walk = certify_walk(res.walk_at_max or [], res.state)
        extra["walk_length"] = len(walk.jsets)
        extra["walk_unverifiable"] = walk.unverifiable
    ms = (time.perf_counter() - t0) * 1e3
    return RunRecord(
        run_id, seed, cell.kind, cell.n, cell.k, cell.j, prm.p, prm.eps, cell.budget_alpha,
        cfg.algorithm, backend, None, cell.neutral_rule, cell.start_rule, budget, cps, None,
        res.edges_found, len(res.state.comp_sizes), res.largest_component,
        res.max_frontier, res.queries, ms, extra=extra)


def execute(task: tuple[dict, int, int]) -> list[RunRecord]:
    """Run one (cell, run_id, seed) task; returns one record (two for
    backend-agreement, exact first)."""
    cell_d, run_id, seed = task
    cell = RunSpec.from_dict(cell_d)
    prm = cell.params()
    if cell.kind in SIZE_KINDS:
        t0 = time.perf_counter()
        s = sample(cell.n, cell.k, prm.p, seed, cell.method)
        part = components_oracle(s, cell.j)
        ms = (time.perf_counter() - t0) * 1e3
        return [RunRecord(
            run_id, seed, cell.kind, cell.n, cell.k, cell.j, prm.p, prm.eps, None, None, None,
            cell.method, None, None, None, [], None, len(s), part.num_components,
            part.largest, None, None, ms)]
    if cell.kind == "branching-survival":
        t0 = time.perf_counter()
        law = OffspringLaw(binom(cell.k, cell.j) - 1, binom(cell.n - cell.j, cell.k - cell.j), prm.p)
        out = simulate_total(law, cell.cap, seed)
        ms = (time.perf_counter() - t0) * 1e3
        return [RunRecord(
            run_id, seed, cell.kind, cell.n, cell.k, cell.j, prm.p, prm.eps, None, None, None,
            None, None, None, None, [], cell.cap, None, None, out.tau, None, None, ms,
            extra={"capped": out.capped, "generations": out.generations,
                   "r": law.r, "m": law.m, "q": law.q})]
    if cell.kind == "backend-agreement":
        return [_exploration_record(cell, prm, run_id, seed, b) for b in ("exact", "skip")]
    return [_exploration_record(cell, prm, run_id, seed, cell.backend)]


def tasks_for(spec: RunSpec) -> list[tuple[dict, int, int]]:
    tasks = []
    run_id = 0
    for cell in spec.cells():
        d = asdict(cell)
        d["output"] = None
        for _ in range(spec.runs):
            tasks.append((d, run_id, run_seed(spec.master_seed, run_id)))
            run_id += 1
    return tasks


def _check_capacity(spec: RunSpec) -> None:
    uses_exact = spec.kind == "backend-agreement" or (
        spec.kind in ("degree-audit", "walk-length") and spec.backend == "exact")
    if uses_exact and binom(spec.n, spec.k) > EXACT_EDGE_LIMIT:
        raise CapacityError(
            f"exact backend needs binom(n,k) <= 2^28, got binom({spec.n},{spec.k}); "
            "lower n or use backend=skip")


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def iter_records(spec: RunSpec, workers: int | None = None) -> Iterator[RunRecord]:
    """Execute every run of ``spec``; records come out ordered by run_id."""
    _check_capacity(spec)
    workers = default_workers() if workers is None else workers
    tasks = tasks_for(spec)
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield from execute(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for recs in pool.map(execute, tasks, chunksize=max(1, len(tasks) // (4 * workers))):
            yield from recs


def run(spec: RunSpec, workers: int | None = None) -> list[RunRecord]:
    """Execute ``spec``; with ``spec.output`` set, write ``<output>`` (JSONL)
    as records complete and ``<output>.summary.csv`` at the end."""
    records: list[RunRecord] = []
    fh = open(spec.output, "w") if spec.output else None
    try:
        for rec in iter_records(spec, workers):
            records.append(rec)
            if fh:
                fh.write(rec.to_json() + "\n")
                fh.flush()
    finally:
        if fh:
            fh.close()
    if spec.output:
        Path(str(spec.output) + ".summary.csv").write_text(summary_csv(summarize(records)))
    return records


def replay_record(rec: RunRecord) -> RunRecord:
    """Re-run a record from its own fields."""
    cell = {"kind": rec.kind, "n": rec.n, "k": rec.k, "j": rec.j, "runs": 1}
    # a record stores both p and eps; whichever was primary reproduces the other
    if ModelParams(rec.n, rec.k, rec.j, eps=rec.eps).p == rec.p:
        cell["eps"] = rec.eps
    else:
        cell["p"] = rec.p
    if rec.kind in SIZE_KINDS:
        cell["method"] = rec.method
    elif rec.kind == "branching-survival":
        cell["cap"] = rec.cap
    else:
        cell.update(algorithm=rec.algorithm, backend=rec.backend,
                    budget_alpha=rec.alpha, neutral_rule=rec.neutral_rule,
                    start_rule=rec.start_rule)
        cell["checkpoints"] = list(rec.checkpoints)
    spec = RunSpec.from_dict(cell)
    out = execute((asdict(spec.cells()[0]), rec.run_id, rec.seed))
    for r in out:
        if r.backend == rec.backend:
            return r
    return out[0]


def read_records(path: str | Path) -> list[RunRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(RunRecord.from_dict(json.loads(line)))
    return out


SUMMARY_FIELDS = ("largest_component", "edges_found", "max_frontier")
STAT_NAMES = ("min", "q25", "median", "mean", "q75", "max")


def _stats(values: list[float]) -> dict[str, float | None]:
    if not values:
        return {s: None for s in STAT_NAMES}
    arr = np.asarray(values, dtype=float)
    return {
        "min": float(arr.min()),
        "q25": float(np.quantile(arr, 0.25)),
        "median": float(statistics.median(values)),
        "mean": float(arr.mean()),
        "q75": float(np.quantile(arr, 0.75)),
        "max": float(arr.max()),
    }


def summarize(records: Iterable[RunRecord]) -> list[dict]:
    """Per-cell statistics; cells keyed by kind, n, k, j, p, algorithm, backend."""
    cells: dict[tuple, list[RunRecord]] = {}
    for r in records:
        key = (r.kind, r.n, r.k, r.j, r.p, r.algorithm or "", r.backend or "")
        cells.setdefault(key, []).append(r)
    rows = []
    for key in sorted(cells):
        recs = cells[key]
        kind, n, k, j, p, alg, backend = key
        eps = recs[0].eps
        row = {"schema_version": SCHEMA_VERSION, "kind": kind, "n": n, "k": k, "j": j,
               "p": p, "eps": eps, "algorithm": alg, "backend": backend, "count": len(recs)}
        for f in SUMMARY_FIELDS:
            vals = [getattr(r, f) for r in recs if getattr(r, f) is not None]
            for s, v in _stats(vals).items():
                row[f"{f}_{s}"] = v
        mean_lc = row["largest_component_mean"]
        scale = float(n) ** j
        row["largest_over_nj"] = None if mean_lc is None else mean_lc / scale
        row["largest_over_eps_nj"] = (None if mean_lc is None or not eps
                                      else mean_lc / (abs(eps) * scale))
        rows.append(row)
    return rows


def summary_columns() -> list[str]:
    cols = ["schema_version", "kind", "n", "k", "j", "p", "eps", "algorithm", "backend", "count"]
    cols += [f"{f}_{s}" for f in SUMMARY_FIELDS for s in STAT_NAMES]
    cols += ["largest_over_nj", "largest_over_eps_nj"]
    return cols


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=summary_columns(), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()
