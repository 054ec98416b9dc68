"""Command line entry point: ``hyperphase <subcommand> ...``.

Results go to stdout as JSON (single values) or CSV (tables). Failures print
one JSON line ``{"error": <category>, "message": ...}`` to stderr and exit
with the category's code.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import branching, experiments, hypergraph, model
from .errors import HyperphaseError, InvalidInputError
from .exploration import ExplorationConfig, run_exploration


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_threshold(a):
    num, den = model.threshold_ratio(a.k, a.j)
    _dump({"n": a.n, "k": a.k, "j": a.j, "p": model.threshold_p(a.n, a.k, a.j),
           "numerator": num, "denominator": den, "exponent": a.j - a.k})


def cmd_constants(a):
    _dump(model.bdl_constants(a.k, a.j, a.eps).as_dict())


def cmd_giant(a):
    _dump({"c": a.c, "k": a.k, "rho": model.giant_fraction(a.c, a.k)})


def cmd_sample(a):
    s = hypergraph.sample(a.n, a.k, a.p, a.seed, a.method)
    text = hypergraph.dumps(s)
    if a.out:
        Path(a.out).write_text(text)
        _dump({"edges": len(s), "out": a.out})
    else:
        sys.stdout.write(text)


def cmd_components(a):
    s = hypergraph.read_sample(a.input)
    part = hypergraph.components_oracle(s, a.j)
    _dump({"n": s.n, "k": s.k, "j": a.j, "edges": len(s),
           "components": part.num_components, "covered_components": len(part.sizes),
           "uncovered": part.uncovered, "largest": part.largest,
           "sizes": sorted(part.sizes, reverse=True)[:20]})


def cmd_explore(a):
    if (a.p is None) == (a.eps is None):
        raise InvalidInputError("give exactly one of --p and --eps")
    prm = model.ModelParams(a.n, a.k, a.j, eps=a.eps, p=a.p)
    budget = None if a.budget_alpha is None else math.ceil(a.budget_alpha * a.n ** a.k)
    cfg = ExplorationConfig(
        algorithm=a.alg, backend=a.backend, n=a.n, k=a.k, j=a.j, p=prm.p, seed=a.seed,
        query_budget=budget, checkpoints=a.checkpoints or (), neutral_rule=a.neutral_rule,
        audit=bool(a.events_out) or bool(a.checkpoints), record_trace=bool(a.trace_out))
    res = run_exploration(cfg)
    if a.trace_out:
        Path(a.trace_out).write_text(res.trace.dumps())
    if a.events_out and res.events is not None:
        Path(a.events_out).write_text(res.events.to_csv())
    if a.profiles_out:
        Path(a.profiles_out).write_text(res.profiles_csv())
    out = res.summary()
    out.update(p=prm.p, eps=prm.eps, budget=budget, seed=a.seed)
    _dump(out)


def cmd_branching(a):
    law = branching.OffspringLaw(a.r, a.m, a.q)
    print("seed,tau,capped,generations")
    for i in range(a.runs):
        seed = experiments.run_seed(a.seed, i)
        o = branching.simulate_total(law, a.cap, seed)
        print(f"{seed},{o.tau},{int(o.capped)},{o.generations}")


def cmd_sweep(a):
    spec_d = json.loads(Path(a.spec).read_text())
    if a.out:
        spec_d["output"] = a.out
    spec = experiments.RunSpec.from_dict(spec_d)
    records = experiments.run(spec, a.workers)
    if not spec.output:
        for r in records:
            print(r.to_json())
    else:
        sys.stderr.write(f"wrote {len(records)} records to {spec.output}\n")


def cmd_summarize(a):
    records = experiments.read_records(a.input)
    sys.stdout.write(experiments.summary_csv(experiments.summarize(records)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperphase",
                                 description="j-tuple components of random k-uniform hypergraphs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="critical edge probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("constants", help="bounded-degree constant system")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("giant", help="giant component vertex fraction")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_giant)

    p = sub.add_parser("sample", help="draw H^k(n,p) to the text format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("dense", "sparse"), default="sparse")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("components", help="exact j-tuple components of a sample file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--j", type=int, required=True)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("explore", help="run one search process")
    p.add_argument("--alg", type=str.upper, choices=("DFS1", "DFS2", "BFS1", "BFS2"),
                   default="DFS2")
    p.add_argument("--backend", choices=("exact", "skip"), default="exact")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--budget-alpha", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neutral-rule", choices=("pseudocode", "prose"), default="pseudocode")
    p.add_argument("--checkpoints", type=int, nargs="*")
    p.add_argument("--trace-out")
    p.add_argument("--events-out")
    p.add_argument("--profiles-out")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("branching", help="simulate total progeny, one CSV row per run")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--cap", type=int, default=branching.DEFAULT_CAP)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_branching)

    p = sub.add_parser("sweep", help="run an experiment spec (JSON)")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${experiments.WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("summarize", help="per-cell statistics of a JSONL record file")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_summarize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except HyperphaseError as e:
        sys.stderr.write(json.dumps({"error": e.category, "message": str(e)}) + "\n")
        return e.exit_code
    except (OSError, json.JSONDecodeError) as e:
        sys.stderr.write(json.dumps({"error": "io", "message": str(e)}) + "\n")
        return 8
    return 0


if __name__ == "__main__":
    sys.exit(main())
