import json
import random
from dataclasses import replace

import pytest

from hyperphase.errors import CapacityError, ConfigError
from hyperphase.experiments import (RunRecord, RunSpec, acceptance_constants, mix64,
                                    read_records, replay_record, run, run_seed, summarize,
                                    summary_csv)


SPECS = [
    dict(kind="subcritical-size", n=200, k=3, j=1, eps=-0.3, runs=4, master_seed=1),
    dict(kind="threshold-sweep", n=30, k=3, j=2, runs=2, master_seed=2, ratios=[0.8, 1.2]),
    dict(kind="degree-audit", n=20, k=3, j=2, eps=0.3, budget_alpha=0.01,
         checkpoint_fractions=[0.5, 1.0], runs=3, master_seed=3),
    dict(kind="walk-length", n=40, k=3, j=1, eps=0.3, backend="skip", budget_alpha=0.005,
         runs=3, master_seed=4),
    dict(kind="branching-survival", n=500, k=3, j=2, ratio=1.3, cap=2000, runs=3,
         master_seed=5),
    dict(kind="backend-agreement", n=10, k=3, j=2, ratio=1.2, runs=3, master_seed=6),
]


def outcomes(records):
    return [r.outcome() for r in records]


def test_mix64_is_injective_on_a_range():
    vals = {mix64(i) for i in range(200000)}
    assert len(vals) == 200000
    assert run_seed(7, 3) == mix64(7 ^ 3)
    assert all(0 <= v < 2**64 for v in list(vals)[:100])


@pytest.mark.parametrize("d", SPECS, ids=[s["kind"] for s in SPECS])
def test_rerun_and_workers_give_identical_records(d):
    spec = RunSpec.from_dict(d)
    a = run(spec, workers=1)
    b = run(spec, workers=1)
    c = run(spec, workers=4)
    assert outcomes(a) == outcomes(b) == outcomes(c)
    assert [r.run_id for r in a] == sorted(r.run_id for r in a)


@pytest.mark.parametrize("d", SPECS, ids=[s["kind"] for s in SPECS])
def test_records_replay_from_their_fields(d):
    for rec in run(RunSpec.from_dict(d), workers=1):
        back = RunRecord.from_dict(json.loads(rec.to_json()))
        assert replay_record(back).outcome() == rec.outcome()


def test_threshold_sweep_cells():
    spec = RunSpec.from_dict(dict(kind="threshold-sweep", n=30, k=3, j=2, runs=1))
    assert [c.ratio for c in spec.cells()] == [0.5, 0.8, 1.0, 1.2, 1.5]
    fixed = RunSpec.from_dict(dict(kind="threshold-sweep", n=30, k=3, j=2, p=0.01, runs=1))
    assert len(fixed.cells()) == 1


def test_spec_errors():
    with pytest.raises(ConfigError):
        RunSpec.from_dict(dict(kind="nope", n=10, k=3, j=1, eps=0.1))
    with pytest.raises(ConfigError):
        RunSpec.from_dict(dict(kind="subcritical-size", n=10, k=3, j=1))
    with pytest.raises(ConfigError):
        RunSpec.from_dict(dict(kind="subcritical-size", n=10, k=3, j=1, eps=0.1, bogus=1))
    with pytest.raises(CapacityError, match="2\\^28"):
        run(RunSpec.from_dict(dict(kind="degree-audit", n=2000, k=3, j=2, eps=0.1, runs=1)))


def test_zero_runs_writes_header(tmp_path):
    out = tmp_path / "r.jsonl"
    recs = run(RunSpec.from_dict(dict(kind="subcritical-size", n=50, k=3, j=1, eps=-0.3,
                                      runs=0, output=str(out))))
    assert recs == []
    assert out.read_text() == ""
    header = (tmp_path / "r.jsonl.summary.csv").read_text().splitlines()
    assert len(header) == 1 and header[0].startswith("schema_version,kind")


def test_output_files(tmp_path):
    out = tmp_path / "r.jsonl"
    recs = run(RunSpec.from_dict({**SPECS[0], "output": str(out)}))
    back = read_records(out)
    assert outcomes(back) == outcomes(recs)
    assert all(r.generator == "numpy.PCG64" and r.schema_version == 1 for r in back)


def fake(values, field="largest_component", **kw):
    base = dict(run_id=0, seed=0, kind="subcritical-size", n=10, k=3, j=1, p=0.01, eps=0.5,
                alpha=None, algorithm=None, backend=None, method="sparse", neutral_rule=None,
                start_rule=None, budget=None, checkpoints=[], cap=None, edges_found=1,
                components=1, largest_component=1, max_frontier=None, queries=None,
                wall_time_ms=0.0)
    base.update(kw)
    return [RunRecord(**{**base, "run_id": i, field: v}) for i, v in enumerate(values)]


def test_summarize_single_record():
    row, = summarize(fake([7]))
    for s in ("min", "q25", "median", "mean", "q75", "max"):
        assert row[f"largest_component_{s}"] == 7
    assert row["largest_over_nj"] == pytest.approx(0.7)
    assert row["largest_over_eps_nj"] == pytest.approx(1.4)
    assert row["max_frontier_mean"] is None


def test_summarize_median_and_permutation_invariance():
    recs = fake([1, 2, 3, 4, 5])
    row, = summarize(recs)
    assert row["largest_component_median"] == 3 and row["count"] == 5
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    assert summarize(shuffled) == summarize(recs)
    assert summarize([]) == []
    assert summary_csv(summarize(recs)).count("\n") == 2


def test_summarize_splits_cells():
    rows = summarize(fake([1, 2]) + fake([3], p=0.02))
    assert [r["count"] for r in rows] == [2, 1]


def test_acceptance_constants_file():
    c = acceptance_constants()
    assert c["subcritical_size_constant"] == 40
    assert c["degree_ratio_bound"] == 50
