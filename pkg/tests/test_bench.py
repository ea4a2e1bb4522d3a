import json
import os

import jsonschema
import pytest

from ifcwod import bench
from ifcwod.bench import BenchConfigError, BenchSpec, Pair, load_spec, run_bench, run_pair

QUERIES = os.path.join(bench.DATA_DIR, "queries")


def schema():
    with open(bench.REPORT_SCHEMA, encoding="utf-8") as fh:
        return json.load(fh)


def test_bundled_spec(bench_spec):
    assert [p.name for p in bench_spec.pairs] == ["Q1", "Q2", "Q3", "P"]
    assert bench_spec.dataset is None and bench_spec.repetitions == 20
    assert all(os.path.isabs(p.baseline) for p in bench_spec.pairs)


def test_report_validates_and_is_deterministic(bench_run, bench_spec):
    report, _ = bench_run
    jsonschema.validate(report, schema())
    again = run_bench(BenchSpec(**{**bench_spec.__dict__, "repetitions": 1, "warmup": 0}))
    for a, b in zip(report["pairs"], again["pairs"]):
        for key in ("results", "patterns", "intermediate_rows", "join_order", "equal"):
            assert a[key] == b[key]


def test_zero_pairs_gives_empty_report():
    report = run_bench(BenchSpec(pairs=[]))
    jsonschema.validate(report, schema())
    assert report["pairs"] == [] and report["summary"]["failed"] == 0
    assert "0/0" in bench.format_table(report)


def test_identity_pair(tmp_path):
    spec = BenchSpec(repetitions=3)
    from ifcwod.rdf import Graph
    from ifcwod.store import Store
    q = os.path.join(QUERIES, "p_ifcwod.rq")
    row = run_pair(Pair("same", q, q), Store(Graph()), spec)
    assert row["equal"] and row["pattern_reduction_pct"] == 0


def test_mismatched_pair_fails_but_reports(tmp_path, bench_spec):
    spec = BenchSpec(**{**bench_spec.__dict__, "repetitions": 1, "warmup": 0,
                        "pairs": [Pair("bad", os.path.join(QUERIES, "q1_ifcowl.rq"),
                                       os.path.join(QUERIES, "q2_ifcwod.rq"))]})
    report = run_bench(spec)
    assert report["summary"]["failed"] == 1 and not report["pairs"][0]["equal"]


def test_spec_errors(tmp_path):
    bad = tmp_path / "b.ini"
    bad.write_text("[bench]\nrepetitions = 0\n")
    with pytest.raises(BenchConfigError):
        load_spec(bad)
    bad.write_text("[weird]\nx = 1\n")
    with pytest.raises(BenchConfigError):
        load_spec(bad)
    bad.write_text("[pair X]\nbaseline = a.rq\n")
    with pytest.raises(BenchConfigError):
        load_spec(bad)
    bad.write_text("[synthetic]\nwalls = many\n")
    with pytest.raises(BenchConfigError):
        load_spec(bad)


def test_materialized_bench_keeps_parity(bench_spec):
    spec = BenchSpec(**{**bench_spec.__dict__, "repetitions": 1, "warmup": 0,
                        "materialize": os.path.join(bench.DATA_DIR, "characteristics.txt"),
                        "pairs": [p for p in bench_spec.pairs if p.name != "P"]})
    report = run_bench(spec)
    assert report["summary"]["failed"] == 0 and report["dataset"]["inferred"] > 0
