"""Paired-query benchmark: the same question asked in relationship-as-instance
form and in direct-property form, over one store."""

from __future__ import annotations

import configparser
import os
import statistics
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

from . import abox, express, psd, sparql, step, synthetic, tbox
from .store import Store, materialize, rules_from_store

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
REPORT_SCHEMA = os.path.join(DATA_DIR, "report.schema.json")


class BenchConfigError(ValueError):
    pass


@dataclass
class Pair:
    name: str
    baseline: str
    ifcwod: str
    description: str = ""


@dataclass
class BenchSpec:
    dataset: Optional[str] = None  # SPF path; None means synthetic
    synthetic: synthetic.SyntheticParams = field(default_factory=synthetic.SyntheticParams)
    schema: str = os.path.join(DATA_DIR, "ifc_subset.exp")
    psd: Optional[str] = os.path.join(DATA_DIR, "psd")
    base: str = abox.DEFAULT_BASE
    pairs: list = field(default_factory=list)
    repetitions: int = 20
    warmup: int = 1
    materialize: str = "none"  # none | store | path to a characteristics file
    parallel: bool = False

    def __post_init__(self):
        if self.repetitions < 1:
            raise BenchConfigError("repetitions must be >= 1")
        if self.warmup < 0:
            raise BenchConfigError("warmup must be >= 0")


def load_spec(path) -> BenchSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    root = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(root, p)

    spec = BenchSpec()
    if cp.has_section("dataset"):
        ds = cp["dataset"]
        source = ds.get("source", "synthetic")
        spec.dataset = None if source == "synthetic" else resolve(source)
        if "schema" in ds:
            spec.schema = resolve(ds["schema"])
        if "psd" in ds:
            spec.psd = resolve(ds["psd"]) if ds["psd"] else None
        spec.base = ds.get("base", spec.base)
    if cp.has_section("synthetic"):
        kwargs = {}
        for f in fields(synthetic.SyntheticParams):
            if f.name in cp["synthetic"]:
                raw = cp["synthetic"][f.name]
                try:
                    kwargs[f.name] = float(raw) if f.name == "threshold" else int(raw)
                except ValueError:
                    raise BenchConfigError(f"[synthetic] {f.name}: not a number: {raw!r}") from None
        unknown = set(cp["synthetic"]) - {f.name for f in fields(synthetic.SyntheticParams)}
        if unknown:
            raise BenchConfigError(f"[synthetic] unknown keys: {', '.join(sorted(unknown))}")
        spec.synthetic = synthetic.SyntheticParams(**kwargs)
    if cp.has_section("bench"):
        b = cp["bench"]
        spec.repetitions = b.getint("repetitions", spec.repetitions)
        spec.warmup = b.getint("warmup", spec.warmup)
        spec.parallel = b.getboolean("parallel", spec.parallel)
        mat = b.get("materialize", "none")
        spec.materialize = mat if mat in ("none", "store") else resolve(mat)
    for section in cp.sections():
        if section.startswith("pair "):
            s = cp[section]
            if "baseline" not in s or "ifcwod" not in s:
                raise BenchConfigError(f"[{section}] needs both 'baseline' and 'ifcwod'")
            spec.pairs.append(Pair(section[5:].strip(), resolve(s["baseline"]), resolve(s["ifcwod"]),
                                   s.get("description", "")))
        elif section not in ("dataset", "synthetic", "bench"):
            raise BenchConfigError(f"unknown section [{section}]")
    spec.__post_init__()
    return spec


@dataclass
class Dataset:
    store: Store
    instances: int
    triples: int
    inferred: int
    expected: dict
    warnings: list


def prepare(spec: BenchSpec) -> Dataset:
    """Convert the dataset in mode ``both``, load it together with the TBox, materialize if asked."""
    schema = express.read_schema(spec.schema)
    docs = psd.read_psd_dir(spec.psd) if spec.psd else []
    chars = []
    if spec.materialize not in ("none", "store"):
        with open(spec.materialize, encoding="utf-8") as fh:
            chars = tbox.parse_characteristics(fh.read())
    t = tbox.forge(schema, docs, characteristics=chars)
    if spec.dataset is None:
        model = synthetic.generate(spec.synthetic)
        expected = synthetic.expected_counts(spec.synthetic)
    else:
        model = step.read_spf(spec.dataset)
        expected = {}
    diags = abox.Diagnostics()
    g = abox.convert(model, schema, t, abox.ConversionConfig(mode="both", base=spec.base), diags)
    store = Store(g)
    store.load(t)
    before = len(store)
    if spec.materialize != "none":
        materialize(store, rules_from_store(store))
    return Dataset(store, len(model), before, len(store) - before, expected, diags.warnings)


def _timed(store, query, repetitions, warmup):
    for _ in range(warmup):
        sparql.evaluate(store, query)
    times, report = [], None
    for _ in range(repetitions):
        t0 = time.perf_counter()
        report = sparql.evaluate(store, query)
        times.append(time.perf_counter() - t0)
    return report, times


def _pct(new, old):
    return round((1 - new / old) * 100, 2) if old else None


def run_pair(pair: Pair, store: Store, spec: BenchSpec, expected=None) -> dict:
    queries = {}
    for form in ("baseline", "ifcwod"):
        with open(getattr(pair, form), encoding="utf-8") as fh:
            queries[form] = sparql.parse_query(fh.read())
    out = {"name": pair.name, "description": pair.description,
           "files": {"baseline": pair.baseline, "ifcwod": pair.ifcwod}}
    reports, times = {}, {}
    for form, q in queries.items():
        reports[form], times[form] = _timed(store, q, spec.repetitions, spec.warmup)
    equal = Counter(reports["baseline"].solutions) == Counter(reports["ifcwod"].solutions)
    counts = {f: len(r.solutions) for f, r in reports.items()}
    out["results"] = counts
    out["equal"] = equal
    out["expected"] = expected
    out["matches_expected"] = None if expected is None else all(c == expected for c in counts.values())
    out["patterns"] = {f: q.pattern_count for f, q in queries.items()}
    out["pattern_reduction_pct"] = _pct(queries["ifcwod"].pattern_count, queries["baseline"].pattern_count)
    out["intermediate_rows"] = {f: r.intermediate_rows for f, r in reports.items()}
    out["join_order"] = {f: r.join_order for f, r in reports.items()}
    out["time"] = {f: {"mean": statistics.fmean(ts), "stdev": statistics.stdev(ts) if len(ts) > 1 else 0.0}
                   for f, ts in times.items()}
    out["time_reduction_pct"] = _pct(out["time"]["ifcwod"]["mean"], out["time"]["baseline"]["mean"])
    out["ok"] = equal and out["matches_expected"] is not False
    return out


def run_bench(spec: BenchSpec, dataset: Optional[Dataset] = None) -> dict:
    t0 = time.perf_counter()
    dataset = dataset if dataset is not None else (prepare(spec) if spec.pairs else None)
    store = dataset.store if dataset else Store()
    expected = dataset.expected if dataset else {}

    def one(pair):
        return run_pair(pair, store, spec, expected.get(pair.name))

    if spec.parallel and len(spec.pairs) > 1:
        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(one, spec.pairs))
    else:
        rows = [one(p) for p in spec.pairs]
    good = [r for r in rows if r["ok"]]
    summary = {
        "pairs": len(rows),
        "passed": len(good),
        "failed": len(rows) - len(good),
        "mean_pattern_reduction_pct": _mean(r["pattern_reduction_pct"] for r in good),
        "mean_time_reduction_pct": _mean(r["time_reduction_pct"] for r in good),
    }
    return {
        "dataset": {
            "source": spec.dataset or "synthetic",
            "synthetic": None if spec.dataset else {f.name: getattr(spec.synthetic, f.name)
                                                    for f in fields(synthetic.SyntheticParams)},
            "instances": dataset.instances if dataset else 0,
            "triples": dataset.triples if dataset else 0,
            "inferred": dataset.inferred if dataset else 0,
        },
        "repetitions": spec.repetitions,
        "warmup": spec.warmup,
        "parallel": spec.parallel,
        "pairs": rows,
        "summary": summary,
        "elapsed": time.perf_counter() - t0,
    }


def _mean(values):
    values = [v for v in values if v is not None]
    return round(statistics.fmean(values), 2) if values else None


def format_table(report: dict) -> str:
    head = ["pair", "results", "equal", "patterns", "reduction", "rows", "mean (s)", "sd (s)", "time red."]
    lines = []
    for r in report["pairs"]:
        tb_, tw = r["time"]["baseline"], r["time"]["ifcwod"]
        lines.append([
            r["name"],
            f"{r['results']['baseline']}/{r['results']['ifcwod']}",
            "yes" if r["equal"] else "NO",
            f"{r['patterns']['baseline']}/{r['patterns']['ifcwod']}",
            _fmt_pct(r["pattern_reduction_pct"]),
            f"{r['intermediate_rows']['baseline']}/{r['intermediate_rows']['ifcwod']}",
            f"{tb_['mean']:.3f}/{tw['mean']:.3f}",
            f"{tb_['stdev']:.3f}/{tw['stdev']:.3f}",
            _fmt_pct(r["time_reduction_pct"]),
        ])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *lines)] if lines else [len(h) for h in head]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    out += [fmt.format(*row) for row in lines]
    s = report["summary"]
    out.append(f"{s['passed']}/{s['pairs']} pairs with equal results; "
               f"mean pattern reduction {_fmt_pct(s['mean_pattern_reduction_pct'])}, "
               f"mean time reduction {_fmt_pct(s['mean_time_reduction_pct'])}")
    return "\n".join(out)


def _fmt_pct(v):
    return "n/a" if v is None else f"{v:.2f}%"


__all__ = ["Pair", "BenchSpec", "BenchConfigError", "Dataset", "load_spec", "prepare", "run_pair",
           "run_bench", "format_table", "REPORT_SCHEMA", "DATA_DIR"]
