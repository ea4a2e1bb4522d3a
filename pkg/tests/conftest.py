import os
from collections import defaultdict

import pytest

from ifcwod import express, psd, step, tbox
from ifcwod.bench import DATA_DIR

CRITERIA = {
    1: "wall fixture fidelity",
    2: "PSD fixture fidelity",
    3: "inverse-attribute derivation",
    4: "query simplification",
    5: "result parity",
    6: "performance direction",
    7: "inference",
    8: "redundancy",
    9: "property suites",
}

_outcomes = defaultdict(list)


def data_path(*parts):
    return os.path.join(DATA_DIR, *parts)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion a test belongs to")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        for n in getattr(report, "criteria", ()):
            _outcomes[n].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            status = "NOT RUN"
        elif all(r == "passed" for r in results):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {n} ({title}): {status} [{len(results or ())} check(s)]")


@pytest.fixture(scope="session")
def subset_schema():
    return express.read_schema(data_path("ifc_subset.exp"))


@pytest.fixture(scope="session")
def sequence_schema():
    return express.read_schema(data_path("process_sequence.exp"))


@pytest.fixture(scope="session")
def psd_docs():
    return psd.read_psd_dir(data_path("psd"))


@pytest.fixture(scope="session")
def forged(subset_schema, psd_docs):
    return tbox.forge(subset_schema, psd_docs)


@pytest.fixture(scope="session")
def wall_model():
    return step.read_spf(data_path("revit_wall.ifc"))


@pytest.fixture(scope="session")
def bench_spec():
    from ifcwod import bench
    return bench.load_spec(data_path("bench.ini"))


@pytest.fixture(scope="session")
def bench_run(bench_spec):
    """The bundled benchmark run once end to end; returns (report, wall seconds)."""
    import time

    from ifcwod import bench
    t0 = time.perf_counter()
    report = bench.run_bench(bench_spec)
    return report, time.perf_counter() - t0
