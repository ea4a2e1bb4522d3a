import json
import os
import subprocess
import sys

import pytest

from ifcwod import cli, turtle
from ifcwod.rdf import OWL, RDF_TYPE
from ifcwod.tbox import IFCWOD

from conftest import data_path


def run(*args):
    return cli.main([str(a) for a in args])


def test_derive_tbox(tmp_path, capsys):
    out = tmp_path / "t.ttl"
    assert run("derive-tbox", data_path("process_sequence.exp"), "--characteristics",
               data_path("characteristics.txt"), "-o", out) == 0
    g = turtle.parse(out.read_text())
    assert (IFCWOD.isPredecessorTo_IfcProcess, RDF_TYPE, OWL.TransitiveProperty) in g
    assert (IFCWOD.isPredecessorTo_IfcProcess, OWL.inverseOf, IFCWOD.isSuccessorFrom_IfcProcess) in g


def test_derive_psets_per_file(tmp_path):
    assert run("derive-psets", data_path("psd"), "--out-dir", tmp_path) == 0
    assert sorted(os.listdir(tmp_path)) == [
        "Pset_DoorCommon.ttl", "Pset_SpaceCommon.ttl", "Pset_StackTerminalTypeCommon.ttl", "Pset_WallCommon.ttl"]


def test_convert_ntriples(tmp_path):
    out = tmp_path / "f1.nt"
    assert run("convert", data_path("revit_wall.ifc"), "--schema", data_path("ifc_subset.exp"),
               "--psd", data_path("psd"), "-o", out) == 0
    text = out.read_text()
    assert text.count("ifcwod#isDefinedBy_IfcObject>") == 8


def test_infer_and_query(tmp_path, capsys):
    ifc = tmp_path / "m.ifc"
    assert run("generate", "--walls", 2, "--external-walls", 1, "--doors", 0, "--doors-with-reference", 0,
               "--spaces", 0, "--spaces-above", 0, "--processes", 4, "-o", ifc) == 0
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["P"] == 3
    data = tmp_path / "m.ttl"
    assert run("convert", ifc, "--schema", data_path("ifc_subset.exp"), "--mode", "ifcwod", "-o", data) == 0
    inferred = tmp_path / "inf.ttl"
    assert run("infer", data, "--characteristics", data_path("characteristics.txt"), "-o", inferred) == 0
    capsys.readouterr()
    assert run("query", data_path("queries", "p_ifcwod.rq"), inferred) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "?x\t?y" and len(lines) == 1 + 6


def test_infer_budget_is_fatal(tmp_path):
    ifc = tmp_path / "m.ifc"
    run("generate", "--walls", 0, "--external-walls", 0, "--doors", 0, "--doors-with-reference", 0,
        "--spaces", 0, "--spaces-above", 0, "--processes", 30, "-o", ifc)
    data = tmp_path / "m.ttl"
    run("convert", ifc, "--schema", data_path("ifc_subset.exp"), "--mode", "ifcwod", "-o", data)
    assert run("infer", data, "--characteristics", data_path("characteristics.txt"), "--budget", 200) == 2


def test_bench_zero_pairs(tmp_path, capsys):
    spec = tmp_path / "empty.ini"
    spec.write_text("[bench]\nrepetitions = 1\n")
    out = tmp_path / "r.json"
    assert run("bench", spec, "--json", out) == 0
    assert json.loads(out.read_text())["pairs"] == []


def test_bench_parity_failure_exit_code(tmp_path):
    q = data_path("queries")
    spec = tmp_path / "bad.ini"
    spec.write_text(f"[synthetic]\nwalls = 10\nexternal_walls = 3\ndoors = 2\ndoors_with_reference = 1\n"
                    f"spaces = 0\nspaces_above = 0\nprocesses = 0\n[bench]\nrepetitions = 1\n"
                    f"[dataset]\nschema = {data_path('ifc_subset.exp')}\npsd = {data_path('psd')}\n"
                    f"[pair bad]\nbaseline = {q}/q1_ifcowl.rq\nifcwod = {q}/q2_ifcwod.rq\n")
    assert run("bench", spec) == 3


@pytest.mark.parametrize("args,code", [
    (["frobnicate"], 1),
    (["convert", "missing.ifc", "--schema", "missing.exp"], 1),
    (["query", "missing.rq", "missing.ttl"], 1),
])
def test_usage_errors(args, code, capsys):
    with pytest.raises(SystemExit) as e:
        code_ = run(*args)
        raise SystemExit(code_)
    assert e.value.code == code


def test_parse_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ifc"
    bad.write_text("ISO-10303-21;\nHEADER;\nENDSEC;\nDATA;\n#1=IFCX(;\nENDSEC;\nEND-ISO-10303-21;\n")
    assert run("convert", bad, "--schema", data_path("ifc_subset.exp")) == 2
    err = capsys.readouterr().err
    assert "line 5" in err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "ifcwod.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "derive-tbox" in r.stdout
