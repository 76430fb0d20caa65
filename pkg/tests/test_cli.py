import json
import subprocess
import sys

import numpy as np
import pytest

from qgeom.bitangents import bitangents_through_point
from qgeom.chow import run_ledger
from qgeom.cli import RunConfig, UsageError, canonical, main, parse_point, version
from qgeom.poly import ProjPoint
from qgeom.surface import QuarticSurface, classify_point, random_quartic


def run_cli(args, tmp_path, name="out.json"):
    path = tmp_path / name
    code = main(list(args) + ["--json", str(path)])
    doc = json.loads(path.read_text()) if path.exists() else None
    return code, doc, path


def test_random_quartic_matches_library(tmp_path):
    code, doc, _ = run_cli(["random-quartic", "--seed", "3"], tmp_path)
    assert code == 0
    assert doc["tool"] == "qgeom" and doc["version"] == version()
    assert doc["config"]["seed"] == 3 and doc["config"]["command"] == "random-quartic"
    assert QuarticSurface.from_json(doc["result"]).F == random_quartic(3).F


@pytest.mark.parametrize("args", [
    ["random-quartic", "--seed", "42"],
    ["bitangents", "--seed", "2", "--rng", "5"],
])
def test_output_is_byte_identical_across_runs(tmp_path, args):
    _, _, a = run_cli(args, tmp_path, "a.json")
    _, _, b = run_cli(args, tmp_path, "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_bitangents_match_library(tmp_path):
    code, doc, _ = run_cli(["bitangents", "--seed", "1", "--point", "1,2,-1,0.5"], tmp_path)
    assert code == 0
    rep = bitangents_through_point(random_quartic(1), ProjPoint([1, 2, -1, 0.5]), seed=0)
    assert len(doc["result"]["bitangents"]) == len(rep.bitangents) == 12
    assert doc["result"]["bitangents"] == canonical([c.to_json() for c in rep.bitangents])


def test_surface_file_round_trip(tmp_path):
    _, _, surf = run_cli(["random-quartic", "--seed", "4"], tmp_path, "surf.json")
    code, doc, _ = run_cli(["classify", "--surface", str(surf), "--rng", "2"], tmp_path)
    assert code == 0
    p = ProjPoint([complex(re, im) for re, im in doc["result"]["point"]])
    assert doc["result"]["class"] == "GeneralNode"
    assert classify_point(random_quartic(4), p)[0].name == "GeneralNode"


def test_ledger_command(tmp_path, capsys):
    code, doc, _ = run_cli(["ledger"], tmp_path)
    out = capsys.readouterr().out
    assert code == 0 and doc["pass"]
    assert len(doc["result"]["rows"]) == 15
    assert doc["result"] == canonical(run_ledger().to_json())
    first = out.splitlines()[0]
    assert first.startswith(f"qgeom {version()} ledger config=")
    assert out.strip().splitlines()[-1] == "PASS"


def test_section_on_swallowtail_fixture(tmp_path):
    code, doc, _ = run_cli(["section", "--fixture", "swallowtail", "--point", "1,0,0,0"], tmp_path)
    assert code == 0
    prof = doc["result"]["profile"]
    assert [r["type"] for r in prof["singularities"]] == ["A3"]
    assert prof["genus"] == 1


def test_gauss_double_command(tmp_path):
    code, doc, _ = run_cli(["gauss-double", "--seed", "1", "--seeds", "20", "--steps", "4"], tmp_path)
    assert code == 0
    res = doc["result"]
    assert res["certified"] == len(res["pairs"]) > 0
    assert all(res["osculation"])
    assert res["retrace_deviation"] < 1e-6


def test_threads_do_not_change_output(tmp_path):
    args = ["report", "--seed", "1", "--seeds", "10", "--samples", "4"]
    code1, _, a = run_cli(args + ["--threads", "1"], tmp_path, "t1.json")
    code2, _, b = run_cli(args + ["--threads", "3"], tmp_path, "t3.json")
    assert code1 == code2 == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da["config"].pop("threads"), db["config"].pop("threads")
    assert da == db


def test_missing_surface_source_is_usage_error(capsys):
    assert main(["bitangents"]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_conflicting_sources_rejected():
    with pytest.raises(SystemExit) as info:
        main(["classify", "--seed", "1", "--fixture", "fermat"])
    assert info.value.code == 2


def test_bad_json_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["classify", "--surface", str(bad)]) == 2
    assert "schema error" in capsys.readouterr().err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"F": {"nonsense": 1}}))
    assert main(["classify", "--surface", str(wrong)]) == 2


def test_missing_file_is_usage_error(tmp_path):
    assert main(["classify", "--surface", str(tmp_path / "nope.json")]) == 2


@pytest.mark.parametrize("kwargs", [{"tol": 0}, {"threads": 0}])
def test_invalid_config(kwargs):
    with pytest.raises(UsageError):
        RunConfig("classify", seed=1, **kwargs)


@pytest.mark.parametrize("text, ok", [
    ("1,0,0,0", True),
    ("1, 2, 3j, 4", True),
    ("1,2,3", False),
    ("a,b,c,d", False),
])
def test_parse_point(text, ok):
    if ok:
        assert len(parse_point(text)) == 4
    else:
        with pytest.raises(UsageError):
            parse_point(text)


def test_canonical_rounding():
    assert canonical(0.1 + 0.2) == 0.3
    assert canonical({"a": np.float64(1.0), "b": np.bool_(True), "c": 1 + 2j}) == {"a": 1.0, "b": True, "c": [1.0, 2.0]}


def test_module_entry_point_reports_version():
    out = subprocess.run([sys.executable, "-m", "qgeom", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip() == f"qgeom {version()}"
