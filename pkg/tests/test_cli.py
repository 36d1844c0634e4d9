"""End-to-end tests of the haar-factor command line."""

import json

import pytest

from haar_factor.core.dyadic import ROOT, DyadicInterval
from haar_factor.core.haar_space import HaarVector
from haar_factor.core.jones import IntervalFamily
from haar_factor.main import main

L, R = DyadicInterval(1, 0), DyadicInterval(1, 1)


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep a user's ~/.haar_factor.json out of the runs."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))


def stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_generate_factor_verify(tmp_path, capsys):
    op = str(tmp_path / "op.json")
    cert = str(tmp_path / "cert.json")
    assert main(["generate", "--kind", "identity", "--depth", "4", "-o", op]) == 0
    assert json.loads(open(op).read())["generator"]["kind"] == "identity"

    assert main(["factor", "--operator", op, "--delta", "1", "--eta", "1", "--index-depth", "1", "-o", cert]) == 0
    report = json.loads(open(cert).read())
    assert report["kind"] == "factor"
    assert report["residual"] == "0"

    capsys.readouterr()
    assert main(["verify", "--input", cert, "--operator", op]) == 0
    replay = stdout_json(capsys)
    assert replay["passed"] is True
    assert replay["report_kind"] == "factor"


def test_tampered_certificate_fails_verification(tmp_path, capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 4})
    cert = str(tmp_path / "cert.json")
    assert main(["factor", "--operator", op, "--delta", "1", "--eta", "1", "-o", cert]) == 0
    report = json.loads(open(cert).read())
    report["contraction"] = "1/3"
    tampered = write_file("tampered.json", report)
    capsys.readouterr()
    assert main(["verify", "--input", tampered, "--operator", op]) == 1
    assert stdout_json(capsys)["passed"] is False


def test_verify_compares_against_the_stored_feasibility(tmp_path, capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 4})
    cert = str(tmp_path / "cert.json")
    assert main(["factor", "--operator", op, "--delta", "1", "--eta", "1", "-o", cert]) == 0
    report = json.loads(open(cert).read())
    assert report["feasible"] is True

    report["feasible"] = False
    capsys.readouterr()
    assert main(["verify", "--input", write_file("flipped.json", report), "--operator", op]) == 1
    replay = stdout_json(capsys)
    assert replay["passed"] is True
    assert replay["recorded_feasible"] is False

    del report["feasible"]
    assert main(["verify", "--input", write_file("bare.json", report), "--operator", op]) == 2


def test_infeasible_run_exits_3(capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 1})
    assert main(["factor", "--operator", op, "--delta", "1", "--eta", "1", "--index-depth", "1"]) == 3
    report = stdout_json(capsys)
    assert report["kind"] == "infeasible"
    assert "suggested_depth" in report["report"]


def test_diagonalize_and_verify(tmp_path, capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 4})
    out = str(tmp_path / "diag.json")
    assert main(["diagonalize", "--operator", op, "--delta", "1", "--eta", "1", "--index-depth", "1", "-o", out]) == 0
    assert [r["level"] for r in json.loads(open(out).read())["certificate"]["per_index"]] == [0, 1, 2]
    assert main(["verify", "--input", out, "--operator", op]) == 0


def test_primary_on_a_generator_spec(capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 6})
    assert main(["primary", "--operator", op, "--eta", "1", "--block-depth", "2"]) == 0
    report = stdout_json(capsys)
    assert report["kind"] == "primary"
    assert report["choice"] == "T"


def test_norms(capsys, write_file):
    path = write_file("f.json", (HaarVector.basis(L) + HaarVector.basis(R)).to_json())
    assert main(["norms", "--input", path]) == 0
    report = stdout_json(capsys)
    assert report["sl_inf_norm_sq"] == "1"
    assert report["support"] == 2


def test_check_jones_exit_codes(capsys, write_file):
    good = write_file("good.json", IntervalFamily.identity(2).to_json())
    assert main(["check-jones", "--input", good]) == 0
    assert stdout_json(capsys)["kappa"] == "1"
    bad = write_file("bad.json", IntervalFamily({ROOT: [L, DyadicInterval(2, 1)]}).to_json())
    assert main(["check-jones", "--input", bad]) == 1


def test_reiterate(capsys, write_file):
    data = {
        "base": IntervalFamily.identity(2).to_json(),
        "selector": {"0": [ROOT.to_json()], "1": [L.to_json()], "2": [R.to_json()]},
    }
    assert main(["reiterate", "--input", write_file("r.json", data)]) == 0
    assert stdout_json(capsys)["kind"] == "reiterate"


def test_build_gg_and_figure(tmp_path, capsys, write_file):
    spec = write_file("gg.json", {"parents": [ROOT.to_json()], "side": "left", "level": 2})
    cover = str(tmp_path / "cover.json")
    assert main(["build-gg", "--input", spec, "-o", cover]) == 0
    report = json.loads(open(cover).read())
    assert report["kind"] == "gg_cover"
    assert report["cover"] == [{"n": 2, "k": 0}, {"n": 2, "k": 1}]

    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    capsys.readouterr()
    assert main(["figure", "--input", cover, "-o", str(first)]) == 0
    assert stdout_json(capsys)["kind"] == "figure"
    assert main(["figure", "--input", cover, "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().lstrip().startswith("<?xml")


def test_input_errors_exit_2(tmp_path, write_file):
    empty = write_file("empty.json", {"kind": "gg_cover", "side": "left", "level": 1, "parents": [], "halves": [], "cover": []})
    assert main(["figure", "--input", empty, "-o", str(tmp_path / "x.svg")]) == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["norms", "--input", str(broken)]) == 2
    assert main(["norms", "--input", str(tmp_path / "missing.json")]) == 2

    op = write_file("op.json", {"kind": "identity", "depth": 2})
    other = write_file("other.json", {"kind": "norms"})
    assert main(["verify", "--input", other, "--operator", op]) == 2
    assert main(["factor", "--operator", op, "--delta", "-1", "--eta", "1"]) == 2


def test_verbose_diagonalize_prints_a_block_table(capsys, write_file):
    op = write_file("op.json", {"kind": "identity", "depth": 3})
    assert main(["-v", "diagonalize", "--operator", op, "--delta", "1", "--eta", "1"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["kind"] == "diagonalize"
    assert "Blocks" in captured.err
