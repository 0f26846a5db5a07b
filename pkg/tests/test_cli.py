"""Command line surface: subcommands, exit codes, report shape."""

import json

import pytest

from orthofold import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def _parse_report(text):
    body, sha_line = text.rsplit("report-sha256:", 1)
    doc = json.loads(body)
    return doc, sha_line.strip()


def test_catalog_lists_all_actions(capsys):
    code, out = _run(capsys, "catalog")
    assert code == 0
    for name in ("s2xs2-so3", "rp2-so2", "cp2-so3", "cp2-u1", "s2-zn(5)", "cn-tn(2)"):
        assert name in out


def test_classify_fixed_point(capsys):
    code, out = _run(capsys, "classify", "rp2-so2", "k", "--seed", "0")
    assert code == 0
    doc, sha = _parse_report(out)
    payload = doc["payload"]
    assert payload["stabilizer"] == "SO2"
    assert payload["quotient_dim"] == 2
    assert payload["singularity"] == "OrthofoldPoint"
    assert len(sha) == 64


def test_classify_toric_coordinate_point(capsys):
    code, out = _run(capsys, "classify", "cn-tn(2)", "(0,1)", "--seed", "0")
    assert code == 0
    payload = _parse_report(out)[0]["payload"]
    assert payload["quotient_dim"] == 3


def test_classify_alias_names(capsys):
    code, out = _run(capsys, "classify", "s2-zn(5)", "north", "--seed", "0")
    assert code == 0
    payload = _parse_report(out)[0]["payload"]
    assert payload["stabilizer"] == "Zn(5)"
    assert payload["singularity"] == "OrbifoldPoint(5)"


def test_unknown_action_exit_code(capsys):
    code, _ = _run(capsys, "classify", "s7-g2", "0,0,1")
    assert code == 2


def test_malformed_point_exit_code(capsys):
    code, _ = _run(capsys, "classify", "s2-zn(5)", "one,two")
    assert code == 2
    code, _ = _run(capsys, "classify", "s2-zn(5)", "1,2")
    assert code == 2


def test_analyze_payload_shape(capsys):
    code, out = _run(capsys, "analyze", "s2-zn(5)", "--samples", "25", "--seed", "3")
    assert code == 0
    doc, _ = _parse_report(out)
    assert doc["schema_version"] == "1"
    payload = doc["payload"]
    assert payload["action"] == "s2-zn(5)"
    assert payload["samples"] == 25
    assert payload["seed"] == 3
    parts = payload["partitions"]
    assert set(parts) == {"orbit_type", "isostabilizer", "klein"}
    assert payload["orbifold_criterion"] is True
    assert payload["interval_model"] is None


def test_analyze_interval_action_has_model(capsys):
    code, out = _run(capsys, "analyze", "rp2-so2", "--samples", "40", "--seed", "0")
    assert code == 0
    payload = _parse_report(out)[0]["payload"]
    model = payload["interval_model"]
    assert model["endpoints"] == [0.0, 1.0]
    pieces = [tuple(p) for s in model["strata"] for p in s]
    assert ("point", 0.0) in pieces and ("point", 1.0) in pieces
    assert any(p[0] == "open" for p in pieces)
    assert model["frontier"] is True


def test_verify_single_action(capsys, tmp_path):
    out_file = tmp_path / "report.txt"
    code, out = _run(
        capsys, "verify", "s2-zn(5)", "--samples", "30", "--seed", "1",
        "--out", str(out_file),
    )
    assert code == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out
    text = out_file.read_text()
    assert text.rstrip().splitlines()[-1].startswith("report-sha256:")


def test_payloads_identical_across_runs(capsys):
    _, first = _run(capsys, "classify", "cp2-u1", "P1", "--seed", "4")
    _, second = _run(capsys, "classify", "cp2-u1", "P1", "--seed", "4")
    d1, s1 = _parse_report(first)
    d2, s2 = _parse_report(second)
    assert s1 == s2
    d1.pop("generated_at")
    d2.pop("generated_at")
    assert d1 == d2


def test_env_seed_is_the_default(capsys, monkeypatch):
    monkeypatch.setenv("ORTHOFOLD_SEED", "11")
    _, out = _run(capsys, "classify", "s2-zn(5)", "north")
    assert _parse_report(out)[0]["payload"]["seed"] == 11
    # an explicit flag still wins
    _, out = _run(capsys, "classify", "s2-zn(5)", "north", "--seed", "2")
    assert _parse_report(out)[0]["payload"]["seed"] == 2
