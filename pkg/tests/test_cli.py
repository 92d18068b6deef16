from __future__ import annotations

import json
import subprocess
import sys

import pytest

from stereohedra import cli
from stereohedra.catalog import CatalogError


def run(*args) -> int:
    return cli.main([str(a) for a in args])


def off_counts(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    return nv, nf


def test_entry_point():
    out = subprocess.run([sys.executable, "-m", "stereohedra.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()


def test_bounds_single_group(tmp_path, capsys):
    code = run("bounds", "--group", "P2_1_3", "--out", tmp_path / "r", "--no-cache")
    out, err = capsys.readouterr()
    data = json.loads((tmp_path / "r" / "bounds.json").read_text())
    (g,) = data["groups"]
    assert g["final"] == 66 and g["golden"]["final"] == 69
    # a hard mismatch is reported with exit code 2 and a machine-readable list
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["failures"]
    assert data["eps_sensitivity"]["P2_1_3:c1"] == {"1e-10": 66, "1e-09": 66, "1e-08": 66}
    assert (tmp_path / "r" / "bounds.md").exists()
    assert "eps-check" in out


def test_bounds_cache_and_determinism(tmp_path):
    args = ["bounds", "--group", "I2p3", "--no-eps-check", "--cache-dir", tmp_path / "cache"]
    run(*args, "--out", tmp_path / "a")
    assert any((tmp_path / "cache").iterdir())
    run(*args, "--out", tmp_path / "b")
    run("bounds", "--group", "I2p3", "--no-eps-check", "--no-cache", "--out", tmp_path / "c")
    a, b, c = ((tmp_path / d / "bounds.json").read_bytes() for d in "abc")
    assert a == b == c
    meta = json.loads((tmp_path / "a" / "bounds-metadata.json").read_text())
    assert "started" in meta and meta["config"]["groups"] == ["I2p3"]


def test_bounds_no_projection(tmp_path):
    run("bounds", "--group", "NQ", "--no-projection", "--no-eps-check", "--no-cache", "--out", tmp_path)
    g = json.loads((tmp_path / "bounds.json").read_text())["groups"][0]
    assert set(g["computed"]) == {"c1", "c2", "c3"}


def test_bounds_custom_stages(tmp_path):
    run("bounds", "--group", "I4_1_32", "--stages", "S1,S2,S3", "--no-eps-check", "--no-cache", "--out", tmp_path)
    g = json.loads((tmp_path / "bounds.json").read_text())["groups"][0]
    assert g["computed"] == {"c1": 255} and g["complete"] is False


def test_usage_errors(tmp_path):
    assert run("bounds", "--group", "P2_1_3", "--stages", "S4", "--out", tmp_path) == 1
    assert run("bounds", "--group", "Fm-3m", "--out", tmp_path) == 1


def test_data_failure_exit_code(monkeypatch, tmp_path):
    def broken():
        raise CatalogError("corrupted table")
    monkeypatch.setattr(cli, "validate_catalog", broken)
    assert run("bounds", "--group", "P2_1_3", "--out", tmp_path) == 4


def test_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('groups = ["P2_1_3"]\neps_check = false\ncache = false\nboundary = "open"\n')
    run("bounds", "--config", cfg, "--out", tmp_path / "o")
    data = json.loads((tmp_path / "o" / "bounds.json").read_text())
    assert data["options"]["boundary"] == "open"
    assert data["groups"][0]["final"] == 98
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 1\n")
    with pytest.raises(SystemExit):
        run("bounds", "--config", bad, "--out", tmp_path)


def test_export_prototile_and_truncated_octahedron(tmp_path):
    assert run("export", "prototile", "--type", "A", "--file", tmp_path / "A.off", "--out", tmp_path) == 0
    assert off_counts(tmp_path / "A.off")[0] == 6
    assert run("export", "truncated-octahedron", "--file", tmp_path / "to.off", "--out", tmp_path) == 0
    assert off_counts(tmp_path / "to.off") == (24, 14)


def test_export_region_and_empty(tmp_path, capsys):
    f = tmp_path / "reg.json"
    assert run("export", "region", "--group", "P2_1_3", "--type", "B", "--format", "json", "--file", f,
               "--no-cache", "--out", tmp_path) == 0
    tiles = json.loads(f.read_text())
    assert tiles and {"type", "matrix", "vertices"} <= set(tiles[0])
    code = run("export", "region", "--group", "P2_1_3", "--type", "B", "--box", "3/4,4/5",
               "--file", tmp_path / "empty.off", "--no-cache", "--out", tmp_path)
    assert code == 1
    assert "ExportEmpty" in capsys.readouterr().err


def test_export_separate_planar_cell(tmp_path):
    assert run("export", "region", "--group", "P2_1_3", "--type", "A", "--box", "0,1/2", "--separate",
               "--file", tmp_path / "t.off", "--no-cache", "--out", tmp_path) == 0
    assert len(list(tmp_path.glob("t_*.off"))) > 1
    assert run("export", "planar", "--group", "NQ", "--axis", "z", "--file", tmp_path / "p.svg",
               "--out", tmp_path) == 0
    assert (tmp_path / "p.svg").read_text().startswith("<svg")
    assert run("export", "cell", "--group", "NQ", "--point", "0,0,0", "--file", tmp_path / "c.off",
               "--out", tmp_path) == 0
    assert off_counts(tmp_path / "c.off")[1] == 14


def test_oracle_command(tmp_path, capsys):
    code = run("oracle", "--group", "P2_1_3", "--samples", "2", "--seed", "1", "--no-cache", "--out", tmp_path)
    assert code == 0
    data = json.loads((tmp_path / "oracle.json").read_text())
    assert data["groups"][0]["violations"] == []
    assert "max_observed" in capsys.readouterr().out
