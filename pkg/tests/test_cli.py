import json

import pytest

from qdlab.cli import main


def read(path):
    return path.read_bytes()


def test_dirichlet_passes_and_writes_outputs(tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["dirichlet", "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "passed"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["experiment"] == "dirichlet"
    assert (out / "competitors.csv").exists() and (out / "competitors.svg").exists()
    assert all("passed" in c for c in summary["checks"])


def test_rerun_is_bit_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["dirichlet", "--seed", "3", "--out", str(tmp_path / name)]) == 0
        assert main(["thm-6-2", "--grid", "32", "--out", str(tmp_path / name / "t")]) in (0, 1)
    assert read(tmp_path / "a" / "competitors.csv") == read(tmp_path / "b" / "competitors.csv")
    assert read(tmp_path / "a" / "t" / "two_quadrilaterals.csv") == read(tmp_path / "b" / "t" / "two_quadrilaterals.csv")


def test_seed_changes_the_catalogue(tmp_path):
    main(["dirichlet", "--seed", "1", "--out", str(tmp_path / "a")])
    main(["dirichlet", "--seed", "2", "--out", str(tmp_path / "b")])
    assert read(tmp_path / "a" / "competitors.csv") != read(tmp_path / "b" / "competitors.csv")


def test_violated_invariant_is_named(tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["thm-6-2", "--grid", "8", "--out", str(out)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "failed"
    assert "heights_stable_under_grid_doubling" in report["violated"]
    assert json.loads((out / "failure.json").read_text())["violated"] == report["violated"]


def test_config_overrides_flags_and_passes_options(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    out = tmp_path / "conf"
    cfg.write_text(json.dumps({"out": str(out), "radii": [0.5], "catalog": ["(dz2)"]}))
    assert main(["confinement", "--out", str(tmp_path / "ignored"), "--config", str(cfg)]) == 0
    rows = (out / "confinement.csv").read_text().strip().splitlines()
    assert len(rows) == 2 and rows[1].startswith("(dz2),0.5,")


def test_library_errors_exit_with_the_invariant(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"catalog": ["(mul (dz2)"]}))
    assert main(["confinement", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 2
    assert json.loads(capsys.readouterr().out)["invariant"] == "ExpressionError"


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["dirichlet", "--config", str(cfg)]) == 2
    assert json.loads(capsys.readouterr().out)["invariant"] == "valid-config"


def test_unknown_experiment():
    with pytest.raises(SystemExit) as e:
        main(["example-9-9"])
    assert e.value.code == 2
