"""End-to-end CLI behavior: exit codes, outputs, overrides, determinism."""
import json

import numpy as np
import pytest

from toruslab.cli import main

PI8 = float(np.pi / 8)


def write_cfg(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def e1_cfg(tmp_path, **extra):
    data = {"map": {"linear": [[3, 0], [0, 1]], "allow_degree_one": True,
                    "cone": {"axis": 0.0, "half_width": PI8}},
            "grid_n": 32}
    data.update(extra)
    return write_cfg(tmp_path, "e1.json", data)


def test_verify_absolute_exit_zero(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["verify", "--config", e1_cfg(tmp_path), "--out", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("ABSOLUTE")
    report = json.loads((out / "ph_report.json").read_text())
    assert report["classification"] == "ABSOLUTE"
    assert report["delta_abs"] == pytest.approx(0.357, abs=1e-3)
    assert list(report)[0] == "schema_version"
    header = (out / "ph_report.csv").read_text().splitlines()[0]
    assert header == "x,y,angle,width,lambda,mu"


def test_verify_pointwise_exit_two(tmp_path):
    a = 1.5 / (2 * np.pi)
    b = 0.45 / (2 * np.pi)
    cfg = write_cfg(tmp_path, "pw.json", {
        "map": {"linear": [[3, 0], [0, 1]], "allow_degree_one": True,
                "pert_x": [{"fx": 1, "fy": 0, "sin": a}],
                "pert_y": [{"fx": 0, "fy": 1, "sin": b},
                           {"fx": 1, "fy": 1, "sin": b / 2},
                           {"fx": -1, "fy": 1, "sin": b / 2}],
                "cone": {"axis": 0.0, "half_width": PI8}},
        "grid_n": 64})
    out = tmp_path / "out"
    rc = main(["verify", "--config", cfg, "--out", str(out)])
    assert rc == 2
    report = json.loads((out / "ph_report.json").read_text())
    assert report["classification"] == "POINTWISE_ONLY"


def test_verify_not_ph_exit_three_still_reports(tmp_path):
    cfg = write_cfg(tmp_path, "n.json", {
        "map": {"linear": [[1, 0], [0, 3]], "allow_degree_one": True,
                "cone": {"axis": 0.0, "half_width": PI8}},
        "grid_n": 32})
    out = tmp_path / "out"
    rc = main(["verify", "--config", cfg, "--out", str(out)])
    assert rc == 3
    # the negative verdict is itself the product, so the report is written
    report = json.loads((out / "ph_report.json").read_text())
    assert report["classification"] == "NOT_PH"
    assert report["margin"] <= 0.0


def test_center_writes_grid_csv(tmp_path):
    out = tmp_path / "out"
    rc = main(["center", "--config", e1_cfg(tmp_path), "--out", str(out)])
    assert rc == 0
    lines = (out / "center_field.csv").read_text().splitlines()
    assert lines[0] == "x,y,angle,width"
    assert len(lines) == 1 + 32 * 32


def test_center_not_ph_writes_nothing(tmp_path):
    cfg = write_cfg(tmp_path, "n.json", {
        "map": {"linear": [[1, 0], [0, 3]], "allow_degree_one": True,
                "cone": {"axis": 0.0, "half_width": PI8}},
        "grid_n": 32})
    out = tmp_path / "out"
    rc = main(["center", "--config", cfg, "--out", str(out)])
    assert rc == 3
    assert not out.exists()


def test_semiconj_outputs(tmp_path):
    cfg = write_cfg(tmp_path, "s.json", {
        "strip": {"ell": 3, "fx_terms": [[1, 0, 0.2, 0.0], [0, 1, 0.1, 0.0]]},
        "solver": {"shape": [17, 128]}})
    out = tmp_path / "out"
    rc = main(["semiconj", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "semiconjugacy.json").read_text())
    assert rep["ell"] == 3
    assert rep["iterations"] == 20
    assert rep["contraction_estimate"] <= 1 / 3 + 1e-12
    assert rep["grid_shape"] == [17, 128]
    assert (out / "u.csv").read_text().splitlines()[0] == "x,y,u"


def test_semiconj_nonconvergence_exit_four(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "s.json", {
        "strip": {"ell": 3, "fx_terms": [[1, 0, 0.2, 0.0]]},
        "solver": {"shape": [9, 32], "max_iters": 2}})
    out = tmp_path / "out"
    rc = main(["semiconj", "--config", cfg, "--out", str(out)])
    assert rc == 4
    assert "solver failed" in capsys.readouterr().err
    assert not (out / "semiconjugacy.json").exists()


def test_annulus_finds_linear_circles(tmp_path):
    out = tmp_path / "out"
    rc = main(["annulus", "--config",
               e1_cfg(tmp_path, seeds=4, period_max=1),
               "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "circles.json").read_text())
    assert rep["count"] == 2
    starts = sorted(c["start"][0] for c in rep["circles"])
    assert starts == pytest.approx([0.0, 0.5], abs=1e-9)
    for c in rep["circles"]:
        assert c["homotopy_class"] == [0, 1]
        assert c["degree"] == 1


def test_growth_without_strip(tmp_path):
    cfg = e1_cfg(tmp_path, n_max=3,
                 growth={"segment": [[0.0, 0.5], [1.0, 0.5]]})
    out = tmp_path / "out"
    rc = main(["growth", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "growth.json").read_text())
    assert rep["lambda_fit"] == pytest.approx(3.0, abs=1e-9)
    assert "lower_bounds" not in rep
    lines = (out / "growth.csv").read_text().splitlines()
    assert lines[0] == "n,length,area,lower_bound,upper_bound"
    assert lines[1].endswith(",,")  # bounds empty without a strip


def test_growth_with_strip_completes_bounds(tmp_path):
    cfg = e1_cfg(tmp_path, n_max=3,
                 growth={"segment": [[0.0, 0.5], [1.0, 0.5]], "K": 2.0},
                 strip={"ell": 2, "fx_terms": [[1, 0, 0.15, 0.0]]},
                 solver={"shape": [17, 128]})
    out = tmp_path / "out"
    rc = main(["growth", "--config", cfg, "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "growth.json").read_text())
    assert rep["ell"] == 2
    assert rep["lambda_used"] == rep["lambda_fit"]
    assert rep["crossover_n"] == 2  # 3^n lengths beat the ell=2 envelope
    assert len(rep["lower_bounds"]) == 4


def test_growth_requires_segment(tmp_path, capsys):
    rc = main(["growth", "--config", e1_cfg(tmp_path),
               "--out", str(tmp_path / "out")])
    assert rc == 64
    assert "growth.segment" in capsys.readouterr().err


def test_bad_config_exit_sixtyfour(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "bad.json", {"grid_n": 100})
    assert main(["verify", "--config", cfg]) == 64
    assert "grid_n" in capsys.readouterr().err
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 64


def test_grid_override_validated(tmp_path, capsys):
    cfg = e1_cfg(tmp_path)
    assert main(["verify", "--config", cfg, "--grid", "100",
                 "--out", str(tmp_path / "o")]) == 64
    capsys.readouterr()
    rc = main(["verify", "--config", cfg, "--grid", "16",
               "--out", str(tmp_path / "o2")])
    assert rc == 0
    lines = (tmp_path / "o2" / "ph_report.csv").read_text().splitlines()
    assert len(lines) == 1 + 16 * 16


def test_tol_override_reaches_solver(tmp_path):
    cfg = write_cfg(tmp_path, "s.json", {
        "strip": {"ell": 3, "fx_terms": [[1, 0, 0.2, 0.0]]},
        "solver": {"shape": [9, 32]}})
    out = tmp_path / "out"
    rc = main(["semiconj", "--config", cfg, "--out", str(out),
               "--tol", "1e-4"])
    assert rc == 0
    rep = json.loads((out / "semiconjugacy.json").read_text())
    assert rep["tol"] == 1e-4
    assert rep["iterations"] < 20


def test_seed_override_recorded(tmp_path):
    out = tmp_path / "out"
    rc = main(["verify", "--config", e1_cfg(tmp_path), "--out", str(out),
               "--seed", "42"])
    assert rc == 0
    rep = json.loads((out / "ph_report.json").read_text())
    assert rep["rng_seed"] == 42


def test_reports_are_byte_identical_across_runs(tmp_path):
    cfg = e1_cfg(tmp_path, rng_seed=7)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["verify", "--config", cfg, "--out", str(a)]) == 0
    assert main(["verify", "--config", cfg, "--out", str(b)]) == 0
    for name in ("ph_report.json", "ph_report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
