"""Command-line driver: schemas, determinism, config handling, exit codes.

Everything runs in-process through ``cli.main`` so coverage is honest and
fast; one test goes through the console-script entry point for wiring.
"""

from __future__ import annotations

import math
import subprocess
import sys

import numpy as np
import pytest

from brokenguide import cli

HALF_PI = math.pi / 2.0
FAST = ["--length", "2", "--level", "4", "--degree", "3", "--nval", "3"]


def run(args, capsys=None):
    code = cli.main([str(a) for a in args])
    if capsys is None:
        return code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- solve -------------------------------------------------------------------

def test_solve_writes_the_pinned_schema(tmp_path):
    out = tmp_path / "eig.csv"
    assert run(["solve", "--theta", 0.5, *FAST, "--out", out]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta,j,lambda,residual,iterations,n_dofs,mesh_level,degree"
    assert len(lines) == 4  # header + nval rows
    first = lines[1].split(",")
    assert first[0] == "0.5" and first[1] == "1"
    assert float(first[2]) < 1.5
    assert first[6] == "4" and first[7] == "3"


def test_solve_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["solve", "--theta", 0.6, *FAST, "--out", a])
    run(["solve", "--theta", 0.6, *FAST, "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_solve_stdout_when_no_out(capsys):
    code, out, _ = run(["solve", "--theta", "0.5", *FAST], capsys)
    assert code == 0
    assert out.startswith("theta,j,lambda")


def test_solve_field_export(tmp_path):
    out = tmp_path / "eig.csv"
    field = tmp_path / "field.csv"
    code = run(["solve", "--theta", 0.5, *FAST, "--out", out,
                "--field-out", field, "--nx", 40, "--ny", 12])
    assert code == 0
    lines = field.read_text().splitlines()
    assert lines[0] == "u,v,value"
    data = np.loadtxt(lines[1:], delimiter=",")
    assert data.shape[1] == 3
    assert not np.isnan(data).any()  # outside points are omitted, not padded
    assert len(lines) - 1 < 40 * 12  # the grid bounding box exceeds the domain


# --- config files ---------------------------------------------------------------

def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theta = 0.5\nlevel = 4\ndegree = 3\nlength = 2\nnval = 3\n# comment\n")
    direct = tmp_path / "direct.csv"
    merged = tmp_path / "merged.csv"
    assert run(["solve", "--config", cfg, "--out", direct]) == 0
    # a flag beats the file: nval 2 trims the table
    assert run(["solve", "--config", cfg, "--nval", 2, "--out", merged]) == 0
    assert len(direct.read_text().splitlines()) == 4
    assert len(merged.read_text().splitlines()) == 3


def test_unknown_config_key_is_refused(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theta = 0.5\nmesh_size = 9\n")
    code, _, err = run(["solve", "--config", cfg], capsys)
    assert code == 2
    assert "mesh_size" in err
    assert "theta" in err  # the allowed keys are listed


def test_malformed_config_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theta 0.5\n")
    code, _, err = run(["solve", "--config", cfg], capsys)
    assert code == 2


# --- validation ------------------------------------------------------------------

def test_right_angle_is_rejected_before_meshing(capsys):
    code, _, err = run(["solve", "--theta", HALF_PI, *FAST], capsys)
    assert code == 2
    assert "pi/2" in err


def test_theta_is_required(capsys):
    code, _, err = run(["solve", *FAST], capsys)
    assert code == 2
    assert "theta" in err


def test_bad_formulation_is_refused(capsys):
    code, _, err = run(["solve", "--theta", 0.5, "--formulation", "Donut", *FAST], capsys)
    assert code == 2


def test_descending_sweep_grid_is_refused(capsys):
    code, _, err = run(["sweep", "--theta", "0.5,0.3", *FAST], capsys)
    assert code == 2
    assert "ascending" in err


# --- sweep ------------------------------------------------------------------------

def test_sweep_schema_and_gap_column(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--theta", "0.4,0.6", *FAST, "--out", out, "--no-figures"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta,j,two_term,bo_value,fem_value,gap"
    rows = [line.split(",") for line in lines[1:]]
    assert {row[0] for row in rows} == {"0.4", "0.6"}
    for row in rows:
        if row[2] != "nan" and row[4] != "nan":
            assert float(row[5]) == pytest.approx(float(row[4]) - float(row[2]), abs=1e-12)


def test_empty_sweep_emits_bare_header(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--theta", "", *FAST, "--out", out, "--no-figures"]) == 0
    assert out.read_text().splitlines() == ["theta,j,two_term,bo_value,fem_value,gap"]


def test_sweep_parallel_output_matches_serial(tmp_path, monkeypatch):
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    monkeypatch.setenv("BROKENGUIDE_THREADS", "1")
    run(["sweep", "--theta", "0.4,0.7", *FAST, "--out", serial, "--no-figures"])
    monkeypatch.setenv("BROKENGUIDE_THREADS", "4")
    run(["sweep", "--theta", "0.4,0.7", *FAST, "--out", parallel, "--no-figures"])
    assert serial.read_bytes() == parallel.read_bytes()


def test_sweep_renders_a_figure(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", "--theta", "0.4,0.6", *FAST, "--out", out]) == 0
    png = tmp_path / "sweep.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


# --- convergence ---------------------------------------------------------------------

def test_convergence_table_and_rates(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code, outtext, _ = run(
        ["convergence", "--theta", 0.5, "--length", 2, "--levels", "2,4,8",
         "--degrees", "1,2", "--nval", 2, "--out", out, "--no-figures"],
        capsys,
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,degree,j,n_dofs,half_log10_dofs,lambda,error"
    assert "rate in h" in outtext
    assert "rate in 1/k" in outtext
    rows = [line.split(",") for line in lines[1:]]
    # the reference row (finest mesh, highest degree) has error exactly 0
    ref = [row for row in rows if row[0] == "8" and row[1] == "2" and row[2] == "1"]
    assert float(ref[0][6]) == 0.0
    for row in rows:
        assert float(row[4]) == pytest.approx(math.log10(float(row[3])) / 2.0, rel=1e-12)


# --- bounds and decay -----------------------------------------------------------------

def test_bounds_schema(tmp_path):
    out = tmp_path / "bounds.csv"
    assert run(["bounds", "--theta", "0.5", *FAST, "--out", out, "--no-figures"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta,Z_root,J_min,fem_count,certificate_value"
    theta, z_root, j_min, fem_count, certificate = lines[1].split(",")
    assert float(z_root) == pytest.approx(0.4679, abs=1e-4)
    assert int(fem_count) >= int(j_min)
    assert float(certificate) < 0.0


def test_decay_schema(tmp_path):
    out = tmp_path / "decay.csv"
    code = run(["decay", "--theta", 0.5 * HALF_PI, "--length", 5, "--level", 8,
                "--degree", 4, "--nval", 3, "--out", out])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "theta,lambda,predicted_rate,fitted_rate,fit_residual,n_slices"
    row = lines[1].split(",")
    assert float(row[2]) == pytest.approx(math.sqrt(1.0 - float(row[1])), rel=1e-12)
    assert int(row[5]) == 12
    assert (tmp_path / "decay.png").exists()


def test_decay_refuses_unbound_angle(capsys):
    # narrow domain, tiny angle: no eigenvalue below 1 on a length-1 guide
    code, _, err = run(["decay", "--theta", 0.5, "--length", 2, "--level", 2,
                        "--degree", 1, "--nval", 2], capsys)
    assert code == 1
    assert "decay" in err


# --- export and mesh ------------------------------------------------------------------

def test_export_grid_and_vtk(tmp_path):
    grid = tmp_path / "grid.csv"
    vtk = tmp_path / "field.vtk"
    code = run(["export", "--theta", 0.5, *FAST, "--out", grid, "--vtk", vtk])
    assert code == 0
    assert grid.read_text().splitlines()[0] == "u,v,value"
    text = vtk.read_text().splitlines()
    assert text[0].startswith("# vtk DataFile Version")
    assert any(line.startswith("POINTS") for line in text)
    assert any(line.startswith("CELL_TYPES") for line in text)
    assert "5" in {line.strip() for line in text}  # linear triangles


def test_mesh_summary_and_file(tmp_path, capsys):
    out = tmp_path / "mesh.txt"
    code, outtext, _ = run(["mesh", "--theta", 0.5, "--length", 2, "--level", 2, "--out", out], capsys)
    assert code == 0
    assert "vertices=" in outtext and "triangles=" in outtext
    header = out.read_text().splitlines()[0].split()
    assert len(header) == 3


def test_console_script_wiring():
    result = subprocess.run(
        [sys.executable, "-c", "import sys; from brokenguide.cli import main; sys.exit(main(['--help']))"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "solve" in result.stdout and "sweep" in result.stdout
