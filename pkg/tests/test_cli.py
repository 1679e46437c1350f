import json

import numpy as np
import pytest

from boussinesq_ist import fileio
from boussinesq_ist import solitons as sol
from boussinesq_ist.cli import main


def run(*args):
    return main([str(a) for a in args])


def test_soliton_command_matches_normal_form(tmp_path):
    out = tmp_path / "sol"
    assert run("soliton", "--k0", 2, "--x0", 0, "--tvals", "0,0.5,1", "--out", out) == 0
    fld = fileio.read_field(str(out / "solution.csv"))
    amp = 27.0 / 32.0
    xi = fld.x[None, :] - 1.25 * fld.t[:, None]
    oracle = amp / np.cosh(np.sqrt(amp / 6.0) * xi) ** 2
    assert np.max(np.abs(fld.u - oracle)) < 1e-10
    meta = json.loads((out / "meta.json").read_text())
    assert meta["amplitude"] == pytest.approx(amp)
    assert meta["speed"] == pytest.approx(1.25)


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("soliton", "--k0", 2, "--x0", 1, "--out", out, "--emit-initial") == 0
    for name in ("solution.csv", "initial.csv", "meta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_field_file_roundtrip_is_lossless(tmp_path):
    out = tmp_path / "s"
    run("soliton", "--k0", 1.5, "--x0", -2, "--xmin", -10, "--xmax", 10, "--hx", 0.05,
        "--tvals", "0,0.25", "--out", out)
    fld = fileio.read_field(str(out / "solution.csv"))
    c = sol.residue_constant_from_position(1.5, -2.0)
    ref = sol.one_soliton(1.5, c, sol.Grid(np.linspace(-10, 10, 401), [0.0, 0.25]))
    np.testing.assert_array_equal(fld.u, ref.u)
    np.testing.assert_array_equal(fld.v, ref.v)


def test_breather_command(tmp_path):
    out = tmp_path / "b"
    rc = run("breather", "--k0-re", 1.9318516525781366, "--k0-im", 0.5176380902050415,
             "--x0", 0, "--xmin", -20, "--xmax", 20, "--hx", 0.02, "--out", out)
    assert rc == 0
    fld = fileio.read_field(str(out / "solution.csv"))
    assert np.all(np.isfinite(fld.u))


def test_nsoliton_matches_soliton_through_files(tmp_path):
    c = sol.residue_constant_from_position(2.0, 0.5)
    o1, o2 = tmp_path / "n", tmp_path / "s"
    assert run("nsoliton", "--pole", f"2,0,{c.real},{c.imag}",
               "--xmin", -15, "--xmax", 15, "--hx", 0.01, "--out", o1) == 0
    assert run("soliton", "--k0", 2, "--x0", 0.5,
               "--xmin", -15, "--xmax", 15, "--hx", 0.01, "--out", o2) == 0
    u1 = fileio.read_field(str(o1 / "solution.csv")).u
    u2 = fileio.read_field(str(o2 / "solution.csv")).u
    assert np.max(np.abs(u1 - u2)) < 1e-8


def test_scatter_and_evolve_files(tmp_path):
    src = tmp_path / "sol"
    run("soliton", "--k0", 2, "--x0", 0, "--xmin", -20, "--xmax", 20, "--hx", 0.02,
        "--out", src, "--emit-initial")
    sc_out = tmp_path / "scat"
    assert run("scatter", "--data", src / "initial.csv", "--poles", "--out", sc_out) == 0
    k1, r1 = fileio.read_contour(str(sc_out / "r1_ray.csv"))
    assert np.max(np.abs(r1)) < 1e-2  # reflectionless up to quadrature noise
    rep = json.loads((sc_out / "scatter.json").read_text())
    assert abs(complex(*rep["poles"][0]) - 2.0) < 1e-3
    assert rep["T_estimate"] == "inf"
    assert all(v["generic"] for v in rep["unit_point_genericity"].values())
    ev_out = tmp_path / "ev"
    assert run("evolve", "--scatter-dir", sc_out, "--t", 0.5, "--out", ev_out) == 0
    k1e, r1e = fileio.read_contour(str(ev_out / "r1_ray.csv"))
    np.testing.assert_allclose(k1e, k1, atol=0)


def test_scatter_zero_data(tmp_path):
    x = np.linspace(-10, 10, 2001)
    rows = "\n".join(f"{xx},0,0" for xx in x)
    path = tmp_path / "zero.csv"
    path.write_text("x,u0,v0\n" + rows + "\n")
    out = tmp_path / "z"
    assert run("scatter", "--data", path, "--out", out) == 0
    for name in ("r1_ray.csv", "r2_ray.csv", "r1_circle.csv", "r2_circle.csv"):
        _, vals = fileio.read_contour(str(out / name))
        assert np.max(np.abs(vals)) == 0.0


def test_verify_command_passes_and_fails(tmp_path):
    src = tmp_path / "sol"
    run("soliton", "--k0", 2, "--x0", 0, "--tvals", "0.498,0.499,0.5,0.501,0.502",
        "--out", src)
    ok_dir = tmp_path / "ok"
    assert run("verify", "--field", src / "solution.csv", "--out", ok_dir) == 0
    rep = json.loads((ok_dir / "verify.json").read_text())
    assert all(chk["passed"] for chk in rep["checks"].values())
    bad_dir = tmp_path / "bad"
    assert run("verify", "--field", src / "solution.csv", "--tol-pde", "1e-12",
               "--out", bad_dir) == 3


def test_jumps_command(tmp_path):
    out = tmp_path / "j"
    assert run("jumps", "--samples", 5, "--out", out) == 0
    rep = json.loads((out / "jumps.json").read_text())
    assert rep["passed"]
    assert rep["max_abs_det_minus_1"] < 1e-10


def test_exit_code_config_errors(tmp_path):
    assert run("scatter", "--data", tmp_path / "missing.csv", "--out", tmp_path) == 1
    # nonuniform grid in the data file
    bad = tmp_path / "bad.csv"
    bad.write_text("x,u0,v0\n0,1,0\n1,1,0\n3,1,0\n4,1,0\n5,1,0\n6,1,0\n7,1,0\n8,1,0\n9,1,0\n")
    assert run("scatter", "--data", bad, "--out", tmp_path / "o") == 1
    # u1 with nonzero mean is rejected
    x = np.linspace(-10, 10, 401)
    rows = "\n".join(f"{xx},{np.exp(-xx**2)},{1e-3 * np.exp(-xx**2)}" for xx in x)
    massy = tmp_path / "massy.csv"
    massy.write_text("x,u0,u1\n" + rows + "\n")
    assert run("scatter", "--data", massy, "--out", tmp_path / "o2") == 1
    assert run("soliton", "--k0", 2, "--xmin", 5, "--xmax", -5, "--out", tmp_path / "g") == 1


def test_exit_code_numeric_errors(tmp_path):
    # singular residue ray for a real pole
    chi = 1.0 / (1j * ((-0.5 + 0.8660254037844387j) ** 2 * 4.0 - (-0.5 + 0.8660254037844387j)))
    c = -1.0 * chi
    assert run("soliton", "--k0", 2, "--c-re", c.real, "--c-im", c.imag,
               "--out", tmp_path / "s") == 2
    # breather pole on the singular side
    assert run("breather", "--k0-re", 1.9318516525781366, "--k0-im", -0.5176380902050415,
               "--c-re", 0.3, "--c-im", 0.2, "--xmin", -60, "--xmax", 60, "--hx", 0.1,
               "--out", tmp_path / "b") == 2


def test_ingest_with_u1(tmp_path):
    x = np.linspace(-10, 10, 401)
    u1 = -2 * x * np.exp(-(x**2))
    rows = "\n".join(f"{xx},{np.exp(-xx**2)},{uu}" for xx, uu in zip(x, u1))
    path = tmp_path / "d.csv"
    path.write_text("x,u0,u1\n" + rows + "\n")
    from boussinesq_ist.cli import ingest_initial_data

    data = ingest_initial_data(str(path))
    np.testing.assert_allclose(data.v0, np.exp(-(x**2)) - np.exp(-100.0), atol=5e-4)


def test_roundtrip_command(tmp_path):
    out = tmp_path / "rt"
    assert run("roundtrip", "--k0", 2, "--x0", -3, "--out", out) == 0
    rep = json.loads((out / "roundtrip.json").read_text())
    assert rep["passed"]
    assert min(float(v) for v in rep["pole_errors"].values()) < 1e-3


def test_console_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "boussinesq_ist.cli", "soliton", "--k0", "2",
         "--xmin", "-5", "--xmax", "5", "--hx", "0.1", "--out", str(tmp_path / "e")],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "e" / "solution.csv").exists()


def test_help_exits_clean():
    assert main(["--help"]) == 0
    assert main(["soliton", "--help"]) == 0
