import numpy as np
import pytest

from nidsi import io
from nidsi.cli import main


def run(*argv):
    return main(["-q", *map(str, argv)])


@pytest.fixture(scope="module")
def demo_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("exact")
    assert run("exact", "--out", out) == 0
    return sorted(out.glob("dromion_*.nids"), key=lambda p: io.read_snapshot(p).t)


def test_exact_writes_three_snapshots_with_growth_law(demo_files):
    snaps = [io.read_snapshot(p) for p in demo_files]
    assert [s.t for s in snaps] == [-0.5, 0.0, 0.2]
    ratio = np.abs(snaps[2].q).max() / np.abs(snaps[0].q).max()
    assert ratio == pytest.approx(np.exp(0.7), rel=1e-4)


def test_exact_soliton_steady_amplitude(tmp_path):
    assert run("exact", "--set", "solution=soliton", "--set", "omega1=0",
               "--set", "times=-0.5 0.2", "--out", tmp_path) == 0
    a, b = (np.abs(io.read_snapshot(p).q).max() for p in sorted(tmp_path.glob("*.nids")))
    assert a == b


def test_exact_usage_errors(tmp_path, capsys):
    assert run("exact", "--set", "times=", "--out", tmp_path) == 2
    assert run("exact", "--set", "gamma=0.5", "--set", "delta=1", "--out", tmp_path) == 2
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 2 and "must be positive" in err


def test_config_file_and_flag_positions(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# steady soliton\nsolution = soliton\nomega1 = 0\ntimes = 0.1\nN = 33\n")
    assert main(["--config", str(cfg), "-q", "exact", "--out", str(tmp_path)]) == 0
    assert (tmp_path / io.snapshot_name("soliton", 0.1)).exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run("exact", "--config", bad, "--out", tmp_path) == 2
    assert run("exact", "--config", tmp_path / "missing.cfg", "--out", tmp_path) == 2
    assert main(["frobnicate"]) == 2


def test_verify_pde_demo(tmp_path, capsys):
    code = run("verify", "pde", "--out", tmp_path)
    out = capsys.readouterr().out
    print(out)
    assert code == 0


def test_verify_pde_reports_order_and_exit_contract(tmp_path, capsys):
    assert run("verify", "pde", "--tolerance", "1e-3", "--out", tmp_path) == 0
    text = (tmp_path / "verify_pde.txt").read_text()
    assert "status = PASS" in text and "t=0.observed_order" in text
    assert run("verify", "pde", "--tolerance", "1e-9", "--out", tmp_path) == 1
    assert "worst offender" in capsys.readouterr().err
    assert run("verify", "pde", "--refinements", "9", "--out", tmp_path) == 2


def test_verify_bilinear(tmp_path, capsys):
    assert run("verify", "bilinear", "--out", tmp_path) == 0
    assert run("verify", "bilinear", "--set", "solution=zero", "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "evolution.max = 0\n" in out and "constraint.max = 0\n" in out


def test_verify_epsilon_and_negative_control(tmp_path, capsys):
    assert run("verify", "epsilon", "--out", tmp_path) == 0
    assert run("verify", "epsilon", "--set", "solution=soliton", "--out", tmp_path) == 0
    capsys.readouterr()
    assert run("verify", "epsilon", "--set", "solution=soliton", "--set", "rate_shift=0.3",
               "--out", tmp_path) == 1
    out = capsys.readouterr().out
    line = next(x for x in out.splitlines() if x.startswith("eps^3 source"))
    assert float(line.split()[-2]) > 1e-3


def test_verify_isospectral_reports_xi_variant(tmp_path):
    run("verify", "isospectral", "--tolerance", "1e-3", "--out", tmp_path)
    text = (tmp_path / "verify_isospectral.txt").read_text()
    assert "status = PASS" in text and "V_xi_variant.max" in text


def test_gauge_zero_coefficients_is_bitwise_identity(demo_files, tmp_path):
    assert run("gauge", *demo_files, "--set", "omega1=0", "--out", tmp_path) == 0
    for src in demo_files:
        assert (tmp_path / f"{src.stem}_iso.nids").read_bytes() == src.read_bytes()


def test_gauge_preserves_modulus(demo_files, tmp_path):
    assert run("gauge", *demo_files, "--out", tmp_path) == 0
    for src in demo_files:
        a = io.read_snapshot(src)
        b = io.read_snapshot(tmp_path / f"{src.stem}_iso.nids")
        assert np.allclose(np.abs(b.q), np.abs(a.q), rtol=1e-15, atol=0)


def test_gauge_chained_verification_on_demo(demo_files, tmp_path):
    assert run("gauge", *demo_files, "--verify", "--out", tmp_path) == 0


def test_gauge_missing_input(tmp_path):
    assert run("gauge", tmp_path / "none.nids", "--out", tmp_path) == 2


def test_figure_outputs(demo_files, tmp_path, capsys):
    assert run("figure", *demo_files, "--out", tmp_path) == 0
    files = sorted(tmp_path.glob("*_absq.txt"))
    assert len(files) == 3
    assert all(f.read_text().startswith("# |q| surface at t = ") for f in files)
    assert "diagonal tail rate" in capsys.readouterr().out
    assert run("figure", tmp_path / "missing.nids", "--out", tmp_path) == 2


def test_simulate_demo_run_coarse(tmp_path, capsys):
    assert run("simulate", "--set", "N=65", "--set", "dt=2e-3", "--out", tmp_path) == 0
    assert len(list(tmp_path.glob("sim_*.nids"))) == 3
    series = np.loadtxt(tmp_path / "amplitude.txt")
    assert series.shape == (351, 2)
    assert series[0, 0] == -0.5 and series[-1, 0] == pytest.approx(0.2)
    assert "rel_L2_vs_exact" in capsys.readouterr().out


def test_simulate_single_instant(tmp_path):
    assert run("simulate", "--set", "t_start=0", "--set", "t_end=0", "--set", "N=33",
               "--set", "dt=1e-3", "--out", tmp_path) == 0
    assert len(list(tmp_path.glob("sim_*.nids"))) == 1
    assert np.loadtxt(tmp_path / "amplitude.txt").reshape(-1, 2).shape == (1, 2)


def test_simulate_refuses_unstable_step(tmp_path):
    assert run("simulate", "--set", "dt=1e-2", "--out", tmp_path) == 2
