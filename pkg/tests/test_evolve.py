import numpy as np
import pytest

from nidsi import kernels
from nidsi.evolve import (BlowUpError, SimConfig, StabilityError, exact_comparison,
                          peak_amplitude, simulate)
from nidsi.exact import FieldSnapshot, Grid, demo_dromion
from nidsi.model import NonisoCoefficients
from nidsi.residual import BoundaryData, _reconstruct, evolution_operator


def config(**kw):
    p = kw.pop("params", demo_dromion(1.0))
    base = dict(L=10, N=65, dt=2e-3, t_start=-0.5, t_end=-0.3, coeffs=p.mode.coeffs, params=p)
    base.update(kw)
    return SimConfig(**base)


def test_fused_rate_matches_array_operator(rng):
    g = Grid.square(4, 31)
    c = NonisoCoefficients(0.3, -0.8, 0.5)
    q = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    U, V = rng.standard_normal((2, *g.shape))
    fused = kernels.rate(q, U + V, g, c)
    ref = 1j * evolution_operator(q, U, V, g, c)
    assert np.allclose(fused[2:-2, 2:-2], ref[2:-2, 2:-2], atol=1e-10, rtol=0)
    assert np.all(fused[:2] == 0) and np.all(fused[:, -2:] == 0)


def test_fused_potentials_match_array_version(rng):
    g = Grid.square(5, 41)
    q = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    b = BoundaryData(lambda x, t: np.sin(x) * t, lambda y, t: np.cos(y) + t)
    U1, V1 = kernels.reconstruct(q, g, b, 0.3)
    U2, V2 = _reconstruct(np.abs(q) ** 2, g, b, 0.3)
    assert np.allclose(U1, U2, atol=1e-12) and np.allclose(V1, V2, atol=1e-12)


@pytest.mark.parametrize("w1", [1.0, -1.0])
def test_short_run_tracks_closed_form(w1):
    cfg = config(params=demo_dromion(w1), N=129, dt=1e-3, t_end=-0.4,
                 snapshot_times=(-0.5, -0.45, -0.4))
    res = simulate(cfg)
    assert [s.meta["step"] for s in res.snapshots] == [0, 50, 100]
    errs = [exact_comparison(cfg, s) for s in res.snapshots]
    assert errs[0] == 0.0
    assert max(errs) < 5e-4
    assert res.completed and len(res.times) == 101


def test_dt_self_convergence():
    p = demo_dromion(1.0)
    qs = []
    for n in (20, 40, 80, 160):
        cfg = SimConfig(L=10, N=33, dt=0.7 / n, t_start=-0.5, t_end=0.2, coeffs=p.mode.coeffs,
                        params=p)
        qs.append(simulate(cfg).snapshots[-1].q)
    d = [np.linalg.norm(qs[i] - qs[i + 1]) for i in range(3)]
    assert np.log2(d[1] / d[2]) > 3.5


def test_stability_guard():
    cfg = config(dt=5e-2)
    with pytest.raises(StabilityError):
        simulate(cfg)


def test_degenerate_interval_gives_one_sample():
    cfg = config(t_start=0.0, t_end=0.0, snapshot_times=(0.0,))
    res = simulate(cfg)
    assert len(res.snapshots) == 1 and len(res.peaks) == 1
    assert res.snapshots[0].t == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        config(snapshot_times=(0.5,)).validate()
    with pytest.raises(ValueError):
        config(t_end=-0.6).validate()
    with pytest.raises(ValueError):
        config(boundary="mirror").validate()
    with pytest.raises(ValueError):
        config(initial="file").validate()


def test_zero_inflow_with_compact_data():
    g = Grid.square(6, 49)
    X, Y = g.mesh()
    q0 = np.exp(-(X**2 + Y**2)).astype(complex)
    z = np.zeros(g.shape)
    snap = FieldSnapshot(g, 0.0, q0, z, z)
    cfg = SimConfig(L=6, N=49, dt=1e-3, t_start=0.0, t_end=0.02, coeffs=NonisoCoefficients(),
                    initial="file", boundary="zero", initial_snapshot=snap)
    out = simulate(cfg).snapshots[-1]
    assert np.abs(out.U[0, :]).max() < 1e-14
    assert np.abs(out.V[:, 0]).max() < 1e-14
    assert np.abs(out.U).max() > 1e-3


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_blow_up_reports_partial_output():
    g = Grid.square(6, 49)
    X, Y = g.mesh()
    q0 = (40.0 * np.exp(-(X**2 + Y**2))).astype(complex)
    z = np.zeros(g.shape)
    snap = FieldSnapshot(g, 0.0, q0, z, z)
    cfg = SimConfig(L=6, N=49, dt=3e-3, t_start=0.0, t_end=1.0, coeffs=NonisoCoefficients(),
                    initial="file", boundary="zero", initial_snapshot=snap,
                    snapshot_times=(0.0,))
    with pytest.raises(BlowUpError) as info:
        simulate(cfg)
    assert info.value.partial is not None and not info.value.partial.completed
    assert len(info.value.partial.snapshots) == 1


def test_peak_refinement_recovers_quadratic_top():
    g = Grid.square(1, 21)
    X, Y = g.mesh()
    surf = 2.0 - (X - 0.033) ** 2 - 2 * (Y + 0.041) ** 2
    assert peak_amplitude(g, surf) == pytest.approx(2.0, abs=1e-12)
