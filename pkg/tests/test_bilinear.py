import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nidsi import bilinear as bl
from nidsi.exact import demo_dromion
from nidsi.model import NonisoCoefficients, SpectralMode

coef = st.floats(-1.0, 1.0, allow_nan=False)
ODD = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (0, 1, 2), (1, 2, 2), (0, 2, 1)]


def term(a, b, c, d=0.0):
    """``exp(a xi + b eta + c t + d)``."""
    return bl.ExpTerm(lambda t: (a, b, c * t + d, 0.0, 0.0, c))


def esum(*terms):
    return bl.ExpSum(tuple(terms))


@given(st.tuples(coef, coef, coef), st.tuples(coef, coef, coef),
       st.sampled_from([(1, 0, 0), (0, 2, 0), (0, 1, 1), (1, 2, 1), (1, 0, 2), (0, 2, 2)]))
def test_exponential_identity(p1, p2, orders):
    # D_t^m D_xi^n D_eta^p e^{th1} . e^{th2} = (dt)^m (dx)^n (dy)^p e^{th1 + th2}
    pair = bl.BilinearPair(esum(term(*p1)), esum(term(*p2)))
    pt = (0.3, -0.2, 0.1)
    m, n, p = orders
    d = np.subtract(p1, p2)
    e = np.exp(np.dot(np.add(p1, p2), (pt[0], pt[1], pt[2])))
    ref = d[2] ** m * d[0] ** n * d[1] ** p * e
    assert bl.hirota_D(orders, pair, pt) == pytest.approx(ref, abs=1e-12)


@given(st.lists(st.tuples(coef, coef, coef, coef), min_size=1, max_size=3),
       st.sampled_from(ODD))
def test_odd_order_self_product_vanishes(terms, orders):
    F = esum(*(term(*c) for c in terms))
    pair = bl.BilinearPair(F, F)
    assert abs(bl.hirota_D(orders, pair, (0.4, -0.7, 0.2), normalized=True)) < 1e-14


@given(st.tuples(coef, coef, coef), st.sampled_from([(1, 0, 0), (0, 2, 0), (0, 1, 1), (1, 2, 2)]))
def test_gauge_covariance(shift, orders):
    # D(e^th G . e^th F) = e^{2 th} D(G . F) for th linear in (xi, eta, t)
    G = [(0.3, -0.5, 0.2, 0.1), (-0.4, 0.6, 0.1, -0.3)]
    F = [(0.0, 0.0, 0.0, 0.0), (0.7, 0.2, -0.1, 0.2)]
    a, b, c = shift
    moved = lambda ts: esum(*(term(x + a, y + b, z + c, w) for x, y, z, w in ts))  # noqa: E731
    base = lambda ts: esum(*(term(*t) for t in ts))  # noqa: E731
    pt = (0.2, 0.5, -0.3)
    lhs = bl.hirota_D(orders, bl.BilinearPair(moved(G), moved(F)), pt)
    rhs = np.exp(2 * (a * pt[0] + b * pt[1] + c * pt[2])) * bl.hirota_D(
        orders, bl.BilinearPair(base(G), base(F)), pt)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-12)


@pytest.fixture(params=[1.0, -1.0, 0.0])
def dromion(request):
    return demo_dromion(request.param, alpha=0.5, beta=1.5, delta=3.0, kR0=0.8, lR0=1.3,
                        kI0=0.3, lI0=-0.2, omega0=0.1, a1=0.4)


def test_dromion_pair_residuals(dromion):
    lattice = bl.core_lattice(dromion)
    assert len(lattice) == 75
    r_a, r_b = bl.lattice_residuals(bl.dromion_pair(dromion), dromion.mode.coeffs, lattice)
    assert r_a < 1e-8 and r_b < 1e-8
    n_a, n_b = bl.lattice_residuals(bl.dromion_pair(dromion), dromion.mode.coeffs, lattice,
                                    normalized=True)
    assert n_a < 1e-13 and n_b < 1e-13


def test_soliton_pair_residuals():
    mode = SpectralMode(0.8, 0.3, 1.2, -0.4, NonisoCoefficients(0.1, 0.6, 0.3))
    r_a, r_b = bl.lattice_residuals(bl.soliton_pair(mode), mode.coeffs, bl.core_lattice(mode),
                                    normalized=True)
    assert r_a < 1e-13 and r_b < 1e-13


def test_zero_pair_is_exactly_zero():
    c = NonisoCoefficients(0.3, 0.5, 0.2)
    assert bl.lattice_residuals(bl.zero_pair(), c) == (0.0, 0.0)


@pytest.mark.parametrize("orders", [(0, 2, 0), (0, 1, 1), (1, 0, 0), (1, 1, 0)])
def test_finite_difference_fallback_converges_at_fourth_order(orders):
    p = demo_dromion(1.0)
    pair = bl.dromion_pair(p)
    errs, slope = bl.fd_convergence(orders, pair, (0.3, -0.2, 0.1), [0.08, 0.04, 0.02])
    assert slope > 3.5
    assert errs[0] > errs[1] > errs[2]


def test_residuals_with_fd_partials_shrink(dromion):
    pair = bl.dromion_pair(dromion).with_fd()
    pt = bl.core_lattice(dromion)[12]
    coarse = abs(bl.residual_6a(pair, pt, dromion.mode.coeffs, step=0.05))
    fine = abs(bl.residual_6a(pair, pt, dromion.mode.coeffs, step=0.025))
    assert fine < coarse / 10
    default = abs(bl.residual_6a(pair, pt, dromion.mode.coeffs, normalized=True))
    assert default < 1e-6


def test_epsilon_orders_pass_for_valid_parameters(dromion):
    rep = bl.epsilon_order_check(dromion)
    assert rep.passed, rep.orders
    assert rep.kind == "dromion" and rep.lattice_size == 75
    mode = dromion.mode
    rep = bl.epsilon_order_check(mode)
    assert rep.passed, rep.orders


def test_epsilon_negative_control_flags_third_order_source():
    mode = bl.PerturbedMode(demo_dromion(1.0).mode, 0.3)
    assert mode.product_real(0.2) != pytest.approx(1.0 * np.exp(0.4))
    rep = bl.epsilon_order_check(mode)
    assert not rep.passed
    assert rep.orders["eps^3 source (g3 = 0)"] > 1e-3


def test_hirota_rejects_unsupported_orders():
    pair = bl.zero_pair()
    with pytest.raises(ValueError):
        bl.hirota_D((2, 0, 0), pair, (0, 0, 0))
    with pytest.raises(ValueError):
        bl.hirota_D((0, 1, 0), pair, (0, 0, 0), step=0.0)
