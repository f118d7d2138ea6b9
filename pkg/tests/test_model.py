import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from nidsi.model import (NonisoCoefficients, SpectralMode, accumulated_phase, chi, chi_dot,
                         dispersion)

reals = st.floats(-1.5, 1.5, allow_nan=False)
pos = st.floats(0.2, 2.0)
rates = st.one_of(st.just(0.0), st.floats(0.01, 1.5), st.floats(-1.5, -0.01))


def make(w0, w1, a1, kR=0.9, kI=0.2, lR=1.1, lI=-0.3):
    return SpectralMode(kR, kI, lR, lI, NonisoCoefficients(w0, w1, a1))


@given(w0=reals, w1=rates, kR=pos, kI=reals, t=st.floats(-1, 1))
def test_k_solves_its_ode(w0, w1, kR, kI, t):
    m = make(w0, w1, 0.0, kR=kR, kI=kI)
    k0 = complex(m.k(0.0))
    sol = solve_ivp(lambda s, y: [w1 * complex(y[0]) + 1j * w0], (0.0, t), [k0],
                    rtol=1e-12, atol=1e-12) if t != 0 else None
    ref = k0 if sol is None else sol.y[0, -1]
    assert abs(m.k(t) - ref) < 1e-9


def test_k_dot_matches_derivative():
    m = make(0.3, 0.7, 0.2)
    t, h = 0.4, 1e-5
    fd = (m.k(t + h) - m.k(t - h)) / (2 * h)
    assert abs(fd - m.k_dot(t)) < 1e-8


def test_product_of_real_parts_grows_exponentially():
    m = make(0.3, 0.7, 0.2)
    t = np.linspace(-1, 1, 9)
    assert np.allclose(m.k(t).real * m.l(t).real, m.kR0 * m.lR0 * np.exp(1.4 * t), rtol=1e-14)
    assert np.allclose(m.product_real(t), m.k(t).real * m.l(t).real, rtol=1e-14)


def test_omega1_zero_is_the_limit_of_the_general_branch():
    t, k0, l0 = 0.8, 0.9 + 0.2j, 1.1 - 0.3j
    exact = SpectralMode.from_initial(k0, l0, NonisoCoefficients(0.5, 0.0, 0.3))
    near = SpectralMode.from_initial(k0, l0, NonisoCoefficients(0.5, 1e-5, 0.3))
    for variant in ("full", "xi", "eta"):
        a, b = accumulated_phase(exact, t, variant), accumulated_phase(near, t, variant)
        assert abs(a - b) < 1e-4 * max(1.0, abs(a))


@pytest.mark.parametrize("variant", ["full", "xi", "eta"])
@pytest.mark.parametrize("w1", [0.0, 0.9, -1.2])
def test_accumulated_phase_against_quadrature(variant, w1):
    m = make(0.4, w1, 0.6)
    t = -0.7
    re = quad(lambda s: m.omega(s, variant).real, 0, t, epsabs=1e-13)[0]
    im = quad(lambda s: m.omega(s, variant).imag, 0, t, epsabs=1e-13)[0]
    assert abs(accumulated_phase(m, t, variant) - complex(re, im)) < 1e-11


def test_full_frequency_is_the_dispersion_relation():
    c = NonisoCoefficients(0.2, 0.5, 0.7)
    k, l = 0.9 + 0.1j, 1.3 - 0.4j
    om = dispersion(k, l, c)
    # i Omega + k^2 + l^2 - i a1 (k - l) - i omega1 = 0
    assert abs(1j * om + k**2 + l**2 - 1j * c.a1 * (k - l) - 1j * c.omega1) < 1e-14


@pytest.mark.parametrize("variant", ["full", "xi", "eta"])
def test_chi_dot_matches_time_derivative(variant):
    m = make(0.3, -0.6, 0.4)
    xi, eta, t, h = 1.3, -0.7, 0.25, 1e-5
    fd = (chi(m, xi, eta, t + h, variant) - chi(m, xi, eta, t - h, variant)) / (2 * h)
    assert abs(fd - chi_dot(m, xi, eta, t, variant)) < 1e-8


def test_from_initial_pins_values_at_zero():
    c = NonisoCoefficients(0.5, 0.8, 0.0)
    m = SpectralMode.from_initial(1.0 + 0.3j, 0.7 - 0.2j, c)
    assert abs(m.k(0.0) - (1.0 + 0.3j)) < 1e-15
    assert abs(m.l(0.0) - (0.7 - 0.2j)) < 1e-15


def test_rejects_nonpositive_real_parts_and_nonfinite():
    with pytest.raises(ValueError):
        SpectralMode(0.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        SpectralMode(1.0, 0.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        NonisoCoefficients(omega1=float("nan"))
    with pytest.raises(ValueError):
        accumulated_phase(make(0, 0, 0), 0.1, "zeta")
    with pytest.raises(ValueError):
        make(1.0, 5e-324, 0.0)


def test_restore_a0_is_a_pure_phase():
    c = NonisoCoefficients(a0=0.7)
    q = np.array([1 + 2j, -0.5j])
    out = c.restore_a0(q, 1.3)
    assert np.allclose(np.abs(out), np.abs(q))
    assert np.allclose(out, q * np.exp(-2j * 0.7 * 1.3))


@pytest.mark.parametrize("kR0, kI0, w1, w0, t, expected", [
    (1.0, 0.0, 0.0, 0.0, 7.0, 1.0),
    (1.0, 1.0, 1.0, 1.0, 0.0, 1.0),
    (2.0, 0.0, 0.5, 0.0, 2.0, 2.0 * np.e),
])
def test_k_listed_values(kR0, kI0, w1, w0, t, expected):
    m = SpectralMode(kR0, kI0, 1.0, 0.0, NonisoCoefficients(w0, w1))
    assert abs(m.k(t) - expected) < 1e-14


def test_constant_factored_frequency():
    m = SpectralMode(1.0, 0.0, 1.0, 0.0)
    assert abs(accumulated_phase(m, 1.0, "xi") - 1j) < 1e-15
    assert abs(chi(m, 2.0, 0.0, 0.0) - 2.0) < 1e-15
