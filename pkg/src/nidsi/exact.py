"""Closed-form line soliton, explode-decay dromion, potentials and the gauge map.

Notation: ``theta1 = chi1 + conj(chi1)`` and ``theta2 = chi2 + conj(chi2)`` are the
real exponents entering ``F``.  Quantities that could overflow are evaluated in
log space, so grids far from the structure stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .model import NonisoCoefficients, SpectralMode, chi, chi_dot


class DegenerateDromionError(ValueError):
    """``delta*gamma - alpha*beta <= 0``: the amplitude squared is not positive."""


def _log(c):
    return -np.inf if c == 0 else math.log(c)


# ---------------------------------------------------------------------------
# line soliton


@dataclass(frozen=True)
class LineSolitonParams:
    mode: SpectralMode

    def psi(self, t):
        """Shift with ``exp(2 psi) = 1 / (16 kR lR)``."""
        return -0.5 * np.log(16.0 * self.mode.product_real(t))


def _sech(s):
    a = np.abs(s)
    e = np.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def line_soliton(p: LineSolitonParams, xi, eta, t):
    """Return ``(q, U, V)`` of the one-soliton.

    ``U = 2 lR^2 sech^2`` and ``V = 2 kR^2 sech^2`` follow from
    ``U = 2 (log F)_eta_eta``, ``V = 2 (log F)_xi_xi``.
    """
    m = p.mode
    c = chi(m, xi, eta, t, "full")
    s = c.real + p.psi(t)
    sech = _sech(s)
    kR, lR = m.k(t).real, m.l(t).real
    q = 2.0 * np.sqrt(kR * lR) * sech * np.exp(1j * c.imag)
    return q, 2.0 * lR**2 * sech**2, 2.0 * kR**2 * sech**2


def line_soliton_dt(p: LineSolitonParams, xi, eta, t):
    """Analytic ``dq/dt`` of the line soliton."""
    m = p.mode
    q, _, _ = line_soliton(p, xi, eta, t)
    c = chi(m, xi, eta, t, "full")
    cdot = chi_dot(m, xi, eta, t, "full")
    s = c.real + p.psi(t)
    s_dot = cdot.real - m.coeffs.omega1
    return q * (cdot - 2.0 * expit(2.0 * s) * s_dot)


# ---------------------------------------------------------------------------
# dromion


@dataclass(frozen=True)
class DromionParams:
    """The (1,1) dromion: ``F = delta + alpha e^th1 + beta e^th2 + gamma e^(th1+th2)``."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    mode: SpectralMode

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.gamma <= 0 or self.delta <= 0:
            raise ValueError("gamma and delta must be positive")
        if self.discriminant <= 0:
            raise DegenerateDromionError(
                f"delta*gamma - alpha*beta = {self.discriminant:g} must be positive"
            )

    @property
    def discriminant(self) -> float:
        return self.delta * self.gamma - self.alpha * self.beta

    @property
    def rho0(self) -> float:
        return 4.0 * math.sqrt(self.mode.kR0 * self.mode.lR0 * self.discriminant)

    def rho(self, t):
        """Amplitude ``rho0 * exp(omega1 t)``; squares to ``16 kR lR (delta gamma - alpha beta)``."""
        return self.rho0 * np.exp(self.mode.coeffs.omega1 * np.asarray(t, dtype=float))

    def peak(self, t):
        """Maximum of ``|q|`` over the plane at time ``t``."""
        return self.rho(t) / (
            2.0 * (math.sqrt(self.delta * self.gamma) + math.sqrt(self.alpha * self.beta))
        )

    def peak_location(self, t):
        """``(xi, eta)`` where ``|q|`` attains :meth:`peak`."""
        m = self.mode
        u = 0.5 * math.log(self.delta / self.gamma)
        if self.alpha > 0 and self.beta > 0:
            v = 0.5 * math.log(self.beta / self.alpha)
        elif self.alpha == self.beta:
            v = 0.0
        else:  # maximum sits at infinity along one ridge
            return None
        # u = chi1R + chi2R, v = chi1R - chi2R at the maximiser
        c1 = 0.5 * (u + v) - m.accumulated_phase(t, "xi").real
        c2 = 0.5 * (u - v) - m.accumulated_phase(t, "eta").real
        return float(c1 / m.k(t).real), float(c2 / m.l(t).real)


def _thetas(p: DromionParams, xi, eta, t):
    c1 = chi(p.mode, xi, 0.0, t, "xi")
    c2 = chi(p.mode, 0.0, eta, t, "eta")
    return c1, c2, 2.0 * c1.real, 2.0 * c2.real


def _log_parts(p: DromionParams, th1, th2):
    """``log F`` and the logistic weights ``d log F / d theta_{1,2}``."""
    la, lb, lg, ld = _log(p.alpha), _log(p.beta), _log(p.gamma), _log(p.delta)
    # F = A(th2) + B(th2) e^th1 = C(th1) + D(th1) e^th2
    log_a = np.logaddexp(ld, lb + th2)
    log_b = np.logaddexp(la, lg + th2)
    log_c = np.logaddexp(ld, la + th1)
    log_d = np.logaddexp(lb, lg + th1)
    log_f = np.logaddexp(log_a, log_b + th1)
    s1 = expit(log_b + th1 - log_a)
    s2 = expit(log_d + th2 - log_c)
    return log_f, s1, s2


def dromion(p: DromionParams, xi, eta, t):
    """Complex field ``q = rho(t) e^(chi1 + chi2) / F``."""
    c1, c2, th1, th2 = _thetas(p, xi, eta, t)
    log_f, _, _ = _log_parts(p, th1, th2)
    return p.rho(t) * np.exp(c1 + c2 - log_f)


def dromion_dt(p: DromionParams, xi, eta, t):
    m = p.mode
    c1, c2, th1, th2 = _thetas(p, xi, eta, t)
    log_f, s1, s2 = _log_parts(p, th1, th2)
    d1 = chi_dot(m, xi, 0.0, t, "xi")
    d2 = chi_dot(m, 0.0, eta, t, "eta")
    q = p.rho(t) * np.exp(c1 + c2 - log_f)
    rate = d1 + d2 + m.coeffs.omega1 - 2.0 * (s1 * d1.real + s2 * d2.real)
    return q * rate


def dromion_potentials(p: DromionParams, xi, eta, t):
    """``U = 2 (log F)_eta_eta`` and ``V = 2 (log F)_xi_xi`` in closed form."""
    _, _, th1, th2 = _thetas(p, xi, eta, t)
    _, s1, s2 = _log_parts(p, th1, th2)
    kR, lR = p.mode.k(t).real, p.mode.l(t).real
    return 8.0 * lR**2 * s2 * (1.0 - s2), 8.0 * kR**2 * s1 * (1.0 - s1)


def dromion_field(p: DromionParams, xi, eta, t):
    U, V = dromion_potentials(p, xi, eta, t)
    return dromion(p, xi, eta, t), U, V


def boundary_potentials(p: DromionParams, xi, eta, t):
    """Inflow limits ``u1(xi, t) = V(xi, eta -> -inf)``, ``u2(eta, t) = U(xi -> -inf, eta)``."""
    _, _, th1, th2 = _thetas(p, xi, eta, t)
    la, lb, ld = _log(p.alpha), _log(p.beta), _log(p.delta)
    s1 = expit(la + th1 - ld)
    s2 = expit(lb + th2 - ld)
    kR, lR = p.mode.k(t).real, p.mode.l(t).real
    return 8.0 * kR**2 * s1 * (1.0 - s1), 8.0 * lR**2 * s2 * (1.0 - s2)


# ---------------------------------------------------------------------------
# gauge map


def gauge_phase(xi, eta, t, coeffs: NonisoCoefficients):
    w1, a1 = coeffs.omega1, coeffs.a1
    return 0.25 * w1 * (xi**2 + eta**2) + 0.5 * a1 * (xi - eta) + 0.5 * a1**2 * t


def gauge_to_isospectral(q, U, V, xi, eta, t, coeffs: NonisoCoefficients):
    """Map a solution of the non-isospectral system onto isospectral DSI.

    Returns ``(q_hat, U_hat, V_hat)``.  With all coefficients zero the inputs
    are returned unchanged (same objects).
    """
    w0, w1, a1 = coeffs.omega0, coeffs.omega1, coeffs.a1
    if w0 == 0 and w1 == 0 and a1 == 0:
        return q, U, V
    q_hat = q * np.exp(-1j * gauge_phase(xi, eta, t, coeffs))
    U_hat = U + 0.25 * w1**2 * eta**2 - (0.5 * a1 * w1 - w0) * eta
    V_hat = V + 0.25 * w1**2 * xi**2 + (0.5 * a1 * w1 + w0) * xi
    return q_hat, U_hat, V_hat


def gauge_dt(q, q_t, xi, eta, t, coeffs: NonisoCoefficients):
    """Time derivative of the gauged field given ``q`` and ``q_t``."""
    phase = np.exp(-1j * gauge_phase(xi, eta, t, coeffs))
    return (q_t - 0.5j * coeffs.a1**2 * q) * phase


# ---------------------------------------------------------------------------
# grids and snapshots


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid; arrays are indexed ``[i_xi, j_eta]`` (eta fastest)."""

    xi: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("xi", "eta"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1 or a.size < 2:
                raise ValueError(f"{name} must be a 1-d array of at least two nodes")
            d = np.diff(a)
            if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise ValueError(f"{name} spacing must be positive and uniform")
            object.__setattr__(self, name, a)

    @classmethod
    def square(cls, L: float, N: int):
        x = np.linspace(-L, L, int(N))
        return cls(x, x.copy())

    @property
    def h_xi(self) -> float:
        return (self.xi[-1] - self.xi[0]) / (self.xi.size - 1)

    @property
    def h_eta(self) -> float:
        return (self.eta[-1] - self.eta[0]) / (self.eta.size - 1)

    @property
    def shape(self):
        return self.xi.size, self.eta.size

    def mesh(self):
        return np.meshgrid(self.xi, self.eta, indexing="ij")


@dataclass(frozen=True)
class FieldSnapshot:
    grid: Grid
    t: float
    q: np.ndarray
    U: np.ndarray
    V: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("q", "U", "V"):
            a = getattr(self, name)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {a.shape}, grid is {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def L(self) -> float:
        return float(self.grid.xi[-1])

    @property
    def N(self) -> int:
        return self.grid.xi.size


def snapshot(solution, params, grid: Grid, t: float) -> FieldSnapshot:
    """Evaluate ``"dromion"`` or ``"soliton"`` on ``grid`` at time ``t``."""
    X, Y = grid.mesh()
    if solution == "dromion":
        q, U, V = dromion_field(params, X, Y, t)
    elif solution == "soliton":
        q, U, V = line_soliton(params, X, Y, t)
    else:
        raise ValueError(f"unknown solution kind {solution!r}")
    return FieldSnapshot(grid, float(t), q, U, V)


def exact_field(solution, params):
    """Return ``(field(xi, eta, t) -> (q, U, V), dq/dt(xi, eta, t))`` for a kind."""
    if solution == "dromion":
        return (lambda x, y, t: dromion_field(params, x, y, t)), (
            lambda x, y, t: dromion_dt(params, x, y, t)
        )
    if solution == "soliton":
        return (lambda x, y, t: line_soliton(params, x, y, t)), (
            lambda x, y, t: line_soliton_dt(params, x, y, t)
        )
    raise ValueError(f"unknown solution kind {solution!r}")


def demo_dromion(omega1: float = 1.0, **overrides) -> DromionParams:
    """Default demonstration dromion (``omega1 = +1`` explodes, ``-1`` decays)."""
    coeffs = NonisoCoefficients(
        omega0=overrides.pop("omega0", 0.0), omega1=omega1, a1=overrides.pop("a1", 0.0)
    )
    mode = SpectralMode(
        overrides.pop("kR0", 1.0),
        overrides.pop("kI0", 0.0),
        overrides.pop("lR0", 1.0),
        overrides.pop("lI0", 0.0),
        coeffs,
    )
    values = dict(alpha=1.0, beta=1.0, gamma=2.0, delta=2.0)
    values.update(overrides)
    return DromionParams(mode=mode, **values)


def refine_peak(field, grid: Grid, t: float):
    """Maximum of ``|field(xi, eta, t)|`` near the grid maximiser.

    ``field`` returns the complex ``q``.  The grid argmax seeds a bounded
    local search within one cell.  Returns ``(peak, (xi, eta))``.
    """
    from scipy.optimize import minimize

    X, Y = grid.mesh()
    absq = np.abs(field(X, Y, t))
    i, j = np.unravel_index(np.argmax(absq), absq.shape)
    x0 = np.array([grid.xi[i], grid.eta[j]])
    hx, hy = grid.h_xi, grid.h_eta
    res = minimize(lambda z: -abs(complex(field(z[0], z[1], t))), x0, method="L-BFGS-B",
                   bounds=[(x0[0] - hx, x0[0] + hx), (x0[1] - hy, x0[1] + hy)],
                   options={"ftol": 1e-15, "gtol": 1e-12})
    best = max(-res.fun, float(absq[i, j]))
    return best, (float(res.x[0]), float(res.x[1]))
