"""Hirota bilinear operators and order-by-order checks of the bilinear system.

Functions ``G`` and ``F`` are sums of exponentials of expressions linear in
``(xi, eta)`` (:class:`ExpSum`), which gives exact partial derivatives.  Any
other callable ``f(xi, eta, t)`` works too; its partials are then taken by
fourth-order central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .exact import DromionParams
from .model import NonisoCoefficients, SpectralMode

_EPS = float(np.finfo(float).eps)

_FD = {
    0: (np.array([0]), np.array([1.0])),
    1: (np.arange(-2, 3), np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0),
    2: (np.arange(-2, 3), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
}


@dataclass(frozen=True)
class ExpTerm:
    """``exp(A(t) xi + B(t) eta + C(t))``.

    ``coefs(t)`` returns ``(A, B, C, A', B', C')``.
    """

    coefs: Callable

    def __post_init__(self):
        # lattices revisit a handful of times; coefficient evaluation dominates otherwise
        object.__setattr__(self, "_cached", lru_cache(maxsize=16)(self.coefs))

    def _at(self, t):
        try:
            return self._cached(t)
        except TypeError:  # unhashable t (arrays)
            return self.coefs(t)

    def __call__(self, xi, eta, t):
        A, B, C, *_ = self._at(t)
        return np.exp(A * xi + B * eta + C)

    def partial(self, a, b, c, xi, eta, t):
        A, B, C, dA, dB, dC = self._at(t)
        e = np.exp(A * xi + B * eta + C)
        poly = A**b * B**c
        if a == 0:
            return poly * e
        if a != 1:
            raise ValueError("time derivatives above first order are not supported")
        phi_t = dA * xi + dB * eta + dC
        d_poly = (b * A ** max(b - 1, 0) * dA * B**c if b else 0.0) + (
            c * A**b * B ** max(c - 1, 0) * dB if c else 0.0
        )
        return (d_poly + poly * phi_t) * e


@dataclass(frozen=True)
class ExpSum:
    terms: tuple = ()

    def __call__(self, xi, eta, t):
        out = 0.0
        for term in self.terms:
            out = out + term(xi, eta, t)
        return out + 0.0 * (np.asarray(xi) + np.asarray(eta))

    def partial(self, a, b, c, xi, eta, t):
        out = 0.0
        for term in self.terms:
            out = out + term.partial(a, b, c, xi, eta, t)
        return out + 0.0 * (np.asarray(xi) + np.asarray(eta))

    def __add__(self, other):
        return ExpSum(self.terms + other.terms)


def constant(value: complex) -> ExpSum:
    if value == 0:
        return ExpSum()
    log_v = complex(np.log(complex(value)))
    return ExpSum((ExpTerm(lambda t: (0.0, 0.0, log_v, 0.0, 0.0, 0.0)),))


def fd_partial(f: Callable, orders, xi, eta, t, step: float):
    """Tensor-product fourth-order central difference of ``f`` at a point."""
    a, b, c = orders
    (ot, wt), (ox, wx), (oy, wy) = _FD[a], _FD[b], _FD[c]
    total = 0.0
    for (i, ci), (j, cj), (k, ck) in product(zip(ot, wt), zip(ox, wx), zip(oy, wy)):
        w = ci * cj * ck
        if w != 0.0:
            total = total + w * f(xi + j * step, eta + k * step, t + i * step)
    return total / step ** (a + b + c)


@dataclass(frozen=True)
class BilinearPair:
    """Pair ``(G, F)`` with ``q = G / F``.

    ``analytic=False`` forces finite differences even if exact partials exist.
    ``scale`` is a characteristic length; the default difference step for a
    partial of total order ``d`` is ``scale * eps**(1 / (4 + d))``.
    """

    G: Callable
    F: Callable
    analytic: bool = True
    scale: float = 1.0

    def partial(self, which: str, orders, xi, eta, t, step=None):
        f = self.G if which == "G" else self.F
        if self.analytic and hasattr(f, "partial"):
            return f.partial(*orders, xi, eta, t)
        total = sum(orders)
        if total == 0:
            return f(xi, eta, t)
        if step is None:
            # balances h^4 truncation against eps / h^total roundoff
            step = self.scale * _EPS ** (1.0 / (4 + total))
        return fd_partial(f, orders, xi, eta, t, step)

    def with_fd(self) -> "BilinearPair":
        return BilinearPair(self.G, self.F, analytic=False, scale=self.scale)


def _hirota(orders, pair: BilinearPair, point, step=None):
    m, n, p = orders
    if m > 1 or n > 2 or p > 2 or min(orders) < 0:
        raise ValueError(f"orders {orders} outside (m_t <= 1, n_xi <= 2, p_eta <= 2)")
    if step is not None and step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    xi, eta, t = point
    total, size = 0.0, 0.0
    for i, j, k in product(range(m + 1), range(n + 1), range(p + 1)):
        coef = math.comb(m, i) * math.comb(n, j) * math.comb(p, k) * (-1) ** (m - i + n - j + p - k)
        g = pair.partial("G", (i, j, k), xi, eta, t, step)
        f = pair.partial("F", (m - i, n - j, p - k), xi, eta, t, step)
        total = total + coef * g * f
        size = size + abs(coef * g * f)
    return total, size


def _scaled(value, size, normalized):
    if not normalized:
        return value
    return value / size if size > 0 else value


def hirota_D(orders, pair: BilinearPair, point, step=None, normalized=False):
    """``D_t^m D_xi^n D_eta^p G.F`` at ``point = (xi, eta, t)``.

    Expanded by the product rule into ordinary partials, e.g.
    ``D_xi^2 G.F = G_xixi F - 2 G_xi F_xi + G F_xixi``.  ``normalized=True``
    divides by the summed magnitude of those terms.
    """
    return _scaled(*_hirota(orders, pair, point, step), normalized)


def residual_6a(pair: BilinearPair, point, coeffs: NonisoCoefficients, step=None,
                normalized=False):
    """Bilinear evolution operator applied to ``G.F`` at ``point``.

    Position weights multiply the bilinear derivatives at the evaluation
    point.  ``normalized=True`` divides by the summed magnitude of all
    product-rule terms, which makes the value comparable across scales.
    """
    xi, eta, t = point
    parts = {o: _hirota(o, pair, point, step)
             for o in ((1, 0, 0), (0, 2, 0), (0, 0, 2), (0, 1, 0), (0, 0, 1), (0, 0, 0))}
    w = {
        (1, 0, 0): 1j,
        (0, 2, 0): 1.0,
        (0, 0, 2): 1.0,
        (0, 1, 0): -1j * (coeffs.omega1 * xi + coeffs.a1),
        (0, 0, 1): -1j * (coeffs.omega1 * eta - coeffs.a1),
        (0, 0, 0): coeffs.omega0 * (xi + eta) - 1j * coeffs.omega1,
    }
    value = sum(w[o] * parts[o][0] for o in parts)
    size = sum(abs(w[o]) * parts[o][1] for o in parts)
    return _scaled(value, size, normalized)


def residual_6b(pair: BilinearPair, point, step=None, normalized=False):
    """``2 D_xi D_eta F.F - |G|^2`` at ``point``."""
    xi, eta, t = point
    ff = BilinearPair(pair.F, pair.F, pair.analytic, pair.scale)
    g2 = np.abs(pair.partial("G", (0, 0, 0), xi, eta, t, step)) ** 2
    dd, size = _hirota((0, 1, 1), ff, point, step)
    return _scaled((2.0 * dd - g2).real, 2.0 * size + g2, normalized)


# ---------------------------------------------------------------------------
# exact pairs


def _real_exponent(mode: SpectralMode, variant: str, log_coef: float, use_k: bool, use_l: bool):
    def coefs(t):
        A = 2.0 * mode.k(t).real if use_k else 0.0
        B = 2.0 * mode.l(t).real if use_l else 0.0
        dA = 2.0 * mode.k_dot(t).real if use_k else 0.0
        dB = 2.0 * mode.l_dot(t).real if use_l else 0.0
        C, dC = log_coef, 0.0
        for v in variant:
            C += 2.0 * mode.accumulated_phase(t, v).real
            dC += 2.0 * mode.omega(t, v).real
        return A, B, C, dA, dB, dC

    return ExpTerm(coefs)


def plane_wave(mode: SpectralMode) -> ExpSum:
    """``g1 = exp(chi)`` with the full plane-wave phase."""
    return ExpSum((ExpTerm(lambda t: (
        mode.k(t), mode.l(t), mode.accumulated_phase(t, "full"),
        mode.k_dot(t), mode.l_dot(t), mode.omega(t, "full"))),))


def soliton_f2(mode: SpectralMode) -> ExpSum:
    """``f2 = exp(chi + chi* + 2 psi)`` with ``exp(2 psi) = 1 / (16 kR lR)``."""

    def coefs(t):
        k, l, kd, ld = mode.k(t), mode.l(t), mode.k_dot(t), mode.l_dot(t)
        two_psi = -math.log(16.0 * k.real * l.real)
        two_psi_dot = -(kd.real / k.real + ld.real / l.real)
        return (2.0 * k.real, 2.0 * l.real,
                2.0 * mode.accumulated_phase(t, "full").real + two_psi,
                2.0 * kd.real, 2.0 * ld.real,
                2.0 * mode.omega(t, "full").real + two_psi_dot)

    return ExpSum((ExpTerm(coefs),))


def soliton_pair(mode: SpectralMode, analytic: bool = True) -> BilinearPair:
    scale = 1.0 / max(mode.kR0, mode.lR0)
    return BilinearPair(plane_wave(mode), constant(1.0) + soliton_f2(mode), analytic, scale)


def dromion_parts(p: DromionParams):
    """``(g, delta, f2, f4)``: ``G = g`` and ``F = delta + f2 + f4`` graded by exponent degree."""
    m = p.mode
    log_rho0 = math.log(p.rho0)
    w1 = m.coeffs.omega1

    def g_coefs(t):
        C = log_rho0 + w1 * t + m.accumulated_phase(t, "xi") + m.accumulated_phase(t, "eta")
        dC = w1 + m.omega(t, "xi") + m.omega(t, "eta")
        return m.k(t), m.l(t), C, m.k_dot(t), m.l_dot(t), dC

    g = ExpSum((ExpTerm(g_coefs),))
    f2 = ExpSum(tuple(
        _real_exponent(m, (v,), math.log(c), v == "xi", v == "eta")
        for v, c in (("xi", p.alpha), ("eta", p.beta)) if c > 0))
    f4 = ExpSum((_real_exponent(m, ("xi", "eta"), math.log(p.gamma), True, True),))
    return g, constant(p.delta), f2, f4


def dromion_pair(p: DromionParams, analytic: bool = True) -> BilinearPair:
    g, d, f2, f4 = dromion_parts(p)
    return BilinearPair(g, d + f2 + f4, analytic, 1.0 / max(p.mode.kR0, p.mode.lR0))


def zero_pair() -> BilinearPair:
    return BilinearPair(ExpSum(), constant(1.0))


# ---------------------------------------------------------------------------
# order-by-order expansion


class PerturbedMode(SpectralMode):
    """Mode whose ``kR`` grows at ``omega1 + rate_shift`` instead of ``omega1``.

    Breaks the product law ``(kR lR)_t = 2 omega1 kR lR``; meant as a negative
    control.  Phases are integrated by adaptive quadrature.
    """

    def __init__(self, base: SpectralMode, rate_shift: float):
        super().__init__(base.kR0, base.kI0, base.lR0, base.lI0, base.coeffs)
        object.__setattr__(self, "rate_shift", float(rate_shift))

    def _extra(self, t):
        w = self.coeffs.omega1
        t = np.asarray(t, dtype=float)
        return self.kR0 * (np.exp((w + self.rate_shift) * t) - np.exp(w * t))

    def k(self, t):
        return super().k(t) + self._extra(t)

    def k_dot(self, t):
        w, s = self.coeffs.omega1, self.rate_shift
        t = np.asarray(t, dtype=float)
        return super().k_dot(t) + self.kR0 * ((w + s) * np.exp((w + s) * t) - w * np.exp(w * t))

    def product_real(self, t):
        return self.k(t).real * self.l(t).real

    def accumulated_phase(self, t, variant="full"):
        re = quad(lambda s: self.omega(s, variant).real, 0.0, t, epsabs=1e-14, epsrel=1e-13)[0]
        im = quad(lambda s: self.omega(s, variant).imag, 0.0, t, epsabs=1e-14, epsrel=1e-13)[0]
        return complex(re, im)


def _dd(a, b, point):
    """``D_xi D_eta a.b`` and its term magnitude."""
    return _hirota((0, 1, 1), BilinearPair(a, b), point)


def _sum(*parts):
    return sum(v for v, _ in parts), sum(m for _, m in parts)


DEFAULT_TIMES = (-0.5, 0.0, 0.2)


def default_lattice(n_space: int = 5, times: Sequence[float] = DEFAULT_TIMES, half_width=1.0):
    """``n_space x n_space x len(times)`` sample points around the origin."""
    pts = np.linspace(-half_width, half_width, n_space)
    return [(x, y, t) for t in times for x in pts for y in pts]


def core_lattice(subject, n_space: int = 5, times: Sequence[float] = DEFAULT_TIMES, widths=1.0):
    """Lattice spanning ``widths`` core widths ``1/kR(t)``, ``1/lR(t)`` at each time.

    Centred on the dromion maximum when ``subject`` is :class:`DromionParams`,
    else on the origin.
    """
    mode = subject.mode if isinstance(subject, DromionParams) else subject
    s = np.linspace(-widths, widths, n_space)
    out = []
    for t in times:
        centre = subject.peak_location(t) if isinstance(subject, DromionParams) else None
        cx, cy = centre if centre is not None else (0.0, 0.0)
        kR, lR = float(mode.k(t).real), float(mode.l(t).real)
        out.extend((cx + a / kR, cy + b / lR, t) for a in s for b in s)
    return out


@dataclass
class OrderReport:
    """Max residual per expansion order over a sample lattice.

    ``orders`` holds residuals normalized by the magnitude of the terms that
    cancel; ``absolute`` the raw values.
    """

    orders: dict
    absolute: dict
    tolerance: float
    kind: str
    lattice_size: int

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.orders.values())

    def worst(self) -> str:
        return max(self.orders, key=self.orders.get)


def epsilon_order_check(subject, lattice=None, tolerance: float = 1e-10) -> OrderReport:
    """Check the bilinear system order by order in the expansion parameter.

    ``subject`` is a :class:`SpectralMode` (one-soliton: ``G = eps g1``,
    ``F = 1 + eps^2 f2``, all higher coefficients zero) or
    :class:`DromionParams` (``G = eps^2 g``, ``F = delta + eps^2 (alpha e^th1 +
    beta e^th2) + eps^4 gamma e^(th1+th2)``).  Nonvanishing orders are
    reported, not raised.
    """
    lattice = core_lattice(subject) if lattice is None else list(lattice)

    def evolution(g, f, coeffs):
        pair = BilinearPair(g, f)

        def check(pt):
            value = residual_6a(pair, pt, coeffs)
            rel = residual_6a(pair, pt, coeffs, normalized=True)
            return value, (abs(value) / abs(rel) if rel != 0 else 0.0)

        return check

    def square(g, pt):
        v = float(np.abs(g(*pt)) ** 2)
        return v, v

    if isinstance(subject, DromionParams):
        coeffs = subject.mode.coeffs
        g, d, f2, f4 = dromion_parts(subject)

        def twice(part):
            return 2 * part[0], 2 * part[1]

        checks = {
            "eps^2 evolution (g.delta)": evolution(g, d, coeffs),
            "eps^4 evolution (g.f2)": evolution(g, f2, coeffs),
            "eps^6 evolution (g.f4)": evolution(g, f4, coeffs),
            "eps^0 constraint": lambda pt: twice(_dd(d, d, pt)),
            "eps^2 constraint": lambda pt: twice(_sum(_dd(d, f2, pt), _dd(f2, d, pt))),
            "eps^4 constraint": lambda pt: _sum(
                twice(_sum(_dd(f2, f2, pt), _dd(d, f4, pt), _dd(f4, d, pt))),
                tuple(-x if i == 0 else x for i, x in enumerate(square(g, pt)))),
            "eps^6 constraint": lambda pt: twice(_sum(_dd(f2, f4, pt), _dd(f4, f2, pt))),
            "eps^8 constraint": lambda pt: twice(_dd(f4, f4, pt)),
        }
        kind = "dromion"
    else:
        mode = subject
        coeffs = mode.coeffs
        g1, f2, one = plane_wave(mode), soliton_f2(mode), constant(1.0)

        def order2(pt):
            a = 4 * f2.partial(0, 1, 1, *pt)
            b = float(np.abs(g1(*pt)) ** 2)
            return a - b, abs(a) + b

        checks = {
            "eps^1 linear (g1)": evolution(g1, one, coeffs),
            "eps^2 4 f2_xieta = |g1|^2": order2,
            "eps^3 source (g3 = 0)": evolution(g1, f2, coeffs),
            "eps^4 source (f4 = 0)": lambda pt: (lambda r: (2 * r[0], 2 * r[1]))(_dd(f2, f2, pt)),
        }
        kind = "soliton"
    orders, absolute = {}, {}
    for name, fn in checks.items():
        vals = [fn(pt) for pt in lattice]
        absolute[name] = max(float(abs(v)) for v, _ in vals)
        orders[name] = max(float(abs(v) / m) if m > 0 else float(abs(v)) for v, m in vals)
    return OrderReport(orders, absolute, tolerance, kind, len(lattice))


def fd_convergence(orders, pair: BilinearPair, point, steps: Sequence[float]):
    """Errors of the finite-difference ``hirota_D`` against the analytic one, with observed order."""
    exact = hirota_D(orders, pair, point)
    fd = pair.with_fd()
    errs = [float(abs(hirota_D(orders, fd, point, h) - exact)) for h in steps]
    slope = float(np.polyfit(np.log(steps), np.log(errs), 1)[0])
    return errs, slope


def lattice_residuals(pair: BilinearPair, coeffs: NonisoCoefficients, lattice=None, step=None,
                      normalized=False):
    """Max ``|residual_6a|`` and ``|residual_6b|`` over a lattice."""
    lattice = default_lattice() if lattice is None else list(lattice)
    r_a = max(float(abs(residual_6a(pair, pt, coeffs, step, normalized))) for pt in lattice)
    r_b = max(float(abs(residual_6b(pair, pt, step, normalized))) for pt in lattice)
    return r_a, r_b
