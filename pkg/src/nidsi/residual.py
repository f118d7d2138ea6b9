"""Grid residuals of the non-isospectral and isospectral DSI systems.

Spatial derivatives are central differences (fourth order unless asked
otherwise); residuals are reported on interior nodes only, excluding a margin
of half the stencil width.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import stencils
from .exact import FieldSnapshot, Grid
from .model import NonisoCoefficients

log = logging.getLogger(__name__)


class EdgeDecayError(ValueError):
    """``|q|^2`` at an inflow edge exceeds the configured floor."""

    def __init__(self, edge_value: float, floor: float):
        super().__init__(
            f"|q|^2 at inflow edge is {edge_value:.3e}, above floor {floor:.3e}; widen the domain"
        )
        self.edge_value = edge_value
        self.floor = floor


@dataclass(frozen=True)
class BoundaryData:
    """Inflow values ``u1(xi, t)`` of ``V`` and ``u2(eta, t)`` of ``U``."""

    u1: Callable
    u2: Callable

    @classmethod
    def zero(cls):
        return cls(lambda xi, t: np.zeros_like(xi, dtype=float),
                   lambda eta, t: np.zeros_like(eta, dtype=float))

    @classmethod
    def from_limits(cls, params):
        from .exact import boundary_potentials

        return cls(lambda xi, t: boundary_potentials(params, xi, 0.0, t)[0],
                   lambda eta, t: boundary_potentials(params, 0.0, eta, t)[1])

    @classmethod
    def at_edges(cls, potentials: Callable, xi_min: float, eta_min: float):
        """Boundary values read off a closed-form ``(U, V) = potentials(xi, eta, t)``
        along the grid's inflow edges ``xi = xi_min`` and ``eta = eta_min``."""
        return cls(lambda xi, t: potentials(xi, eta_min, t)[1],
                   lambda eta, t: potentials(xi_min, eta, t)[0])


def observed_order(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    if len(hs) < 3:
        raise ValueError("observed order needs at least three refinement levels")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


@dataclass
class ResidualReport:
    """Per-equation max / grid-L2 norms of a residual evaluation."""

    equations: dict
    grid_shape: tuple
    h: tuple
    stencil_order: int = 4
    observed_order: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def max_norm(self) -> float:
        return max(v["max"] for v in self.equations.values())

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(sum(v["l2"] ** 2 for v in self.equations.values())))

    def worst(self) -> str:
        return max(self.equations, key=lambda k: self.equations[k]["max"])

    def as_dict(self) -> dict:
        out = {"max_norm": self.max_norm, "l2_norm": self.l2_norm,
               "grid": "x".join(map(str, self.grid_shape)), "stencil_order": self.stencil_order}
        for name, v in self.equations.items():
            out[f"{name}.max"] = v["max"]
            out[f"{name}.l2"] = v["l2"]
        if self.observed_order is not None:
            out["observed_order"] = self.observed_order
        out.update(self.extras)
        return out


def _norms(r, hx, hy, order=4):
    r = stencils.interior(r, max(stencils.MARGIN, order // 2))
    a = np.abs(r)
    return {"max": float(a.max()), "l2": float(np.sqrt(hx * hy * np.sum(a**2)))}


def _check_grid(grid: Grid, order=4):
    if min(grid.shape) < order + 4:
        raise ValueError(f"grid {grid.shape} too small for an order-{order} stencil")


def reconstruct_potentials(snap: FieldSnapshot, b: BoundaryData, floor: float | None = 1e-10):
    """Rebuild ``U, V`` from ``|q|^2`` by integrating the constraints from the inflow edges.

    ``U(xi, eta) = u2(eta) + 1/2 int_{xi_min}^{xi} (|q|^2)_eta dxi'`` and the
    mirror formula for ``V``.  Raises :class:`EdgeDecayError` when ``|q|^2`` on
    an inflow edge is above ``floor * peak``; pass ``floor=None`` to skip.
    """
    g = snap.grid
    _check_grid(g)
    rho = np.abs(snap.q) ** 2
    if floor is not None:
        peak = rho.max()
        edge = max(rho[0, :].max(), rho[:, 0].max())
        if peak > 0 and edge > floor * peak:
            raise EdgeDecayError(float(edge / peak), floor)
    return _reconstruct(rho, g, b, snap.t)


def _reconstruct(rho, g: Grid, b: BoundaryData, t):
    hx, hy = g.h_xi, g.h_eta
    U = b.u2(g.eta, t)[None, :] + 0.5 * stencils.cumulative_integral(
        stencils.d1(rho, hy, axis=1), hx, axis=0)
    V = b.u1(g.xi, t)[:, None] + 0.5 * stencils.cumulative_integral(
        stencils.d1(rho, hx, axis=0), hy, axis=1)
    return U, V


def evolution_operator(q, U, V, grid: Grid, coeffs: NonisoCoefficients, order=4):
    """Spatial part of the evolution equation: everything except ``i q_t``."""
    X, Y = grid.mesh()
    hx, hy = grid.h_xi, grid.h_eta
    q_x = stencils.d1(q, hx, axis=0, order=order)
    q_y = stencils.d1(q, hy, axis=1, order=order)
    out = (stencils.d2(q, hx, axis=0, order=order) + stencils.d2(q, hy, axis=1, order=order)
           + (U + V) * q)
    out -= 1j * coeffs.omega1 * (X * q_x + Y * q_y)
    out -= 1j * coeffs.a1 * (q_x - q_y)
    out += (coeffs.omega0 * (X + Y) - 1j * coeffs.omega1) * q
    return out


def _time_derivative(q_t, q_levels, dt):
    if q_t is not None:
        return q_t
    if q_levels is None or dt is None:
        raise ValueError("supply either an analytic q_t or three time levels with dt")
    q_prev, _, q_next = q_levels
    return (q_next - q_prev) / (2.0 * dt)


def _constraints(q, U, V, grid, order=4):
    rho = np.abs(q) ** 2
    hx, hy = grid.h_xi, grid.h_eta
    r_u = stencils.d1(U, hx, axis=0, order=order) - 0.5 * stencils.d1(rho, hy, axis=1, order=order)
    r_v = stencils.d1(V, hy, axis=1, order=order) - 0.5 * stencils.d1(rho, hx, axis=0, order=order)
    return r_u, r_v


def residual_evolution(snap: FieldSnapshot, coeffs: NonisoCoefficients, q_t=None,
                       q_levels=None, dt=None, order=4) -> ResidualReport:
    """Residuals of the evolution equation and both potential constraints.

    The time derivative is either analytic (``q_t``) or a centred difference
    over ``q_levels = (q(t - dt), q(t), q(t + dt))``.
    """
    g = snap.grid
    _check_grid(g, order)
    qt = _time_derivative(q_t, q_levels, dt)
    r_e = 1j * qt + evolution_operator(snap.q, snap.U, snap.V, g, coeffs, order)
    r_u, r_v = _constraints(snap.q, snap.U, snap.V, g, order)
    hx, hy = g.h_xi, g.h_eta
    return ResidualReport(
        {"evolution": _norms(r_e, hx, hy, order), "U_constraint": _norms(r_u, hx, hy, order),
         "V_constraint": _norms(r_v, hx, hy, order)},
        g.shape, (hx, hy), stencil_order=order)


def residual_isospectral(snap: FieldSnapshot, q_t=None, q_levels=None, dt=None,
                         order=4) -> ResidualReport:
    """Residuals of isospectral DSI.

    The ``V`` constraint checked is ``V_eta = 1/2 (|q|^2)_xi``; the form
    ``V_xi = 1/2 (|q|^2)_xi`` is reported alongside under ``extras`` for
    comparison and does not affect the norms.
    """
    g = snap.grid
    _check_grid(g, order)
    qt = _time_derivative(q_t, q_levels, dt)
    r_e = 1j * qt + evolution_operator(snap.q, snap.U, snap.V, g, NonisoCoefficients(), order)
    r_u, r_v = _constraints(snap.q, snap.U, snap.V, g, order)
    hx, hy = g.h_xi, g.h_eta
    rho = np.abs(snap.q) ** 2
    r_alt = (stencils.d1(snap.V, hx, axis=0, order=order)
             - 0.5 * stencils.d1(rho, hx, axis=0, order=order))
    return ResidualReport(
        {"evolution": _norms(r_e, hx, hy, order), "U_constraint": _norms(r_u, hx, hy, order),
         "V_constraint": _norms(r_v, hx, hy, order)},
        g.shape, (hx, hy), stencil_order=order,
        extras={"V_xi_variant.max": _norms(r_alt, hx, hy, order)["max"]})


def refinement_study(make_report: Callable[[int], ResidualReport], sizes: Sequence[int]):
    """Run ``make_report(N)`` for each ``N`` and attach the observed order to the finest."""
    reports = [make_report(n) for n in sizes]
    hs = [r.h[0] for r in reports]
    errs = [r.max_norm for r in reports]
    finest = reports[-1]
    if len(reports) >= 3:
        finest.observed_order = observed_order(hs, errs)
    return finest, reports
