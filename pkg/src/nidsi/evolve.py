"""Method-of-lines integration of the non-isospectral DSI system.

Fourth-order central differences in space, classical RK4 in time. The
potentials are rebuilt from ``|q|^2`` and the inflow data at every stage. The
outer two-node ring is driven, not solved: with an exact solution as source it
follows the closed-form ``dq/dt``; otherwise it is held fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels, stencils
from .exact import (DromionParams, FieldSnapshot, Grid, dromion_potentials, exact_field,
                    line_soliton)
from .model import NonisoCoefficients
from .residual import BoundaryData

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    """Non-finite values appeared; ``partial`` holds the output produced so far."""

    def __init__(self, t: float, partial=None):
        super().__init__(f"non-finite field at t = {t:.6g}")
        self.t = t
        self.partial = partial


class StabilityError(ValueError):
    pass


@dataclass
class SimConfig:
    L: float = 10.0
    N: int = 257
    dt: float = 1e-4
    t_start: float = -0.5
    t_end: float = 0.2
    coeffs: NonisoCoefficients = field(default_factory=NonisoCoefficients)
    initial: str = "dromion"
    boundary: str = "limits"
    snapshot_times: tuple = ()
    params: object = None
    initial_snapshot: Optional[FieldSnapshot] = None
    stability: float = 0.2

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    def validate(self):
        if self.N < 8 or self.L <= 0:
            raise ValueError(f"need N >= 8 and L > 0, got N={self.N}, L={self.L}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        limit = self.stability * self.h**2
        if self.dt > limit:
            raise StabilityError(
                f"dt = {self.dt:g} exceeds the stability limit {self.stability:g} * h^2 = {limit:g}")
        if self.t_end < self.t_start:
            raise ValueError("t_end must not precede t_start")
        for ts in self.snapshot_times:
            if not self.t_start <= ts <= self.t_end:
                raise ValueError(f"snapshot time {ts} outside [{self.t_start}, {self.t_end}]")
        if self.initial in ("dromion", "soliton") and self.params is None:
            raise ValueError(f"initial source {self.initial!r} needs solution parameters")
        if self.initial == "file" and self.initial_snapshot is None:
            raise ValueError("initial source 'file' needs a snapshot")
        if self.boundary not in ("limits", "edges", "zero", "file"):
            raise ValueError(f"unknown boundary source {self.boundary!r}")
        if self.boundary == "limits" and not isinstance(self.params, DromionParams):
            raise ValueError("closed-form boundary limits are only defined for the dromion")


@dataclass
class SimState:
    t: float
    q: np.ndarray
    U: np.ndarray = None
    V: np.ndarray = None


def _ring_mask(shape, width=stencils.MARGIN):
    mask = np.zeros(shape, dtype=bool)
    mask[:width, :] = mask[-width:, :] = True
    mask[:, :width] = mask[:, -width:] = True
    return mask


class DSIModel:
    """Semi-discrete system ``dq/dt = rhs(q, t)`` on a fixed grid.

    ``ring_rate(xi, eta, t)`` gives ``dq/dt`` on the outer ring; ``None``
    holds the ring fixed.
    """

    def __init__(self, grid: Grid, coeffs: NonisoCoefficients, boundaries: BoundaryData,
                 ring_rate: Optional[Callable] = None):
        self.grid = grid
        self.coeffs = coeffs
        self.boundaries = boundaries
        self.ring_rate = ring_rate
        self.mask = _ring_mask(grid.shape)
        X, Y = grid.mesh()
        self._ring_xy = (X[self.mask], Y[self.mask])

    def potentials(self, q, t):
        return kernels.reconstruct(q, self.grid, self.boundaries, t)

    def rhs(self, state: SimState):
        U, V = self.potentials(state.q, state.t)
        state.U, state.V = U, V
        out = kernels.rate(state.q, U + V, self.grid, self.coeffs)
        if self.ring_rate is None:
            out[self.mask] = 0.0
        else:
            out[self.mask] = self.ring_rate(*self._ring_xy, state.t)
        if not np.all(np.isfinite(out)):
            raise BlowUpError(state.t)
        return out

    def step_rk4(self, state: SimState, dt: float) -> SimState:
        t, q = state.t, state.q
        k1 = self.rhs(SimState(t, q))
        k2 = self.rhs(SimState(t + 0.5 * dt, q + 0.5 * dt * k1))
        k3 = self.rhs(SimState(t + 0.5 * dt, q + 0.5 * dt * k2))
        k4 = self.rhs(SimState(t + dt, q + dt * k3))
        q_new = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(q_new)):
            raise BlowUpError(t + dt)
        return SimState(t + dt, q_new)


def rhs(state: SimState, model: DSIModel):
    return model.rhs(state)


def step_rk4(state: SimState, dt: float, model: DSIModel) -> SimState:
    return model.step_rk4(state, dt)


def peak_amplitude(grid: Grid, absq: np.ndarray) -> float:
    """Grid maximum of ``|q|`` refined by a quadratic fit on the 3x3 neighbourhood."""
    i, j = np.unravel_index(np.argmax(absq), absq.shape)
    peak = float(absq[i, j])
    if not (0 < i < absq.shape[0] - 1 and 0 < j < absq.shape[1] - 1):
        return peak
    block = absq[i - 1:i + 2, j - 1:j + 2]
    u, v = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], indexing="ij")
    A = np.column_stack([np.ones(9), u.ravel(), v.ravel(), u.ravel() ** 2,
                         (u * v).ravel(), v.ravel() ** 2])
    c = np.linalg.lstsq(A, block.ravel(), rcond=None)[0]
    H = np.array([[2 * c[3], c[4]], [c[4], 2 * c[5]]])
    if np.linalg.det(H) <= 0 or H[0, 0] >= 0:
        return peak
    x = np.linalg.solve(H, -c[1:3])
    if np.max(np.abs(x)) > 1.0:
        return peak
    return float(c[0] + c[1:3] @ x + 0.5 * x @ H @ x)


@dataclass
class SimResult:
    snapshots: list
    times: np.ndarray
    peaks: np.ndarray
    completed: bool = True


def build_model(config: SimConfig, grid: Grid) -> DSIModel:
    p = config.params
    if config.boundary == "limits":
        b = BoundaryData.from_limits(p)
    elif config.boundary == "edges":
        if isinstance(p, DromionParams):
            pot = lambda x, y, t: dromion_potentials(p, x, y, t)  # noqa: E731
        else:
            pot = lambda x, y, t: line_soliton(p, x, y, t)[1:]  # noqa: E731
        b = BoundaryData.at_edges(pot, grid.xi[0], grid.eta[0])
    elif config.boundary == "file":
        snap = config.initial_snapshot
        if snap is None:
            raise ValueError("boundary source 'file' needs a snapshot")
        u2, u1 = snap.U[0, :].copy(), snap.V[:, 0].copy()
        b = BoundaryData(lambda xi, t: u1, lambda eta, t: u2)
    else:
        b = BoundaryData.zero()
    ring = None
    if config.initial in ("dromion", "soliton"):
        ring = exact_field(config.initial, p)[1]
    return DSIModel(grid, config.coeffs, b, ring)


def initial_state(config: SimConfig, grid: Grid) -> SimState:
    if config.initial == "file":
        snap = config.initial_snapshot
        return SimState(config.t_start, snap.q.astype(complex, copy=True))
    X, Y = grid.mesh()
    q = exact_field(config.initial, config.params)[0](X, Y, config.t_start)[0]
    return SimState(config.t_start, np.asarray(q, dtype=complex))


def simulate(config: SimConfig, progress: Optional[Callable] = None) -> SimResult:
    """Integrate from ``t_start`` to ``t_end``.

    Snapshots are taken at the completed step nearest each requested time.
    The step is shrunk slightly when ``dt`` does not divide the interval.
    """
    config.validate()
    if config.initial == "file":
        grid = config.initial_snapshot.grid
    else:
        grid = Grid.square(config.L, config.N)
    model = build_model(config, grid)
    state = initial_state(config, grid)
    span = config.t_end - config.t_start
    n_steps = 0 if span == 0 else max(1, math.ceil(span / config.dt - 1e-9))
    dt = span / n_steps if n_steps else 0.0
    wanted = {}
    for ts in config.snapshot_times:
        idx = 0 if n_steps == 0 else int(round((ts - config.t_start) / dt))
        wanted.setdefault(idx, []).append(ts)
    if not config.snapshot_times:
        wanted = {0: [config.t_start]} if n_steps == 0 else {n_steps: [config.t_end]}

    snapshots, times, peaks = [], [], []

    def record(st: SimState, step: int):
        absq = np.abs(st.q)
        times.append(st.t)
        peaks.append(peak_amplitude(grid, absq))
        if step in wanted:
            U, V = model.potentials(st.q, st.t)
            snapshots.append(FieldSnapshot(grid, float(st.t), st.q.copy(), U, V,
                                           meta={"requested": tuple(wanted[step]), "step": step}))

    record(state, 0)
    for step in range(1, n_steps + 1):
        try:
            state = model.step_rk4(state, dt)
            state.t = config.t_start + step * dt
        except BlowUpError as err:
            err.partial = SimResult(snapshots, np.array(times), np.array(peaks), completed=False)
            raise
        record(state, step)
        if progress is not None:
            progress(step, n_steps)
    return SimResult(snapshots, np.array(times), np.array(peaks))


def exact_comparison(config: SimConfig, snap: FieldSnapshot) -> float:
    """Relative grid-L2 distance between a simulated snapshot and the closed form."""
    X, Y = snap.grid.mesh()
    ref = exact_field(config.initial, config.params)[0](X, Y, snap.t)[0]
    return float(np.linalg.norm(snap.q - ref) / np.linalg.norm(ref))


__all__ = [
    "BlowUpError", "StabilityError", "SimConfig", "SimState", "SimResult", "DSIModel",
    "rhs", "step_rk4", "simulate", "peak_amplitude", "exact_comparison",
]
