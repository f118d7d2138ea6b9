"""Fused grid kernels for the time integrator.

These compute the same quantities as the array-slicing stencils in
:mod:`nidsi.stencils` and :func:`nidsi.residual.evolution_operator`, in a
single pass over the grid. ``NIDS_THREADS`` caps the parallel width.
"""

import os

import numba
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

_threads = os.environ.get("NIDS_THREADS")
if _threads:
    numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))


@numba.njit(parallel=True, cache=True, fastmath=False)
def evolution_rate(q, W, xi, eta, hx, hy, omega0, omega1, a1, out):
    """Write ``dq/dt = i * E[q]`` on interior nodes (two-node margin excluded).

    ``W = U + V``. ``E`` is the spatial operator of the evolution equation.
    """
    nx, ny = q.shape
    cx1 = 1.0 / (12.0 * hx)
    cy1 = 1.0 / (12.0 * hy)
    cx2 = 1.0 / (12.0 * hx * hx)
    cy2 = 1.0 / (12.0 * hy * hy)
    for i in numba.prange(2, nx - 2):
        x = xi[i]
        for j in range(2, ny - 2):
            y = eta[j]
            c = q[i, j]
            qm2, qm1, qp1, qp2 = q[i - 2, j], q[i - 1, j], q[i + 1, j], q[i + 2, j]
            rm2, rm1, rp1, rp2 = q[i, j - 2], q[i, j - 1], q[i, j + 1], q[i, j + 2]
            q_x = (qm2 - 8.0 * qm1 + 8.0 * qp1 - qp2) * cx1
            q_y = (rm2 - 8.0 * rm1 + 8.0 * rp1 - rp2) * cy1
            q_xx = (-qm2 + 16.0 * qm1 - 30.0 * c + 16.0 * qp1 - qp2) * cx2
            q_yy = (-rm2 + 16.0 * rm1 - 30.0 * c + 16.0 * rp1 - rp2) * cy2
            e = (q_xx + q_yy + W[i, j] * c
                 - 1j * omega1 * (x * q_x + y * q_y)
                 - 1j * a1 * (q_x - q_y)
                 + (omega0 * (x + y) - 1j * omega1) * c)
            out[i, j] = 1j * e


def rate(q, W, grid, coeffs, out=None):
    if out is None:
        out = np.zeros_like(q)
    evolution_rate(q, W, grid.xi, grid.eta, grid.h_xi, grid.h_eta,
                   coeffs.omega0, coeffs.omega1, coeffs.a1, out)
    return out


@numba.njit(cache=True, inline="always")
def _d1_at(f0, f1, f2, f3, f4, pos):
    # pos: 0/1 leading edge, 2 interior (f0..f4 centred), 3/4 trailing edge
    if pos == 2:
        return (f0 - 8.0 * f1 + 8.0 * f3 - f4) / 12.0
    if pos == 0:
        return (-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) / 12.0
    if pos == 1:
        return (-3.0 * f0 - 10.0 * f1 + 18.0 * f2 - 6.0 * f3 + f4) / 12.0
    if pos == 3:
        return (3.0 * f4 + 10.0 * f3 - 18.0 * f2 + 6.0 * f1 - f0) / 12.0
    return (25.0 * f4 - 48.0 * f3 + 36.0 * f2 - 16.0 * f1 + 3.0 * f0) / 12.0


@numba.njit(cache=True)
def _diff_line(f, h, out):
    n = f.size
    for j in range(n):
        if j < 2:
            s, pos = 0, j
        elif j >= n - 2:
            s, pos = n - 5, 5 - (n - j)
        else:
            s, pos = j - 2, 2
        out[j] = _d1_at(f[s], f[s + 1], f[s + 2], f[s + 3], f[s + 4], pos) / h


@numba.njit(cache=True)
def _cumulate_line(g, h, out):
    n = g.size
    out[0] = 0.0
    acc = 0.0
    for i in range(n - 1):
        if i == 0:
            c = (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
        elif i == n - 2:
            c = (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4]) / 24.0
        else:
            c = (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]) / 24.0
        acc += c * h
        out[i + 1] = acc


@numba.njit(parallel=True, cache=True)
def potentials(rho, u1, u2, hx, hy, U, V):
    """``U = u2 + 1/2 cumint_xi d_eta rho`` and ``V = u1 + 1/2 cumint_eta d_xi rho``."""
    nx, ny = rho.shape
    dy = np.empty_like(rho)
    for i in numba.prange(nx):
        _diff_line(rho[i, :], hy, dy[i, :])
    rho_t = rho.T.copy()
    dx_t = np.empty_like(rho_t)
    for j in numba.prange(ny):
        _diff_line(rho_t[j, :], hx, dx_t[j, :])
    dy_t = dy.T.copy()
    acc = np.empty_like(rho_t)
    for j in numba.prange(ny):
        _cumulate_line(dy_t[j, :], hx, acc[j, :])
        for i in range(nx):
            U[i, j] = u2[j] + 0.5 * acc[j, i]
    for i in numba.prange(nx):
        _cumulate_line(dx_t[:, i].copy(), hy, V[i, :])
        for j in range(ny):
            V[i, j] = u1[i] + 0.5 * V[i, j]


def reconstruct(q, grid, boundaries, t):
    rho = q.real**2 + q.imag**2
    U = np.empty_like(rho)
    V = np.empty_like(rho)
    u1 = np.ascontiguousarray(np.broadcast_to(boundaries.u1(grid.xi, t), grid.xi.shape), dtype=float)
    u2 = np.ascontiguousarray(np.broadcast_to(boundaries.u2(grid.eta, t), grid.eta.shape), dtype=float)
    potentials(rho, u1, u2, grid.h_xi, grid.h_eta, U, V)
    return U, V
