"""Finite-difference and cumulative-quadrature kernels on uniform grids.

All kernels act along one axis of an n-d array and keep its shape. Interior
nodes use centred stencils of the requested (even) order; nodes too close to
an end use one-sided stencils of the same order. Fourth order is the default
everywhere.
"""

from functools import lru_cache

import numpy as np

MARGIN = 2


@lru_cache(maxsize=None)
def _weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Finite-difference weights on integer ``offsets`` for the ``deriv``-th derivative."""
    n = len(offsets)
    A = np.vander(np.array(offsets, dtype=float), n, increasing=True).T
    b = np.zeros(n)
    b[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(A, b)


@lru_cache(maxsize=None)
def _tables(deriv: int, order: int):
    half = order // 2
    centre = tuple(range(-half, half + 1))
    width = order + deriv if deriv > 1 else order + 1
    edges = tuple(
        (i, tuple(j - i for j in range(width)), _weights(tuple(j - i for j in range(width)), deriv))
        for i in range(half)
    )
    return centre, _weights(centre, deriv), edges


def _check(f, axis, need):
    if f.shape[axis] < need:
        raise ValueError(f"axis {axis} has {f.shape[axis]} nodes; stencil needs at least {need}")


def _take(f, axis, sl):
    idx = [slice(None)] * f.ndim
    idx[axis] = sl
    return f[tuple(idx)]


def _derivative(f, h, axis, deriv, order):
    if order % 2 or order < 2:
        raise ValueError(f"order must be a positive even integer, got {order}")
    f = np.asarray(f)
    centre, w, edges = _tables(deriv, order)
    half = order // 2
    width = len(edges[0][1]) if edges else len(centre)
    _check(f, axis, max(width, len(centre)))
    n = f.shape[axis]
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    inner = _take(out, axis, slice(half, n - half))
    for off, c in zip(centre, w):
        if c != 0.0:
            inner += c * _take(f, axis, slice(half + off, n - half + off))
    sign = -1.0 if deriv % 2 else 1.0
    fm = np.moveaxis(f, axis, -1)
    om = np.moveaxis(out, axis, -1)
    head = fm[..., :width]
    tail = fm[..., n - width:][..., ::-1]
    for i, _, wi in edges:
        om[..., i] = head @ wi
        om[..., n - 1 - i] = sign * (tail @ wi)
    out /= h**deriv
    return out


def d1(f, h, axis=0, order=4):
    """First derivative along ``axis``."""
    return _derivative(f, h, axis, 1, order)


def d2(f, h, axis=0, order=4):
    """Second derivative along ``axis``."""
    return _derivative(f, h, axis, 2, order)


@lru_cache(maxsize=None)
def _cell_weights(order: int):
    """Weights integrating cell ``[0, 1]`` from ``order`` nodes, for each cell position."""
    out = []
    for start in range(-(order - 1), 1):
        nodes = np.arange(start, start + order, dtype=float)
        A = np.vander(nodes, order, increasing=True).T
        moments = 1.0 / np.arange(1, order + 1)
        out.append((start, np.linalg.solve(A, moments)))
    return dict(out)


def cumulative_integral(f, h, axis=0, order=4):
    """Running integral from the first node, accurate to ``order`` in ``h``.

    Each cell ``[x_i, x_{i+1}]`` is integrated exactly for the interpolating
    polynomial through ``order`` nodes centred on it, shifted inward near the
    ends.
    """
    f = np.asarray(f)
    _check(f, axis, order)
    n = f.shape[axis]
    table = _cell_weights(order)
    centred = -(order // 2 - 1)
    cells = np.zeros(_take(f, axis, slice(0, n - 1)).shape, dtype=np.result_type(f, float))
    lo, hi = -centred, n - 1 - (order + centred - 1)
    mid = _take(cells, axis, slice(lo, hi))
    for j, c in enumerate(table[centred]):
        mid += c * _take(f, axis, slice(lo + centred + j, hi + centred + j))
    fm = np.moveaxis(f, axis, -1)
    cm = np.moveaxis(cells, axis, -1)
    for i in list(range(0, lo)) + list(range(hi, n - 1)):
        start = min(max(i + centred, 0), n - order)
        cm[..., i] = fm[..., start:start + order] @ table[start - i]
    out = np.zeros(f.shape, dtype=cells.dtype)
    np.cumsum(cells * h, axis=axis, out=_take(out, axis, slice(1, n)))
    return out


def interior(f, margin=MARGIN):
    """View of a 2-d array without its outer ``margin`` ring."""
    return f[margin:-margin, margin:-margin]
