"""Finite-difference stencils on uniform grids.

Interior nodes use 5-point central differences (fourth order); the two
nodes nearest each boundary use one-sided 5-point stencils of the same
order. Axes with only four samples fall back to third-order 4-point
stencils.
"""
from functools import lru_cache

import numpy as np


def fornberg_weights(z, x, m):
    """Weights for the derivatives of order 0..m at ``z`` from nodes ``x``.

    Returns an array of shape (m + 1, len(x)); row ``k`` holds the weights
    of the k-th derivative. Standard Fornberg recursion.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


@lru_cache(maxsize=None)
def _left_stencils(order):
    nodes = np.arange(5.0)
    return [fornberg_weights(float(i), nodes, order)[order] for i in range(2)]


_CENTRAL = {
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


def derivative(f, h, order=1, axis=-1):
    """Fourth-order finite-difference derivative of ``f`` along ``axis``.

    Parameters
    ----------
    f : ndarray
        Samples on a uniform grid.
    h : float
        Grid spacing.
    order : {1, 2}
        Derivative order.
    axis : int
        Axis to differentiate along.
    """
    f = np.moveaxis(np.asarray(f, dtype=float), axis, -1)
    n = f.shape[-1]
    if n < 4:
        raise ValueError(f"need at least 4 samples along the axis, got {n}")
    out = np.empty_like(f)
    if n == 4:
        nodes = np.arange(4.0)
        for i in range(4):
            out[..., i] = f @ fornberg_weights(float(i), nodes, order)[order]
        return np.moveaxis(out / h**order, -1, axis)
    w = _CENTRAL[order]
    out[..., 2:-2] = (
        w[0] * f[..., :-4] + w[1] * f[..., 1:-3] + w[2] * f[..., 2:-2]
        + w[3] * f[..., 3:-1] + w[4] * f[..., 4:]
    )
    sign = (-1) ** order
    for i, stencil in enumerate(_left_stencils(order)):
        out[..., i] = f[..., :5] @ stencil
        # mirrored stencil for the right boundary
        out[..., n - 1 - i] = sign * (f[..., -5:][..., ::-1] @ stencil)
    return np.moveaxis(out / h**order, -1, axis)
