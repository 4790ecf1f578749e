"""Shared numerical kernels: difference stencils, quadrature weights, rank decisions.

Grid derivatives use centered stencils of 4th-order accuracy (one-sided at the
window edges); the accuracy order is deliberately fixed so that norms computed
at different resolutions agree to well below probe tolerances.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss

from .errors import AmbiguousRankError

STENCIL_ACCURACY = 4

# fallback step for directional finite differences: h = FD_STEP * (1 + |x|_1)
FD_STEP = 1e-5


def fornberg_weights(z, x, m):
    """Finite-difference weights for the order-m derivative at z from nodes x."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
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
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def diff_matrix(n, h, order, periodic=False):
    """Sparse differentiation matrix of the given derivative order on a uniform grid."""
    if order == 0:
        return sp.identity(n, format="csr")
    width = order + STENCIL_ACCURACY
    if width % 2 == 0:
        width += 1
    half = width // 2
    offsets = np.arange(-half, half + 1)
    if periodic:
        w = fornberg_weights(0.0, offsets * h, order)
        rows, cols, vals = [], [], []
        for i in range(n):
            rows.extend([i] * width)
            cols.extend((i + offsets) % n)
            vals.extend(w)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    rows, cols, vals = [], [], []
    for i in range(n):
        lo = max(0, min(i - half, n - width))
        idx = np.arange(lo, lo + width)
        w = fornberg_weights(i * h, idx * h, order)
        rows.extend([i] * width)
        cols.extend(idx)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def simpson_weights(n, h, split_index):
    """Composite Simpson weights on n nodes, split into two panels at split_index.

    The split keeps the rule high-order when the integrand has a kink at a known
    node (the |s| weight of the grid norms). Both sides need an even panel count.
    """
    w = np.zeros(n)
    for a, b in ((0, split_index), (split_index, n - 1)):
        m = b - a
        if m == 0:
            continue
        if m % 2 != 0:
            raise ValueError("composite Simpson needs an even panel count per side")
        w[a] += h / 3.0
        w[b] += h / 3.0
        w[a + 1:b:2] += 4.0 * h / 3.0
        w[a + 2:b:2] += 2.0 * h / 3.0
    return w


def gauss01(order):
    """Gauss-Legendre nodes/weights transplanted to [0, 1]."""
    pts, wts = leggauss(order)
    return (pts + 1.0) / 2.0, wts / 2.0


def directional_derivative(fn, x, v, step_scale=None):
    """Centered difference of fn at x in direction v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    h = (step_scale if step_scale is not None else FD_STEP) * (1.0 + np.linalg.norm(x))
    return (np.asarray(fn(x + h * v)) - np.asarray(fn(x - h * v))) / (2.0 * h)


def numerical_rank(singular_values, lower=1e-10, upper=1e-8):
    """Rank from singular values with a guard band on the relative spectrum.

    Relative singular values inside (lower, upper) are treated as undecidable
    and raise AmbiguousRankError so that dimension jumps are never classified
    silently.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    rel = s / s[0]
    if np.any((rel > lower) & (rel < upper)):
        raise AmbiguousRankError(
            f"singular values inside guard band ({lower:g}, {upper:g}): {rel.tolist()}"
        )
    return int(np.sum(rel >= upper))


def orthonormal_columns(columns, rank=None, lower=1e-10, upper=1e-8):
    """Orthonormal basis of the column span, rank decided with the guard band."""
    m = np.asarray(columns, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = numerical_rank(s, lower, upper) if rank is None else rank
    return u[:, :r], s


def subspace_gap(basis_a, basis_b):
    """sin of the largest principal angle between two orthonormal column spans.

    Computed from the projection residual, which stays at round-off for equal
    spans instead of amplifying it like the sqrt(1 - cos^2) form would.
    """
    if basis_a.shape[1] != basis_b.shape[1]:
        return 1.0
    if basis_a.shape[1] == 0:
        return 0.0
    res_ab = basis_b - basis_a @ (basis_a.T @ basis_b)
    res_ba = basis_a - basis_b @ (basis_b.T @ basis_a)
    gap = max(
        np.linalg.svd(res_ab, compute_uv=False).max(),
        np.linalg.svd(res_ba, compute_uv=False).max(),
    )
    return float(gap)


def fit_loglog_slope(h_values, residuals, floor=1e-15):
    """Least-squares slope of log(residual) against log(h), ignoring round-off zeros."""
    h_values = np.asarray(h_values, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    mask = residuals > floor
    if mask.sum() < 2:
        return None
    coeff = np.polyfit(np.log(h_values[mask]), np.log(residuals[mask]), 1)
    return float(coeff[0])
