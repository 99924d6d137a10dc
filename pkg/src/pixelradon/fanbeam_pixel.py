"""Pixel-driven fanbeam transform, its exact adjoint, and the fan/parallel reparametrization.

A pixel center ``x`` seen from the source at angle ``alpha`` lands on the
flat detector at

    xi(x) = R (x . theta) / (x . theta_perp + R_E)

and the forward operator reads

    g[p, q] = dx^2 / dxi^2 * sqrt(xi_p^2 + R^2)
              * sum_ij w(xi_ij - xi_p) f[i, j] / (x_ij . theta_perp + R_E).

Only pixels whose centers lie strictly inside ``B(0, R_E)`` belong to the
image space; the backprojection is zero elsewhere and the forward operator
refuses images with mass there.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .arrays import Image, Sinogram
from .geometry import AngleSet, FanGeometry, ImageGrid

__all__ = [
    "FanSupportError",
    "fan_forward",
    "fan_backproject",
    "fan_pair",
    "fan_support_mask",
    "fan_to_parallel_coords",
    "parallel_to_fan_coords",
]


class FanSupportError(ValueError):
    """Image support or pixel size incompatible with the fan geometry."""


@njit(cache=True)
def _xi_at(x, y, c, s, R, RE):
    return R * (x * c + y * s) / (-x * s + y * c + RE)


@njit(cache=True)
def _xi_line(k, along, fixed, rows, c, s, R, RE):
    if rows:
        return _xi_at(along[k], fixed, c, s, R, RE)
    return _xi_at(fixed, along[k], c, s, R, RE)


@njit(cache=True)
def _adjacent_range(k_lo, k_hi, along, fixed, rows, c, s, R, RE, a, b):
    """Index range on one image line whose fan offsets may fall in (a, b).

    On a line inside B(0, R_E) the fan offset is monotone in the index, so
    both ends are found by bisection; the result is padded by one index.
    """
    sign = 1.0
    if _xi_line(k_hi, along, fixed, rows, c, s, R, RE) < _xi_line(k_lo, along, fixed, rows, c, s, R, RE):
        sign = -1.0
    if sign > 0:
        lo_t, hi_t = a, b
    else:
        lo_t, hi_t = -b, -a
    # first k with sign*xi > lo_t
    lo, hi = k_lo, k_hi + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if sign * _xi_line(mid, along, fixed, rows, c, s, R, RE) > lo_t:
            hi = mid
        else:
            lo = mid + 1
    first = lo
    # last k with sign*xi < hi_t
    lo, hi = k_lo - 1, k_hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if sign * _xi_line(mid, along, fixed, rows, c, s, R, RE) < hi_t:
            lo = mid
        else:
            hi = mid - 1
    last = lo
    return max(first - 1, k_lo), min(last + 1, k_hi)


@njit(parallel=True, cache=True)
def _fan_forward_kernel(f, xs, ys, dx, row_lo, row_hi, col_lo, col_hi,
                        offsets, dxi, root, cos_t, sin_t, R, RE, out):
    N, M = f.shape
    P = offsets.size
    Q = cos_t.size
    scale = dx * dx / (dxi * dxi)
    for cell in prange(P * Q):
        q = cell // P
        p = cell - q * P
        c = cos_t[q]
        s = sin_t[q]
        xp = offsets[p]
        a = xp - dxi
        b = xp + dxi
        # normal of the central ray through detector p
        mx = R * c + xp * s
        my = R * s - xp * c
        val = 0.0
        if abs(mx) >= abs(my):
            for j in range(M):
                if row_lo[j] > row_hi[j]:
                    continue
                y = ys[j]
                i0, i1 = _adjacent_range(row_lo[j], row_hi[j], xs, y, True, c, s, R, RE, a, b)
                for i in range(i0, i1 + 1):
                    x = xs[i]
                    d = -x * s + y * c + RE
                    w = dxi - abs(R * (x * c + y * s) / d - xp)
                    if w > 0.0:
                        val += w * f[i, j] / d
        else:
            for i in range(N):
                if col_lo[i] > col_hi[i]:
                    continue
                x = xs[i]
                j0, j1 = _adjacent_range(col_lo[i], col_hi[i], ys, x, False, c, s, R, RE, a, b)
                for j in range(j0, j1 + 1):
                    y = ys[j]
                    d = -x * s + y * c + RE
                    w = dxi - abs(R * (x * c + y * s) / d - xp)
                    if w > 0.0:
                        val += w * f[i, j] / d
        out[p, q] = scale * root[p] * val


@njit(parallel=True, cache=True)
def _fan_backward_kernel(g, xs, ys, mask, offsets, dxi, root, cos_t, sin_t, weights, R, RE, out):
    N = xs.size
    M = ys.size
    P, Q = g.shape
    x0 = offsets[0]
    for pix in prange(N * M):
        i = pix // M
        j = pix - i * M
        if not mask[i, j]:
            out[i, j] = 0.0
            continue
        x = xs[i]
        y = ys[j]
        val = 0.0
        for q in range(Q):
            c = cos_t[q]
            s = sin_t[q]
            d = -x * s + y * c + RE
            xi = R * (x * c + y * s) / d
            pf = (xi - x0) / dxi
            if pf <= -1.0 or pf >= P:
                continue
            p0 = int(math.floor(pf))
            acc = 0.0
            for p in range(p0, p0 + 2):
                if 0 <= p < P:
                    w = dxi - abs(xi - offsets[p])
                    if w > 0.0:
                        acc += w * root[p] * g[p, q]
            val += weights[q] * acc / d
        out[i, j] = val / dxi


def fan_support_mask(grid: ImageGrid, geo: FanGeometry) -> np.ndarray:
    """Pixels whose centers lie strictly inside ``B(0, R_E)``."""
    X, Y = grid.centers()
    return X * X + Y * Y < geo.R_E**2


def _check_pixel_size(grid: ImageGrid, geo: FanGeometry):
    limit = math.sqrt(2.0) * (geo.R_E - 1.0)
    if not grid.delta_x < limit:
        raise FanSupportError(
            f"pixel size {grid.delta_x} must be below sqrt(2)*(R_E - 1) = {limit}"
        )


def _line_ranges(inside: np.ndarray):
    """First/last True index along axis 0 for every column (empty -> lo > hi)."""
    n = inside.shape[0]
    any_ = inside.any(axis=0)
    lo = np.where(any_, inside.argmax(axis=0), n)
    hi = np.where(any_, n - 1 - inside[::-1].argmax(axis=0), n - 1)
    return lo.astype(np.int64), hi.astype(np.int64)


def _detector_root(geo: FanGeometry) -> np.ndarray:
    xi = geo.detector.offsets
    return np.sqrt(xi * xi + geo.R * geo.R)


def fan_forward(image: Image, geo: FanGeometry, angles: AngleSet) -> Sinogram:
    """Pixel-driven fanbeam transform.

    Raises
    ------
    FanSupportError
        If a pixel with nonzero value has its center outside ``B(0, R_E)``
        or the pixel size violates ``delta_x < sqrt(2) (R_E - 1)``.
    """
    grid = image.grid
    _check_pixel_size(grid, geo)
    mask = fan_support_mask(grid, geo)
    if np.any(image.values[~mask] != 0.0):
        raise FanSupportError(
            f"image has nonzero pixels with centers outside B(0, R_E={geo.R_E})"
        )
    row_lo, row_hi = _line_ranges(mask)        # per row j: range of i
    col_lo, col_hi = _line_ranges(mask.T)      # per column i: range of j
    out = np.empty((geo.P, angles.Q))
    _fan_forward_kernel(
        image.values, grid.xs, grid.ys, grid.delta_x, row_lo, row_hi, col_lo, col_hi,
        geo.detector.offsets, geo.delta_xi, _detector_root(geo),
        np.cos(angles.angles), np.sin(angles.angles), geo.R, geo.R_E, out,
    )
    return Sinogram(geo.detector, angles, out, fan=geo)


def fan_backproject(sino: Sinogram, geo: FanGeometry, grid: ImageGrid) -> Image:
    """Exact adjoint of :func:`fan_forward`; zero on pixels outside ``B(0, R_E)``."""
    if sino.detector != geo.detector:
        raise ValueError("sinogram detector does not match the fan geometry")
    if sino.fan is not None and sino.fan != geo:
        raise ValueError("sinogram was recorded with a different fan geometry")
    _check_pixel_size(grid, geo)
    mask = fan_support_mask(grid, geo)
    out = np.empty(grid.shape)
    _fan_backward_kernel(
        sino.values, grid.xs, grid.ys, mask, geo.detector.offsets, geo.delta_xi,
        _detector_root(geo), np.cos(sino.angles.angles), np.sin(sino.angles.angles),
        sino.angles.weights, geo.R, geo.R_E, out,
    )
    return Image(grid, out)


def fan_pair(grid: ImageGrid, geo: FanGeometry, angles: AngleSet):
    """``(forward, backward)`` closures bound to fixed lattices."""

    def forward(image: Image) -> Sinogram:
        if image.grid != grid:
            raise ValueError("image grid does not match the operator grid")
        return fan_forward(image, geo, angles)

    def backward(sino: Sinogram) -> Image:
        if sino.angles != angles:
            raise ValueError("sinogram angles do not match the operator")
        return fan_backproject(sino, geo, grid)

    return forward, backward


def fan_to_parallel_coords(xi, alpha, geo: FanGeometry):
    """Parallel-beam ``(s, phi)`` of the fan ray ``(xi, alpha)``; ``|s| < R_E``."""
    xi = np.asarray(xi, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    s = xi * geo.R_E / np.hypot(xi, geo.R)
    phi = alpha - np.arctan(xi / geo.R)
    if s.ndim == 0 and phi.ndim == 0:
        return float(s), float(phi)
    return s, phi


def parallel_to_fan_coords(s, phi, geo: FanGeometry):
    """Inverse of :func:`fan_to_parallel_coords` for ``|s| < R_E``."""
    s = np.asarray(s, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    xi = geo.R * s / np.sqrt(geo.R_E**2 - s * s)
    alpha = phi + np.arctan(xi / geo.R)
    if xi.ndim == 0 and alpha.ndim == 0:
        return float(xi), float(alpha)
    return xi, alpha
