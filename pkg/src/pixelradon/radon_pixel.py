"""Pixel-driven parallel-beam Radon transform and its exact adjoint.

Forward::

    g[p, q] = dx^2 / ds^2 * sum_ij w(x_ij . theta_q - s_p) f[i, j]

Backprojection::

    f[i, j] = sum_q weights[q] / ds * sum_p w(x_ij . theta_q - s_p) g[p, q]

with the hat ``w(t) = max(0, ds - |t|)``. Both operators are transposes of
each other under the weighted inner products ``dx^2 <f, u>`` and
``ds * sum_q weights[q] <g_q, v_q>``. Weights are evaluated on the fly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .arrays import Image, Sinogram
from .geometry import AngleSet, DetectorGrid, ImageGrid

__all__ = ["hat_weight", "radon_forward", "radon_backproject", "parallel_pair"]


def hat_weight(t, delta_s: float):
    """``max(0, delta_s - |t|)``; support ``(-delta_s, delta_s)``, peak ``delta_s``."""
    if not delta_s > 0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    out = np.maximum(0.0, delta_s - np.abs(np.asarray(t, dtype=np.float64)))
    return out if out.ndim else float(out)


@njit(cache=True)
def _index_range(lo, hi, h, n):
    """Indices k in 0..n-1 whose coordinate h*(k - (n-1)/2) may lie in [lo, hi], padded by one."""
    half = 0.5 * (n - 1)
    a = lo / h + half
    b = hi / h + half
    if b < -1.0 or a > n:
        return 0, -1
    k0 = int(math.floor(max(a, -1.0))) - 1
    k1 = int(math.ceil(min(b, float(n)))) + 1
    return max(k0, 0), min(k1, n - 1)


@njit(parallel=True, cache=True)
def _forward_kernel(f, xs, ys, dx, offsets, ds, cos_t, sin_t, out):
    N, M = f.shape
    P = offsets.size
    Q = cos_t.size
    scale = dx * dx / (ds * ds)
    for cell in prange(P * Q):
        q = cell // P
        p = cell - q * P
        c = cos_t[q]
        s = sin_t[q]
        sp = offsets[p]
        val = 0.0
        if abs(c) >= abs(s):
            # nearly vertical lines: per row j, solve for the x range
            for j in range(M):
                y = ys[j]
                a = (sp - ds - y * s) / c
                b = (sp + ds - y * s) / c
                i0, i1 = _index_range(min(a, b), max(a, b), dx, N)
                for i in range(i0, i1 + 1):
                    w = ds - abs(xs[i] * c + y * s - sp)
                    if w > 0.0:
                        val += w * f[i, j]
        else:
            for i in range(N):
                x = xs[i]
                a = (sp - ds - x * c) / s
                b = (sp + ds - x * c) / s
                j0, j1 = _index_range(min(a, b), max(a, b), dx, M)
                for j in range(j0, j1 + 1):
                    w = ds - abs(x * c + ys[j] * s - sp)
                    if w > 0.0:
                        val += w * f[i, j]
        out[p, q] = scale * val


@njit(parallel=True, cache=True)
def _backward_kernel(g, xs, ys, offsets, ds, cos_t, sin_t, weights, out):
    N = xs.size
    M = ys.size
    P, Q = g.shape
    s0 = offsets[0]
    for pix in prange(N * M):
        i = pix // M
        j = pix - i * M
        x = xs[i]
        y = ys[j]
        val = 0.0
        for q in range(Q):
            t = x * cos_t[q] + y * sin_t[q]
            pf = (t - s0) / ds
            if pf <= -1.0 or pf >= P:
                continue
            p0 = int(math.floor(pf))
            acc = 0.0
            for p in range(p0, p0 + 2):
                if 0 <= p < P:
                    w = ds - abs(t - offsets[p])
                    if w > 0.0:
                        acc += w * g[p, q]
            val += weights[q] * acc
        out[i, j] = val / ds


def _trig(angles: AngleSet):
    return np.cos(angles.angles), np.sin(angles.angles)


def radon_forward(image: Image, detector: DetectorGrid, angles: AngleSet) -> Sinogram:
    """Pixel-driven Radon transform of ``image``.

    Each sinogram cell is computed independently by walking the image along
    the axis closer to perpendicular to the projection lines, so the range
    solve divides by at least ``1/sqrt(2)``.
    """
    if not isinstance(image, Image):
        raise TypeError(f"expected an Image, got {type(image).__name__}")
    grid = image.grid
    cos_t, sin_t = _trig(angles)
    out = np.empty((detector.P, angles.Q))
    _forward_kernel(
        image.values, grid.xs, grid.ys, grid.delta_x,
        detector.offsets, detector.delta_s, cos_t, sin_t, out,
    )
    return Sinogram(detector, angles, out)


def radon_backproject(sino: Sinogram, grid: ImageGrid) -> Image:
    """Pixel-driven backprojection, the exact adjoint of :func:`radon_forward`.

    For each pixel and angle the projected offset is located on the detector
    and the two neighbouring cells are linearly interpolated; a neighbour
    outside the detector contributes nothing.
    """
    if not isinstance(sino, Sinogram):
        raise TypeError(f"expected a Sinogram, got {type(sino).__name__}")
    if sino.fan is not None:
        raise ValueError("fanbeam sinogram passed to the parallel-beam backprojection")
    cos_t, sin_t = _trig(sino.angles)
    out = np.empty(grid.shape)
    _backward_kernel(
        sino.values, grid.xs, grid.ys, sino.detector.offsets, sino.detector.delta_s,
        cos_t, sin_t, sino.angles.weights, out,
    )
    return Image(grid, out)


def parallel_pair(grid: ImageGrid, detector: DetectorGrid, angles: AngleSet):
    """``(forward, backward)`` closures bound to fixed lattices."""

    def forward(image: Image) -> Sinogram:
        if image.grid != grid:
            raise ValueError("image grid does not match the operator grid")
        return radon_forward(image, detector, angles)

    def backward(sino: Sinogram) -> Image:
        if sino.detector != detector or sino.angles != angles:
            raise ValueError("sinogram lattice does not match the operator")
        return radon_backproject(sino, grid)

    return forward, backward
