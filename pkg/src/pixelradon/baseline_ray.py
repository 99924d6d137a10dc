"""Joseph ray-driven forward projector, used as a non-adjoint reference."""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .arrays import Image, Sinogram
from .geometry import AngleSet, DetectorGrid

__all__ = ["joseph_forward"]


@njit(cache=True)
def _interp(f, fixed, along_first, u, n):
    # linear interpolation at fractional index u; pixels beyond the grid are zero
    k0 = int(math.floor(u))
    frac = u - k0
    val = 0.0
    if 0 <= k0 < n:
        val += (1.0 - frac) * (f[k0, fixed] if along_first else f[fixed, k0])
    if 0 <= k0 + 1 < n:
        val += frac * (f[k0 + 1, fixed] if along_first else f[fixed, k0 + 1])
    return val


@njit(parallel=True, cache=True)
def _joseph_kernel(f, xs, ys, dx, offsets, cos_t, sin_t, out):
    N, M = f.shape
    P = offsets.size
    Q = cos_t.size
    half_n = 0.5 * (N - 1)
    half_m = 0.5 * (M - 1)
    for cell in prange(P * Q):
        q = cell // P
        p = cell - q * P
        c = cos_t[q]
        s = sin_t[q]
        sp = offsets[p]
        val = 0.0
        # the ray is sp*theta + t*theta_perp with theta_perp = (-s, c)
        if abs(c) >= abs(s):
            for j in range(M):
                t = (ys[j] - sp * s) / c
                x = sp * c - t * s
                u = x / dx + half_n
                if -1.0 < u < N:
                    val += _interp(f, j, True, u, N)
            out[p, q] = val * dx / abs(c)
        else:
            for i in range(N):
                t = (sp * c - xs[i]) / s
                y = sp * s + t * c
                u = y / dx + half_m
                if -1.0 < u < M:
                    val += _interp(f, i, False, u, M)
            out[p, q] = val * dx / abs(s)


def joseph_forward(image: Image, detector: DetectorGrid, angles: AngleSet) -> Sinogram:
    """Line integrals by Joseph's method.

    Each ray is sampled once per pixel row (or column, whichever axis the
    ray is closer to), the image is interpolated linearly across the other
    axis, and the sum is scaled by the step length along the ray.
    """
    if not isinstance(image, Image):
        raise TypeError(f"expected an Image, got {type(image).__name__}")
    grid = image.grid
    out = np.empty((detector.P, angles.Q))
    _joseph_kernel(
        image.values, grid.xs, grid.ys, grid.delta_x, detector.offsets,
        np.cos(angles.angles), np.sin(angles.angles), out,
    )
    return Sinogram(detector, angles, out)
