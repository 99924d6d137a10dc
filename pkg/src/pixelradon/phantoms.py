"""Test images and the closed-form sinogram of the disc phantom."""

from __future__ import annotations

import math

import numpy as np

from .arrays import Image, Sinogram
from .geometry import AngleSet, DetectorGrid, ImageGrid

__all__ = [
    "Image",
    "Sinogram",
    "MODIFIED_SHEPP_LOGAN",
    "rasterize_disc",
    "rasterize_shepp_logan",
    "shepp_logan_value",
    "analytic_disc_sinogram",
    "disc_G",
]

# intensity, x semi-axis, y semi-axis, x center, y center, rotation (degrees)
MODIFIED_SHEPP_LOGAN = np.array(
    [
        [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
        [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
        [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
        [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
        [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
        [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
        [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
        [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
        [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
        [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
    ]
)


def _check_radius(r):
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"disc radius must be positive, got {r}")


def rasterize_disc(grid: ImageGrid, r: float, supersample: int = 4, density: float = 1.0) -> Image:
    """Pixel averages of ``density`` times the indicator of the closed disc of radius ``r``.

    Each pixel is sampled at ``supersample**2`` midpoints of a regular
    sub-grid; a pixel entirely inside (outside) the disc gets exactly
    ``density`` (0).
    """
    _check_radius(r)
    if int(supersample) != supersample or supersample < 1:
        raise ValueError(f"supersample must be a positive integer, got {supersample}")
    k = int(supersample)
    sub = grid.delta_x * ((np.arange(k) + 0.5) / k - 0.5)
    xs, ys = grid.xs, grid.ys
    r2 = r * r
    count = np.zeros(grid.shape)
    for dx in sub:
        x2 = (xs + dx) ** 2
        for dy in sub:
            y2 = (ys + dy) ** 2
            count += x2[:, None] + y2[None, :] <= r2
    return Image(grid, density * count / (k * k))


def shepp_logan_value(x, y, table: np.ndarray = MODIFIED_SHEPP_LOGAN):
    """Evaluate the ellipse sum at points ``(x, y)`` (broadcasting)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros(np.broadcast(x, y).shape)
    for rho, a, b, x0, y0, deg in table:
        th = math.radians(deg)
        c, s = math.cos(th), math.sin(th)
        u = (x - x0) * c + (y - y0) * s
        v = -(x - x0) * s + (y - y0) * c
        out += rho * ((u / a) ** 2 + (v / b) ** 2 <= 1.0)
    return out


def rasterize_shepp_logan(grid: ImageGrid) -> Image:
    """Modified Shepp-Logan phantom sampled at the pixel centers."""
    X, Y = grid.centers()
    return Image(grid, shepp_logan_value(X, Y))


def analytic_disc_sinogram(detector: DetectorGrid, angles: AngleSet, r: float) -> Sinogram:
    """``sqrt(r^2 - s_p^2)`` (zero for ``|s_p| > r``), identical for every angle.

    This is the projection of the disc with density 1/2; the indicator
    itself projects to twice this value (the full chord length).
    """
    _check_radius(r)
    s = detector.offsets
    col = np.sqrt(np.clip(r * r - s * s, 0.0, None))
    return Sinogram(detector, angles, np.repeat(col[:, None], angles.Q, axis=1))


def disc_G(s, r: float):
    """Antiderivative of ``s -> sqrt(r^2 - s^2)`` (zero outside ``[-r, r]``).

    Odd, nondecreasing, and constant ``+-pi r^2 / 4`` for ``|s| >= r``.
    """
    _check_radius(r)
    c = np.clip(np.asarray(s, dtype=np.float64), -r, r)
    out = 0.5 * (c * np.sqrt(np.maximum(r * r - c * c, 0.0)) + r * r * np.arcsin(c / r))
    return out if out.ndim else float(out)
