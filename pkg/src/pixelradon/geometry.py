"""Discretization lattices for images, detectors, angles and fanbeam setups.

Formulas index pixels, detectors and angles from 1; storage is 0-based.
The accessors below are the only place where the two conventions meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ImageGrid",
    "DetectorGrid",
    "AngleSet",
    "FanGeometry",
    "angle_to_direction",
    "make_angle_set",
    "make_fan_geometry",
    "GeometryError",
]


class GeometryError(ValueError):
    """Raised for invalid grid, angle or fanbeam parameters."""


@dataclass(frozen=True)
class ImageGrid:
    """N x M pixel lattice with square pixels of side ``delta_x``.

    Pixel (i, j) has center ``delta_x * (i - (N+1)/2, j - (M+1)/2)`` in
    1-based indexing; ``i`` runs along the x axis and ``j`` along y.
    """

    N: int
    M: int
    delta_x: float

    def __post_init__(self):
        if int(self.N) != self.N or int(self.M) != self.M or self.N < 1 or self.M < 1:
            raise GeometryError(f"pixel counts must be positive integers, got N={self.N}, M={self.M}")
        if not (math.isfinite(self.delta_x) and self.delta_x > 0):
            raise GeometryError(f"delta_x must be positive, got {self.delta_x}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "delta_x", float(self.delta_x))

    @classmethod
    def square(cls, n: int, width: float = 2.0) -> "ImageGrid":
        """n x n grid covering ``[-width/2, width/2]^2``."""
        return cls(n, n, width / n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.M)

    @property
    def xs(self) -> np.ndarray:
        """x coordinates of pixel centers, indexed by 0-based i."""
        return self.delta_x * (np.arange(self.N) - (self.N - 1) / 2.0)

    @property
    def ys(self) -> np.ndarray:
        return self.delta_x * (np.arange(self.M) - (self.M - 1) / 2.0)

    def center(self, i: int, j: int) -> tuple[float, float]:
        """Center of pixel (i, j), 1-based."""
        if not (1 <= i <= self.N and 1 <= j <= self.M):
            raise IndexError(f"pixel ({i}, {j}) outside {self.N}x{self.M} grid")
        return (
            self.delta_x * (i - (self.N + 1) / 2.0),
            self.delta_x * (j - (self.M + 1) / 2.0),
        )

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of pixel centers, both of shape (N, M)."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")


@dataclass(frozen=True)
class DetectorGrid:
    """P equispaced detector cells spanning ``width``; cell width ``width / P``."""

    P: int
    width: float = 2.0

    def __post_init__(self):
        if int(self.P) != self.P or self.P < 1:
            raise GeometryError(f"detector count must be a positive integer, got {self.P}")
        if not (math.isfinite(self.width) and self.width > 0):
            raise GeometryError(f"detector width must be positive, got {self.width}")
        object.__setattr__(self, "P", int(self.P))
        object.__setattr__(self, "width", float(self.width))

    @property
    def delta_s(self) -> float:
        return self.width / self.P

    @property
    def offsets(self) -> np.ndarray:
        """Detector centers, indexed by 0-based p."""
        return self.delta_s * (np.arange(self.P) - (self.P - 1) / 2.0)

    def offset(self, p: int) -> float:
        """Center of detector p, 1-based."""
        if not 1 <= p <= self.P:
            raise IndexError(f"detector {p} outside 1..{self.P}")
        return self.delta_s * (p - (self.P + 1) / 2.0)


ANGLE_KINDS = ("full", "limited", "sparse")


@dataclass(frozen=True)
class AngleSet:
    """Strictly increasing projection angles with their quadrature weights.

    ``period`` is only meaningful for ``kind == "full"`` and records the
    wraparound used to compute the weights (``pi`` or ``2*pi``).
    """

    angles: np.ndarray
    weights: np.ndarray
    kind: str
    period: float | None = None

    def __post_init__(self):
        angles = np.array(self.angles, dtype=np.float64).reshape(-1)
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        if self.kind not in ANGLE_KINDS:
            raise GeometryError(f"unknown angle set kind {self.kind!r}")
        if angles.size == 0:
            raise GeometryError("angle set is empty")
        if weights.shape != angles.shape:
            raise GeometryError("angles and weights differ in length")
        if not (np.all(np.isfinite(angles)) and np.all(np.isfinite(weights))):
            raise GeometryError("angles and weights must be finite")
        if np.any(np.diff(angles) <= 0):
            raise GeometryError("angles must be strictly increasing")
        angles.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.angles.size

    @property
    def Q(self) -> int:
        return self.angles.size

    @property
    def delta_phi(self) -> float:
        """Largest gap between consecutive angles (wraparound included for full sets)."""
        gaps = np.diff(self.angles)
        if self.kind == "full":
            gaps = np.append(gaps, self.angles[0] + self.period - self.angles[-1])
        return float(gaps.max()) if gaps.size else 0.0

    def __eq__(self, other):
        if not isinstance(other, AngleSet):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.period == other.period
            and np.array_equal(self.angles, other.angles)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.kind, self.period, self.angles.tobytes(), self.weights.tobytes()))


def angle_to_direction(phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Return the projection direction and its counter-clockwise normal.

    >>> theta, theta_perp = angle_to_direction(0.0)
    >>> theta.tolist(), theta_perp.tolist()
    ([1.0, 0.0], [-0.0, 1.0])
    """
    c, s = math.cos(phi), math.sin(phi)
    return np.array([c, s]), np.array([-s, c])


def _weights_full(angles: np.ndarray, period: float) -> np.ndarray:
    prev = np.concatenate(([angles[-1] - period], angles[:-1]))
    nxt = np.concatenate((angles[1:], [angles[0] + period]))
    return (nxt - prev) / 2.0


def _weights_limited(angles: np.ndarray) -> np.ndarray:
    prev = np.concatenate(([angles[0]], angles[:-1]))
    nxt = np.concatenate((angles[1:], [angles[-1]]))
    return (nxt - prev) / 2.0


def make_angle_set(
    kind: str,
    *,
    count: int | None = None,
    interval: tuple[float, float] | None = None,
    angles: Sequence[float] | None = None,
    period: float = math.pi,
) -> AngleSet:
    """Build an :class:`AngleSet` of the given kind.

    Parameters
    ----------
    kind : {"full", "limited", "sparse"}
    count : int, optional
        Number of uniform angles. For ``"full"`` they are placed at
        ``start + k * period / count`` over ``[start, start + period)``;
        for ``"limited"`` they include both interval endpoints.
    interval : (float, float), optional
        ``(start, end)``. Defaults to ``(0, period)`` for full sets and is
        required for uniform limited sets.
    angles : sequence of float, optional
        Explicit strictly increasing angles (radians). Mutually exclusive
        with ``count``.
    period : float
        Wraparound period for full sets, typically ``pi`` or ``2*pi``.

    Notes
    -----
    Full sets use ``(phi[q+1] - phi[q-1]) / 2`` with wraparound by
    ``period``; limited sets clamp the neighbours at the endpoints so the
    weights sum to ``phi[-1] - phi[0]``; sparse sets weight every angle by 1.
    """
    if kind not in ANGLE_KINDS:
        raise GeometryError(f"unknown angle set kind {kind!r}; expected one of {ANGLE_KINDS}")
    if (count is None) == (angles is None):
        raise GeometryError("give exactly one of count= or angles=")

    if angles is not None:
        phi = np.asarray(angles, dtype=np.float64).reshape(-1)
        if phi.size == 0:
            raise GeometryError("angle list is empty")
        if np.any(np.diff(phi) <= 0):
            raise GeometryError("angle list must be strictly increasing")
    else:
        if int(count) != count or count < 1:
            raise GeometryError(f"angle count must be a positive integer, got {count}")
        count = int(count)
        if kind == "full":
            start = 0.0 if interval is None else float(interval[0])
            phi = start + period * np.arange(count) / count
        elif kind == "limited":
            if interval is None:
                raise GeometryError("uniform limited angle sets need an interval")
            a, b = map(float, interval)
            if not b > a:
                raise GeometryError(f"empty angle interval ({a}, {b})")
            phi = np.linspace(a, b, count) if count > 1 else np.array([a])
        else:
            raise GeometryError("sparse angle sets need an explicit angle list")

    if kind == "full":
        if not period > 0:
            raise GeometryError(f"period must be positive, got {period}")
        if phi[-1] - phi[0] >= period:
            raise GeometryError("full angle set spans more than one period")
        return AngleSet(phi, _weights_full(phi, period), "full", float(period))
    if kind == "limited":
        return AngleSet(phi, _weights_limited(phi), "limited")
    return AngleSet(phi, np.ones_like(phi), "sparse")


@dataclass(frozen=True)
class FanGeometry:
    """Flat-detector fanbeam setup.

    ``R_E`` is the source-to-origin distance, ``R`` the source-to-detector
    distance. The detector spans ``W = 2 R / sqrt(R_E^2 - 1)`` so every ray
    through the unit disc is recorded.
    """

    R_E: float
    R: float
    detector: DetectorGrid = field(repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.R_E) and self.R_E > 1):
            raise GeometryError(f"source distance R_E must exceed 1, got {self.R_E}")
        if not (math.isfinite(self.R) and self.R > self.R_E + 1):
            raise GeometryError(f"detector distance R must exceed R_E + 1 = {self.R_E + 1}, got {self.R}")
        if abs(self.detector.width - self.W) > 4 * np.finfo(float).eps * self.W:
            raise GeometryError(f"detector width {self.detector.width} differs from W = {self.W}")

    @property
    def W(self) -> float:
        return 2.0 * self.R / math.sqrt(self.R_E**2 - 1.0)

    @property
    def delta_xi(self) -> float:
        return self.detector.delta_s

    @property
    def P(self) -> int:
        return self.detector.P


def make_fan_geometry(R_E: float, R: float, P: int) -> FanGeometry:
    """Fan setup with P detectors spanning the derived width W."""
    R_E, R = float(R_E), float(R)
    if not R_E > 1:
        raise GeometryError(f"source distance R_E must exceed 1, got {R_E}")
    if not R > R_E + 1:
        raise GeometryError(f"detector distance R must exceed R_E + 1 = {R_E + 1}, got {R}")
    width = 2.0 * R / math.sqrt(R_E**2 - 1.0)
    return FanGeometry(R_E, R, DetectorGrid(P, width))
