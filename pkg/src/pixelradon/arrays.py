"""Value arrays that carry their discretization metadata."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import AngleSet, DetectorGrid, FanGeometry, ImageGrid

__all__ = ["Image", "Sinogram"]


def _as_values(values, shape, what):
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.shape != shape:
        raise ValueError(f"{what} values have shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} values must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """Pixel values ``values[i, j]`` (shape N x M) on ``grid``."""

    grid: ImageGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.grid.shape, "image"))

    @classmethod
    def zeros(cls, grid: ImageGrid) -> "Image":
        return cls(grid, np.zeros(grid.shape))

    def with_values(self, values) -> "Image":
        return replace(self, values=values)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projection values ``values[p, q]`` (shape P x Q).

    ``fan`` is set when the detector offsets are fanbeam offsets; the
    detector is then ``fan.detector``.
    """

    detector: DetectorGrid
    angles: AngleSet
    values: np.ndarray
    fan: FanGeometry | None = None

    def __post_init__(self):
        if self.fan is not None and self.fan.detector != self.detector:
            raise ValueError("sinogram detector does not match its fan geometry")
        object.__setattr__(
            self, "values", _as_values(self.values, (self.detector.P, self.angles.Q), "sinogram")
        )

    @classmethod
    def zeros(cls, detector: DetectorGrid, angles: AngleSet, fan: FanGeometry | None = None) -> "Sinogram":
        return cls(detector, angles, np.zeros((detector.P, angles.Q)), fan)

    def with_values(self, values) -> "Sinogram":
        return replace(self, values=values)
