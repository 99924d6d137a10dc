"""Pixel-driven Radon and fanbeam transforms with exactly adjoint backprojections."""

import os as _os

# numba's TBB layer warns on older TBB builds; prefer OpenMP unless told otherwise
_os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .analysis import (  # noqa: E402
    BudgetExceeded,
    ConvergenceRecord,
    ConvergenceStudy,
    adjointness_gap,
    convergence_study,
    disc_l2_error,
    estimate_operator_norm,
    fan_parallel_consistency,
    resolution_sweep,
)
from .arrays import Image, Sinogram  # noqa: E402
from .baseline_ray import joseph_forward  # noqa: E402
from .fanbeam_pixel import (  # noqa: E402
    FanSupportError,
    fan_backproject,
    fan_forward,
    fan_pair,
    fan_to_parallel_coords,
    parallel_to_fan_coords,
)
from .geometry import (  # noqa: E402
    AngleSet,
    DetectorGrid,
    FanGeometry,
    GeometryError,
    ImageGrid,
    make_angle_set,
    make_fan_geometry,
)
from .io_formats import export_pgm, read_array, write_array, write_csv_records  # noqa: E402
from .phantoms import analytic_disc_sinogram, rasterize_disc, rasterize_shepp_logan  # noqa: E402
from .radon_pixel import parallel_pair, radon_backproject, radon_forward  # noqa: E402
from .solvers import LandweberDiverged, LandweberTrace, landweber  # noqa: E402


__all__ = [
    "AngleSet",
    "BudgetExceeded",
    "ConvergenceRecord",
    "ConvergenceStudy",
    "DetectorGrid",
    "FanGeometry",
    "FanSupportError",
    "GeometryError",
    "Image",
    "ImageGrid",
    "LandweberDiverged",
    "LandweberTrace",
    "Sinogram",
    "adjointness_gap",
    "analytic_disc_sinogram",
    "convergence_study",
    "disc_l2_error",
    "estimate_operator_norm",
    "export_pgm",
    "fan_backproject",
    "fan_forward",
    "fan_pair",
    "fan_parallel_consistency",
    "fan_to_parallel_coords",
    "joseph_forward",
    "landweber",
    "make_angle_set",
    "make_fan_geometry",
    "parallel_pair",
    "parallel_to_fan_coords",
    "radon_backproject",
    "radon_forward",
    "rasterize_disc",
    "rasterize_shepp_logan",
    "read_array",
    "resolution_sweep",
    "write_array",
    "write_csv_records",
]

__version__ = "0.1.0"
