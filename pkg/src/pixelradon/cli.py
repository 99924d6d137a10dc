"""Command line front end: ``pixelradon <subcommand> ...``.

All angles on the command line are in radians. Usage errors exit with
status 2; invalid parameters and failed checks exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import re
import sys

import numpy as np

from .analysis import (
    BudgetExceeded,
    adjointness_gap,
    convergence_study,
    estimate_operator_norm,
)
from .arrays import Image, Sinogram
from .baseline_ray import joseph_forward
from .fanbeam_pixel import FanSupportError, fan_backproject, fan_forward, fan_pair, fan_support_mask
from .geometry import DetectorGrid, GeometryError, ImageGrid, make_angle_set, make_fan_geometry
from .io_formats import FormatError, export_pgm, read_array, write_array, write_csv_records
from .phantoms import rasterize_disc, rasterize_shepp_logan
from .radon_pixel import parallel_pair, radon_backproject, radon_forward
from .solvers import LandweberDiverged, default_step, landweber

__all__ = ["main", "build_parser"]

log = logging.getLogger("pixelradon")

ADJOINT_TOLERANCE = 1e-10
_PERIODS = {"pi": math.pi, "2pi": 2.0 * math.pi}


class CliError(Exception):
    """A constraint violation reported with exit status 1."""


# ---------------------------------------------------------------- parsing helpers

def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _size(text):
    parts = text.split(",")
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"size must be N or N,M, got {text!r}")
    vals = [_positive_int(p) for p in parts]
    return (vals[0], vals[-1])


_DEGREE_MARK = re.compile(r"(deg|°)", re.IGNORECASE)


def _radian(text):
    t = text.strip()
    if _DEGREE_MARK.search(t):
        raise argparse.ArgumentTypeError(f"angles are in radians; degrees are not accepted ({text!r})")
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an angle in radians, got {text!r}") from None
    if not math.isfinite(v) or abs(v) > 2.0 * math.pi:
        raise argparse.ArgumentTypeError(
            f"angle {text!r} exceeds 2*pi in magnitude; angles are in radians"
        )
    return v


def _radian_list(text):
    return [_radian(p) for p in text.split(",") if p.strip()]


def _angle_range(text):
    vals = _radian_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"angle range must be a,b, got {text!r}")
    return tuple(vals)


def _int_list(text):
    return [_positive_int(p) for p in text.split(",") if p.strip()]


def _phantom(text):
    if text in ("shepp-logan", "delta"):
        return (text, None)
    if text.startswith("disc:"):
        return ("disc", _positive_float(text[5:]))
    raise argparse.ArgumentTypeError(
        f"phantom must be shepp-logan, delta or disc:<r>, got {text!r}"
    )


# ---------------------------------------------------------------- builders

def _grid(args) -> ImageGrid:
    N, M = args.size
    dx = args.pixel_size if args.pixel_size is not None else 2.0 / max(N, M)
    return ImageGrid(N, M, dx)


def _angles(args, default_period):
    if args.sparse is not None:
        if args.angle_range is not None:
            raise CliError("--sparse and --angle-range are mutually exclusive")
        return make_angle_set("sparse", angles=args.sparse)
    if args.angles is None:
        raise CliError("--angles Q is required unless --sparse is given")
    if args.angle_range is not None:
        return make_angle_set("limited", count=args.angles, interval=args.angle_range)
    period = _PERIODS[args.period] if args.period else default_period
    return make_angle_set("full", count=args.angles, period=period)


def _make_image(args, grid: ImageGrid) -> Image:
    if args.input is not None:
        img = read_array(args.input)
        if not isinstance(img, Image):
            raise CliError(f"{args.input} holds a sinogram, not an image")
        return img
    if args.phantom is None:
        raise CliError("either --phantom or --in is required")
    name, r = args.phantom
    if name == "shepp-logan":
        return rasterize_shepp_logan(grid)
    if name == "disc":
        return rasterize_disc(grid, r, supersample=args.supersample)
    N, M = grid.shape
    if N % 2 == 0 or M % 2 == 0:
        raise CliError("the delta phantom needs odd image sizes")
    vals = np.zeros(grid.shape)
    vals[N // 2, M // 2] = 1.0
    return Image(grid, vals)


def _save(obj, args):
    data, meta = write_array(args.out, obj)
    if getattr(args, "pgm", None):
        export_pgm(args.pgm, obj)
    log.info("wrote %s and %s", data, meta)


# ---------------------------------------------------------------- subcommands

def cmd_project(args):
    grid = _grid(args) if args.size else None
    if grid is None and args.input is None:
        raise CliError("--size is required with --phantom")
    image = _make_image(args, grid)
    angles = _angles(args, math.pi)
    detector = DetectorGrid(args.detectors, args.width)
    _save(radon_forward(image, detector, angles), args)
    return 0


def _read_sino(path) -> Sinogram:
    sino = read_array(path)
    if not isinstance(sino, Sinogram):
        raise CliError(f"{path} holds an image, not a sinogram")
    return sino


def cmd_backproject(args):
    sino = _read_sino(args.input)
    if sino.fan is not None:
        raise CliError(f"{args.input} is a fanbeam sinogram; use fan-backproject")
    _save(radon_backproject(sino, _grid(args)), args)
    return 0


def cmd_fan_project(args):
    grid = _grid(args) if args.size else None
    if grid is None and args.input is None:
        raise CliError("--size is required with --phantom")
    image = _make_image(args, grid)
    geo = make_fan_geometry(args.re, args.rd, args.detectors)
    angles = _angles(args, 2.0 * math.pi)
    # phantoms are generated on the square grid; clear pixels the fan cannot see
    if args.input is None:
        image = image.with_values(image.values * fan_support_mask(image.grid, geo))
    _save(fan_forward(image, geo, angles), args)
    return 0


def cmd_fan_backproject(args):
    sino = _read_sino(args.input)
    geo = sino.fan
    if geo is None:
        geo = make_fan_geometry(args.re, args.rd, sino.detector.P)
    _save(fan_backproject(sino, geo, _grid(args)), args)
    return 0


def _operator_pair(args):
    grid = _grid(args)
    if args.geometry == "parallel":
        detector = DetectorGrid(args.detectors, args.width)
        angles = _angles(args, math.pi)
        fw, bw = parallel_pair(grid, detector, angles)
        return fw, bw, Image.zeros(grid), Sinogram.zeros(detector, angles), None
    geo = make_fan_geometry(args.re, args.rd, args.detectors)
    angles = _angles(args, 2.0 * math.pi)
    fw, bw = fan_pair(grid, geo, angles)
    codomain = Sinogram(geo.detector, angles, np.zeros((geo.P, angles.Q)), fan=geo)
    return fw, bw, Image.zeros(grid), codomain, fan_support_mask(grid, geo)


def cmd_adjoint_check(args):
    fw, bw, dom, cod, support = _operator_pair(args)
    gap = adjointness_gap(fw, bw, dom, cod, trials=args.trials, seed=args.seed, support=support)
    print(f"max relative adjointness gap: {gap:.3e}")
    return 0 if gap <= ADJOINT_TOLERANCE else 1


def cmd_norm_estimate(args):
    fw, bw, dom, _, support = _operator_pair(args)
    sigma = estimate_operator_norm(fw, bw, dom, iterations=args.iters, seed=args.seed, support=support)
    print(f"{sigma:.12g}")
    return 0


def cmd_convergence(args):
    try:
        study = convergence_study(
            args.p_list, coupling=args.coupling, r=args.r,
            period=_PERIODS[args.period], budget=args.budget,
        )
    except BudgetExceeded as exc:
        raise CliError(str(exc)) from None
    slopes = {"fitted_slope_full": study.fitted_slope}
    for k, s in enumerate(study.pair_slopes):
        slopes[f"slope_P{study[k].P}_P{study[k + 1].P}"] = s
    write_csv_records(args.out, study.records, slopes)
    for rec in study:
        print(f"P={rec.P:5d} N={rec.N:5d} Q={rec.Q:4d} full={rec.l2_error_full:.6e} "
              f"worst={rec.l2_error_worst_projection:.6e}")
    if study.fitted_slope is not None:
        print(f"fitted slope: {study.fitted_slope:.4f}")
    return 0


def cmd_landweber(args):
    grid = _grid(args)
    detector = DetectorGrid(args.detectors, args.width)
    angles = _angles(args, math.pi)
    fw, bw = parallel_pair(grid, detector, angles)
    if args.pair == "jo":
        def fw(image):  # noqa: F811
            return joseph_forward(image, detector, angles)
    truth = rasterize_shepp_logan(grid)
    data = fw(truth)  # each pair inverts data made by its own forward operator
    omega = args.omega if args.omega is not None else default_step(fw, bw, truth, seed=args.seed)
    try:
        recon, trace = landweber(fw, bw, data, omega, args.iters)
    except LandweberDiverged as exc:
        _write_residuals(args.out_residuals, exc.trace.residual_norms)
        raise CliError(str(exc)) from None
    _write_residuals(args.out_residuals, trace.residual_norms)
    if args.out_image:
        write_array(args.out_image, recon)
    r = trace.residual_norms
    print(f"omega={omega:.6g} residual {r[0]:.6e} -> {r[-1]:.6e} (ratio {r[-1] / r[0]:.4e})")
    return 0


def _write_residuals(path, residuals):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "residual"])
        for k, v in enumerate(residuals):
            w.writerow([k, repr(float(v))])


# ---------------------------------------------------------------- parser

def _add_grid(p, required=True):
    p.add_argument("--size", type=_size, required=required, metavar="N[,M]",
                   help="image size in pixels")
    p.add_argument("--pixel-size", type=_positive_float, default=None,
                   help="pixel side length (default 2/max(N,M))")


def _add_angles(p):
    p.add_argument("--angles", type=_positive_int, metavar="Q", help="number of angles")
    p.add_argument("--angle-range", type=_angle_range, metavar="a,b",
                   help="limited angle range in radians, endpoints included")
    p.add_argument("--sparse", type=_radian_list, metavar="phi1,phi2,...",
                   help="explicit angles in radians")
    p.add_argument("--period", choices=sorted(_PERIODS), default=None,
                   help="angular period of a full set (parallel default pi, fan default 2pi)")


def _add_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--phantom", type=_phantom, help="shepp-logan, delta or disc:<r>")
    src.add_argument("--in", dest="input", help="read the image from this array file")
    p.add_argument("--supersample", type=_positive_int, default=4,
                   help="sub-samples per pixel axis for disc phantoms")


def _add_fan(p):
    p.add_argument("--re", type=_positive_float, default=3.0, help="source to origin distance")
    p.add_argument("--rd", type=_positive_float, default=5.0, help="source to detector distance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pixelradon",
        description="Pixel-driven Radon and fanbeam transforms. All angles are in radians.",
    )
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="number of worker threads (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("project", help="parallel-beam forward projection")
    _add_source(p)
    _add_grid(p, required=False)
    p.add_argument("--detectors", type=_positive_int, required=True, metavar="P")
    p.add_argument("--width", type=_positive_float, default=2.0, help="detector width")
    _add_angles(p)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", help="also write a PGM preview")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("backproject", help="parallel-beam backprojection")
    p.add_argument("--in", dest="input", required=True)
    _add_grid(p)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm")
    p.set_defaults(func=cmd_backproject)

    p = sub.add_parser("fan-project", help="fanbeam forward projection")
    _add_source(p)
    _add_grid(p, required=False)
    p.add_argument("--detectors", type=_positive_int, required=True, metavar="P")
    _add_angles(p)
    _add_fan(p)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm")
    p.set_defaults(func=cmd_fan_project)

    p = sub.add_parser("fan-backproject", help="fanbeam backprojection")
    p.add_argument("--in", dest="input", required=True)
    _add_grid(p)
    _add_fan(p)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm")
    p.set_defaults(func=cmd_fan_backproject)

    for name, func, helptext in (
        ("adjoint-check", cmd_adjoint_check, "random-trial adjointness test"),
        ("norm-estimate", cmd_norm_estimate, "operator norm by power iteration"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--geometry", choices=("parallel", "fan"), default="parallel")
        _add_grid(p)
        p.add_argument("--detectors", type=_positive_int, required=True, metavar="P")
        p.add_argument("--width", type=_positive_float, default=2.0,
                       help="parallel detector width")
        _add_angles(p)
        _add_fan(p)
        p.add_argument("--seed", type=int, default=0)
        if name == "adjoint-check":
            p.add_argument("--trials", type=_positive_int, default=20)
        else:
            p.add_argument("--iters", type=_positive_int, default=50)
        p.set_defaults(func=func)

    p = sub.add_parser("convergence", help="disc phantom convergence table")
    p.add_argument("--coupling", choices=("linear", "quadratic"), default="quadratic")
    p.add_argument("--p-list", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--r", type=_positive_float, default=0.6)
    p.add_argument("--period", choices=sorted(_PERIODS), default="pi")
    p.add_argument("--budget", type=_positive_float, default=4e9,
                   help="largest allowed N*M*Q per configuration")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("landweber", help="Landweber iteration on Shepp-Logan data")
    p.add_argument("--pair", choices=("pd", "jo"), default="pd",
                   help="pd: pixel-driven pair; jo: Joseph forward with pixel-driven backprojection")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--size", type=_size, default=(300, 300), metavar="N[,M]")
    p.add_argument("--pixel-size", type=_positive_float, default=None)
    p.add_argument("--detectors", type=_positive_int, default=300, metavar="P")
    p.add_argument("--width", type=_positive_float, default=2.0)
    _add_angles(p)
    p.set_defaults(angles=100)
    p.add_argument("--omega", type=_positive_float, default=None,
                   help="step size (default 0.9/sigma^2 from 50 power iterations)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-residuals", required=True)
    p.add_argument("--out-image")
    p.set_defaults(func=cmd_landweber)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.threads is not None:
        import numba

        try:
            numba.set_num_threads(args.threads)
        except ValueError as exc:
            print(f"pixelradon: error: {exc}", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except (CliError, GeometryError, FanSupportError, FormatError, ValueError, OSError) as exc:
        print(f"pixelradon {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
