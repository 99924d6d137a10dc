"""Raw binary arrays with JSON sidecars, CSV convergence tables and PGM previews.

An array ``base`` is stored as two files:

* ``base.bin``: little-endian float64, row-major with the first index
  fastest (``i`` for images, ``p`` for sinograms);
* ``base.json``: the lattice metadata needed to rebuild the object.

Floats go through ``repr`` in JSON, so a roundtrip is bit-exact.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .arrays import Image, Sinogram
from .geometry import AngleSet, DetectorGrid, FanGeometry, ImageGrid

__all__ = [
    "FormatError",
    "array_paths",
    "write_array",
    "read_array",
    "write_csv_records",
    "export_pgm",
    "CSV_HEADER",
]

CSV_HEADER = ("P", "N", "Q", "delta_s", "l2_error_full", "l2_error_worst_projection", "wall_time_s")
_LE_F64 = np.dtype("<f8")


class FormatError(ValueError):
    """Malformed sidecar or data file."""


def array_paths(path) -> tuple[Path, Path]:
    """``(data, sidecar)`` paths for a base path; a ``.bin``/``.json`` suffix is dropped."""
    p = Path(path)
    if p.suffix in (".bin", ".json"):
        p = p.with_suffix("")
    return p.with_name(p.name + ".bin"), p.with_name(p.name + ".json")


def _angle_meta(angles: AngleSet) -> dict:
    return {
        "angles": angles.angles.tolist(),
        "weights": angles.weights.tolist(),
        "angle_kind": angles.kind,
        "period": angles.period,
    }


def write_array(path, obj: Image | Sinogram) -> tuple[Path, Path]:
    """Write ``obj`` as a data file plus sidecar; returns both paths."""
    data_path, meta_path = array_paths(path)
    if isinstance(obj, Image):
        meta = {
            "kind": "image",
            "dims": [obj.grid.N, obj.grid.M],
            "delta_x": obj.grid.delta_x,
        }
    elif isinstance(obj, Sinogram):
        meta = {
            "kind": "sinogram",
            "dims": [obj.detector.P, obj.angles.Q],
            "delta_s": obj.detector.delta_s,
            "width": obj.detector.width,
            **_angle_meta(obj.angles),
            "geometry": None if obj.fan is None else {
                "R_E": obj.fan.R_E, "R": obj.fan.R, "W": obj.fan.W,
            },
        }
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    # first index fastest == C order of the transpose
    raw = np.ascontiguousarray(obj.values.T, dtype=_LE_F64).tobytes()
    data_path.write_bytes(raw)
    meta_path.write_text(json.dumps(meta, indent=1, allow_nan=False) + "\n")
    return data_path, meta_path


def _field(meta, key, kind):
    try:
        val = meta[key]
    except KeyError:
        raise FormatError(f"sidecar lacks field {key!r}") from None
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise FormatError(f"sidecar field {key!r} must be a number")
        return float(val)
    if kind == "dims":
        if (not isinstance(val, list) or len(val) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in val)):
            raise FormatError(f"sidecar field {key!r} must be two positive integers")
        return val
    if kind == "floats":
        if not isinstance(val, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
            raise FormatError(f"sidecar field {key!r} must be a list of numbers")
        return np.array(val, dtype=np.float64)
    return val


def read_array(path) -> Image | Sinogram:
    """Inverse of :func:`write_array`.

    Raises :class:`FormatError` for a malformed sidecar or a data file whose
    length does not match the recorded dimensions.
    """
    data_path, meta_path = array_paths(path)
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{meta_path}: not valid JSON ({exc})") from None
    if not isinstance(meta, dict):
        raise FormatError(f"{meta_path}: sidecar must be a JSON object")
    kind = meta.get("kind")
    if kind not in ("image", "sinogram"):
        raise FormatError(f"{meta_path}: kind must be 'image' or 'sinogram', got {kind!r}")
    n0, n1 = _field(meta, "dims", "dims")
    raw = data_path.read_bytes()
    expected = n0 * n1 * _LE_F64.itemsize
    if len(raw) != expected:
        raise FormatError(
            f"{data_path}: expected {expected} bytes for dims {n0}x{n1}, found {len(raw)}"
        )
    values = np.frombuffer(raw, dtype=_LE_F64).reshape(n1, n0).T.astype(np.float64)
    try:
        if kind == "image":
            grid = ImageGrid(n0, n1, _field(meta, "delta_x", float))
            return Image(grid, values)
        width = meta.get("width")
        if width is None:
            width = n0 * _field(meta, "delta_s", float)
        detector = DetectorGrid(n0, float(width))
        angles = AngleSet(
            _field(meta, "angles", "floats"),
            _field(meta, "weights", "floats"),
            _field(meta, "angle_kind", str) if "angle_kind" in meta else "sparse",
            meta.get("period"),
        )
        geo = meta.get("geometry")
        fan = None
        if geo is not None:
            if not isinstance(geo, dict):
                raise FormatError("sidecar field 'geometry' must be an object or null")
            fan = FanGeometry(_field(geo, "R_E", float), _field(geo, "R", float), detector)
        return Sinogram(detector, angles, values, fan=fan)
    except FormatError as exc:
        raise FormatError(f"{meta_path}: {exc}") from None
    except ValueError as exc:
        raise FormatError(f"{meta_path}: inconsistent metadata ({exc})") from None


def _fmt(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="-")


def write_csv_records(path, records, slopes=None) -> None:
    """Write convergence records as CSV; ``slopes`` lines become ``#`` comments.

    ``slopes`` maps a label to a value, e.g. ``{"fitted_slope_full": 1.02}``.
    """
    lines = []
    for key, val in (slopes or {}).items():
        lines.append(f"# {key} = {'nan' if val is None else _fmt(val)}")
    lines.append(",".join(CSV_HEADER))
    for r in records:
        lines.append(",".join([
            str(r.P), str(r.N), str(r.Q),
            _fmt(r.delta_s), _fmt(r.l2_error_full), _fmt(r.l2_error_worst_projection),
            _fmt(r.wall_time),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def export_pgm(path, obj: Image | Sinogram) -> None:
    """16-bit binary PGM preview, min-max scaled.

    Images are shown with x to the right and y upward; sinograms with the
    detector index down the rows and the angle across the columns. A
    constant array maps to mid-gray.
    """
    if isinstance(obj, Image):
        # rows = j from top (largest y) down, cols = i
        pix = obj.values.T[::-1]
    elif isinstance(obj, Sinogram):
        pix = obj.values
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    lo, hi = float(pix.min()), float(pix.max())
    if hi > lo:
        scaled = np.rint((pix - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.full(pix.shape, 32768.0)
    body = scaled.astype(">u2").tobytes()
    rows, cols = pix.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(body)
