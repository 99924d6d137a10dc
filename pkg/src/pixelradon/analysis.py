"""Inner products, adjointness and norm checks, and the disc convergence study."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .arrays import Image, Sinogram
from .fanbeam_pixel import fan_forward, fan_to_parallel_coords
from .geometry import AngleSet, DetectorGrid, FanGeometry, ImageGrid, make_angle_set
from .phantoms import disc_G, rasterize_disc
from .radon_pixel import radon_forward

__all__ = [
    "image_inner",
    "sino_inner",
    "inner",
    "norm",
    "relative_l2",
    "adjointness_gap",
    "estimate_operator_norm",
    "disc_l2_error",
    "ConvergenceRecord",
    "ConvergenceStudy",
    "coupled_sizes",
    "convergence_study",
    "resolution_sweep",
    "loglog_slopes",
    "fan_parallel_consistency",
    "BudgetExceeded",
]


def image_inner(a: Image, b: Image) -> float:
    """``dx^2 * sum_ij a_ij b_ij``."""
    if a.grid != b.grid:
        raise ValueError("images live on different grids")
    return a.grid.delta_x**2 * float(np.vdot(a.values, b.values))


def sino_inner(a: Sinogram, b: Sinogram) -> float:
    """``ds * sum_pq weights_q a_pq b_pq``."""
    if a.detector != b.detector or a.angles != b.angles:
        raise ValueError("sinograms live on different lattices")
    return a.detector.delta_s * float(np.sum(a.angles.weights * np.sum(a.values * b.values, axis=0)))


def inner(a, b) -> float:
    if isinstance(a, Image) and isinstance(b, Image):
        return image_inner(a, b)
    if isinstance(a, Sinogram) and isinstance(b, Sinogram):
        return sino_inner(a, b)
    raise TypeError(f"no inner product between {type(a).__name__} and {type(b).__name__}")


def norm(a) -> float:
    return math.sqrt(max(inner(a, a), 0.0))


def relative_l2(a, reference) -> float:
    """``||a - reference|| / ||reference||`` in the weighted norm of the space."""
    diff = reference.with_values(a.values - reference.values)
    return norm(diff) / norm(reference)


def _random_like(template, rng, support=None):
    vals = rng.uniform(-1.0, 1.0, size=template.values.shape)
    if support is not None:
        vals = vals * support
    return template.with_values(vals)


def adjointness_gap(
    forward: Callable[[Image], Sinogram],
    backward: Callable[[Sinogram], Image],
    domain: Image,
    codomain: Sinogram,
    trials: int = 20,
    seed: int = 42,
    support: np.ndarray | None = None,
) -> float:
    """Worst relative defect ``|<Af, g> - <f, Bg>| / (||f|| ||g||)`` over random trials.

    ``domain`` and ``codomain`` are templates whose metadata fixes the
    lattices; ``f`` and ``g`` are drawn uniformly from ``(-1, 1)`` with a
    seeded PCG64 generator. ``support`` optionally masks ``f``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = _random_like(domain, rng, support)
        g = _random_like(codomain, rng)
        lhs = inner(forward(f), g)
        rhs = inner(f, backward(g))
        worst = max(worst, abs(lhs - rhs) / (norm(f) * norm(g)))
    return worst


def estimate_operator_norm(
    forward: Callable,
    backward: Callable,
    domain,
    iterations: int = 50,
    seed: int = 0,
    support: np.ndarray | None = None,
    history: list | None = None,
) -> float:
    """Largest singular value by power iteration on ``backward(forward(.))``.

    ``domain`` is a template (Image or Sinogram) for the space ``forward``
    acts on. The returned value is ``||A x_k|| / ||x_k||`` for the last
    iterate, which is nondecreasing in ``k`` up to round-off. If given,
    ``history`` receives the estimate after every iteration.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    rng = np.random.default_rng(seed)
    x = _random_like(domain, rng, support)
    while norm(x) == 0.0:
        x = _random_like(domain, rng, support)
    x = x.with_values(x.values / norm(x))
    sigma = 0.0
    for _ in range(iterations):
        ax = forward(x)
        sigma = norm(ax)
        if history is not None:
            history.append(sigma)
        y = backward(ax)
        ny = norm(y)
        if ny == 0.0:
            # start vector fell into the null space; draw a new one
            x = _random_like(domain, rng, support)
            x = x.with_values(x.values / norm(x))
            continue
        x = y.with_values(y.values / ny)
    return sigma


def _clip(s, r):
    return np.clip(s, -r, r)


def disc_l2_error(sino: Sinogram, r: float) -> tuple[float, np.ndarray]:
    """L2 distance between ``sino`` (piecewise constant) and the exact disc projection.

    Uses closed forms only: per angle,
    ``||g||^2 + ds * sum_p g_p^2 - 2 sum_p g_p (G(s_p + ds/2) - G(s_p - ds/2))``
    where ``G`` integrates ``sqrt(r^2 - s^2)``. The exact projection is
    measured over the detector's extent. Returns the full error
    (angles weighted by the quadrature weights) and the per-angle errors.
    """
    if not (math.isfinite(r) and r > 0):
        raise ValueError(f"disc radius must be positive, got {r}")
    det = sino.detector
    ds = det.delta_s
    lo = det.offsets - ds / 2.0
    hi = det.offsets + ds / 2.0
    # per-cell integrals of g and g^2
    cell_g = disc_G(hi, r) - disc_G(lo, r)
    a, b = _clip(hi, r), _clip(lo, r)
    cell_g2 = (a * r * r - a**3 / 3.0) - (b * r * r - b**3 / 3.0)
    g = sino.values
    sq = cell_g2.sum() + ds * np.sum(g * g, axis=0) - 2.0 * (cell_g @ g)
    sq = np.maximum(sq, 0.0)
    per_angle = np.sqrt(sq)
    full = math.sqrt(float(np.sum(sino.angles.weights * sq)))
    return full, per_angle


@dataclass(frozen=True)
class ConvergenceRecord:
    P: int
    N: int
    Q: int
    delta_s: float
    l2_error_full: float
    l2_error_worst_projection: float
    wall_time: float
    worst_angle: float = float("nan")


class BudgetExceeded(ValueError):
    """A study configuration would cost more than the allowed work budget."""


def coupled_sizes(P: int, coupling: str) -> tuple[int, int]:
    """Image size N and angle count Q tied to the detector count P."""
    half_up = lambda v: int(math.floor(v + 0.5))  # noqa: E731
    if coupling == "linear":
        return P, max(half_up(P / 10), 1)
    if coupling == "quadratic":
        return half_up(P * P / 90) + P, max(half_up(P * P / 900) + half_up(P / 10), 1)
    raise ValueError(f"unknown coupling {coupling!r}; expected 'linear' or 'quadratic'")


def loglog_slopes(records: Sequence[ConvergenceRecord], attr: str = "l2_error_full"):
    """Per-pair slopes and least-squares slope of ``log(error)`` against ``log(delta_s)``."""
    ds = np.log([rec.delta_s for rec in records])
    err = np.log([getattr(rec, attr) for rec in records])
    pairs = [float((err[k + 1] - err[k]) / (ds[k + 1] - ds[k])) for k in range(len(records) - 1)]
    fitted = float(np.polyfit(ds, err, 1)[0]) if len(records) > 1 else None
    return pairs, fitted


@dataclass
class ConvergenceStudy:
    records: list[ConvergenceRecord]
    coupling: str
    r: float
    period: float
    pair_slopes: list[float] = field(init=False)
    fitted_slope: float | None = field(init=False)

    def __post_init__(self):
        self.pair_slopes, self.fitted_slope = loglog_slopes(self.records)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, k):
        return self.records[k]


# density whose disc projection is sqrt(r^2 - s^2), the reference used by disc_l2_error
DISC_DENSITY = 0.5


def _disc_record(P, N, Q, r, period, supersample):
    t0 = time.perf_counter()
    grid = ImageGrid.square(N)
    detector = DetectorGrid(P)
    angles = make_angle_set("full", count=Q, period=period)
    sino = radon_forward(rasterize_disc(grid, r, supersample, DISC_DENSITY), detector, angles)
    full, per_angle = disc_l2_error(sino, r)
    worst = int(np.argmax(per_angle))
    return ConvergenceRecord(
        P, N, Q, detector.delta_s, full, float(per_angle[worst]),
        time.perf_counter() - t0, float(angles.angles[worst]),
    )


def _check_budget(configs, budget):
    for P, N, Q in configs:
        cost = N * N * Q
        if budget is not None and cost > budget:
            raise BudgetExceeded(
                f"P={P}: N*M*Q = {N}*{N}*{Q} = {cost:.3g} exceeds the budget {budget:.3g}"
            )


def convergence_study(
    P_list: Iterable[int],
    coupling: str = "quadratic",
    r: float = 0.6,
    period: float = math.pi,
    budget: float | None = 4e9,
    supersample: int = 4,
) -> ConvergenceStudy:
    """Disc phantom errors for detector counts ``P_list`` with coupled N and Q.

    Image width and detector width are both 2; angles are uniform over one
    ``period``. Configurations run one after another; the whole list is
    checked against ``budget`` (in units of N*M*Q) before any work starts.
    """
    P_list = [int(P) for P in P_list]
    if not P_list:
        raise ValueError("P_list is empty")
    if any(b <= a for a, b in zip(P_list, P_list[1:])):
        raise ValueError("P_list must be strictly ascending")
    configs = [(P, *coupled_sizes(P, coupling)) for P in P_list]
    _check_budget(configs, budget)
    records = [_disc_record(P, N, Q, r, period, supersample) for P, N, Q in configs]
    return ConvergenceStudy(records, coupling, r, period)


def resolution_sweep(
    P: int,
    n_list: Iterable[int],
    r: float = 0.6,
    period: float = math.pi,
    budget: float | None = 4e9,
    supersample: int = 4,
) -> list[ConvergenceRecord]:
    """Fixed detector count, image size ``n`` and ``n / 10`` angles for each ``n``."""
    configs = [(int(P), int(n), max(int(math.floor(n / 10 + 0.5)), 1)) for n in n_list]
    _check_budget(configs, budget)
    return [_disc_record(P, N, Q, r, period, supersample) for P, N, Q in configs]


def _interp_parallel(sino: Sinogram, s, phi):
    """Bilinear interpolation of a full-turn uniform parallel sinogram, zero off the detector."""
    angles = sino.angles
    Q = angles.Q
    step = 2.0 * math.pi / Q
    if angles.kind != "full" or not math.isclose(angles.period, 2.0 * math.pi) or not np.allclose(
        np.diff(angles.angles), step, rtol=0, atol=1e-12
    ):
        raise ValueError("interpolation needs uniform angles over a full 2*pi turn")
    det = sino.detector
    g = sino.values
    u = (s - det.offsets[0]) / det.delta_s
    v = np.mod(phi - angles.angles[0], 2.0 * math.pi) / step
    p0 = np.floor(u).astype(np.int64)
    q0 = np.floor(v).astype(np.int64)
    fu = u - p0
    fv = v - q0
    out = np.zeros(np.broadcast(s, phi).shape)
    for dp, wp in ((0, 1.0 - fu), (1, fu)):
        p = p0 + dp
        ok = (p >= 0) & (p < det.P)
        pc = np.clip(p, 0, det.P - 1)
        for dq, wq in ((0, 1.0 - fv), (1, fv)):
            q = (q0 + dq) % Q
            out += np.where(ok, wp * wq * g[pc, q], 0.0)
    return out


def fan_parallel_consistency(
    image: Image,
    geo: FanGeometry,
    fan_angles: AngleSet,
    parallel_detector: DetectorGrid,
    parallel_angles: AngleSet,
) -> tuple[float, Sinogram, np.ndarray]:
    """Compare the fan sinogram with the parallel one resampled along the fan rays.

    The fan value at ``(xi, alpha)`` is the line integral along the ray
    with parallel coordinates ``(s, phi)``, so ``fan_forward`` should match
    ``radon_forward`` interpolated at those coordinates. Returns the
    relative L2 mismatch, the fan sinogram and the resampled array.
    """
    fan = fan_forward(image, geo, fan_angles)
    par = radon_forward(image, parallel_detector, parallel_angles)
    xi, alpha = np.meshgrid(geo.detector.offsets, fan_angles.angles, indexing="ij")
    s, phi = fan_to_parallel_coords(xi, alpha, geo)
    resampled = _interp_parallel(par, s, phi)
    ref = fan.with_values(resampled)
    return relative_l2(fan, ref), fan, resampled
