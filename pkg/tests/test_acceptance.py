"""Acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; a pass/fail line per
criterion is printed in the terminal summary. Measured quantities are
printed as well (visible with ``-s``).
"""

from __future__ import annotations

import itertools
import math
import sys

import numpy as np
import pytest
from oracles import naive_backprojection, naive_fan_backprojection, naive_fan_forward, naive_radon

from pixelradon.analysis import (
    adjointness_gap,
    convergence_study,
    fan_parallel_consistency,
    relative_l2,
)
from pixelradon.arrays import Image, Sinogram
from pixelradon.baseline_ray import joseph_forward
from pixelradon.fanbeam_pixel import (
    fan_backproject,
    fan_forward,
    fan_pair,
    fan_support_mask,
    fan_to_parallel_coords,
    parallel_to_fan_coords,
)
from pixelradon.geometry import DetectorGrid, ImageGrid, make_angle_set, make_fan_geometry
from pixelradon.phantoms import rasterize_disc, rasterize_shepp_logan
from pixelradon.radon_pixel import hat_weight, parallel_pair, radon_backproject, radon_forward
from pixelradon.solvers import default_step, landweber

pytestmark = pytest.mark.slow

R_E, R_D = 3.0, 5.0


# ---------------------------------------------------------------- 1


@pytest.mark.parametrize("N,P,Q", [(128, 128, 90), (129, 97, 45)])
def test_criterion_1_exact_adjointness(N, P, Q):
    grid = ImageGrid.square(N)
    det = DetectorGrid(P)
    ang = make_angle_set("full", count=Q)
    fw, bw = parallel_pair(grid, det, ang)
    gap_par = adjointness_gap(fw, bw, Image.zeros(grid), Sinogram.zeros(det, ang), trials=20, seed=42)

    geo = make_fan_geometry(R_E, R_D, P)
    fang = make_angle_set("full", count=Q, period=2 * math.pi)
    fw, bw = fan_pair(grid, geo, fang)
    gap_fan = adjointness_gap(fw, bw, Image.zeros(grid), Sinogram.zeros(geo.detector, fang, geo),
                              trials=20, seed=42, support=fan_support_mask(grid, geo))
    print(f"[1] N={N} P={P} Q={Q}: parallel gap {gap_par:.2e}, fan gap {gap_fan:.2e}")
    assert gap_par <= 1e-10
    assert gap_fan <= 1e-10


# ---------------------------------------------------------------- 2


def test_criterion_2_partition_of_unity_and_mass():
    rng = np.random.default_rng(2)
    det = DetectorGrid(128)
    s = det.offsets
    worst = max(abs(hat_weight(t - s, det.delta_s).sum() / det.delta_s - 1.0)
                for t in rng.uniform(s[0], s[-1], 1000))
    assert worst <= 1e-12

    grid = ImageGrid.square(128)
    ang = make_angle_set("full", count=90)
    f = rasterize_disc(grid, 0.6)
    g = radon_forward(f, det, ang)
    mass = grid.delta_x**2 * f.values.sum()
    rel = np.max(np.abs(det.delta_s * g.values.sum(axis=0) - mass)) / mass
    print(f"[2] partition of unity defect {worst:.1e}, mass defect {rel:.1e}")
    assert rel <= 1e-12


# ---------------------------------------------------------------- 3


def _angle_sets(Q, period):
    return [
        make_angle_set("full", count=Q, period=period),
        make_angle_set("limited", count=Q, interval=(0.2, 2.2)) if Q > 1
        else make_angle_set("limited", angles=[0.2]),
        make_angle_set("sparse", angles=[0.3, 1.1, 2.0, 2.9][:Q]),
    ]


def _close(a, b):
    return np.max(np.abs(a - b)) <= 1e-14 * max(np.max(np.abs(b)), 1.0)


def test_criterion_3_bruteforce_oracle():
    rng = np.random.default_rng(3)
    geos = {P: make_fan_geometry(R_E, R_D, P) for P in range(1, 9)}
    failures = []
    count = 0
    for N, M, P, Q in itertools.product(range(1, 9), range(1, 9), range(1, 9), range(1, 5)):
        grid = ImageGrid(N, M, 2.0 / max(N, M))
        det = DetectorGrid(P)
        geo = geos[P]
        f = rng.uniform(-1, 1, (N, M))
        g = rng.uniform(-1, 1, (P, Q))
        for ang in _angle_sets(Q, math.pi):
            out = radon_forward(Image(grid, f), det, ang).values
            if not _close(out, naive_radon(f, grid.delta_x, P, 2.0, ang.angles)):
                failures.append(("radon_forward", N, M, P, ang.kind, Q))
            out = radon_backproject(Sinogram(det, ang, g), grid).values
            if not _close(out, naive_backprojection(g, N, M, grid.delta_x, 2.0, ang.angles, ang.weights)):
                failures.append(("radon_backproject", N, M, P, ang.kind, Q))
            count += 2
        for ang in _angle_sets(Q, 2 * math.pi):
            out = fan_forward(Image(grid, f), geo, ang).values
            if not _close(out, naive_fan_forward(f, grid.delta_x, P, R_E, R_D, ang.angles)):
                failures.append(("fan_forward", N, M, P, ang.kind, Q))
            out = fan_backproject(Sinogram(geo.detector, ang, g, fan=geo), geo, grid).values
            ref = naive_fan_backprojection(g, N, M, grid.delta_x, R_E, R_D, ang.angles, ang.weights)
            if not _close(out, ref):
                failures.append(("fan_backproject", N, M, P, ang.kind, Q))
            count += 2
    print(f"[3] {count} operator evaluations compared, {len(failures)} mismatches")
    assert not failures, failures[:10]


# ---------------------------------------------------------------- 4 and 5


@pytest.fixture(scope="module")
def quadratic_study():
    return convergence_study([50, 100, 200, 400], coupling="quadratic", r=0.6)


def test_criterion_4_quadratic_rate(quadratic_study):
    st = quadratic_study
    worst = [rec.l2_error_worst_projection for rec in st]
    print(f"[4] fitted slope {st.fitted_slope:.4f}, pair slopes {np.round(st.pair_slopes, 3).tolist()}, "
          f"worst-projection errors {np.round(worst, 6).tolist()}, "
          f"time {sum(r.wall_time for r in st):.1f}s")
    assert 0.7 <= st.fitted_slope <= 1.3
    assert all(b < a for a, b in zip(worst, worst[1:]))


def test_criterion_5_linear_coupling_stalls(quadratic_study):
    lin = convergence_study([100, 200, 400], coupling="linear", r=0.6)
    lin_drop = 1 - lin[-1].l2_error_worst_projection / lin[0].l2_error_worst_projection
    quad = {rec.P: rec.l2_error_worst_projection for rec in quadratic_study}
    quad_drop = 1 - quad[400] / quad[100]
    print(f"[5] linear worst errors {[round(r.l2_error_worst_projection, 6) for r in lin]}, "
          f"decrease {lin_drop:+.1%}; quadratic decrease {quad_drop:+.1%}")
    assert lin_drop < 0.20
    assert quad_drop > 0.50


# ---------------------------------------------------------------- 6


def test_criterion_6_landweber_adjoint_gap():
    grid, det, ang = ImageGrid.square(300), DetectorGrid(300), make_angle_set("full", count=100)
    truth = rasterize_shepp_logan(grid)
    pd_fw, bw = parallel_pair(grid, det, ang)

    def jo_fw(image):
        return joseph_forward(image, det, ang)

    ratios = {}
    traces = {}
    for name, fw in (("PD/PD*", pd_fw), ("JO/PD*", jo_fw)):
        omega = default_step(fw, bw, truth)
        _, tr = landweber(fw, bw, fw(truth), omega, 200)
        r = np.array(tr.residual_norms)
        ratios[name] = r[-1] / r[0]
        traces[name] = r
    pd = traces["PD/PD*"]
    print(f"[6] final/initial residual: PD/PD* {ratios['PD/PD*']:.4e}, JO/PD* {ratios['JO/PD*']:.4e}, "
          f"gap factor {ratios['JO/PD*'] / ratios['PD/PD*']:.3f}")
    assert np.all(pd[1:] <= pd[:-1] * (1 + 1e-12))
    assert ratios["JO/PD*"] >= 2 * ratios["PD/PD*"], ratios


# ---------------------------------------------------------------- 7


def test_criterion_7_joseph_agreement():
    grid, det, ang = ImageGrid.square(400), DetectorGrid(400), make_angle_set("full", count=360)
    f = rasterize_shepp_logan(grid)
    rel = relative_l2(radon_forward(f, det, ang), joseph_forward(f, det, ang))
    print(f"[7] relative L2 distance pixel-driven vs Joseph: {rel:.4%}")
    assert rel <= 0.05


# ---------------------------------------------------------------- 8


def test_criterion_8_fan_parallel_reparametrization():
    geo = make_fan_geometry(R_E, R_D, 400)
    rng = np.random.default_rng(8)
    xi = rng.uniform(-geo.W / 2, geo.W / 2, 1000)
    alpha = rng.uniform(0, 2 * math.pi, 1000)
    s, phi = fan_to_parallel_coords(xi, alpha, geo)
    xi2, alpha2 = parallel_to_fan_coords(s, phi, geo)
    assert np.max(np.abs(xi2 - xi)) <= 1e-12
    assert np.max(np.abs(alpha2 - alpha)) <= 1e-12

    grid = ImageGrid.square(400)
    ang = make_angle_set("full", count=360, period=2 * math.pi)
    rel, _, _ = fan_parallel_consistency(rasterize_disc(grid, 0.6), geo, ang, DetectorGrid(400), ang)
    print(f"[8] fan vs resampled parallel relative L2: {rel:.4%}")
    assert rel <= 0.05


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
