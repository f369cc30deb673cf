"""Range-condition kernels, the log-LHS surface, G, separability, PV form."""

import math

import numpy as np
import pytest

import projpair as pp

THETA0 = 0.75 * math.pi
MU = pp.ATTENUATION_MU
DL_NORM = 80.0 * math.sqrt(2.0)
# the four-angle probe used throughout: built around the antipodal center
PROBE = (THETA0 + math.pi + math.pi / 4.0,
         THETA0 + math.pi + math.pi / 6.0,
         THETA0 + math.pi,
         THETA0 + math.pi - math.pi / 6.0)


def parfan_pair():
    dom = pp.ImageDomain.disc((2.0, -1.0), 16.0)
    return pp.PairGeometry(
        pp.ParGeometry(0.4), pp.FanGeometry((-90.0, 10.0), theta0=-math.pi), dom)


def parpar_pair():
    dom = pp.ImageDomain.disc((2.0, -1.0), 16.0)
    return pp.PairGeometry(pp.ParGeometry(0.3), pp.ParGeometry(1.9), dom)


def fine_target(pair, phantom, n_bins=4096):
    d1 = pp.DetectorGrid(1, n_bins, *pp.view_range(pair.first, pair.domain))
    d2 = pp.DetectorGrid(2, n_bins, *pp.view_range(pair.second, pair.domain))
    return pp.TargetData(
        pp.project_view(pair.first, phantom, d1),
        pp.project_view(pair.second, phantom, d2))


# --- kernels ----------------------------------------------------------------


def test_known_kernels_three_kinds():
    assert pp.known_kernels(parpar_pair()) is not None
    assert pp.known_kernels(parfan_pair()) is not None
    assert pp.known_kernels(pp.reference_pair(mu=0.0)) is not None


def test_no_kernels_for_attenuated_fan_pair():
    assert pp.known_kernels(pp.reference_pair(mu=MU)) is None
    assert pp.known_kernels(pp.reference_pair(mu=1e-6)) is None


def test_reference_kernels_positive_and_scaled():
    K = pp.known_kernels(pp.reference_pair(mu=0.0))
    (lo1, hi1), (lo2, hi2) = pp.reference_view_ranges()
    r1 = np.linspace(lo1, hi1, 257)
    r2 = np.linspace(lo2, hi2, 257)
    assert (K.v1(r1) > 0).all()
    assert (K.v2(r2) > 0).all()
    # straight-down ray from (0, 80): separation vector has length 80*sqrt(2),
    # the projection onto the ray normal is 80
    assert abs(K.v1(1.5 * math.pi) - 1.0 / 80.0) < 1e-15


def test_kernel_sign_constancy():
    for pair in (parpar_pair(), parfan_pair(), pp.reference_pair(mu=0.0)):
        K = pp.known_kernels(pair)
        for geom, v in ((pair.first, K.v1), (pair.second, K.v2)):
            lo, hi = pp.view_range(geom, pair.domain)
            vals = v(np.linspace(lo, hi, 513))
            assert (vals > 0).all() or (vals < 0).all()


def test_kernel_condition_residual_all_kinds():
    for pair in (parpar_pair(), parfan_pair(), pp.reference_pair(mu=0.0)):
        K = pp.known_kernels(pair)
        assert pp.kernel_condition_residual(pair, K, n=2048) < 1e-12


def test_kernel_condition_invariant_under_joint_scaling():
    pair = pp.reference_pair(mu=0.0)
    K = pp.known_kernels(pair)
    for c in (3.7, -0.25):
        scaled = pp.KernelPair(
            v1=lambda r, c=c: c * K.v1(r),
            v2=lambda r, c=c: c * K.v2(r),
            sign=K.sign, label="scaled")
        assert pp.kernel_condition_residual(pair, scaled, n=512) < 1e-12


def test_pprc_scales_linearly_with_kernels():
    pair = pp.reference_pair(mu=0.0)
    K = pp.known_kernels(pair)
    tgt = pp.reference_target(n_bins=256)
    base = pp.pprc_residual(tgt, K)
    scaled = pp.KernelPair(
        v1=lambda r: 3.7 * K.v1(r), v2=lambda r: 3.7 * K.v2(r),
        sign=K.sign, label="scaled")
    assert abs(pp.pprc_residual(tgt, scaled) - 3.7 * base) < 1e-14 * abs(base)


# --- the range condition on data --------------------------------------------


def test_pprc_reference_target_regression():
    """The prescribed data fails the unweighted fan-fan condition outright:
    the first side is exactly zero, the second strictly positive."""
    K = pp.known_kernels(pp.reference_pair(mu=0.0))
    tgt = pp.reference_target(n_bins=400)
    i1, i2 = pp.pprc_sides(tgt, K)
    assert i1 == 0.0
    assert i2 > 0
    res = pp.pprc_residual(tgt, K)
    assert res == i1 - i2
    assert abs(res - (-0.00069640944182639279)) < 1e-12 * abs(res)


def test_pprc_vanishes_on_range_data():
    rng = np.random.default_rng(41)
    for pair in (parpar_pair(), parfan_pair()):
        K = pp.known_kernels(pair)
        ph = pp.random_phantom(rng, pair.domain, n_bumps=2,
                               radius_range=(2.5, 5.0))
        tgt = fine_target(pair, ph)
        i1, i2 = pp.pprc_sides(tgt, K)
        assert abs(i1 - i2) < 1e-6 * (abs(i1) + abs(i2) + 1.0)


def test_pprc_sides_reject_singular_kernel():
    tgt = pp.reference_target(n_bins=64)
    c = tgt.view1.grid.centers[10]
    bad = pp.KernelPair(v1=lambda r: 1.0 / (r - c), v2=lambda r: np.ones_like(r),
                        sign=1, label="singular")
    with np.errstate(divide="ignore"), pytest.raises(pp.EvaluationError):
        pp.pprc_sides(tgt, bad)


# --- principal-value form for the parallel-fan pair --------------------------


def test_pv_hilbert_range_data():
    pair = parfan_pair()
    rng = np.random.default_rng(42)
    ph = pp.random_phantom(rng, pair.domain, n_bumps=2, radius_range=(2.5, 5.0))
    tgt = fine_target(pair, ph)
    resid = pp.pv_hilbert_residual(tgt, pair, [0.2, 0.1, 0.05])
    assert abs(resid) < 1e-10


def test_pv_hilbert_odd_symmetry():
    """Even data about the vertex offset makes the weighted integrand odd, so
    the symmetric exclusion cancels the view-1 side; the other view is zero."""
    pair = pp.PairGeometry(
        pp.ParGeometry(0.0), pp.FanGeometry((-60.0, 0.0), theta0=-math.pi),
        pp.ImageDomain.disc((2.0, -1.0), 16.0))
    s0 = -60.0
    g1_grid = pp.DetectorGrid(1, 32, s0 - 1.0, s0 + 1.0)
    g1 = np.exp(-((g1_grid.centers - s0) ** 2))
    g2_grid = pp.DetectorGrid(2, 16, 0.1, 0.3)
    tgt = pp.TargetData(
        pp.ProjectionData(g1_grid, g1),
        pp.ProjectionData(g2_grid, np.zeros(16)))
    resid = pp.pv_hilbert_residual(tgt, pair, [0.5, 0.25, 0.125])
    assert abs(resid) < 1e-12


def test_pv_hilbert_resolution_error():
    # an odd bin count puts the singular offset exactly on a sample node
    pair = pp.PairGeometry(
        pp.ParGeometry(0.0), pp.FanGeometry((-60.0, 0.0), theta0=-math.pi),
        pp.ImageDomain.disc((2.0, -1.0), 16.0))
    g1_grid = pp.DetectorGrid(1, 31, -61.0, -59.0)
    g2_grid = pp.DetectorGrid(2, 16, 0.1, 0.3)
    tgt = pp.TargetData(
        pp.ProjectionData(g1_grid, np.ones(31)),
        pp.ProjectionData(g2_grid, np.zeros(16)))
    with pytest.raises(pp.ResolutionError):
        pp.pv_hilbert_residual(tgt, pair, [0.5, 0.25, 0.125])


def test_pv_hilbert_requires_par_fan():
    tgt = pp.reference_target(n_bins=64)
    with pytest.raises(pp.ConfigurationError):
        pp.pv_hilbert_residual(tgt, pp.reference_pair(mu=0.0), [0.4, 0.2, 0.1])


# --- the log-LHS surface and G -----------------------------------------------


def test_eval_G_reference_probe_value():
    """Direct evaluation at the four-angle probe, separation oriented to the
    lifted-angle convention (r1 above r2).  The closed form works out to
    ((-8 - sqrt(2) + 4*sqrt(3) + sqrt(6)) / 2) * mu * |separation|."""
    dl = (80.0, 80.0)
    got = pp.eval_G(PROBE[0], PROBE[1], PROBE[2], PROBE[3], MU, dl)
    bracket = (-8.0 - math.sqrt(2.0) + 4.0 * math.sqrt(3.0) + math.sqrt(6.0)) / 2.0
    want = bracket * MU * DL_NORM
    assert abs(got - want) < 1e-12 * abs(want)
    assert got > 0  # negative bracket times negative mu
    # flipping the separation vector flips the value
    flipped = pp.eval_G(PROBE[0], PROBE[1], PROBE[2], PROBE[3], MU, (-80.0, -80.0))
    assert abs(flipped + got) < 1e-12 * abs(got)


def test_eval_G_is_double_difference_of_log_lhs():
    rng = np.random.default_rng(43)
    vx1, vx2 = pp.REFERENCE_VERTEX_1, pp.REFERENCE_VERTEX_2
    dl = np.subtract(vx2, vx1)
    lo = THETA0 + 0.5 * math.pi + 0.05
    hi = THETA0 + 1.5 * math.pi - 0.05
    checked = 0
    while checked < 10000:
        a = np.sort(rng.uniform(lo, hi, size=4))
        if np.min(np.diff(a)) < 1e-3:
            continue
        r2, r2t, r1t, r1 = a
        g = pp.eval_G(r1, r1t, r2, r2t, MU, dl)
        terms = [pp.expo_lhs_log(x, y, MU, vx1, vx2)
                 for x, y in ((r1, r2), (r1t, r2), (r1, r2t), (r1t, r2t))]
        dd = terms[0] - terms[1] - terms[2] + terms[3]
        scale = max(1.0, abs(g), sum(abs(t) for t in terms))
        assert abs(g - dd) <= 1e-12 * scale
        checked += 1


def test_eval_G_rejects_degenerate_probe():
    with pytest.raises(pp.DomainError):
        pp.eval_G(1.0, 2.0, 1.0, 0.5, MU, (80.0, 80.0))  # r1 == r2 denominator


def test_expo_lhs_log_zero_mu():
    assert pp.expo_lhs_log(PROBE[0], PROBE[2], 0.0, (0.0, 80.0), (-80.0, 0.0)) == 0.0


def test_kernel_lhs_log_matches_surface():
    r1 = np.linspace(THETA0 + math.pi + 0.1, THETA0 + math.pi + 0.6, 7)
    r2 = np.linspace(THETA0 + math.pi - 0.6, THETA0 + math.pi - 0.1, 5)
    vx1, vx2 = pp.REFERENCE_VERTEX_1, pp.REFERENCE_VERTEX_2
    L, valid = pp.expo_surface(r1, r2, MU, vx1, vx2, orientation=-1)
    assert valid.all()
    for i in range(r1.size):
        for j in range(r2.size):
            want = pp.kernel_lhs_log(r1[i], r2[j], MU, vx1, vx2, orientation=-1)
            assert abs(L[i, j] - want) < 1e-13 * max(1.0, abs(want))


def test_expo_surface_masks_wrong_order():
    vx1, vx2 = pp.REFERENCE_VERTEX_1, pp.REFERENCE_VERTEX_2
    r = np.linspace(THETA0 + math.pi - 0.3, THETA0 + math.pi + 0.3, 9)
    L, valid = pp.expo_surface(r, r, MU, vx1, vx2, orientation=-1)
    assert not valid[0, -1]   # r1 < r2 half
    assert valid[-1, 0]
    assert np.isnan(L[~valid]).all()


# --- separability -------------------------------------------------------------


def surface_grids(n1=60, n2=60, margin=math.pi / 48.0):
    r1 = np.linspace(THETA0 + math.pi, THETA0 + 1.5 * math.pi - margin, n1)
    r2 = np.linspace(THETA0 + 0.5 * math.pi + margin, THETA0 + math.pi, n2)
    return r1, r2


def test_separability_dichotomy():
    vx1, vx2 = pp.REFERENCE_VERTEX_1, pp.REFERENCE_VERTEX_2
    r1, r2 = surface_grids()
    L0, valid0 = pp.expo_surface(r1, r2, 0.0, vx1, vx2, orientation=-1)
    rep0 = pp.separability_test(L0, r1, r2, valid=valid0)
    assert rep0.verdict == "separable"
    L1, valid1 = pp.expo_surface(r1, r2, MU, vx1, vx2, orientation=-1)
    rep1 = pp.separability_test(L1, r1, r2, valid=valid1)
    assert rep1.verdict == "non-separable"
    assert rep1.max_abs_D > 1e-3


def test_separability_additive_synthetic():
    r1 = np.linspace(0.0, 1.0, 40)
    r2 = np.linspace(2.0, 3.0, 35)
    L = np.sin(3.0 * r1)[:, None] + np.exp(r2)[None, :]
    rep = pp.separability_test(L, r1, r2)
    assert rep.verdict == "separable"
    assert rep.max_abs_D <= 1e-8 * rep.scale


def test_separability_report_is_reproducible():
    vx1, vx2 = pp.REFERENCE_VERTEX_1, pp.REFERENCE_VERTEX_2
    r1, r2 = surface_grids(25, 25)
    L, valid = pp.expo_surface(r1, r2, MU, vx1, vx2, orientation=-1)
    a = pp.separability_test(L, r1, r2, valid=valid)
    b = pp.separability_test(L, r1, r2, valid=valid)
    assert a.argmax == b.argmax
    assert a.max_abs_D == b.max_abs_D
    # the reported quadruple reproduces the reported violation
    i1 = float(np.interp(a.argmax[0], r1, np.arange(r1.size)))
    assert i1 == int(i1)


def test_separability_needs_valid_quadruple():
    L = np.full((3, 3), np.nan)
    with pytest.raises(pp.ConfigurationError):
        pp.separability_test(L, np.arange(3.0), np.arange(3.0))


def test_separability_threshold_semantics():
    r1 = np.linspace(0.0, 1.0, 10)
    r2 = np.linspace(0.0, 1.0, 10)
    L = r1[:, None] * r2[None, :]  # multiplicative, clearly non-separable
    rep = pp.separability_test(L, r1, r2)
    assert rep.verdict == "non-separable"
    forced = pp.separability_test(L, r1, r2, threshold=10.0)
    assert forced.verdict == "separable"
