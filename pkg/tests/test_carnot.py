"""Heisenberg group arithmetic, gauge metric, and measure-ratio constants."""

import numpy as np
import pytest

import ccspectral as cc


def pt(z, t):
    return cc.HeisenbergPoint(z=np.asarray(z, dtype=complex), t=float(t))


def random_points(rng, n, count):
    return [pt(rng.standard_normal(n) + 1j * rng.standard_normal(n),
               rng.standard_normal()) for _ in range(count)]


def assert_same(p, q, tol=0.0):
    assert np.abs(p.z - q.z).max() <= tol
    assert abs(p.t - q.t) <= tol


# ---------------------------------------------------------------------------
# group structure
# ---------------------------------------------------------------------------

def test_product_worked_example():
    # (1, 0)(i, 0) = (1 + i, 2 Im(1 * conj(i))) = (1 + i, -2)
    p = cc.h_mul(pt([1.0], 0.0), pt([1j], 0.0))
    assert_same(p, pt([1.0 + 1j], -2.0))
    # and in the other order the twist flips sign
    q = cc.h_mul(pt([1j], 0.0), pt([1.0], 0.0))
    assert_same(q, pt([1.0 + 1j], 2.0))


def test_group_axioms_random():
    rng = np.random.default_rng(2)
    for n in (1, 2, 3):
        e = cc.h_identity(n)
        for _ in range(25):
            a, b, c = random_points(rng, n, 3)
            left = cc.h_mul(cc.h_mul(a, b), c)
            right = cc.h_mul(a, cc.h_mul(b, c))
            assert_same(left, right, tol=1e-12)
            assert_same(cc.h_mul(a, e), a)
            assert_same(cc.h_mul(e, a), a)
            assert_same(cc.h_mul(a, cc.h_inv(a)), e, tol=1e-12)
            assert_same(cc.h_mul(cc.h_inv(a), a), e, tol=1e-12)


def test_group_dimension_mismatch():
    with pytest.raises(ValueError):
        cc.h_mul(cc.h_identity(1), cc.h_identity(2))


# ---------------------------------------------------------------------------
# gauge and distance
# ---------------------------------------------------------------------------

def test_gauge_values():
    assert cc.h_norm(pt([3.0 + 4j], 0.0)) == 5.0
    assert cc.h_norm(pt([0.0], -9.0)) == 3.0
    assert cc.h_norm(cc.h_identity(2)) == 0.0


def test_metric_axioms_on_many_samples():
    rng = np.random.default_rng(0)
    pts = random_points(rng, 1, 10_000)
    g = random_points(rng, 1, 1)[0]
    # spot axioms on consecutive triples across the whole sample
    for i in range(0, len(pts) - 2, 2):
        p, q, r = pts[i], pts[i + 1], pts[i + 2]
        dpq = cc.d_infty(p, q)
        assert dpq >= 0.0
        assert dpq == pytest.approx(cc.d_infty(q, p), abs=1e-12)
        # the sqrt gauge amplifies last-bit roundoff of the twist term to
        # ~1e-9, so identity-of-indiscernibles is tested at that scale
        assert cc.d_infty(p, p) <= 1e-7
        # triangle inequality holds exactly for this gauge
        assert dpq <= cc.d_infty(p, r) + cc.d_infty(r, q) + 1e-12
        # left invariance
        assert cc.d_infty(cc.h_mul(g, p), cc.h_mul(g, q)) == pytest.approx(
            dpq, rel=1e-12, abs=1e-12)


def test_distance_homogeneous_under_dilations():
    rng = np.random.default_rng(5)
    p, q = random_points(rng, 2, 2)
    for r in (0.5, 2.0, 8.0):
        # dyadic factors keep the scaling exact in floating point
        assert cc.d_infty(cc.dilate(r, p), cc.dilate(r, q)) == r * cc.d_infty(p, q)


def test_dilation_is_automorphism():
    rng = np.random.default_rng(9)
    p, q = random_points(rng, 1, 2)
    r = 0.75
    left = cc.dilate(r, cc.h_mul(p, q))
    right = cc.h_mul(cc.dilate(r, p), cc.dilate(r, q))
    assert_same(left, right, tol=1e-14)
    with pytest.raises(ValueError):
        cc.dilate(0.0, p)
    with pytest.raises(ValueError):
        cc.dilate(-1.0, p)


def test_gauge_homogeneity_and_symmetry():
    rng = np.random.default_rng(4)
    for p in random_points(rng, 3, 20):
        assert cc.h_norm(cc.h_inv(p)) == cc.h_norm(p)
        assert cc.h_norm(cc.dilate(2.0, p)) == 2.0 * cc.h_norm(p)


# ---------------------------------------------------------------------------
# stratification bookkeeping
# ---------------------------------------------------------------------------

def test_homogeneous_dimension():
    for n in (1, 2, 5):
        spec = cc.heisenberg_spec(n)
        assert spec.strata_dims == (2 * n, 1)
        assert cc.homogeneous_dimension(spec) == 2 * n + 2
    assert cc.homogeneous_dimension(cc.CarnotSpec((3, 2, 1))) == 3 + 4 + 3


def test_spec_validation():
    with pytest.raises(ValueError):
        cc.heisenberg_spec(0)
    with pytest.raises(ValueError):
        cc.CarnotSpec(())
    with pytest.raises(ValueError):
        cc.CarnotSpec((2, 0))


# ---------------------------------------------------------------------------
# unit ball volumes and the measure ratio
# ---------------------------------------------------------------------------

def test_unit_ball_volumes_exact():
    assert cc.unit_ball_volume(0) == 1.0
    assert cc.unit_ball_volume(1) == pytest.approx(2.0, abs=1e-15)
    assert cc.unit_ball_volume(2) == pytest.approx(np.pi, abs=1e-15)
    assert cc.unit_ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0, abs=1e-14)
    assert cc.unit_ball_volume(4) == pytest.approx(np.pi**2 / 2.0, abs=1e-14)
    assert cc.unit_ball_volume(5) == pytest.approx(8.0 * np.pi**2 / 15.0, abs=1e-14)


def test_unit_ball_volume_validation():
    with pytest.raises(ValueError):
        cc.unit_ball_volume(-1)


def test_measure_ratio_first_heisenberg():
    alpha = cc.hausdorff_constant_heisenberg(1)
    assert abs(alpha - 3.0 / np.pi) <= 1e-12
    # alpha = 2 omega_1 / omega_3 = 2 * 2 / (4 pi / 3)
    assert alpha == pytest.approx(2.0 * 2.0 / (4.0 * np.pi / 3.0), abs=1e-15)


def test_measure_ratio_general_n():
    for n in (2, 3):
        expected = 2.0 * cc.unit_ball_volume(2 * n - 1) / cc.unit_ball_volume(2 * n + 1)
        assert cc.hausdorff_constant_heisenberg(n) == pytest.approx(expected, abs=1e-15)


def test_measure_ratio_validation():
    with pytest.raises(ValueError):
        cc.hausdorff_constant_heisenberg(0)
    with pytest.raises(ValueError):
        cc.hausdorff_constant_heisenberg(1.5)
