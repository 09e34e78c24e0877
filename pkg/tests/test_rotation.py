import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from geoinfluence.influence import influence_profile
from geoinfluence.measures import Boltzmann, Gaussian, MCConfig, ProductSpace
from geoinfluence.rotation import (
    PHI0,
    gaussian_measure_exact,
    haar_sample,
    halfspace_influences_exact,
    mean_abs_l1_norm,
    random_cube_enlargement,
    rotate_set,
    rotation_rhs,
    rotation_scan,
)
from geoinfluence.sets import BoxLower, CapabilityError, HalfSpace, L2Ball, MaxThreshold, Rotated, measure_mc

CFG = MCConfig(seed=21, samples=20_000)


def gauss(n):
    return ProductSpace.iid(Gaussian(), n)


class TestHaar:
    @given(st.integers(1, 40), st.integers(0, 2**63))
    def test_orthogonal(self, n, seed):
        M = haar_sample(n, seed).matrix
        assert np.max(np.abs(M.T @ M - np.eye(n))) <= 1e-12
        assert abs(abs(np.linalg.det(M)) - 1) <= 1e-9

    @pytest.mark.parametrize("n", [1, 2, 8, 64])
    def test_invariants_listed_sizes(self, n):
        M = haar_sample(n, 123).matrix
        assert np.max(np.abs(M.T @ M - np.eye(n))) <= 1e-12
        np.testing.assert_allclose(np.linalg.norm(M, axis=0), 1.0, atol=1e-12)
        assert abs(abs(np.linalg.det(M)) - 1) <= 1e-9

    def test_n1_sign(self):
        signs = {float(haar_sample(1, s).matrix[0, 0]) for s in range(64)}
        assert signs == {-1.0, 1.0}

    def test_reproducible_and_streams_differ(self):
        a = haar_sample(5, 9, 0).matrix
        assert a.tobytes() == haar_sample(5, 9, 0).matrix.tobytes()
        assert not np.allclose(a, haar_sample(5, 9, 1).matrix)
        assert not np.allclose(a, haar_sample(5, 10, 0).matrix)

    def test_first_column_is_uniform_on_sphere(self):
        n, k = 3, 10_000
        cols = np.array([haar_sample(n, 0, j).matrix[:, 0] for j in range(k)])
        # each coordinate of a uniform point on S^2 is uniform on [-1, 1]
        for i in range(n):
            assert stats.kstest(cols[:, i], stats.uniform(-1, 2).cdf).pvalue > 1e-3
        assert np.abs(cols.mean(axis=0)).max() < 4 / math.sqrt(3 * k)

    def test_entry_second_moment(self):
        n, k = 4, 10_000
        sq = np.array([haar_sample(n, 1, j).matrix ** 2 for j in range(k)]).mean(axis=0)
        np.testing.assert_allclose(sq, 1 / n, atol=0.02)

    def test_determinant_takes_both_signs(self):
        dets = [np.linalg.det(haar_sample(4, 2, j).matrix) for j in range(200)]
        frac = np.mean(np.array(dets) > 0)
        assert 0.35 < frac < 0.65

    def test_array_protocol(self):
        M = haar_sample(3, 0)
        assert np.asarray(M).shape == (3, 3) and M.n == 3
        np.testing.assert_array_equal(M.T, M.matrix.T)

    def test_domain(self):
        with pytest.raises(ValueError):
            haar_sample(0, 1)


class TestRotateSet:
    def test_halfspace(self):
        M = haar_sample(4, 3).matrix
        H = rotate_set(HalfSpace(np.eye(4)[0], 0.2), M)
        assert isinstance(H, HalfSpace)
        np.testing.assert_allclose(H.u, M[:, 0], atol=1e-15)

    def test_ball(self):
        M = haar_sample(3, 3).matrix
        B = rotate_set(L2Ball(np.array([1.0, 0.0, 0.0]), 0.5), M)
        assert isinstance(B, L2Ball)
        np.testing.assert_allclose(B.center, M[:, 0])

    def test_generic_membership(self, rng):
        M = haar_sample(3, 5).matrix
        A = BoxLower(np.array([0.1, -0.2, 0.3]))
        R = rotate_set(A, M)
        X = rng.standard_normal((500, 3))
        np.testing.assert_array_equal(R.contains(X @ M.T), A.contains(X))

    def test_inverse_rotation_restores_membership(self, rng):
        M = haar_sample(4, 8).matrix
        A = BoxLower(np.array([0.1, -0.2, 0.3, 0.0]))
        X = rng.standard_normal((500, 4))
        back = rotate_set(rotate_set(A, M), M.T)
        np.testing.assert_array_equal(back.contains(X), A.contains(X))

    def test_rotation_composes(self):
        M1, M2 = haar_sample(3, 1).matrix, haar_sample(3, 2).matrix
        R = rotate_set(rotate_set(BoxLower(np.zeros(3)), M1), M2)
        assert isinstance(R, Rotated) and isinstance(R.base, BoxLower)
        np.testing.assert_allclose(R.M, M2 @ M1)

    @given(st.integers(0, 1000))
    def test_measure_is_invariant(self, seed):
        A = HalfSpace(np.ones(3) / math.sqrt(3), 0.4)
        assert gaussian_measure_exact(rotate_set(A, haar_sample(3, seed))) == pytest.approx(
            gaussian_measure_exact(A), rel=1e-12)


class TestExactFormulas:
    def test_halfspace_influences(self):
        u = np.array([0.6, -0.8])
        np.testing.assert_allclose(halfspace_influences_exact(u, 0.0), [0.6 * PHI0, 0.8 * PHI0])

    def test_halfspace_matches_mc(self):
        u = np.array([0.6, -0.8, 0.0])
        prof = influence_profile(HalfSpace(u, 0.5), gauss(3), CFG)
        assert np.all(np.abs(prof.values - halfspace_influences_exact(u, 0.5)) <= 3 * prof.stderrs + 1e-12)

    def test_needs_unit_vector(self):
        with pytest.raises(ValueError):
            halfspace_influences_exact(np.array([1.0, 1.0]), 0.0)

    @pytest.mark.parametrize("c", [0.0, 0.7])
    def test_ball_measure(self, c):
        B = L2Ball(np.array([c, 0.0, 0.0]), 1.3)
        t, se = measure_mc(B, gauss(3), MCConfig(2, 50_000), axis=0)
        assert abs(gaussian_measure_exact(B) - t) <= 3 * se + 1e-12

    def test_other_sets(self):
        assert gaussian_measure_exact(BoxLower(np.zeros(2))) is None

    @pytest.mark.parametrize("n", [1, 2, 3, 10, 50])
    def test_mean_abs_l1_norm(self, n):
        v = np.array([haar_sample(n, 7, j).matrix[:, 0] for j in range(4000)])
        est = np.abs(v).sum(axis=1)
        assert abs(est.mean() - mean_abs_l1_norm(n)) <= 4 * est.std() / math.sqrt(4000) + 1e-12

    def test_mean_abs_l1_norm_asymptotics(self):
        n = 10_000
        assert mean_abs_l1_norm(n) == pytest.approx(math.sqrt(2 * n / math.pi), rel=1e-3)

    def test_rhs(self):
        assert rotation_rhs(4, 0.5) == pytest.approx(2 * 0.25 * math.sqrt(math.log(4)))
        assert rotation_rhs(4, 0.0) == 0.0


class TestScan:
    @pytest.mark.parametrize("n", [4, 16])
    def test_halfspace_mean(self, n):
        scan = rotation_scan(HalfSpace(np.eye(n)[0], 0.0), gauss(n), 200, CFG)
        # E ||M e_1||_1 phi(0), averaged over 200 rotations
        assert scan.mean == pytest.approx(mean_abs_l1_norm(n) * PHI0, rel=0.05)
        assert scan.report.passed
        assert scan.stderrs.max() == 0.0

    def test_centered_ball_is_rotation_invariant(self):
        scan = rotation_scan(L2Ball(np.zeros(3), 1.5), gauss(3), 5, CFG)
        assert scan.stderrs.min() > 0
        assert np.all(np.abs(scan.sums - scan.sums[0]) <= 3 * np.hypot(scan.stderrs, scan.stderrs[0]))

    @pytest.mark.slow
    def test_box_max_exceeds_axis_aligned(self):
        n = 16
        a = float(Gaussian().quantile(2 ** (-1 / n)))
        scan = rotation_scan(BoxLower(np.full(n, a)), gauss(n), 200, MCConfig(5, 2_000))
        aligned = influence_profile(BoxLower(np.full(n, a)), gauss(n), MCConfig(5, 2_000))
        assert scan.max >= aligned.total
        assert scan.report.passed

    @pytest.mark.parametrize("n", [16, 64])
    def test_halfspace_max_near_diagonal(self, n):
        scan = rotation_scan(HalfSpace(np.eye(n)[0], 0.0), gauss(n), 200, CFG)
        assert scan.max >= 0.8 * math.sqrt(n) * PHI0
        assert scan.max <= math.sqrt(n) * PHI0

    def test_rows(self):
        scan = rotation_scan(HalfSpace(np.eye(2)[0], 0.0), gauss(2), 3, CFG)
        rows = scan.rows()
        assert [r["rotation_index"] for r in rows] == [0, 1, 2]
        assert scan.max == max(r["influence_sum"] for r in rows)

    def test_reproducible(self):
        A = BoxLower(np.full(3, 0.3))
        a = rotation_scan(A, gauss(3), 2, CFG)
        b = rotation_scan(A, gauss(3), 2, CFG)
        assert a.sums.tobytes() == b.sums.tobytes()

    def test_needs_gaussian(self):
        with pytest.raises(ValueError):
            rotation_scan(HalfSpace(np.eye(2)[0], 0.0), ProductSpace.iid(Boltzmann(1.5), 2), 2, CFG)

    def test_needs_convex(self):
        with pytest.raises(ValueError):
            rotation_scan(MaxThreshold(0.0), gauss(2), 2, CFG)

    def test_needs_rotations(self):
        with pytest.raises(ValueError):
            rotation_scan(HalfSpace(np.eye(2)[0], 0.0), gauss(2), 0, CFG)


class TestCubeEnlargement:
    @pytest.mark.parametrize("n", [4, 16, 64])
    def test_halfspace_closed_form(self, n):
        res = random_cube_enlargement(HalfSpace(np.eye(n)[0], 0.0), 0.05, 1.0, 50, CFG)
        assert res.stderr == 0.0 and res.passed
        assert res.scale == pytest.approx(1 / math.sqrt(n))

    def test_halfspace_expected_gain(self):
        # first-order gain of Phi(b + s r ||M u||_1) is phi(b) s r E||M u||_1
        n, r = 64, 1e-4
        res = random_cube_enlargement(HalfSpace(np.eye(n)[0], 0.0), r, 1.0, 400, CFG)
        gain = (res.lhs - 0.5) / (r * res.scale * PHI0)
        assert gain == pytest.approx(mean_abs_l1_norm(n), rel=0.02)

    def test_ball(self):
        res = random_cube_enlargement(L2Ball(np.full(3, 0.2), 1.5), 0.05, 1.0, 5, CFG)
        assert res.stderr > 0 and res.passed

    def test_log_factor(self):
        a = random_cube_enlargement(HalfSpace(np.eye(8)[0], 0.0), 0.05, 1.0, 3, CFG, log_factor=True)
        assert a.scale == pytest.approx(math.sqrt(math.log(8) / 8))

    def test_unsupported(self):
        with pytest.raises(CapabilityError):
            random_cube_enlargement(BoxLower(np.zeros(2)), 0.1, 1.0, 2, CFG)

    def test_radius_domain(self):
        with pytest.raises(ValueError):
            random_cube_enlargement(HalfSpace(np.eye(2)[0], 0.0), 0.0, 1.0, 2, CFG)
