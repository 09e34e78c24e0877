import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from geoinfluence.influence import (
    HProfile,
    ent_to_h_bound,
    entropy,
    entropy_inverse,
    entropy_profile,
    geometric_influence,
    h_influence,
    h_influence_profile,
    influence_profile,
    iso_h_profile,
    theta,
    variance_profile,
)
from geoinfluence.measures import Boltzmann, Gaussian, MCConfig, ProductSpace
from geoinfluence.sets import BoxLower, Complement, HalfSpace, L2Ball, MaxThreshold
from suites import monotone_suite, nonmonotone_suite

G = Gaussian()
PHI0 = 1 / math.sqrt(2 * math.pi)
CFG = MCConfig(seed=101, samples=40_000)


def within(est, exact, k=3.0):
    return abs(est.value - exact) <= k * est.stderr + 1e-12


class TestEntropy:
    def test_values(self):
        assert entropy(0.5) == pytest.approx(math.log(2))
        assert entropy(0.0) == 0.0 and entropy(1.0) == 0.0

    @pytest.mark.parametrize("x", [-0.1, 1.1])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            entropy(x)

    @given(st.floats(0.0, 0.49))
    def test_inverse_roundtrip(self, x):
        assert entropy_inverse(entropy(x)) == pytest.approx(x, abs=1e-10)

    @pytest.mark.parametrize("x", [0.1, 0.5])
    def test_inverse_examples(self, x):
        assert entropy_inverse(entropy(x)) == pytest.approx(x, abs=1e-10)

    def test_inverse_is_flat_near_half(self):
        # entropy(1/2 - d) = log 2 - 2 d^2 + O(d^4), so rounding in y moves x by ~sqrt(ulp)
        x = 0.5 - 1e-9
        assert abs(entropy_inverse(entropy(x)) - x) < 1e-7

    def test_inverse_domain(self):
        with pytest.raises(ValueError):
            entropy_inverse(0.7)

    def test_theta_value(self):
        assert theta(0.25) == pytest.approx(1 / (8 * math.log(4)), rel=1e-12)
        assert theta(0.25) == pytest.approx(0.0901684, abs=1e-7)

    @pytest.mark.parametrize("y", [0.0, 0.6, -1.0])
    def test_theta_domain(self, y):
        with pytest.raises(ValueError):
            theta(y)

    def test_theta_increasing(self):
        th = np.array([theta(y) for y in np.geomspace(1e-6, 0.5, 200)])
        assert np.all(np.diff(th) > 0)

    def test_theta_below_entropy_inverse_for_small_y(self):
        ys = np.geomspace(1e-6, 0.069, 200)
        assert all(theta(y) <= entropy_inverse(y) for y in ys)

    @pytest.mark.xfail(strict=True, reason="theta exceeds the entropy inverse for y above about 0.069")
    def test_theta_below_entropy_inverse_on_full_range(self):
        ys = np.geomspace(1e-6, 0.5, 200)
        assert all(theta(y) <= entropy_inverse(y) for y in ys)

    def test_theta_crossover(self):
        # first grid point where the comparison flips
        y = optimize.brentq(lambda y: theta(y) - entropy_inverse(y), 0.02, 0.3)
        assert 0.06 < y < 0.08


@pytest.mark.parametrize("h", [entropy_profile(), variance_profile(), iso_h_profile(G),
                               iso_h_profile(Boltzmann(1.5))])
def test_profiles_vanish_at_ends_and_are_concave(h):
    assert float(h(0.0)) == 0.0 and float(h(1.0)) == 0.0
    t = np.linspace(0, 1, 2001)
    v = h(t)
    mid = h(0.5 * (t[:-2] + t[2:]))
    assert np.all(mid >= 0.5 * (v[:-2] + v[2:]) - 1e-9)


class TestEntToH:
    @pytest.mark.parametrize("I", [0.01, 0.1, 0.5])
    def test_entropy_gives_half(self, I):
        assert ent_to_h_bound(entropy_profile(), I) == pytest.approx(I / 2, rel=1e-9)

    def test_scaling(self):
        assert ent_to_h_bound(entropy_profile().scaled(2.0), 0.1) == pytest.approx(0.1, rel=1e-9)

    def test_variance_against_brute_grid(self):
        I = 0.2
        a = theta(I / 2)
        t = np.linspace(a, 1 - a, 2_000_001)
        delta = np.min(t * (1 - t) / entropy(t))
        assert ent_to_h_bound(variance_profile(), I) == pytest.approx(0.5 * delta * I, rel=1e-6)

    @pytest.mark.parametrize("I", [0.0, 0.8])
    def test_domain(self, I):
        with pytest.raises(ValueError):
            ent_to_h_bound(entropy_profile(), I)

    def test_iso_profile_bound_below_box_influence(self):
        n = 16
        m = Boltzmann(2.0)
        a = float(m.quantile(2 ** (-1 / n)))
        P = ProductSpace.iid(m, n)
        A = BoxLower(np.full(n, a))
        bound = ent_to_h_bound(iso_h_profile(m), 0.1)
        Ih = h_influence(A, P, iso_h_profile(m), 0, CFG)
        assert 0 < bound <= Ih.value + 3 * Ih.stderr


@pytest.mark.parametrize("n", [2, 8, 32])
def test_halfspace_influences(n, rng):
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    b = 0.4
    prof = influence_profile(HalfSpace(u, b), ProductSpace.iid(G, n), CFG)
    exact = np.abs(u) * PHI0 * math.exp(-b * b / 2)
    assert np.all(np.abs(prof.values - exact) <= 3 * prof.stderrs + 1e-12)
    assert prof.total == pytest.approx(exact.sum(), abs=3 * prof.total_stderr + 1e-12)


def test_diagonal_halfspace_example():
    u = np.array([1, 1]) / math.sqrt(2)
    est = geometric_influence(HalfSpace(u, 0.0), ProductSpace.iid(G, 2), 0, CFG)
    assert within(est, 0.2820948)


def test_axis_halfspace_example():
    prof = influence_profile(HalfSpace(np.array([1.0, 0.0]), 0.0), ProductSpace.iid(G, 2), CFG)
    assert prof.values[0] == pytest.approx(0.3989423, abs=1e-7)
    assert prof.values[1] == 0.0 and prof.argmax == 0


@pytest.mark.parametrize("rho", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("n", [1, 4, 64])
def test_box_influence_closed_form(rho, n):
    m = Boltzmann(rho)
    a = float(m.quantile(2 ** (-1 / n)))
    est = geometric_influence(BoxLower(np.full(n, a)), ProductSpace.iid(m, n), n - 1, CFG)
    exact = 0.5 ** ((n - 1) / n) * float(m.density(a))
    assert within(est, exact)


def test_ball_influence_quadrature():
    R = 1.2
    f = lambda y: 2 * PHI0 * math.exp(-(R * R - y * y) / 2) * PHI0 * math.exp(-y * y / 2)  # noqa: E731
    exact, _ = integrate.quad(f, -R, R)
    est = geometric_influence(L2Ball(np.zeros(2), R), ProductSpace.iid(G, 2), 0, CFG)
    assert within(est, exact)


def test_profile_matches_single_coordinate_estimates():
    A = L2Ball(np.array([0.3, -0.2, 0.0]), 1.0)
    P = ProductSpace.iid(G, 3)
    prof = influence_profile(A, P, CFG)
    for i in range(3):
        assert geometric_influence(A, P, i, CFG).value == pytest.approx(prof.values[i], rel=1e-12)


def test_transitive_set_has_equal_influences():
    prof = influence_profile(MaxThreshold(0.5), ProductSpace.iid(G, 6), CFG)
    v, s = prof.values, prof.stderrs
    for i in range(6):
        for j in range(i):
            assert abs(v[i] - v[j]) <= 3 * math.hypot(s[i], s[j])


def test_one_dimensional_ray():
    prof = influence_profile(BoxLower(np.zeros(1)), ProductSpace.iid(G, 1), MCConfig(1, 100))
    assert prof.values.tolist() == [pytest.approx(PHI0, rel=1e-15)]


def test_complement_has_same_influences():
    P = ProductSpace.iid(G, 3)
    A = L2Ball(np.zeros(3), 1.3)
    np.testing.assert_allclose(influence_profile(Complement(A), P, CFG).values,
                               influence_profile(A, P, CFG).values, rtol=1e-12)


class TestHInfluence:
    def test_variance_and_entropy_examples(self):
        A = HalfSpace(np.array([1.0, 0.0]), 0.0)
        P = ProductSpace.iid(G, 2)
        assert h_influence(A, P, variance_profile(), 0, CFG).value == pytest.approx(0.25)
        assert h_influence(A, P, entropy_profile(), 0, CFG).value == pytest.approx(math.log(2))

    def test_custom_profile(self):
        h = HProfile(lambda t: np.sqrt(t * (1 - t)), "custom")
        v = h_influence(HalfSpace(np.array([1.0, 0.0]), 0.0), ProductSpace.iid(G, 2), h, 1, CFG)
        assert v.value == 0.0

    @pytest.mark.parametrize("name", list(monotone_suite(3)))
    def test_monotone_equality(self, name):
        n = 3
        A = monotone_suite(n)[name]
        P = ProductSpace.iid(G, n)
        g = influence_profile(A, P, CFG)
        h = h_influence_profile(A, P, iso_h_profile(G), CFG)
        assert np.all(np.abs(g.values - h.values) <= 3 * np.hypot(g.stderrs, h.stderrs) + 1e-9)

    @pytest.mark.parametrize("name", list(nonmonotone_suite(3)))
    def test_general_inequality(self, name):
        n = 3
        A = nonmonotone_suite(n)[name]
        P = ProductSpace.iid(G, n)
        g = influence_profile(A, P, CFG)
        h = h_influence_profile(A, P, iso_h_profile(G), CFG)
        assert np.all(g.values >= h.values - 3 * np.hypot(g.stderrs, h.stderrs))

    def test_ball_inequality_is_strict(self):
        P = ProductSpace.iid(G, 2)
        A = L2Ball(np.zeros(2), 0.8)
        g = influence_profile(A, P, CFG)
        h = h_influence_profile(A, P, iso_h_profile(G), CFG)
        assert np.all(g.values > h.values + 10 * np.hypot(g.stderrs, h.stderrs))

    @pytest.mark.parametrize("name", ["box", "halfspace", "max_threshold"])
    def test_entropy_chain(self, name):
        n = 5
        A = monotone_suite(n)[name]
        P = ProductSpace.iid(G, n)
        g = influence_profile(A, P, CFG)
        ent = h_influence_profile(A, P, entropy_profile(), CFG)
        for i in range(n):
            if ent.values[i] > 0:
                bound = ent_to_h_bound(iso_h_profile(G), ent.values[i])
                assert g.values[i] >= bound - 3 * g.stderrs[i]


def test_estimates_are_reproducible_and_worker_independent():
    A = L2Ball(np.zeros(4), 1.5)
    P = ProductSpace.iid(Boltzmann(1.5), 4)
    a = influence_profile(A, P, MCConfig(9, 50_000, 1))
    b = influence_profile(A, P, MCConfig(9, 50_000, 2))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.stderrs.tobytes() == b.stderrs.tobytes()
