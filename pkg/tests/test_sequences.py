import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from locchain.sequences import (
    AlphaPolynomial,
    ConsistencyError,
    SequenceError,
    SequenceSpec,
    Variant,
    alpha_polynomial,
    base,
    base_coefficient,
    coefficient_period,
    energy,
    joint_period,
    mod3,
    mod6,
    pdc,
    perturb,
    random_sequence,
    section,
)


def brute_base(n, alpha):
    """Direct transcription of the defining sum, one site at a time."""
    s = sum((-1) ** (n // k) * alpha ** (k - 1) for k in range(2, n + 2))
    return 0.5 * ((-1) ** n - s)


def brute_pdc(n, alpha):
    bits = bin(n)[2:][::-1]  # bits[k] is binary digit k
    s = (-1) ** n
    for k in range(1, len(bits)):
        s += (-1) ** int(bits[k]) * alpha**k
    return 0.5 * s


class TestBase:
    def test_site_one(self):
        a = 0.37
        assert energy(base(a), 1) == pytest.approx((-1 - a) / 2, abs=1e-15)

    def test_small_alpha_limit(self):
        assert energy(base(1e-300), 2) == pytest.approx(0.5)

    def test_site_seven_from_table(self):
        a = 0.3
        poly = -1 + a - a**2 + a**3 + a**4 + a**5 + a**6 - a**7
        assert energy(base(a), 7) == pytest.approx(poly / 2, rel=1e-14)

    @given(st.integers(1, 400), st.floats(0.01, 0.6))
    @settings(max_examples=60, deadline=None)
    def test_matches_defining_sum(self, n, a):
        assert energy(base(a), n) == pytest.approx(brute_base(n, a), abs=1e-14)

    def test_vectorised_matches_scalar(self):
        s = base(0.25)
        n = np.arange(1, 60)
        np.testing.assert_allclose(energy(s, n), [energy(s, int(k)) for k in n], rtol=0, atol=0)

    def test_scalar_returns_float(self):
        assert isinstance(energy(base(0.2), 5), float)

    def test_bounded_by_geometric_series(self):
        a = 0.3
        e = energy(base(a), np.arange(1, 3000))
        assert np.all(np.abs(e) <= 0.5 * (1 + a / (1 - a)) + 1e-15)

    def test_max_order_truncation(self):
        a = 0.4
        got = energy(base(a, max_order=2), 10)
        want = 0.5 * sum(c * a**k for k, c in enumerate(alpha_polynomial(10).coeffs[:3]))
        assert got == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, None])
    def test_alpha_domain(self, bad):
        with pytest.raises(SequenceError):
            base(bad)

    def test_site_domain(self):
        with pytest.raises(SequenceError):
            energy(base(0.2), 0)
        with pytest.raises(SequenceError):
            energy(base(0.2), np.array([1.5]))

    def test_section(self):
        s = base(0.2)
        np.testing.assert_array_equal(section(s, 5, 4), energy(s, np.arange(5, 9)))
        with pytest.raises(SequenceError):
            section(s, 0, 3)


class TestModified:
    def test_mod6_shift(self):
        a, ap = 0.25, 0.22
        assert energy(mod6(a, ap), 6) - energy(base(a), 6) == pytest.approx(ap / 2, abs=1e-15)
        assert energy(mod6(a, ap), 5) == energy(base(a), 5)

    def test_mod6_only_multiples_of_six(self):
        n = np.arange(1, 500)
        diff = energy(mod6(0.25, 0.22), n) - energy(base(0.25), n)
        np.testing.assert_allclose(diff[n % 6 != 0], 0.0, atol=0)
        np.testing.assert_allclose(diff[n % 6 == 0], 0.11, atol=1e-15)

    def test_mod3_shifts(self):
        a, b = 0.25, 0.1725
        n = np.arange(1, 400)
        diff = energy(mod3(a, b), n) - energy(base(a), n)
        k = n // 3
        np.testing.assert_allclose(diff[n % 3 != 0], 0.0, atol=0)
        # odd k: up by beta/2; even k: down by beta
        np.testing.assert_allclose(diff[(n % 3 == 0) & (k % 2 == 1)], b / 2, atol=1e-15)
        np.testing.assert_allclose(diff[(n % 3 == 0) & (k % 2 == 0)], -b, atol=1e-15)

    def test_mod3_site_three(self):
        b = 0.1
        assert energy(mod3(0.25, b), 3) - energy(base(0.25), 3) == pytest.approx(b / 2)

    def test_missing_shift_parameters(self):
        with pytest.raises(SequenceError):
            SequenceSpec(Variant.MOD6, alpha=0.25)
        with pytest.raises(SequenceError):
            SequenceSpec(Variant.MOD3, alpha=0.25, beta=0.0)


class TestPDC:
    def test_site_one(self):
        assert energy(pdc(0.3), 1) == pytest.approx(-0.5)

    @given(st.integers(1, 5000), st.floats(0.05, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_binary_digit_form(self, n, a):
        assert energy(pdc(a), n) == pytest.approx(brute_pdc(n, a), abs=1e-14)


class TestRandomAndPerturbed:
    def test_support(self):
        e = energy(random_sequence(26.0, 3), np.arange(1, 5000))
        assert np.all((e > 0) & (e < 26.0))

    def test_units(self):
        assert random_sequence(13.0, 1).units == "J"
        assert base(0.2).units == "h"

    def test_same_seed_same_values(self):
        n = np.arange(1, 200)
        np.testing.assert_array_equal(energy(random_sequence(26, 9), n), energy(random_sequence(26, 9), n))

    def test_site_value_independent_of_query(self):
        s = random_sequence(26, 5)
        full = energy(s, np.arange(1, 101))
        assert energy(s, 57) == full[56]
        np.testing.assert_array_equal(energy(s, np.array([90, 3])), full[[89, 2]])

    def test_seeds_differ(self):
        n = np.arange(1, 50)
        assert not np.array_equal(energy(random_sequence(26, 1), n), energy(random_sequence(26, 2), n))

    def test_zero_noise_is_identity(self):
        n = np.arange(1, 300)
        s = mod6(0.25, 0.22)
        np.testing.assert_array_equal(energy(perturb(s, 0.0, 4), n), energy(s, n))

    def test_noise_bound(self):
        a = 0.25
        s = mod6(a, 0.22)
        n = np.arange(1, 2000)
        d = energy(perturb(s, a**5, 1), n) - energy(s, n)
        assert np.max(np.abs(d)) <= a**5 / 2
        assert a**5 / 2 == pytest.approx(4.9e-4, rel=0.01)

    def test_perturb_streams_independent_of_random(self):
        # same seed, different consumers: no shared draws
        n = np.arange(1, 50)
        noise = energy(perturb(base(0.2), 2.0, 7), n) - energy(base(0.2), n)
        rnd = energy(random_sequence(1.0, 7), n)
        assert not np.allclose(noise, 2 * rnd - 1)

    def test_perturb_with_alpha_propagates(self):
        s = perturb(base(0.2), 1e-3, 1).with_alpha(0.3)
        assert s.param_alpha == 0.3 and s.base.alpha == 0.3

    def test_validation(self):
        with pytest.raises(SequenceError):
            random_sequence(0.0, 1)
        with pytest.raises(SequenceError):
            perturb(base(0.2), -1.0, 1)
        with pytest.raises(SequenceError):
            perturb(random_sequence(1.0, 1), 0.1, 1)


class TestPolynomials:
    @pytest.mark.parametrize(
        "n, coeffs",
        [(1, [-1, -1]), (2, [1, 1, -1]), (4, [1, -1, 1, 1, -1]), (7, [-1, 1, -1, 1, 1, 1, 1, -1])],
    )
    def test_table_rows(self, n, coeffs):
        assert alpha_polynomial(n).to_list() == coeffs

    @given(st.integers(1, 300), st.floats(0.05, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_polynomial_evaluates_to_energy(self, n, a):
        assert 0.5 * alpha_polynomial(n)(a) == pytest.approx(energy(base(a), n), abs=1e-13)

    @given(st.integers(1, 200), st.integers(0, 220))
    @settings(max_examples=80, deadline=None)
    def test_coefficient_matches_polynomial(self, n, q):
        p = alpha_polynomial(n).coeffs
        want = p[q] if q < len(p) else 0
        assert int(base_coefficient(n, q)) == want

    def test_polynomial_arithmetic(self):
        p = AlphaPolynomial((1, 2)) - AlphaPolynomial((1, 2, 3))
        assert p.to_list() == [0, 0, -3]
        assert p.degree == 2
        assert p(2.0) == -12.0

    def test_domain(self):
        with pytest.raises(SequenceError):
            alpha_polynomial(0)


class TestPeriods:
    def test_constant_term(self):
        assert coefficient_period(0, 100) == 2

    def test_quadratic_term(self):
        assert coefficient_period(2, 1000) == 6

    @pytest.mark.parametrize("q", range(0, 12))
    def test_period_rule(self, q):
        assert coefficient_period(q, 4000) == 2 * (q + 1)

    def test_joint_period(self):
        assert joint_period(6) == 840
        assert joint_period(6) == 2 * 3 * 4 * 5 * 7
        assert joint_period(5) == 2 * math.lcm(2, 3, 4, 5, 6)

    def test_joint_period_brute(self):
        # every coefficient up to alpha^6 repeats with the joint period
        n = np.arange(7, 3000)
        for q in range(7):
            np.testing.assert_array_equal(base_coefficient(n, q), base_coefficient(n + 840, q))

    def test_scan_window_too_short(self):
        with pytest.raises(SequenceError):
            coefficient_period(5, 10)

    def test_consistency_error_type(self):
        assert issubclass(ConsistencyError, RuntimeError)
