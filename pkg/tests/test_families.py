"""Exponential-family structure: densities, charts, moment maps."""

import math

import numpy as np
import pytest
from scipy.special import expit
from scipy.stats import binom, norm

from igk.errors import DomainError, NumericalError
from igk.families import (
    BUILTIN_FAMILIES,
    Box,
    ExpectationPoint,
    FiniteSpace,
    NaturalPoint,
    binomial_family,
    categorical_family,
    family,
    normal_family,
    normal_fixed_sigma_family,
)


def softmax_probabilities(theta):
    """Independent oracle: p_i = exp(theta_i) / (1 + sum exp(theta))."""
    e = np.exp(np.asarray(theta, dtype=float))
    z = 1.0 + e.sum()
    return np.append(e / z, 1.0 / z)


class TestCategorical:
    def test_probabilities_match_softmax(self):
        fam = categorical_family(4)
        rng = np.random.default_rng(11)
        for _ in range(20):
            theta = rng.uniform(-2, 2, size=3)
            np.testing.assert_allclose(
                fam.probabilities(theta), softmax_probabilities(theta),
                rtol=0, atol=1e-14,
            )

    def test_uniform_at_origin(self):
        fam = categorical_family(3)
        np.testing.assert_allclose(
            fam.probabilities([0.0, 0.0]), np.full(3, 1.0 / 3.0), atol=1e-15
        )

    def test_mean_parameters_are_leading_probabilities(self):
        fam = categorical_family(3)
        theta = np.array([0.7, -0.4])
        eta = fam.natural_to_expectation(theta)
        np.testing.assert_allclose(eta, fam.probabilities(theta)[:2], atol=1e-14)


class TestBinomial:
    def test_probabilities_match_scipy(self):
        rng = np.random.default_rng(5)
        for n in (1, 2, 5, 9):
            fam = binomial_family(n)
            for _ in range(10):
                theta = rng.uniform(-2, 2)
                expected = binom.pmf(np.arange(n + 1), n, expit(theta))
                np.testing.assert_allclose(
                    fam.probabilities([theta]), expected, rtol=0, atol=1e-14
                )

    def test_mean_is_n_sigmoid(self):
        fam = binomial_family(7)
        theta = np.array([0.35])
        np.testing.assert_allclose(
            fam.natural_to_expectation(theta), [7 * expit(0.35)], atol=1e-13
        )


class TestNormal:
    def test_density_matches_scipy(self):
        fam = normal_family()
        rng = np.random.default_rng(3)
        for _ in range(10):
            theta = np.array([rng.uniform(-2, 2), rng.uniform(-3, -0.3)])
            sigma2 = -1.0 / (2.0 * theta[1])
            mu = theta[0] * sigma2
            xs = rng.normal(mu, math.sqrt(sigma2), size=7)
            np.testing.assert_allclose(
                fam.density(theta, xs),
                norm.pdf(xs, loc=mu, scale=math.sqrt(sigma2)),
                rtol=1e-12,
            )

    def test_moments(self):
        fam = normal_family()
        theta = np.array([1.0, -0.5])  # mu = 1, sigma^2 = 1
        mean, var = fam.mean_and_variance(theta, lambda x: x)
        np.testing.assert_allclose([mean, var], [1.0, 1.0], atol=1e-10)

    def test_fixed_sigma_density(self):
        fam = normal_fixed_sigma_family()
        xs = np.linspace(-2, 4, 9)
        np.testing.assert_allclose(
            fam.density([1.5], xs), norm.pdf(xs, loc=1.5, scale=1.0), rtol=1e-12
        )


class TestCharts:
    @pytest.mark.parametrize("name", BUILTIN_FAMILIES)
    def test_mean_map_roundtrip(self, name):
        fam = family(name)
        rng = np.random.default_rng(17)
        lo = np.asarray(fam.sample_box.lo)
        hi = np.asarray(fam.sample_box.hi)
        for _ in range(25):
            theta = rng.uniform(lo, hi)
            eta = fam.natural_to_expectation(theta)
            back = fam.expectation_to_natural(eta)
            np.testing.assert_allclose(back, theta, rtol=0, atol=1e-8)

    @pytest.mark.parametrize("name", BUILTIN_FAMILIES)
    def test_closed_mean_map_matches_gradient(self, name):
        fam = family(name)
        stripped = fam.__class__(
            name=fam.name,
            space=fam.space,
            carrier=fam.carrier,
            statistics=fam.statistics,
            log_partition=fam.log_partition,
            domain=fam.domain,
            sample_box=fam.sample_box,
        )
        rng = np.random.default_rng(23)
        theta = rng.uniform(fam.sample_box.lo, fam.sample_box.hi)
        np.testing.assert_allclose(
            fam.natural_to_expectation(theta),
            stripped.natural_to_expectation(theta),
            rtol=0,
            atol=1e-7,
        )

    def test_point_wrappers(self):
        fam = categorical_family(3)
        theta = np.array([0.4, -0.1])
        eta = fam.natural_to_expectation(theta)
        np.testing.assert_allclose(
            fam.natural_coords(NaturalPoint(tuple(theta))), theta, atol=0
        )
        np.testing.assert_allclose(
            fam.natural_coords(ExpectationPoint(tuple(eta))), theta, atol=1e-9
        )

    def test_unreachable_mean_raises(self):
        fam = binomial_family(3)
        with pytest.raises((NumericalError, DomainError)):
            fam.expectation_to_natural(np.array([3.5]))  # outside (0, n)


class TestStructure:
    def test_weighted_support_normalized(self):
        for name in BUILTIN_FAMILIES:
            fam = family(name)
            theta = np.zeros(fam.dim) if fam.is_finite else np.array(
                [0.0, -0.5][: fam.dim]
            )
            _, w = fam.weighted_support(theta)
            np.testing.assert_allclose(w.sum(), 1.0, atol=1e-9)

    def test_statistic_independence_positive(self):
        for name in BUILTIN_FAMILIES:
            assert family(name).statistic_independence_margin() > 1e-12

    def test_value_table_moments(self):
        fam = categorical_family(3)
        table = np.array([1.0, 4.0, 9.0])
        mean, var = fam.mean_and_variance([0.0, 0.0], table)
        np.testing.assert_allclose(mean, 14.0 / 3.0, atol=1e-13)
        np.testing.assert_allclose(var, np.mean((table - 14.0 / 3.0) ** 2), atol=1e-13)


class TestValidation:
    def test_unknown_family_name(self):
        with pytest.raises(DomainError):
            family("nosuch")
        with pytest.raises(DomainError):
            family("categorical:x")

    def test_theta_shape_checked(self):
        fam = categorical_family(3)
        with pytest.raises(DomainError):
            fam.probabilities([0.0])
        with pytest.raises(DomainError):
            fam.probabilities([0.0, np.inf])

    def test_domain_enforced(self):
        fam = normal_family()
        with pytest.raises(DomainError):
            fam.density([0.0, 0.5], 0.0)  # theta2 >= 0 is outside the domain

    def test_finite_space_needs_two_points(self):
        with pytest.raises(DomainError):
            FiniteSpace((1.0,))

    def test_box_needs_interior(self):
        with pytest.raises(DomainError):
            Box((0.0,), (0.0,))

    def test_probabilities_need_finite_space(self):
        with pytest.raises(DomainError):
            normal_family().probabilities([0.0, -0.5])
