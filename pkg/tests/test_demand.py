import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import binom, norm

from src.demand import (
    DomainError, MarketParams, normal_approx, order_quantity,
    std_normal_cdf, std_normal_pdf, std_normal_quantile,
)


@pytest.mark.parametrize("n, pi, mu, sigma", [
    (500, 0.5, 250.0, 11.1803),
    (100, 1.0, 100.0, 0.0),
    (50, 0.25, 12.5, 3.0619),
])
def test_normal_approx(n, pi, mu, sigma):
    na = normal_approx(MarketParams(n=n, pi=pi, c=0.85))
    assert na.mu == pytest.approx(mu)
    assert na.sigma == pytest.approx(sigma, abs=1e-4)


def test_sigma_symmetric_in_pi():
    for pi in np.arange(0.05, 1.0, 0.05):
        a = normal_approx(MarketParams(n=300, pi=pi, c=0.5)).sigma
        b = normal_approx(MarketParams(n=300, pi=1.0 - pi, c=0.5)).sigma
        assert a == pytest.approx(b, rel=1e-12)


def test_pdf_values():
    assert std_normal_pdf(0.0) == pytest.approx(0.3989423, abs=1e-7)
    assert std_normal_pdf(1.8808) == pytest.approx(0.0681, abs=1e-4)
    assert std_normal_pdf(6.0) == pytest.approx(6.08e-9, rel=1e-2)
    assert std_normal_pdf(-6.0) == std_normal_pdf(6.0)


def test_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.8808) == pytest.approx(0.97, abs=1e-4)
    z = np.linspace(-8, 8, 161)
    np.testing.assert_allclose(std_normal_cdf(-z), 1.0 - std_normal_cdf(z), atol=1e-15)
    np.testing.assert_allclose(std_normal_cdf(z), norm.cdf(z), atol=1e-10)


@pytest.mark.parametrize("q, z", [(0.5, 0.0), (0.97, 1.88079), (0.975, 1.95996)])
def test_quantile_known_values(q, z):
    assert std_normal_quantile(q) == pytest.approx(z, abs=1e-4)


def test_quantile_hits_cdf_within_tolerance():
    qs = np.concatenate([[1e-12, 1e-8, 1e-4, 0.01, 0.02425], np.linspace(0.03, 0.97, 95),
                         [0.99, 0.999, 1 - 1e-6, 1 - 1e-9]])
    for q in qs:
        z = std_normal_quantile(q)
        assert abs(float(std_normal_cdf(z)) - q) <= 1e-10
        if 1e-6 <= q <= 1 - 1e-6:
            assert z == pytest.approx(norm.ppf(q), abs=1e-8)


def test_quantile_round_trip_grid():
    # above z=5.5 the upper tail is lost to rounding of q itself
    for z in np.arange(-6.0, 5.5 + 1e-9, 0.01):
        assert abs(std_normal_quantile(float(std_normal_cdf(z))) - z) <= 1e-8


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_quantile_domain(q):
    with pytest.raises(DomainError):
        std_normal_quantile(q)


def test_order_quantity():
    assert order_quantity(MarketParams(n=500, pi=0.5, c=0.85)) == pytest.approx(271.03, abs=0.01)
    assert order_quantity(MarketParams(n=80, pi=1.0, c=0.85)) == 80
    assert order_quantity(MarketParams(n=500, pi=0.5, c=0.85, alpha=0.5)) == pytest.approx(250.0, abs=1e-9)


def test_order_quantity_nondecreasing_in_alpha():
    qs = [order_quantity(MarketParams(n=200, pi=0.3, c=0.7, alpha=a)) for a in np.linspace(0.01, 0.99, 50)]
    assert all(b >= a for a, b in zip(qs, qs[1:]))


def test_normal_cdf_close_to_binomial_for_small_n():
    for n in (10, 20, 30):
        for pi in np.arange(0.05, 1.0, 0.05):
            na = normal_approx(MarketParams(n=n, pi=pi, c=0.5))
            k = np.arange(n + 1)
            approx = std_normal_cdf((k + 0.5 - na.mu) / na.sigma)
            assert np.max(np.abs(approx - binom.cdf(k, n, pi))) <= 1.0 / math.sqrt(n)


@pytest.mark.parametrize("fields", [
    dict(n=500, pi=0.5, c=1.0),
    dict(n=500, pi=0.5, c=1.2, p=1.0),
    dict(n=0, pi=0.5, c=0.85),
    dict(n=500, pi=0.0, c=0.85),
    dict(n=500, pi=0.5, c=0.85, alpha=1.0),
])
def test_market_params_validation(fields):
    with pytest.raises(ValidationError):
        MarketParams(**fields)


def test_market_params_replace_validates():
    params = MarketParams(n=500, pi=0.5, c=0.85)
    assert params.replace(pi=0.25).pi == 0.25
    with pytest.raises(ValidationError):
        params.replace(c=1.5)
