import math

import numpy as np
import pytest

from src.acceptance import (
    Segment, acceptance_probability, ex_ante_share, ex_ante_share_derivative,
    golden_section_max, isoquant_lambda, optimize_discount_analytic,
    optimize_discount_segments, profit_curve, subscription_terms, tau_grid,
)
from src.demand import DomainError, MarketParams
from src.profit import subscription_profit


def test_acceptance_probability():
    assert acceptance_probability(0.023, 0.5, 0.5) == pytest.approx(0.179, abs=1e-3)
    assert acceptance_probability(0.0, 0.5, 0.5) == 0.0
    assert acceptance_probability(0.1, 0.5, 0.0) == 0.0
    assert acceptance_probability(1.0, 1.0, 1.0) == pytest.approx(1.0)


def test_acceptance_probability_vectorised():
    taus = np.array([0.0, 0.008, 0.064])
    np.testing.assert_allclose(acceptance_probability(taus, 1.0, 1.0), [0.0, 0.2, 0.4])


def test_acceptance_depends_on_tau_over_p():
    assert acceptance_probability(0.046, 0.5, 0.5, p=2.0) == pytest.approx(acceptance_probability(0.023, 0.5, 0.5))


@pytest.mark.parametrize("tau, pi, lam", [(-0.1, 0.5, 0.5), (0.1, 1.2, 0.5), (0.1, 0.5, -0.2), (0.1, 0.5, math.nan)])
def test_acceptance_domain(tau, pi, lam):
    with pytest.raises(DomainError):
        acceptance_probability(tau, pi, lam)


def test_acceptance_monotone():
    taus = np.linspace(0.001, 0.15, 150)
    etas = acceptance_probability(taus, 0.5, 0.5)
    assert np.all(np.diff(etas) > 0)
    assert acceptance_probability(0.05, 0.6, 0.5) > acceptance_probability(0.05, 0.5, 0.5)
    assert acceptance_probability(0.05, 0.5, 0.6) > acceptance_probability(0.05, 0.5, 0.5)


def test_ex_ante_share():
    assert ex_ante_share(0.023, 0.5, 0.5) == pytest.approx(0.0896, abs=1e-3)
    terms = subscription_terms(0.023, 0.5, 0.5)
    assert terms.beta == pytest.approx(0.5 * terms.eta)
    assert 0.0 <= terms.beta <= 0.5


def test_ex_ante_share_derivative():
    h = 1e-7
    numeric = (ex_ante_share(0.05 + h, 0.5, 0.5) - ex_ante_share(0.05 - h, 0.5, 0.5)) / (2 * h)
    assert ex_ante_share_derivative(0.05, 0.5, 0.5) == pytest.approx(numeric, rel=1e-5)
    assert ex_ante_share_derivative(0.0, 0.5, 0.5) == math.inf
    assert ex_ante_share_derivative(0.0, 0.5, 0.0) == 0.0


def test_isoquant():
    iso = isoquant_lambda(0.30, 0.075, 0.8)
    assert iso.lam == pytest.approx(0.45)
    assert not iso.clamped
    assert isoquant_lambda(0.05, 0.075, 0.1).lam == pytest.approx(0.016667, abs=1e-6)
    assert acceptance_probability(0.075, 0.8, iso.lam) == pytest.approx(0.30)


def test_isoquant_clamps():
    iso = isoquant_lambda(0.30, 0.075, 0.05)
    assert iso.lam == 1.0 and iso.clamped


def test_isoquant_domain():
    with pytest.raises(DomainError):
        isoquant_lambda(0.0, 0.075, 0.5)
    with pytest.raises(DomainError):
        isoquant_lambda(0.3, 0.0, 0.5)


def test_isoquant_decreasing_in_pi():
    lams = [isoquant_lambda(0.1, 0.075, pi).lam for pi in np.arange(0.2, 1.01, 0.1)]
    assert all(b < a for a, b in zip(lams, lams[1:]))


def test_tau_grid():
    grid = tau_grid(0.0, 0.15)
    assert len(grid) == 151
    assert grid[0] == 0.0 and grid[-1] == 0.15
    assert grid[23] == 0.023


def test_golden_section_max():
    x = golden_section_max(lambda t: -(t - 0.0234) ** 2, 0.0, 0.1, tol=1e-7)
    assert x == pytest.approx(0.0234, abs=1e-6)


def test_optimize_basic(basic):
    sol = optimize_discount_analytic(basic, 0.5)
    assert sol.tau_display == 0.023
    assert sol.tau_star == pytest.approx(0.02347, abs=2e-4)
    assert sol.expected_profit == pytest.approx(22.65, abs=0.02)
    assert sol.relative_uplift == pytest.approx(0.162, abs=0.002)
    assert sol.baseline_profit == pytest.approx(19.4965, abs=1e-4)
    assert not sol.degenerate


def test_optimum_satisfies_first_order_condition(basic):
    sol = optimize_discount_analytic(basic, 0.5)
    beta = sol.beta_at_optimum
    lhs = 2000.0 * sol.tau_star
    rhs = 37.5 + 9.0017 / math.sqrt(1.0 - beta)
    assert lhs == pytest.approx(rhs, abs=0.5)


def test_optimize_beats_every_grid_point(basic):
    sol = optimize_discount_analytic(basic, 0.5)
    curve = profit_curve(basic, 0.5, tau_grid(0.0, 0.15))
    assert sol.expected_profit >= curve["expected_profit"].max() - 1e-12


def test_exhaustive_agrees_with_refined(basic):
    refined = optimize_discount_analytic(basic, 0.5)
    exhaustive = optimize_discount_analytic(basic, 0.5, exhaustive=True)
    assert exhaustive.tau_star == pytest.approx(refined.tau_star, abs=2e-5)
    assert exhaustive.evaluated > refined.evaluated


def test_optimize_degenerate_without_popularity(basic):
    sol = optimize_discount_analytic(basic, 0.0)
    assert sol.tau_star == 0.0
    assert sol.degenerate
    assert sol.expected_profit == pytest.approx(sol.baseline_profit)


def test_optimal_discount_falls_with_buying_probability():
    for lam in (0.05, 0.5, 0.95):
        taus = [optimize_discount_analytic(MarketParams(n=500, pi=pi, c=0.85), lam).tau_star
                for pi in (0.25, 0.5, 0.75, 0.95)]
        assert all(b < a for a, b in zip(taus, taus[1:]))


def test_optimal_discount_barely_moves_with_popularity():
    for pi in (0.25, 0.5, 0.75, 0.95):
        taus = [optimize_discount_analytic(MarketParams(n=500, pi=pi, c=0.85), lam).tau_star
                for lam in (0.05, 0.25, 0.5, 0.75, 0.95)]
        assert max(taus) - min(taus) <= 0.003


@pytest.mark.parametrize("c, expected", [(0.1, 0.113), (0.9, 0.0175)])
def test_optimal_discount_across_cost(c, expected):
    sol = optimize_discount_analytic(MarketParams(n=500, pi=0.5, c=c), 0.5)
    assert sol.tau_star == pytest.approx(expected, abs=0.003)


def test_uplift_shrinks_with_segment_size():
    uplifts = [optimize_discount_analytic(MarketParams(n=n, pi=0.5, c=0.85), 0.5).relative_uplift
               for n in range(200, 1001, 100)]
    assert all(b < a for a, b in zip(uplifts, uplifts[1:]))
    assert uplifts[0] > 0.20
    assert uplifts[-1] > 0.10


def test_profit_curve(basic):
    curve = profit_curve(basic, 0.5, [0.0, 0.023, 0.1])
    assert list(curve.columns) == ["tau", "beta", "expected_profit", "baseline"]
    assert curve["expected_profit"].iloc[0] == pytest.approx(curve["baseline"].iloc[0])
    assert curve["expected_profit"].iloc[1] == pytest.approx(
        subscription_profit(basic, 0.023, curve["beta"].iloc[1]).expected_profit)
    with pytest.raises(DomainError):
        profit_curve(basic, 0.5, [1.0])


def test_single_segment_matches_analytic(basic):
    seg = optimize_discount_segments([Segment(n=500, pi=0.5, lam=0.5)], c=0.85)
    sol = optimize_discount_analytic(basic, 0.5)
    assert seg.tau_star == pytest.approx(sol.tau_star, abs=1e-6)
    assert seg.expected_profit == pytest.approx(sol.expected_profit, abs=1e-9)


def test_two_segments_share_one_discount():
    segs = [Segment(n=300, pi=0.25, lam=0.5), Segment(n=300, pi=0.75, lam=0.5)]
    joint = optimize_discount_segments(segs, c=0.85)
    low = optimize_discount_analytic(MarketParams(n=300, pi=0.25, c=0.85), 0.5).tau_star
    high = optimize_discount_analytic(MarketParams(n=300, pi=0.75, c=0.85), 0.5).tau_star
    assert high < joint.tau_star < low
    expected_share = (ex_ante_share(joint.tau_star, 0.25, 0.5) + ex_ante_share(joint.tau_star, 0.75, 0.5)) / 2
    assert joint.beta_at_optimum == pytest.approx(expected_share)
    with pytest.raises(DomainError):
        optimize_discount_segments([], c=0.85)


def test_subscribing_share_peaks_below_certain_demand():
    betas = {pi: optimize_discount_analytic(MarketParams(n=500, pi=pi, c=0.85), 0.5).beta_at_optimum
             for pi in (0.25, 0.5, 0.75, 0.95)}
    assert max(betas, key=betas.get) == 0.75
