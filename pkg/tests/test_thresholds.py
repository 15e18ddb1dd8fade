import numpy as np
import pytest

from src.demand import MarketParams
from src.profit import baseline_profit, delta, subscription_profit
from src.thresholds import (
    critical_beta, critical_c, critical_pi, first_root, min_viable_pi, zero_profit_c,
)


def test_first_root():
    assert first_root(lambda x: x - 0.3, 0.0, 1.0) == pytest.approx(0.3, abs=1e-6)
    assert first_root(lambda x: x + 1.0, 0.0, 1.0) is None
    # two crossings: the smaller is returned
    assert first_root(lambda x: (x - 0.2) * (x - 0.7), 0.0, 1.0) == pytest.approx(0.2, abs=1e-6)


def test_first_root_catches_near_tangent_crossings():
    f = lambda x: (x - 0.5) ** 2 - 1e-6
    assert first_root(f, 0.0, 1.0) == pytest.approx(0.499, abs=1e-5)


def test_min_viable_pi(basic):
    assert min_viable_pi(basic) == pytest.approx(0.1873, abs=1e-4)
    root = min_viable_pi(basic)
    assert baseline_profit(basic.replace(pi=root)).expected_profit == pytest.approx(0.0, abs=1e-4)


def test_min_viable_pi_decreases_with_n():
    values = [min_viable_pi(MarketParams(n=n, pi=0.5, c=0.85)) for n in (50, 100, 500, 1000)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_critical_pi(basic):
    root = critical_pi(basic, 0.075, 0.1)
    assert root == pytest.approx(0.62, abs=0.005)
    at_root = basic.replace(pi=root)
    diff = subscription_profit(at_root, 0.075, 0.1).expected_profit - baseline_profit(at_root).expected_profit
    assert abs(diff) <= 1e-4


def test_critical_pi_none_without_subscribers_or_discount(basic):
    assert critical_pi(basic, 0.075, 0.0) is None
    assert critical_pi(basic, 0.0, 0.1) is None


def test_critical_c(basic):
    root = critical_c(basic, 0.075, 0.1)
    assert root == pytest.approx(0.889, abs=0.002)
    at_root = basic.replace(c=root)
    diff = subscription_profit(at_root, 0.075, 0.1).expected_profit - baseline_profit(at_root).expected_profit
    assert abs(diff) <= 1e-4
    assert critical_c(basic, 0.075, 0.0) is None


def test_zero_profit_c(basic):
    plain = zero_profit_c(basic)
    assert plain == pytest.approx(0.92194, abs=1e-4)
    assert baseline_profit(basic.replace(c=plain)).expected_profit == pytest.approx(0.0, abs=1e-4)
    with_offer = zero_profit_c(basic, 0.075, 0.1)
    assert with_offer == pytest.approx(0.9192, abs=5e-4)
    assert subscription_profit(basic.replace(c=with_offer), 0.075, 0.1).expected_profit == pytest.approx(0.0, abs=1e-4)


def test_critical_beta(basic):
    assert critical_beta(basic, 0.10) == pytest.approx(0.807, abs=0.005)
    assert critical_beta(basic, 0.09) == 0.0
    assert critical_beta(basic, 0.05) == 0.0


def test_critical_beta_none_when_offer_never_pays(basic):
    assert critical_beta(basic, 0.2) is None


@pytest.mark.parametrize("tau", [0.095, 0.10, 0.105])
def test_critical_beta_is_a_profit_crossing(basic, tau):
    root = critical_beta(basic, tau)
    assert root is not None and 0.0 < root < 1.0
    diff = subscription_profit(basic, tau, root).expected_profit - baseline_profit(basic).expected_profit
    assert abs(diff) <= 1e-4
    below = subscription_profit(basic, tau, max(root - 0.01, 0.0)).expected_profit
    assert below < baseline_profit(basic).expected_profit


def test_thresholds_move_with_discount(basic):
    betas = [critical_beta(basic, t) for t in np.arange(0.095, 0.106, 0.005)]
    assert all(b > a for a, b in zip(betas, betas[1:]))


def test_critical_beta_close_to_one_is_exact(basic):
    # -n*beta*delta + ecu*(1 - s) = 0 with s = sqrt(1 - beta) gives s = ecu/(n*delta) - 1
    s = baseline_profit(basic).ecu / (basic.n * delta(basic, 0.11)) - 1.0
    root = critical_beta(basic, 0.11)
    assert root == pytest.approx(1.0 - s * s, abs=5e-6)
    assert 0.998 < root < 1.0
