# src/acceptance.py
"""
Customer acceptance of subscription offers and the profit-maximising discount.

A customer offered a discount tau accepts with the Cobb-Douglas probability
eta = (tau/p * pi * lam) ** (1/3); the ex-ante subscribing share is pi * eta.
The optimisers scan tau on a 0.001 grid over [0, p - c] and refine the best
grid point by golden-section search.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from .demand import DomainError, MarketParams, Real
from .profit import _baseline_value, _subscription_value, gamma_coefficient, relative_change

log = logging.getLogger(__name__)

TAU_STEP = 1e-3
TAU_TOL = 1e-5
SIM_WINDOW = 0.01
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SubscriptionTerms:
    tau: float
    lam: float
    eta: float
    beta: float


@dataclass(frozen=True)
class Isoquant:
    lam: float
    clamped: bool  # required popularity exceeded 1 and was capped


@dataclass(frozen=True)
class DiscountSolution:
    """
    Best discount found by one of the optimisers.
    Simulated solutions also carry the standard error and the initial-period
    reference profit that relative_uplift is measured against.
    """
    tau_star: float
    expected_profit: float
    beta_at_optimum: float
    relative_uplift: Optional[float]
    baseline_profit: float
    degenerate: bool = False
    std_error: Optional[float] = None
    simulated_share: Optional[float] = None
    evaluated: int = 0

    @property
    def tau_display(self) -> float:
        """tau* at 0.1 percentage-point granularity."""
        return round(self.tau_star, 3)


@dataclass(frozen=True)
class Segment:
    """Customer segment with its own size, buying probability and popularity."""
    n: int
    pi: float
    lam: float


# -------------------- acceptance --------------------
def _check_unit(value: Real, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return arr


def _as_output(arr: np.ndarray, like: Real) -> Real:
    return float(arr) if np.ndim(like) == 0 else arr


def acceptance_probability(tau: Real, pi: float, lam: float, p: float = 1.0) -> Real:
    """eta = (tau/p * pi * lam) ** (1/3); zero when any factor is zero."""
    if p <= 0.0:
        raise DomainError(f"price must be positive, got p={p}")
    t = _check_unit(np.asarray(tau, dtype=float) / p, "tau/p")
    _check_unit(pi, "pi")
    _check_unit(lam, "lambda")
    return _as_output(np.cbrt(t * pi * lam), tau)


def ex_ante_share(tau: Real, pi: float, lam: float, p: float = 1.0) -> Real:
    eta = acceptance_probability(tau, pi, lam, p)
    return pi * eta


def ex_ante_share_derivative(tau: float, pi: float, lam: float, p: float = 1.0) -> float:
    # d/dtau of pi * (tau/p * pi * lam)^(1/3) = beta / (3 tau)
    beta = ex_ante_share(tau, pi, lam, p)
    if tau == 0.0:
        return math.inf if pi * lam > 0.0 else 0.0
    return beta / (3.0 * tau)


def subscription_terms(tau: float, pi: float, lam: float, p: float = 1.0) -> SubscriptionTerms:
    eta = acceptance_probability(tau, pi, lam, p)
    return SubscriptionTerms(tau=float(tau), lam=float(lam), eta=eta, beta=pi * eta)


def isoquant_lambda(eta_target: float, tau: float, pi: float, p: float = 1.0) -> Isoquant:
    """Popularity needed to reach acceptance eta_target at (tau, pi)."""
    if not (0.0 < eta_target <= 1.0):
        raise DomainError(f"eta target must lie in (0, 1], got {eta_target}")
    base = tau / p * pi
    if base <= 0.0:
        raise DomainError("isoquant undefined when tau * pi = 0")
    lam = eta_target ** 3 / base
    if lam > 1.0:
        return Isoquant(lam=1.0, clamped=True)
    return Isoquant(lam=lam, clamped=False)


# -------------------- search helpers --------------------
def golden_section_max(func: Callable[[float], float], lo: float, hi: float,
                       tol: float = TAU_TOL) -> float:
    """Maximiser of a unimodal func on [lo, hi], bracket shrunk below tol."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = func(x1), func(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = func(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = func(x1)
    return (a + b) / 2.0


def tau_grid(lo: float, hi: float, step: float = TAU_STEP) -> np.ndarray:
    """Inclusive grid lo, lo+step, ..., hi; points are rounded to the step's decimals."""
    if hi < lo:
        return np.array([lo])
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    decimals = max(0, -int(math.floor(math.log10(step))))
    return np.round(lo + step * np.arange(count), decimals + 3)


def _grid_then_refine(objective: Callable[[np.ndarray], np.ndarray], hi: float,
                      step: float, tol: float, exhaustive: bool) -> tuple[float, int]:
    grid = tau_grid(0.0, hi, tol if exhaustive else step)
    values = objective(grid)
    best = int(np.argmax(values))  # first maximum -> smaller tau on ties
    tau_best, f_best = float(grid[best]), float(values[best])
    if exhaustive:
        return tau_best, len(grid)

    calls = [0]

    def scalar(t: float) -> float:
        calls[0] += 1
        return float(objective(np.array([t]))[0])

    refined = golden_section_max(scalar, max(0.0, tau_best - step), min(hi, tau_best + step), tol)
    if scalar(refined) > f_best:
        tau_best = refined
    return tau_best, len(grid) + calls[0]


# -------------------- analytic optimisers --------------------
def profit_curve(params: MarketParams, lam: float, taus: Sequence[float]) -> pd.DataFrame:
    """Expected subscription profit along a discount grid, with the no-subscription line."""
    n, pi, p, c = params.n, params.pi, params.p, params.c
    gamma = gamma_coefficient(p, c, params.alpha)
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0.0) or np.any(taus >= p):
        raise DomainError("discounts must satisfy 0 <= tau < p")
    beta = ex_ante_share(taus, pi, lam, p)
    return pd.DataFrame({
        "tau": taus,
        "beta": beta,
        "expected_profit": _subscription_value(n, pi, p, c, gamma, taus, beta),
        "baseline": float(_baseline_value(n, pi, p, c, gamma)),
    })


def optimize_discount_analytic(params: MarketParams, lam: float, step: float = TAU_STEP,
                               tol: float = TAU_TOL, exhaustive: bool = False) -> DiscountSolution:
    n, pi, p, c = params.n, params.pi, params.p, params.c
    _check_unit(lam, "lambda")
    gamma = gamma_coefficient(p, c, params.alpha)
    base = float(_baseline_value(n, pi, p, c, gamma))

    def objective(taus: np.ndarray) -> np.ndarray:
        return _subscription_value(n, pi, p, c, gamma, taus, ex_ante_share(taus, pi, lam, p))

    tau_star, evaluated = _grid_then_refine(objective, p - c, step, tol, exhaustive)
    profit = float(objective(np.array([tau_star]))[0])
    solution = DiscountSolution(
        tau_star=tau_star,
        expected_profit=profit,
        beta_at_optimum=float(ex_ante_share(tau_star, pi, lam, p)),
        relative_uplift=relative_change(profit, base),
        baseline_profit=base,
        degenerate=tau_star == 0.0,
        evaluated=evaluated,
    )
    log.debug("[optimize] analytic tau*=%.5f E=%.4f base=%.4f", tau_star, profit, base)
    if base < 0.0 and profit < 0.0:
        log.info("[optimize] unprofitable with or without subscription (E=%.2f)", profit)
    return solution


def optimize_discount_segments(segments: Sequence[Segment], c: float, p: float = 1.0,
                               alpha: float = 0.97, step: float = TAU_STEP,
                               tol: float = TAU_TOL) -> DiscountSolution:
    """
    One discount for all segments; each segment is planned on its own and the
    objective is the summed expected profit. beta_at_optimum is customer-weighted.
    """
    if not segments:
        raise DomainError("at least one segment is required")
    params = [MarketParams(n=s.n, pi=s.pi, p=p, c=c, alpha=alpha) for s in segments]
    for s in segments:
        _check_unit(s.lam, "lambda")
    gamma = gamma_coefficient(p, c, alpha)
    base = sum(float(_baseline_value(m.n, m.pi, p, c, gamma)) for m in params)

    def objective(taus: np.ndarray) -> np.ndarray:
        total = np.zeros_like(taus, dtype=float)
        for s in segments:
            beta = ex_ante_share(taus, s.pi, s.lam, p)
            total = total + _subscription_value(s.n, s.pi, p, c, gamma, taus, beta)
        return total

    tau_star, evaluated = _grid_then_refine(objective, p - c, step, tol, exhaustive=False)
    profit = float(objective(np.array([tau_star]))[0])
    customers = sum(s.n for s in segments)
    share = sum(s.n * float(ex_ante_share(tau_star, s.pi, s.lam, p)) for s in segments) / customers
    return DiscountSolution(
        tau_star=tau_star,
        expected_profit=profit,
        beta_at_optimum=share,
        relative_uplift=relative_change(profit, base),
        baseline_profit=base,
        degenerate=tau_star == 0.0,
        evaluated=evaluated,
    )


# -------------------- simulated optimiser --------------------
def optimize_discount_simulated(config, params: MarketParams, lam: float, step: float = TAU_STEP,
                                window: float = SIM_WINDOW, full_grid: bool = False) -> DiscountSolution:
    """
    Grid search on the simulated mean per-period profit. One draw bank serves
    every grid point, so neighbouring discounts are compared on common random
    numbers. relative_uplift is measured against the simulated initial period.
    """
    from .simulate import Simulator

    hi = params.p - params.c
    if full_grid:
        grid = tau_grid(0.0, hi, step)
    else:
        centre = round(optimize_discount_analytic(params, lam).tau_star, 3)
        grid = tau_grid(max(0.0, centre - window), min(hi, centre + window), step)

    sim = Simulator(config)
    bank = sim.draw(params)
    best = None
    for tau in grid:
        report = sim.evaluate(bank, params, float(tau), lam)
        if best is None or report.eval_mean_profit_per_period > best.eval_mean_profit_per_period:
            best = report
    log.info("[optimize] simulated tau*=%.3f mean=%.4f se=%.4f over %d grid points",
             best.tau, best.eval_mean_profit_per_period, best.std_error, len(grid))

    return DiscountSolution(
        tau_star=best.tau,
        expected_profit=best.eval_mean_profit_per_period,
        beta_at_optimum=float(ex_ante_share(best.tau, params.pi, lam, params.p)),
        relative_uplift=relative_change(best.eval_mean_profit_per_period, best.initial_period_mean_profit),
        baseline_profit=best.initial_period_mean_profit,
        degenerate=best.tau == 0.0,
        std_error=best.std_error,
        simulated_share=best.mean_subscriber_share,
        evaluated=len(grid),
    )
