# src/profit.py
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .demand import DomainError, MarketParams, Real, normal_approx, std_normal_cdf, std_normal_pdf, std_normal_quantile

QUAD_TOL = 1e-6
QUAD_SIGMAS = 8.0


@dataclass(frozen=True)
class ProfitDecomposition:
    """
    Part I (pwu) minus Part II (ecu).
    Subscription scenarios split pwu into a deterministic and a stochastic share.
    """
    pwu: float
    ecu: float
    expected_profit: float
    i_det: Optional[float] = None
    i_stoch: Optional[float] = None


@dataclass(frozen=True)
class Uplift:
    absolute: float
    relative: Optional[float]  # None when the reference profit is not positive


@dataclass(frozen=True)
class UpliftDecomposition:
    i_delta: float
    ii_delta: float

    @property
    def total(self) -> float:
        return self.i_delta + self.ii_delta


def check_share(beta: float, name: str = "beta") -> float:
    beta = float(beta)
    if not (0.0 <= beta <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {beta}")
    return beta


def relative_change(new: float, ref: float) -> Optional[float]:
    """(new - ref) / ref, defined only for a strictly positive reference."""
    if ref <= 0.0:
        return None
    return (new - ref) / ref


# -------------------- gamma --------------------
def gamma_coefficient(p: float, c: float, alpha: float) -> float:
    """gamma = p * (f(z_alpha) - (1 - alpha - c/p) * z_alpha): cost per unit of demand std-dev."""
    if not (0.0 < c < p):
        raise DomainError(f"need 0 < c < p, got c={c}, p={p}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    z = std_normal_quantile(alpha)
    return float(p * (std_normal_pdf(z) - (1.0 - alpha - c / p) * z))


def _gamma_in_c(p: float, c: Real, alpha: float) -> Real:
    # gamma is affine in c; used by vectorised root scans over c
    z = std_normal_quantile(alpha)
    return p * (float(std_normal_pdf(z)) - (1.0 - alpha) * z) + c * z


# -------------------- vectorised kernels --------------------
def _sigma(n: Real, pi: Real) -> Real:
    return np.sqrt(np.maximum(n * pi * (1.0 - pi), 0.0))


def _baseline_value(n: Real, pi: Real, p: float, c: Real, gamma: Real) -> Real:
    return (p - c) * n * pi - gamma * _sigma(n, pi)


def _subscription_value(n: Real, pi: Real, p: float, c: Real, gamma: Real, tau: Real, beta: Real) -> Real:
    i_det = (p - tau - c) * n * beta
    i_stoch = (p - c) * n * (1.0 - beta) * pi
    ecu = gamma * np.sqrt(np.maximum(n * (1.0 - beta) * pi * (1.0 - pi), 0.0))
    return i_det + i_stoch - ecu


# -------------------- baseline --------------------
def baseline_profit(params: MarketParams) -> ProfitDecomposition:
    gamma = gamma_coefficient(params.p, params.c, params.alpha)
    pwu = (params.p - params.c) * params.n * params.pi
    ecu = gamma * normal_approx(params).sigma
    return ProfitDecomposition(pwu=pwu, ecu=ecu, expected_profit=pwu - ecu)


def expected_profit_integral(params: MarketParams, q: float) -> float:
    """
    Expected newsvendor profit by numerical integration of the demand density;
    oracle for the closed form. The integral starts at max(0, mu - 8 sigma).
    """
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise DomainError(f"order quantity must be finite and >= 0, got {q}")
    p, c = params.p, params.c
    na = normal_approx(params)
    mu, sigma = na.mu, na.sigma
    if sigma == 0.0:
        return p * min(mu, q) - c * q

    lo = max(0.0, mu - QUAD_SIGMAS * sigma)
    sold_below = 0.0
    if q > lo:
        sold_below, _err = quad(
            lambda x: x * float(std_normal_pdf((x - mu) / sigma)) / sigma,
            lo, q, epsabs=QUAD_TOL, limit=200,
        )
    tail = 1.0 - float(std_normal_cdf((q - mu) / sigma))
    return p * sold_below + p * q * tail - c * q


def ecu_ratio(params: MarketParams) -> float:
    d = baseline_profit(params)
    if d.pwu <= 0.0:
        raise DomainError("ecu/pwu ratio undefined for non-positive pwu")
    return d.ecu / d.pwu


# -------------------- advanced demand information --------------------
def adi_profit(params: MarketParams, beta: float) -> ProfitDecomposition:
    """Profit when a share beta of customers announces next period's decision."""
    beta = check_share(beta)
    gamma = gamma_coefficient(params.p, params.c, params.alpha)
    n, pi = params.n, params.pi
    pwu = (params.p - params.c) * n * pi
    ecu = gamma * math.sqrt(max(n * (1.0 - pi * beta) * pi * (1.0 - pi), 0.0))
    return ProfitDecomposition(pwu=pwu, ecu=ecu, expected_profit=pwu - ecu)


def adi_uplift(params: MarketParams, beta: float) -> Uplift:
    e1 = baseline_profit(params).expected_profit
    e2 = adi_profit(params, beta).expected_profit
    return Uplift(absolute=e2 - e1, relative=relative_change(e2, e1))


# -------------------- subscription --------------------
def subscription_profit(params: MarketParams, tau: float, beta: float) -> ProfitDecomposition:
    beta = check_share(beta)
    if not (0.0 <= tau < params.p):
        raise DomainError(f"discount must satisfy 0 <= tau < p, got tau={tau}")
    gamma = gamma_coefficient(params.p, params.c, params.alpha)
    n, pi, p, c = params.n, params.pi, params.p, params.c
    i_det = (p - tau - c) * n * beta
    i_stoch = (p - c) * n * (1.0 - beta) * pi
    ecu = gamma * math.sqrt(max(n * (1.0 - beta) * pi * (1.0 - pi), 0.0))
    return ProfitDecomposition(
        pwu=i_det + i_stoch, ecu=ecu, expected_profit=i_det + i_stoch - ecu,
        i_det=i_det, i_stoch=i_stoch,
    )


def delta(params: MarketParams, tau: float) -> float:
    """tau - (1 - pi)(p - c); non-positive means subscribers raise the deterministic margin."""
    return tau - (1.0 - params.pi) * (params.p - params.c)


def marginal_profit_wrt_beta(params: MarketParams, tau: float, beta: float) -> float:
    # sign: an extra subscriber adds -delta*n to Part I
    beta = check_share(beta)
    if beta >= 1.0:
        raise DomainError("marginal effect in beta is singular at beta = 1")
    gamma = gamma_coefficient(params.p, params.c, params.alpha)
    n, pi = params.n, params.pi
    return -delta(params, tau) * n + 0.5 * gamma * math.sqrt(n * pi * (1.0 - pi) / (1.0 - beta))


def marginal_profit_wrt_tau(params: MarketParams, tau: float, beta: float, dbeta_dtau: float) -> float:
    if dbeta_dtau < 0.0:
        raise DomainError(f"dbeta/dtau must be >= 0, got {dbeta_dtau}")
    direct = -params.n * check_share(beta)
    if dbeta_dtau == 0.0:
        return direct
    return direct + dbeta_dtau * marginal_profit_wrt_beta(params, tau, beta)


def uplift_decomposition(params: MarketParams, tau: float, beta: float) -> UpliftDecomposition:
    """
    Split E_sub - E_base into the margin effect (i_delta, positive = gain)
    and the uncertainty reduction (ii_delta).
    """
    beta = check_share(beta)
    gamma = gamma_coefficient(params.p, params.c, params.alpha)
    sigma = normal_approx(params).sigma
    i_delta = params.n * beta * -delta(params, tau)
    ii_delta = gamma * sigma * (1.0 - math.sqrt(1.0 - beta))
    return UpliftDecomposition(i_delta=i_delta, ii_delta=ii_delta)
