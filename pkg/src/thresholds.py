# src/thresholds.py
"""
Critical thresholds of the subscription model.

Every threshold is a root of a profit difference. Roots are located by a
bracket scan on a 1e-3 grid followed by bisection to 1e-6, which also catches
near-tangent crossings that a single sign check at the interval ends misses.
"""
from __future__ import annotations
import logging
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect

from .demand import MarketParams
from .profit import (
    _baseline_value, _gamma_in_c, _subscription_value,
    check_share, delta, gamma_coefficient,
)

log = logging.getLogger(__name__)

SCAN_STEP = 1e-3
ROOT_TOL = 1e-6
_EDGE = 1e-9


def first_root(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
               step: float = SCAN_STEP, xtol: float = ROOT_TOL) -> Optional[float]:
    """Smallest x in [lo, hi] where func changes sign, or None."""
    if hi <= lo:
        return None
    grid = np.concatenate(([lo], np.arange(lo + step, hi, step), [hi]))
    values = np.asarray(func(grid), dtype=float)
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0:
            return float(grid[i])
        if a * b < 0.0:
            return float(bisect(lambda x: float(func(np.array([x]))[0]),
                                grid[i], grid[i + 1], xtol=xtol))
    if values[-1] == 0.0:
        return float(grid[-1])
    return None


def min_viable_pi(params: MarketParams) -> float:
    """Smallest buying probability with non-negative baseline profit (params.pi is ignored)."""
    n, p, c = params.n, params.p, params.c
    gamma = gamma_coefficient(p, c, params.alpha)
    f = lambda pi: _baseline_value(n, pi, p, c, gamma)
    if f(np.array([_EDGE]))[0] >= 0.0:
        return 0.0
    root = first_root(f, _EDGE, 1.0)
    return 0.0 if root is None else root


def critical_pi(params: MarketParams, tau: float, beta: float) -> Optional[float]:
    """
    Buying probability above which the subscription offer (tau, beta) stops
    paying off; searched above the point where delta = 0 (params.pi is ignored).
    """
    beta = check_share(beta)
    if beta == 0.0:
        return None
    n, p, c = params.n, params.p, params.c
    gamma = gamma_coefficient(p, c, params.alpha)
    start = max(1.0 - tau / (p - c), _EDGE)
    if start >= 1.0:
        log.info("[thresholds] no critical pi: delta <= 0 for every pi")
        return None
    f = lambda pi: (_subscription_value(n, pi, p, c, gamma, tau, beta)
                    - _baseline_value(n, pi, p, c, gamma))
    return first_root(f, start, 1.0)


def critical_c(params: MarketParams, tau: float, beta: float) -> Optional[float]:
    """Supply cost above which the subscription offer (tau, beta) stops paying off (params.c is ignored)."""
    beta = check_share(beta)
    if beta == 0.0:
        return None
    n, pi, p, alpha = params.n, params.pi, params.p, params.alpha

    def f(c):
        gamma = _gamma_in_c(p, c, alpha)
        return (_subscription_value(n, pi, p, c, gamma, tau, beta)
                - _baseline_value(n, pi, p, c, gamma))

    return first_root(f, _EDGE, p - _EDGE)


def zero_profit_c(params: MarketParams, tau: Optional[float] = None,
                  beta: Optional[float] = None) -> Optional[float]:
    """Supply cost at which expected profit hits zero, with or without a subscription offer."""
    n, pi, p, alpha = params.n, params.pi, params.p, params.alpha
    if tau is None:
        f = lambda c: _baseline_value(n, pi, p, c, _gamma_in_c(p, c, alpha))
    else:
        beta = check_share(0.0 if beta is None else beta)
        f = lambda c: _subscription_value(n, pi, p, c, _gamma_in_c(p, c, alpha), tau, beta)
    return first_root(f, _EDGE, p - _EDGE)


def critical_beta(params: MarketParams, tau: float) -> Optional[float]:
    """
    Smallest subscribing share at which E_sub >= E_base.
    0 when delta <= 0 or the offer pays off from the first subscriber;
    None when no share in (0, 1] makes the offer pay off.

    The lost margin n*beta*delta is linear in beta while the saved ecu grows
    like 1 - sqrt(1 - beta), so for discounts just above the break-even range
    the crossing sits close to 1 (about 0.999 at tau=0.11 in the basic
    case). Such roots are exact, not a bisection artifact.
    """
    if delta(params, tau) <= 0.0:
        return 0.0
    n, pi, p, c = params.n, params.pi, params.p, params.c
    gamma = gamma_coefficient(p, c, params.alpha)
    base = float(_baseline_value(n, pi, p, c, gamma))
    f = lambda beta: _subscription_value(n, pi, p, c, gamma, tau, beta) - base
    if f(np.array([SCAN_STEP]))[0] >= 0.0:
        return 0.0
    return first_root(f, SCAN_STEP, 1.0)
