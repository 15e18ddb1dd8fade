# src/simulate.py
"""
Seed-reproducible Monte Carlo simulation of the subscription model.

Each run has one initial booking period without advance information, a
one-shot subscription decision by the initial buyers, and `periods`
evaluation periods in which subscribers are served first.

All random numbers of a run come from its own generator, seeded with
derive_run_seed(master_seed, run). The draws are stored in a DrawBank that
does not depend on the discount, so the same bank can be evaluated at many
discounts (common random numbers). Subscriber counts and evaluation demand
are obtained from the stored uniforms by exact Binomial inverse CDFs.
"""
from __future__ import annotations
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import ndtri
from scipy.stats import binom

from .acceptance import acceptance_probability
from .demand import DomainError, MarketParams, normal_approx, std_normal_quantile
from .run_seed import MASK64, derive_run_seeds

log = logging.getLogger(__name__)

_U_FLOOR = 1e-300


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    runs: int = Field(default=10_000, ge=1)
    periods: int = Field(default=48, ge=1)
    master_seed: int = Field(default=0, ge=0, le=MASK64)
    integerize_q: bool = True
    q_rounding: Literal["nearest", "up"] = "nearest"
    demand_model: Literal["binomial", "normal"] = "binomial"  # "normal" reconciles with closed forms
    workers: int = Field(default=1, ge=1)


@dataclass(frozen=True)
class DrawBank:
    """Discount-independent uniforms of every run, in run order."""
    n: int
    pi: float
    master_seed: int
    buyers: np.ndarray          # (runs,) initial-period buyer counts
    initial_u: np.ndarray       # (runs,) uniform for normal-model initial demand
    accept_u: np.ndarray        # (runs,) uniform for the subscriber count
    period_u: np.ndarray        # (runs, periods) uniforms for evaluation demand

    @property
    def runs(self) -> int:
        return len(self.buyers)

    @property
    def periods(self) -> int:
        return self.period_u.shape[1]


@dataclass(frozen=True)
class SimulationReport:
    tau: float
    lam: float
    runs: int
    periods: int
    master_seed: int
    initial_period_mean_profit: float
    initial_std_error: float
    eval_mean_profit_per_period: float
    std_error: float
    mean_subscriber_share: float
    realized_service_level: float
    subscribers_min: int
    subscribers_mean: float
    subscribers_max: int
    per_run_subscribers: np.ndarray = field(compare=False, repr=False)
    per_run_profit: np.ndarray = field(compare=False, repr=False)

    def trace(self) -> pd.DataFrame:
        return pd.DataFrame({
            "run": np.arange(self.runs),
            "n_sub": self.per_run_subscribers,
            "mean_period_profit": self.per_run_profit,
        })


# -------------------- building blocks --------------------
def binomial_inverse(u: np.ndarray, trials: Union[int, np.ndarray], prob: float) -> np.ndarray:
    """
    Smallest k with P(Binomial(trials, prob) <= k) >= u, elementwise.
    `trials` indexes the first axis of `u`; one CDF table per distinct trial count.
    """
    u = np.asarray(u, dtype=float)
    trials = np.broadcast_to(np.asarray(trials, dtype=np.int64), u.shape[:1])
    shape_tail = (1,) * (u.ndim - 1)
    if prob <= 0.0:
        return np.zeros(u.shape, dtype=np.int64)
    if prob >= 1.0:
        return np.broadcast_to(trials.reshape(trials.shape + shape_tail), u.shape).astype(np.int64)

    out = np.empty(u.shape, dtype=np.int64)
    for m in np.unique(trials):
        rows = trials == m
        cdf = binom.cdf(np.arange(m + 1), m, prob)
        cdf[-1] = 1.0
        out[rows] = np.searchsorted(cdf, u[rows], side="left")
    return out


def integerize(q: np.ndarray, rounding: str) -> np.ndarray:
    if rounding == "up":
        return np.ceil(q - 1e-9)
    return np.floor(q + 0.5)


def period_profit(p: float, c: float, tau: float, n_sub, demand, order) -> np.ndarray:
    """Realised profit of one period; subscribers pay p - tau and are served first."""
    sold = np.minimum(demand, order)
    return (p - tau) * n_sub + p * (sold - n_sub) - c * order


def realized_service_level(demand: np.ndarray, order: np.ndarray) -> float:
    """Share of (run, period) cells in which demand did not exceed the order."""
    served = np.asarray(demand) <= np.asarray(order)
    return np.count_nonzero(served) / served.size


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    # fsum keeps the aggregate independent of run order
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (count - 1)
    return mean, math.sqrt(var / count)


def _draw_chunk(n: int, pi: float, periods: int, master_seed: int,
                start: int, stop: int) -> tuple[np.ndarray, ...]:
    seeds = derive_run_seeds(master_seed, np.arange(start, stop))
    k = stop - start
    buyers = np.empty(k, dtype=np.int64)
    initial_u = np.empty(k)
    accept_u = np.empty(k)
    period_u = np.empty((k, periods))
    for j, seed in enumerate(seeds):
        rng = np.random.default_rng(int(seed))
        buyers[j] = np.count_nonzero(rng.random(n) < pi)
        accept_u[j] = rng.random()
        initial_u[j] = rng.random()
        period_u[j] = rng.random(periods)
    return buyers, initial_u, accept_u, period_u


# -------------------- engine --------------------
class Simulator:
    def __init__(self, config: SimulationConfig):
        self.config = config

    def draw(self, params: MarketParams) -> DrawBank:
        cfg = self.config
        log.info("[simulate] drawing runs=%d periods=%d seed=%d workers=%d",
                 cfg.runs, cfg.periods, cfg.master_seed, cfg.workers)
        if cfg.workers == 1:
            parts = [_draw_chunk(params.n, params.pi, cfg.periods, cfg.master_seed, 0, cfg.runs)]
        else:
            bounds = np.linspace(0, cfg.runs, min(cfg.workers * 4, cfg.runs) + 1).astype(int)
            spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            with ProcessPoolExecutor(max_workers=min(cfg.workers, os.cpu_count() or 1)) as pool:
                futures = [pool.submit(_draw_chunk, params.n, params.pi, cfg.periods,
                                       cfg.master_seed, a, b) for a, b in spans]
                parts = [f.result() for f in futures]
        buyers, initial_u, accept_u, period_u = (np.concatenate(cols) for cols in zip(*parts))
        return DrawBank(n=params.n, pi=params.pi, master_seed=cfg.master_seed, buyers=buyers,
                        initial_u=initial_u, accept_u=accept_u, period_u=period_u)

    def _order(self, q: np.ndarray) -> np.ndarray:
        if self.config.integerize_q:
            return integerize(q, self.config.q_rounding)
        return q

    def _initial_period(self, bank: DrawBank, params: MarketParams, z: float) -> np.ndarray:
        na = normal_approx(params)
        q0 = self._order(np.array([na.mu + na.sigma * z]))[0]
        if self.config.demand_model == "normal":
            x0 = na.mu + na.sigma * ndtri(np.maximum(bank.initial_u, _U_FLOOR))
        else:
            x0 = bank.buyers
        return params.p * np.minimum(x0, q0) - params.c * q0

    def evaluate(self, bank: DrawBank, params: MarketParams, tau: float, lam: float) -> SimulationReport:
        cfg = self.config
        if bank.n != params.n or bank.pi != params.pi:
            raise DomainError("draw bank was generated for a different (n, pi)")
        if not (0.0 <= tau < params.p):
            raise DomainError(f"discount must satisfy 0 <= tau < p, got tau={tau}")
        n, pi, p, c = params.n, params.pi, params.p, params.c
        z = std_normal_quantile(params.alpha)

        eta = acceptance_probability(tau, pi, lam, p)
        n_sub = binomial_inverse(bank.accept_u, bank.buyers, eta)
        rest = n - n_sub
        mu = rest * pi
        sd = np.sqrt(rest * pi * (1.0 - pi))
        # subscribers are always covered
        order = np.maximum(self._order(n_sub + mu + sd * z), n_sub)

        if cfg.demand_model == "normal":
            stoch = mu[:, None] + sd[:, None] * ndtri(np.maximum(bank.period_u, _U_FLOOR))
        else:
            stoch = binomial_inverse(bank.period_u, rest, pi)
        demand = n_sub[:, None] + stoch
        profits = period_profit(p, c, tau, n_sub[:, None], demand, order[:, None])

        per_run = profits.mean(axis=1)
        initial = self._initial_period(bank, params, z)
        initial_mean, initial_se = _mean_and_se(initial)
        eval_mean, eval_se = _mean_and_se(per_run)

        report = SimulationReport(
            tau=float(tau),
            lam=float(lam),
            runs=bank.runs,
            periods=bank.periods,
            master_seed=bank.master_seed,
            initial_period_mean_profit=initial_mean,
            initial_std_error=initial_se,
            eval_mean_profit_per_period=eval_mean,
            std_error=eval_se,
            mean_subscriber_share=int(n_sub.sum()) / (n * bank.runs),
            realized_service_level=realized_service_level(demand, order[:, None]),
            subscribers_min=int(n_sub.min()),
            subscribers_mean=int(n_sub.sum()) / bank.runs,
            subscribers_max=int(n_sub.max()),
            per_run_subscribers=n_sub,
            per_run_profit=per_run,
        )
        log.debug("[simulate] tau=%.4f eta=%.4f mean=%.4f se=%.4f", tau, eta, eval_mean, eval_se)
        return report

    def run(self, params: MarketParams, tau: float, lam: float) -> SimulationReport:
        return self.evaluate(self.draw(params), params, tau, lam)


def run_simulation(config: SimulationConfig, params: MarketParams, tau: float, lam: float) -> SimulationReport:
    return Simulator(config).run(params, tau, lam)


def write_trace(report: SimulationReport, path: str) -> str:
    """Per-run CSV trace: run, n_sub, mean_period_profit."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    report.trace().to_csv(path, index=False, float_format="%.10g")
    log.info("[simulate] trace written: %s", path)
    return path
