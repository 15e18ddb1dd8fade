# src/commands.py
"""Subcommand bodies: thin adapters from scenarios to result tables."""
from __future__ import annotations
import logging
from typing import Any, Dict, List, Optional, Sequence

from .acceptance import ex_ante_share, optimize_discount_analytic
from .orderlog import estimate_pi, frequency_table, load_order_log
from .profit import (
    adi_profit, adi_uplift, baseline_profit, ecu_ratio, marginal_profit_wrt_beta,
    subscription_profit, uplift_decomposition,
)
from .report import Column, ResultTable
from .scenario import ScenarioError, ScenarioFile
from .simulate import SimulationConfig, Simulator, write_trace
from .sweep import Reproducer, SweepRunner, SweepSpec
from .thresholds import critical_beta, critical_c, critical_pi, min_viable_pi, zero_profit_c

log = logging.getLogger(__name__)


def simulation_config(scenario: Optional[ScenarioFile], flags: Dict[str, Any],
                      defaults: Dict[str, Any]) -> SimulationConfig:
    """Explicit flag > scenario key > environment default."""
    def pick(name: str, scenario_key: Optional[str] = None):
        if flags.get(name) is not None:
            return flags[name]
        if scenario is not None and scenario_key and getattr(scenario, scenario_key) is not None:
            return getattr(scenario, scenario_key)
        return defaults[name]

    return SimulationConfig(
        runs=pick("runs", "runs"),
        periods=pick("periods", "periods"),
        master_seed=pick("seed", "seed"),
        workers=pick("workers"),
        q_rounding=pick("q_rounding"),
    )


def _scenario_columns() -> List[Column]:
    return [Column("n", "int"), Column("pi", "num"), Column("p", "money"), Column("c", "money"),
            Column("alpha", "num")]


def _scenario_row(scenario: ScenarioFile) -> Dict[str, Any]:
    return dict(n=scenario.n, pi=scenario.pi, p=scenario.p, c=scenario.c, alpha=scenario.alpha)


def _pick(value: Optional[float], fallback: Optional[float], name: str) -> float:
    if value is not None:
        return value
    if fallback is not None:
        return fallback
    raise ScenarioError(f"{name} is required (flag or scenario key)")


def cmd_analyze(scenario: ScenarioFile) -> List[ResultTable]:
    params = scenario.params()
    d = baseline_profit(params)
    table = ResultTable("analyze", _scenario_columns() + [
        Column("pwu", "money"), Column("ecu", "money"), Column("expected_profit", "money"),
        Column("ecu_ratio", "pct"), Column("min_viable_pi", "num"), Column("verdict", "text")])
    table.add(**_scenario_row(scenario), pwu=d.pwu, ecu=d.ecu, expected_profit=d.expected_profit,
              ecu_ratio=ecu_ratio(params) if d.pwu > 0.0 else None,
              min_viable_pi=min_viable_pi(params),
              verdict="profitable" if d.expected_profit >= 0.0 else "unprofitable")
    return [table]


def cmd_adi(scenario: ScenarioFile, beta: Optional[float]) -> List[ResultTable]:
    beta = _pick(beta, scenario.beta, "beta")
    params = scenario.params()
    up = adi_uplift(params, beta)
    table = ResultTable("adi", _scenario_columns() + [
        Column("beta", "pct"), Column("base_profit", "money"), Column("adi_profit", "money"),
        Column("ecu_adi", "money"), Column("uplift", "money"), Column("relative_uplift", "pct")])
    adi = adi_profit(params, beta)
    table.add(**_scenario_row(scenario), beta=beta, base_profit=baseline_profit(params).expected_profit,
              adi_profit=adi.expected_profit, ecu_adi=adi.ecu, uplift=up.absolute, relative_uplift=up.relative)
    return [table]


def cmd_subscribe(scenario: ScenarioFile, tau: Optional[float], beta: Optional[float]) -> List[ResultTable]:
    tau = _pick(tau, scenario.tau, "tau")
    beta = _pick(beta, scenario.beta, "beta")
    params = scenario.params()
    base = baseline_profit(params)
    sub = subscription_profit(params, tau, beta)
    dec = uplift_decomposition(params, tau, beta)

    profit = ResultTable("subscribe", _scenario_columns() + [
        Column("tau", "tau"), Column("beta", "pct"), Column("base_profit", "money"), Column("sub_profit", "money"),
        Column("i_det", "money"), Column("i_stoch", "money"), Column("ecu", "money"),
        Column("i_delta", "money"), Column("ii_delta", "money"), Column("marginal_beta", "num"),
        Column("verdict", "text")])
    profit.add(**_scenario_row(scenario), tau=tau, beta=beta, base_profit=base.expected_profit,
               sub_profit=sub.expected_profit, i_det=sub.i_det, i_stoch=sub.i_stoch, ecu=sub.ecu,
               i_delta=dec.i_delta, ii_delta=dec.ii_delta,
               marginal_beta=marginal_profit_wrt_beta(params, tau, beta) if beta < 1.0 else None,
               verdict="offer pays off" if sub.expected_profit >= base.expected_profit else "do not offer")

    thresholds = ResultTable("subscribe thresholds", [
        Column("critical_pi", "num"), Column("critical_c", "num"), Column("critical_beta", "num"),
        Column("zero_profit_c", "num"), Column("zero_profit_c_sub", "num")])
    thresholds.add(critical_pi=critical_pi(params, tau, beta), critical_c=critical_c(params, tau, beta),
                   critical_beta=critical_beta(params, tau), zero_profit_c=zero_profit_c(params),
                   zero_profit_c_sub=zero_profit_c(params, tau, beta))
    return [profit, thresholds]


def cmd_optimize(scenario: ScenarioFile, lam: Optional[float], exhaustive: bool = False) -> List[ResultTable]:
    lam = _pick(lam, scenario.lam, "lambda")
    params = scenario.params()
    sol = optimize_discount_analytic(params, lam, exhaustive=exhaustive)
    table = ResultTable("optimize", _scenario_columns() + [
        Column("lambda", "num"), Column("tau_star", "tau"), Column("beta", "pct"), Column("expected_profit", "money"),
        Column("base_profit", "money"), Column("relative_uplift", "pct"), Column("verdict", "text")])
    if sol.degenerate or sol.expected_profit <= sol.baseline_profit:
        verdict = "do not offer subscription"
    else:
        verdict = "offer subscription"
    if sol.expected_profit < 0.0 and sol.baseline_profit < 0.0:
        verdict += "; unprofitable with or without subscription"
    table.add(**_scenario_row(scenario), **{"lambda": lam}, tau_star=sol.tau_star, beta=sol.beta_at_optimum,
              expected_profit=sol.expected_profit, base_profit=sol.baseline_profit,
              relative_uplift=sol.relative_uplift, verdict=verdict)
    log.info("[optimize] tau*=%.3f E=%.2f", sol.tau_display, sol.expected_profit)
    return [table]


def cmd_simulate(scenario: ScenarioFile, config: SimulationConfig, tau: Optional[float] = None,
                 lam: Optional[float] = None, trace: Optional[str] = None) -> List[ResultTable]:
    lam = _pick(lam, scenario.lam, "lambda")
    params = scenario.params()
    if tau is None:
        tau = scenario.tau
    if tau is None:
        tau = optimize_discount_analytic(params, lam).tau_display
        log.info("[simulate] no discount given; using analytic tau*=%.3f", tau)
    report = Simulator(config).run(params, tau, lam)
    if trace:
        write_trace(report, trace)

    table = ResultTable("simulate", _scenario_columns() + [
        Column("lambda", "num"), Column("tau", "tau"), Column("beta", "pct"), Column("beta_sim", "pct"),
        Column("initial_profit", "money"), Column("initial_std_error", "num"), Column("eval_profit", "money"),
        Column("std_error", "num"), Column("service_level", "pct"), Column("subscribers_min", "int"),
        Column("subscribers_mean", "num"), Column("subscribers_max", "int")])
    table.add(**_scenario_row(scenario), **{"lambda": lam}, tau=tau,
              beta=float(ex_ante_share(tau, params.pi, lam, params.p)), beta_sim=report.mean_subscriber_share,
              initial_profit=report.initial_period_mean_profit, initial_std_error=report.initial_std_error,
              eval_profit=report.eval_mean_profit_per_period, std_error=report.std_error,
              service_level=report.realized_service_level, subscribers_min=report.subscribers_min,
              subscribers_mean=report.subscribers_mean, subscribers_max=report.subscribers_max)
    table.footer = {"scenario_hash": scenario.scenario_hash(), "seed": config.master_seed,
                    "runs": config.runs, "periods": config.periods}
    return [table]


def cmd_sweep(scenario: ScenarioFile, spec: SweepSpec, mode: str, config: SimulationConfig) -> List[ResultTable]:
    table = SweepRunner(scenario, config).run(spec, mode)
    table.footer = {"scenario_hash": scenario.scenario_hash(), "seed": config.master_seed,
                    "runs": config.runs, "periods": config.periods}
    return [table]


def cmd_reproduce(target: str, config: SimulationConfig,
                  n_range: Optional[Sequence[int]] = None) -> List[ResultTable]:
    reproducer = Reproducer(config, n_range=tuple(n_range) if n_range else None)
    if target == "all":
        return [reproducer.run(name) for name in reproducer.targets]
    return [reproducer.run(target)]


def cmd_estimate(log_path: str, category: Optional[str], segment: Optional[Sequence[str]] = None,
                 periods: Optional[int] = None, customer: Optional[str] = None) -> List[ResultTable]:
    orders = load_order_log(log_path)
    tables: List[ResultTable] = []
    if category is not None:
        members = list(segment) if segment else orders.customers
        est = estimate_pi(orders, category, members, periods=periods)
        table = ResultTable("estimate", [
            Column("category", "text"), Column("customers", "int"), Column("cells", "int"), Column("hits", "int"),
            Column("pi_hat", "num"), Column("wilson_lo", "num"), Column("wilson_hi", "num")])
        table.add(category=category, customers=len(set(members)), cells=est.n_periods_observed, hits=est.n_hits,
                  pi_hat=est.pi_hat, wilson_lo=est.wilson_interval[0], wilson_hi=est.wilson_interval[1])
        tables.append(table)
    if customer is not None:
        freq = frequency_table(orders, customer)
        table = ResultTable(f"frequency {customer}", [Column("category", "text"), Column("frequency", "num")])
        for rec in freq.to_dict("records"):
            table.add(**rec)
        tables.append(table)
    if not tables:
        raise ScenarioError("estimate needs --category and/or --customer")
    return tables
