# src/sweep.py
"""
Parameter sweeps and the published-table reproduction targets.

A sweep varies one scenario parameter over a grid and evaluates one mode per
grid point:
  baseline      pwu, ecu and expected profit without advance information
  adi           profit when a share beta announces demand in advance
  subscription  profit under a fixed offer (tau, beta)
  optimize      analytic profit-maximising discount for popularity lambda
  simulated     simulated profit-maximising discount (Monte Carlo)
"""
from __future__ import annotations
import logging
import math
import os
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .acceptance import (
    ex_ante_share, isoquant_lambda, optimize_discount_analytic,
    optimize_discount_simulated, profit_curve, tau_grid,
)
from .profit import (
    adi_profit, adi_uplift, baseline_profit, ecu_ratio, marginal_profit_wrt_beta,
    relative_change, subscription_profit, uplift_decomposition,
)
from .report import Column, ResultTable
from .scenario import ScenarioError, ScenarioFile, scenario_from_values
from .simulate import SimulationConfig, Simulator
from .thresholds import critical_beta, critical_c, critical_pi, min_viable_pi, zero_profit_c

log = logging.getLogger(__name__)

Mode = Literal["baseline", "adi", "subscription", "optimize", "simulated"]
MODES = ("baseline", "adi", "subscription", "optimize", "simulated")
_SWEEPABLE = {
    "baseline": {"n", "pi", "c"},
    "adi": {"n", "pi", "c", "beta"},
    "subscription": {"n", "pi", "c", "beta", "tau"},
    "optimize": {"n", "pi", "c", "lambda"},
    "simulated": {"n", "pi", "c", "lambda"},
}
_FIELD = {"lambda": "lam"}

REFERENCE_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                              "source", "reference_values.yaml")

# offer used by the fixed-offer figures
FIXED_TAU = 0.075
FIXED_BETA = 0.1


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    parameter: Literal["n", "pi", "c", "beta", "tau", "lambda"]
    lo: float
    hi: float
    step: Optional[float] = Field(default=None, gt=0.0)
    count: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _grid(self) -> "SweepSpec":
        if not self.lo < self.hi:
            raise ValueError(f"sweep range needs lo < hi, got [{self.lo}, {self.hi}]")
        if (self.step is None) == (self.count is None):
            raise ValueError("give exactly one of step or count")
        return self

    def values(self) -> List[float]:
        if self.step is not None:
            k = int(math.floor((self.hi - self.lo) / self.step + 1e-9))
            grid = np.round(self.lo + self.step * np.arange(k + 1), 10)
        else:
            grid = np.linspace(self.lo, self.hi, self.count)
        if self.parameter == "n":
            return [float(v) for v in dict.fromkeys(int(round(g)) for g in grid)]
        return [float(g) for g in grid]


_MODE_COLUMNS: Dict[str, List[Column]] = {
    "baseline": [Column("pwu", "money"), Column("ecu", "money"), Column("expected_profit", "money"),
                 Column("ecu_ratio", "pct")],
    "adi": [Column("beta", "pct"), Column("base_profit", "money"), Column("adi_profit", "money"),
            Column("uplift", "money"), Column("relative_uplift", "pct")],
    "subscription": [Column("tau", "tau"), Column("beta", "pct"), Column("base_profit", "money"),
                     Column("sub_profit", "money"), Column("i_det", "money"), Column("i_stoch", "money"),
                     Column("ecu_base", "money"), Column("ecu_sub", "money"), Column("uplift", "money"),
                     Column("relative_uplift", "pct"), Column("i_delta", "money"), Column("ii_delta", "money"),
                     Column("marginal_beta", "num")],
    "optimize": [Column("tau_star", "tau"), Column("beta", "pct"), Column("base_profit", "money"),
                 Column("sub_profit", "money"), Column("ecu_base", "money"), Column("ecu_sub", "money"),
                 Column("relative_uplift", "pct"), Column("degenerate", "text")],
    "simulated": [Column("tau_star", "tau"), Column("beta", "pct"), Column("beta_sim", "pct"),
                  Column("initial_profit", "money"), Column("sub_profit", "money"), Column("std_error", "num"),
                  Column("relative_uplift", "pct")],
}


def _require(scenario: ScenarioFile, name: str, mode: str) -> float:
    value = getattr(scenario, _FIELD.get(name, name))
    if value is None:
        raise ScenarioError(f"mode {mode} needs {name} in the scenario")
    return value


class SweepRunner:
    """Evaluates one mode over a grid of scenario variants."""

    def __init__(self, scenario: ScenarioFile, sim_config: Optional[SimulationConfig] = None):
        self.scenario = scenario
        self.sim_config = sim_config or SimulationConfig()

    def at(self, parameter: str, value: float) -> ScenarioFile:
        values = {k: v for k, v in self.scenario.model_dump().items() if v is not None}
        values[_FIELD.get(parameter, parameter)] = int(round(value)) if parameter == "n" else value
        return scenario_from_values(**values)

    def run(self, spec: SweepSpec, mode: Mode) -> ResultTable:
        if mode not in MODES:
            raise ScenarioError(f"unknown sweep mode {mode!r}; choose from {', '.join(MODES)}")
        if spec.parameter not in _SWEEPABLE[mode]:
            raise ScenarioError(f"parameter {spec.parameter} has no effect in mode {mode}; "
                                f"sweepable: {', '.join(sorted(_SWEEPABLE[mode]))}")
        kind = "int" if spec.parameter == "n" else ("tau" if spec.parameter == "tau" else "num")
        table = ResultTable(
            title=f"sweep {spec.parameter} ({mode})",
            columns=[Column(spec.parameter, kind)] + [c for c in _MODE_COLUMNS[mode]
                                                      if c.name != spec.parameter],
        )
        values = spec.values()
        log.info("[sweep] %s over %d points in mode %s", spec.parameter, len(values), mode)
        for value in values:
            row = self.point(self.at(spec.parameter, value), mode)
            row.pop(spec.parameter, None)
            table.add(**{spec.parameter: value}, **row)
        return table

    def point(self, scenario: ScenarioFile, mode: Mode) -> Dict[str, Any]:
        params = scenario.params()
        base = baseline_profit(params)
        if mode == "baseline":
            ratio = ecu_ratio(params) if base.pwu > 0.0 else None
            return dict(pwu=base.pwu, ecu=base.ecu, expected_profit=base.expected_profit, ecu_ratio=ratio)

        if mode == "adi":
            beta = _require(scenario, "beta", mode)
            up = adi_uplift(params, beta)
            return dict(beta=beta, base_profit=base.expected_profit,
                        adi_profit=adi_profit(params, beta).expected_profit,
                        uplift=up.absolute, relative_uplift=up.relative)

        if mode == "subscription":
            tau, beta = _require(scenario, "tau", mode), _require(scenario, "beta", mode)
            sub = subscription_profit(params, tau, beta)
            dec = uplift_decomposition(params, tau, beta)
            marginal = marginal_profit_wrt_beta(params, tau, beta) if beta < 1.0 else None
            return dict(tau=tau, beta=beta, base_profit=base.expected_profit, sub_profit=sub.expected_profit,
                        i_det=sub.i_det, i_stoch=sub.i_stoch, ecu_base=base.ecu, ecu_sub=sub.ecu,
                        uplift=sub.expected_profit - base.expected_profit,
                        relative_uplift=relative_change(sub.expected_profit, base.expected_profit),
                        i_delta=dec.i_delta, ii_delta=dec.ii_delta, marginal_beta=marginal)

        lam = _require(scenario, "lambda", mode)
        if mode == "optimize":
            sol = optimize_discount_analytic(params, lam)
            sub = subscription_profit(params, sol.tau_star, sol.beta_at_optimum)
            return dict(tau_star=sol.tau_star, beta=sol.beta_at_optimum, base_profit=base.expected_profit,
                        sub_profit=sol.expected_profit, ecu_base=base.ecu, ecu_sub=sub.ecu,
                        relative_uplift=sol.relative_uplift, degenerate="yes" if sol.degenerate else "")

        sol = optimize_discount_simulated(self.sim_config, params, lam)
        return dict(tau_star=sol.tau_star, beta=sol.beta_at_optimum, beta_sim=sol.simulated_share,
                    initial_profit=sol.baseline_profit, sub_profit=sol.expected_profit,
                    std_error=sol.std_error, relative_uplift=sol.relative_uplift)


# -------------------- reproduction targets --------------------
def load_reference(path: str = REFERENCE_PATH) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def basic_scenario(**changes: Any) -> ScenarioFile:
    values: Dict[str, Any] = dict(n=500, pi=0.5, p=1.0, c=0.85, alpha=0.97, lam=0.5)
    values.update(changes)
    return scenario_from_values(**values)


def _off_by(computed: Optional[float], ref: Optional[float], tol: float) -> bool:
    if computed is None or ref is None:
        return False
    return abs(computed - ref) > tol + 1e-12


class Reproducer:
    """Builds the published tables and figure series; figures come out as CSV series."""

    def __init__(self, sim_config: SimulationConfig, reference: Optional[Dict[str, Any]] = None,
                 n_range: Optional[tuple[int, int]] = None):
        self.sim_config = sim_config
        self.reference = reference if reference is not None else load_reference()
        self.n_range = n_range

    @property
    def targets(self) -> Dict[str, Callable[[], ResultTable]]:
        return {
            "table1": self.table1, "table2": self.table2, "table3": self.table3,
            "fig2": self.fig2, "fig3": self.fig3, "fig4": self.fig4, "fig5": self.fig5,
            "fig6": self.fig6, "fig7": self.fig7, "fig8": self.fig8, "fig9": self.fig9,
            "discount_curve": self.discount_curve, "basic": self.basic,
        }

    def run(self, target: str) -> ResultTable:
        if target not in self.targets:
            raise ScenarioError(f"unknown reproduction target {target!r}; choose from {', '.join(self.targets)}")
        log.info("[reproduce] %s", target)
        table = self.targets[target]()
        cfg = self.sim_config
        table.footer = {"scenario_hash": basic_scenario().scenario_hash(), "seed": cfg.master_seed,
                        "runs": cfg.runs, "periods": cfg.periods}
        return table

    # ---- tables ----
    def table1(self) -> ResultTable:
        ref = self.reference.get("table1", {})
        tol = ref.get("tolerance", 0.01)
        table = ResultTable("table1 pwu and ecu", [
            Column("n", "int"), Column("pi", "num"), Column("pwu", "money"), Column("ecu", "money"),
            Column("ref_pwu", "money"), Column("ref_ecu", "money"), Column("note", "text")])
        for row in ref.get("rows", []):
            d = baseline_profit(basic_scenario(n=row["n"], pi=row["pi"]).params())
            notes = [f"{k} differs from reference by {v - row[k]:+.3f}"
                     for k, v in (("pwu", d.pwu), ("ecu", d.ecu)) if _off_by(v, row[k], tol)]
            table.add(n=row["n"], pi=row["pi"], pwu=d.pwu, ecu=d.ecu, ref_pwu=row["pwu"],
                      ref_ecu=row["ecu"], note="; ".join(notes))
        return table

    def table2(self) -> ResultTable:
        ref = self.reference.get("table2", {})
        tol, rel_tol = ref.get("tolerance", 0.01), ref.get("relative_tolerance", 0.0005)
        table = ResultTable("table2 advance demand information", [
            Column("pi", "num"), Column("beta", "num"), Column("z1", "money"), Column("z2", "money"),
            Column("dz", "money"), Column("relative", "pct"), Column("ref_relative", "pct"), Column("note", "text")])
        for row in ref.get("rows", []):
            params = basic_scenario(n=ref.get("n", 500), pi=row["pi"]).params()
            z1 = baseline_profit(params).expected_profit
            z2 = adi_profit(params, row["beta"]).expected_profit
            up = adi_uplift(params, row["beta"])
            notes = [f"{k} differs from reference by {v - row[k]:+.3f}"
                     for k, v in (("z1", z1), ("z2", z2), ("dz", up.absolute)) if _off_by(v, row[k], tol)]
            if _off_by(up.relative, row["relative"], rel_tol):
                implied = row["dz"] / row["z1"]
                notes.append(f"printed {row['relative']:.2%} disagrees with printed dz/z1 = {implied:.2%}")
            table.add(pi=row["pi"], beta=row["beta"], z1=z1, z2=z2, dz=up.absolute, relative=up.relative,
                      ref_relative=row["relative"], note="; ".join(notes))
        return table

    def table3(self) -> ResultTable:
        ref = self.reference.get("table3", {})
        tau_tol, dz_tol = ref.get("tau_tolerance", 0.003), ref.get("delta_z_tolerance", 0.015)
        table = ResultTable("table3 discount by buying probability and popularity", [
            Column("pi", "num"), Column("lambda", "num"), Column("tau_star", "tau"), Column("beta", "pct"),
            Column("beta_sim", "pct"), Column("delta_z", "pct"), Column("std_error", "num"),
            Column("ref_tau_star", "tau"), Column("ref_delta_z", "pct"), Column("note", "text")])
        for row in ref.get("rows", []):
            params = basic_scenario(pi=row["pi"]).params()
            sol = optimize_discount_simulated(self.sim_config, params, row["lam"])
            notes = []
            if _off_by(sol.tau_star, row["tau_star"], tau_tol):
                notes.append(f"tau* differs from reference by {sol.tau_star - row['tau_star']:+.3f}")
            if _off_by(sol.relative_uplift, row["delta_z"], dz_tol):
                notes.append(f"dZ differs from reference by {sol.relative_uplift - row['delta_z']:+.2%}")
            table.add(pi=row["pi"], **{"lambda": row["lam"]}, tau_star=sol.tau_star, beta=sol.beta_at_optimum,
                      beta_sim=sol.simulated_share, delta_z=sol.relative_uplift, std_error=sol.std_error,
                      ref_tau_star=row["tau_star"], ref_delta_z=row["delta_z"], note="; ".join(notes))
        return table

    # ---- figures ----
    def fig2(self) -> ResultTable:
        costs = (0.5, 0.75, 0.85, 0.9)
        names = [f"ratio_c{int(round(c * 100)):03d}" for c in costs]
        table = ResultTable("fig2 ecu over pwu by service level",
                            [Column("alpha", "num")] + [Column(k, "pct") for k in names])
        alphas = [round(a, 3) for a in np.arange(0.01, 0.99 + 1e-9, 0.01)] + [0.995, 0.999]
        for alpha in alphas:
            ratios = {k: ecu_ratio(basic_scenario(c=c, alpha=alpha).params()) for k, c in zip(names, costs)}
            table.add(alpha=alpha, **ratios)
        return table

    def _fixed_offer_rows(self, title: str, parameter: str, values: List[float]) -> ResultTable:
        kind = "int" if parameter == "n" else "num"
        table = ResultTable(title, [
            Column(parameter, kind), Column("ecu_base", "money"), Column("ecu_sub", "money"),
            Column("base_profit", "money"), Column("sub_profit", "money"), Column("relative_uplift", "pct")])
        for value in values:
            params = basic_scenario(**{parameter: value}).params()
            base = baseline_profit(params)
            sub = subscription_profit(params, FIXED_TAU, FIXED_BETA)
            table.add(**{parameter: value}, ecu_base=base.ecu, ecu_sub=sub.ecu, base_profit=base.expected_profit,
                      sub_profit=sub.expected_profit,
                      relative_uplift=relative_change(sub.expected_profit, base.expected_profit))
        return table

    def fig3(self) -> ResultTable:
        lo, hi = self.n_range or (165, 1000)
        table = self._fixed_offer_rows("fig3 customer base", "n", list(range(lo, hi + 1, 5)))
        table.notes.append(f"offer tau={FIXED_TAU}, beta={FIXED_BETA}")
        return table

    def fig4(self) -> ResultTable:
        pis = [round(v, 2) for v in np.arange(0.25, 1.0 + 1e-9, 0.01)]
        table = self._fixed_offer_rows("fig4 buying probability", "pi", pis)
        params = basic_scenario().params()
        table.notes.append(f"offer tau={FIXED_TAU}, beta={FIXED_BETA}; "
                           f"min viable pi={min_viable_pi(params):.4f}, "
                           f"critical pi={_fmt_opt(critical_pi(params, FIXED_TAU, FIXED_BETA))}")
        return table

    def fig5(self) -> ResultTable:
        costs = [round(v, 2) for v in np.arange(0.01, 0.99 + 1e-9, 0.01)]
        table = self._fixed_offer_rows("fig5 supply cost", "c", costs)
        params = basic_scenario().params()
        table.notes.append(
            f"offer tau={FIXED_TAU}, beta={FIXED_BETA}; critical c="
            f"{_fmt_opt(critical_c(params, FIXED_TAU, FIXED_BETA))}, zero-profit c={_fmt_opt(zero_profit_c(params))} "
            f"(with offer {_fmt_opt(zero_profit_c(params, FIXED_TAU, FIXED_BETA))})")
        return table

    def fig6(self) -> ResultTable:
        taus = (0.09, 0.10, 0.11, 0.12)
        tags = [f"{int(round(t * 100)):03d}" for t in taus]
        columns = [Column("beta", "num"), Column("base_profit", "money")]
        columns += [Column(f"profit_tau{t}", "money") for t in tags]
        columns += [Column(f"marginal_tau{t}", "num") for t in tags]
        table = ResultTable("fig6 subscribing share", columns)
        params = basic_scenario().params()
        base = baseline_profit(params).expected_profit
        for beta in [round(b, 2) for b in np.arange(0.0, 0.99 + 1e-9, 0.01)]:
            row: Dict[str, Any] = {"beta": beta, "base_profit": base}
            for tag, tau in zip(tags, taus):
                row[f"profit_tau{tag}"] = subscription_profit(params, tau, beta).expected_profit
                row[f"marginal_tau{tag}"] = marginal_profit_wrt_beta(params, tau, beta)
            table.add(**row)
        for tag, tau in zip(tags, taus):
            table.notes.append(f"tau={tau}: critical beta={_fmt_opt(critical_beta(params, tau))}")
        return table

    def fig7(self) -> ResultTable:
        table = ResultTable("fig7 acceptance isoquants", [
            Column("eta", "num"), Column("pi", "num"), Column("lambda", "num"), Column("clamped", "text")])
        for eta in (0.05, 0.10, 0.15, 0.20, 0.25, 0.30):
            for pi in [round(v, 2) for v in np.arange(0.05, 1.0 + 1e-9, 0.05)]:
                iso = isoquant_lambda(eta, FIXED_TAU, pi)
                table.add(eta=eta, pi=pi, **{"lambda": iso.lam}, clamped="yes" if iso.clamped else "")
        table.notes.append(f"discount tau={FIXED_TAU}")
        return table

    def _simulated_sweep(self, title: str, parameter: str, values: List[float]) -> ResultTable:
        kind = "int" if parameter == "n" else "num"
        table = ResultTable(title, [
            Column(parameter, kind), Column("tau_star", "tau"), Column("beta", "pct"), Column("beta_sim", "pct"),
            Column("relative_uplift", "pct"), Column("std_error", "num")])
        for value in values:
            params = basic_scenario(**{parameter: value}).params()
            sol = optimize_discount_simulated(self.sim_config, params, 0.5)
            table.add(**{parameter: value}, tau_star=sol.tau_star, beta=sol.beta_at_optimum,
                      beta_sim=sol.simulated_share, relative_uplift=sol.relative_uplift, std_error=sol.std_error)
        return table

    def fig8(self) -> ResultTable:
        lo, hi = self.n_range or (150, 1000)
        return self._simulated_sweep("fig8 customer base simulated", "n", list(range(lo, hi + 1, 50)))

    def fig9(self) -> ResultTable:
        costs = [round(v, 2) for v in np.arange(0.05, 0.9 + 1e-9, 0.05)]
        return self._simulated_sweep("fig9 supply cost simulated", "c", costs)

    def discount_curve(self) -> ResultTable:
        params = basic_scenario().params()
        curve = profit_curve(params, 0.5, tau_grid(0.0, 0.149))
        table = ResultTable("discount curve", [
            Column("tau", "tau"), Column("beta", "pct"), Column("expected_profit", "money"), Column("baseline", "money")])
        for rec in curve.to_dict("records"):
            table.add(**rec)
        sol = optimize_discount_analytic(params, 0.5)
        table.notes.append(f"tau*={sol.tau_star:.5f}, E={sol.expected_profit:.4f}")
        return table

    def basic(self) -> ResultTable:
        ref = self.reference.get("basic", {})
        scenario = basic_scenario()
        params = scenario.params()
        sol = optimize_discount_analytic(params, scenario.lam)
        tau = sol.tau_display
        beta = float(ex_ante_share(tau, params.pi, scenario.lam, params.p))
        sub = subscription_profit(params, tau, beta)
        dec = uplift_decomposition(params, tau, beta)
        report = Simulator(self.sim_config).run(params, tau, scenario.lam)

        table = ResultTable("basic example", [Column("quantity", "text"), Column("value", "num"),
                                              Column("reference", "num")])
        rows = [
            ("e_base", baseline_profit(params).expected_profit),
            ("tau_star", sol.tau_star),
            ("e_sub", sub.expected_profit),
            ("beta", beta),
            ("relative_uplift", relative_change(sub.expected_profit, baseline_profit(params).expected_profit)),
            ("i_delta", dec.i_delta),
            ("ii_delta", dec.ii_delta),
            ("sim_initial", report.initial_period_mean_profit),
            ("sim_eval", report.eval_mean_profit_per_period),
            ("sim_std_error", report.std_error),
            ("sim_beta", report.mean_subscriber_share),
            ("sim_service_level", report.realized_service_level),
        ]
        for name, value in rows:
            table.add(quantity=name, value=value, reference=ref.get(name))
        return table


def _fmt_opt(value: Optional[float]) -> str:
    return "none" if value is None else f"{value:.4f}"
