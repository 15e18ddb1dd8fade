# src/scenario.py
"""
Scenario files: plain `key = value` lines, `#` starts a comment.

    # basic example
    n = 500
    pi = 0.5
    c = 0.85
    lambda = 0.5

n, pi and c are required; p defaults to 1 and alpha to 0.97. Unknown keys
are rejected. Key spellings are matched by the rules below.
"""
from __future__ import annotations
import hashlib
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .demand import MarketParams


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be read or is invalid."""
    pass


@dataclass
class Rule:
    pattern: re.Pattern
    field: str


def _compile_rules() -> List[Rule]:
    pairs = [
        (r"^n$", "n"),
        (r"^(pi|buying_probability)$", "pi"),
        (r"^(p|price)$", "p"),
        (r"^(c|cost|supply_cost)$", "c"),
        (r"^(alpha|service_level)$", "alpha"),
        (r"^(lambda|lam|popularity)$", "lam"),
        (r"^(tau|discount)$", "tau"),
        (r"^(beta|share)$", "beta"),
        (r"^(runs|s)$", "runs"),
        (r"^(periods|t)$", "periods"),
        (r"^seed$", "seed"),
    ]
    return [Rule(re.compile(p, re.IGNORECASE), f) for p, f in pairs]


RULES = _compile_rules()


def map_key(key: str) -> str:
    """Field name for a scenario key, '' if unknown."""
    for rule in RULES:
        if rule.pattern.search(key.strip()):
            return rule.field
    return ""


class ScenarioFile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=1)
    pi: float = Field(gt=0.0, le=1.0)
    p: float = Field(default=1.0, gt=0.0)
    c: float = Field(gt=0.0)
    alpha: float = Field(default=0.97, gt=0.0, lt=1.0)
    lam: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    tau: Optional[float] = Field(default=None, ge=0.0)
    beta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    runs: Optional[int] = Field(default=None, ge=1)
    periods: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def _consistent(self) -> "ScenarioFile":
        if not self.c < self.p:
            raise ValueError(f"supply cost c={self.c} must be below price p={self.p}")
        if self.tau is not None and not self.tau < self.p:
            raise ValueError(f"discount tau={self.tau} must be below price p={self.p}")
        return self

    def params(self) -> MarketParams:
        return MarketParams(n=self.n, pi=self.pi, p=self.p, c=self.c, alpha=self.alpha)

    def canonical(self) -> str:
        """Sorted key=value lines of the set fields; input of scenario_hash."""
        items = sorted((k, v) for k, v in self.model_dump().items() if v is not None)
        return "\n".join(f"{k}={v!r}" for k, v in items)

    def scenario_hash(self) -> str:
        return hashlib.sha1(self.canonical().encode("utf-8")).hexdigest()[:16]


def parse_scenario_text(text: str, origin: str = "<scenario>") -> ScenarioFile:
    values: Dict[str, str] = {}
    seen: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{origin}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        field = map_key(key)
        if not field:
            raise ScenarioError(f"{origin}:{lineno}: unknown key {key!r}")
        if field in seen:
            raise ScenarioError(f"{origin}:{lineno}: {field} already set on line {seen[field]}")
        seen[field] = lineno
        values[field] = value

    missing = [k for k in ("n", "pi", "c") if k not in values]
    if missing:
        raise ScenarioError(f"{origin}: missing required key(s) {', '.join(missing)}")
    try:
        return ScenarioFile(**values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(map(str, err['loc'])) or 'scenario'}: {err['msg']}"
                             for err in e.errors())
        raise ScenarioError(f"{origin}: {problems}")


def load_scenario(path: str) -> ScenarioFile:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ScenarioError(f"could not read scenario {path}: {e}")
    return parse_scenario_text(text, origin=path)


def scenario_from_values(**values) -> ScenarioFile:
    """Scenario built in code (reproduction grids, tests)."""
    clean = {k: v for k, v in values.items() if v is not None}
    try:
        return ScenarioFile(**clean)
    except ValidationError as e:
        raise ScenarioError(str(e))


def split_overrides(pairs: List[str]) -> List[Tuple[str, str]]:
    """`key=value` strings from the command line."""
    out = []
    for item in pairs:
        if "=" not in item:
            raise ScenarioError(f"override must look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        out.append((k.strip(), v.strip()))
    return out


def apply_overrides(scenario: ScenarioFile, pairs: List[str]) -> ScenarioFile:
    values = {k: v for k, v in scenario.model_dump().items() if v is not None}
    for key, value in split_overrides(pairs):
        field = map_key(key)
        if not field:
            raise ScenarioError(f"unknown key {key!r}")
        values[field] = value
    try:
        return ScenarioFile(**values)
    except ValidationError as e:
        raise ScenarioError(str(e))
