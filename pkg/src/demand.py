# src/demand.py
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import ndtr

Real = Union[float, np.ndarray]


class DomainError(ValueError):
    """Raised when an input lies outside the mathematical domain of an operation."""
    pass


class MarketParams(BaseModel):
    """One SKU / customer-segment scenario."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1, description="potential customers in the segment")
    pi: float = Field(gt=0.0, le=1.0, description="individual buying probability")
    p: float = Field(default=1.0, gt=0.0, description="selling price per unit")
    c: float = Field(gt=0.0, description="supply cost per unit")
    alpha: float = Field(default=0.97, gt=0.0, lt=1.0, description="service level target")

    @model_validator(mode="after")
    def _cost_below_price(self) -> "MarketParams":
        if not self.c < self.p:
            raise ValueError(f"supply cost c={self.c} must be below price p={self.p}")
        return self

    def replace(self, **changes) -> "MarketParams":
        """Validated copy with some fields changed (sweeps, root finders)."""
        return MarketParams(**{**self.model_dump(), **changes})


@dataclass(frozen=True)
class NormalApprox:
    mu: float
    sigma: float


# -------------------- standard normal --------------------
# Rational approximation for the inverse CDF (relative error ~1.15e-9),
# polished with one Newton step on the CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def std_normal_pdf(z: Real) -> Real:
    return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


def std_normal_cdf(z: Real) -> Real:
    return ndtr(z)


def _tail_rational(q: float) -> float:
    r = math.sqrt(-2.0 * math.log(q))
    num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
    den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
    return num / den


def _central_rational(q: float) -> float:
    u = q - 0.5
    r = u * u
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * u
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def std_normal_quantile(q: float) -> float:
    """
    Inverse standard-normal CDF with |Phi(z) - q| <= 1e-10.
    Upper-half Newton refinement works on the complement 1 - q, which is
    exact in floating point for q >= 0.5.
    """
    q = float(q)
    if not (0.0 < q < 1.0) or math.isnan(q):
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")

    if q < _P_LOW:
        z = _tail_rational(q)
    elif q > 1.0 - _P_LOW:
        z = -_tail_rational(1.0 - q)
    else:
        z = _central_rational(q)

    # one Newton step
    if q < 0.5:
        err = float(ndtr(z)) - q
    else:
        err = (1.0 - q) - float(ndtr(-z))
    return z - err / float(std_normal_pdf(z))


# -------------------- demand model --------------------
def normal_approx(params: MarketParams) -> NormalApprox:
    return NormalApprox(*_moments(params.n, params.pi))


def _moments(n: float, pi: float) -> tuple[float, float]:
    mu = n * pi
    if pi <= 0.0 or pi >= 1.0:
        return mu, 0.0
    return mu, math.sqrt(n * pi * (1.0 - pi))


def order_quantity(params: MarketParams) -> float:
    """Continuous service-level order quantity q = mu + sigma * z_alpha."""
    na = normal_approx(params)
    if na.sigma == 0.0:
        return na.mu
    return na.mu + na.sigma * std_normal_quantile(params.alpha)
