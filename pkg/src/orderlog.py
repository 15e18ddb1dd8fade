# src/orderlog.py
"""
Order-log ingestion and estimation of buying probabilities.

An order log is a CSV with header customer_id,period_index,category,quantity.
Rows for the same (customer, period, category) cell are summed. A "hit" is a
cell with any positive quantity: the demand model is unit demand per period.
"""
from __future__ import annotations
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, TextIO, Union

import numpy as np
import pandas as pd
from scipy.stats import binomtest

log = logging.getLogger(__name__)

COLUMNS = ("customer_id", "period_index", "category", "quantity")
KEYS = ["customer_id", "period_index", "category"]
CONFIDENCE = 0.95
_UINT = re.compile(r"\s*\+?\d+\s*")


class OrderLogError(ValueError):
    """Raised for unreadable or invalid order logs and impossible estimates."""

    def __init__(self, message: str, problems: Optional[list[str]] = None):
        super().__init__(message)
        self.problems = problems or []


@dataclass(frozen=True)
class PiEstimate:
    pi_hat: float
    n_periods_observed: int  # (customer, period) cells
    n_hits: int
    wilson_interval: tuple[float, float]


class OrderLog:
    """Purchase records, one row per (customer_id, period_index, category) cell."""

    def __init__(self, records: pd.DataFrame):
        df = records.loc[:, list(COLUMNS)].copy()
        df["customer_id"] = df["customer_id"].astype(str)
        df["category"] = df["category"].astype(str)
        df["period_index"] = df["period_index"].astype(np.int64)
        df["quantity"] = df["quantity"].astype(np.int64)
        self.df = (df.groupby(KEYS, as_index=False, sort=True)["quantity"].sum()
                     .reset_index(drop=True))

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, int, str, int]]) -> "OrderLog":
        return cls(pd.DataFrame(list(records), columns=list(COLUMNS)))

    def __len__(self) -> int:
        return len(self.df)

    @property
    def customers(self) -> list[str]:
        return sorted(self.df["customer_id"].unique())

    @property
    def categories(self) -> list[str]:
        return sorted(self.df["category"].unique())

    @property
    def periods(self) -> list[int]:
        return sorted(int(p) for p in self.df["period_index"].unique())


# -------------------- loading --------------------
def _row_problems(df: pd.DataFrame) -> list[str]:
    problems: list[str] = []
    for i, row in df.iterrows():
        line = i + 2  # header is line 1
        for col in ("customer_id", "category"):
            if not row[col].strip():
                problems.append(f"line {line}: empty {col}")
        if not _UINT.fullmatch(row["period_index"]):
            problems.append(f"line {line}: period_index must be an integer >= 0, got {row['period_index']!r}")
        if not _UINT.fullmatch(row["quantity"]):
            problems.append(f"line {line}: quantity must be an integer >= 1, got {row['quantity']!r}")
        elif int(row["quantity"]) < 1:
            problems.append(f"line {line}: quantity must be an integer >= 1, got {row['quantity']!r}")
    return problems


def load_order_log(source: Union[str, TextIO]) -> OrderLog:
    try:
        df = pd.read_csv(source, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise OrderLogError("order log has no header row")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise OrderLogError(f"could not read order log: {e}")

    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise OrderLogError(f"order log header is missing {missing}; expected {','.join(COLUMNS)}")
    extra = [c for c in df.columns if c not in COLUMNS]
    if extra:
        log.warning("[orderlog] ignoring extra columns %s", extra)

    problems = _row_problems(df)
    if problems:
        raise OrderLogError(f"{len(problems)} malformed row(s) in order log:\n  " + "\n  ".join(problems),
                            problems)

    df = df.loc[:, list(COLUMNS)].copy()
    df["customer_id"] = df["customer_id"].str.strip()
    df["category"] = df["category"].str.strip()
    df["period_index"] = df["period_index"].map(int)
    df["quantity"] = df["quantity"].map(int)
    orders = OrderLog(df)
    log.info("[orderlog] rows=%d cells=%d customers=%d periods=%d",
             len(df), len(orders), len(orders.customers), len(orders.periods))
    return orders


# -------------------- frequencies --------------------
def purchase_frequency(orders: OrderLog, customer_id: str) -> dict[str, float]:
    """Per category: periods containing it / periods with any order by the customer."""
    mine = orders.df[orders.df["customer_id"] == customer_id]
    if mine.empty:
        raise OrderLogError(f"unknown customer {customer_id!r}")
    active = mine["period_index"].nunique()
    counts = mine.groupby("category")["period_index"].nunique()
    return {str(cat): int(k) / active for cat, k in counts.items()}


def frequency_table(orders: OrderLog, customer_id: str) -> pd.DataFrame:
    freq = purchase_frequency(orders, customer_id)
    return pd.DataFrame(sorted(freq.items()), columns=["category", "frequency"])


# -------------------- estimation --------------------
def estimate_pi(orders: OrderLog, category: str, segment: Iterable[str],
                periods: Optional[int] = None) -> PiEstimate:
    """
    Pooled hit rate of `category` over (customer, period) cells of the segment.
    The observation window is every distinct period in the log unless
    `periods` gives its length.
    """
    members = {str(c) for c in segment}
    if not members:
        raise OrderLogError("segment must contain at least one customer")
    window = len(orders.periods) if periods is None else int(periods)
    cells = len(members) * window
    if cells <= 0:
        raise OrderLogError("no (customer, period) cells observed")

    df = orders.df
    hit_rows = df[(df["category"] == category) & df["customer_id"].isin(members)]
    hits = len(hit_rows[["customer_id", "period_index"]].drop_duplicates())
    if hits > cells:
        raise OrderLogError(f"{hits} hits exceed {cells} observed cells; periods={periods} too small")

    ci = binomtest(hits, cells).proportion_ci(confidence_level=CONFIDENCE, method="wilson")
    pi_hat = hits / cells
    lo = max(0.0, min(float(ci.low), pi_hat))
    hi = min(1.0, max(float(ci.high), pi_hat))
    log.debug("[orderlog] category=%s hits=%d cells=%d pi=%.4f", category, hits, cells, pi_hat)
    return PiEstimate(pi_hat=pi_hat, n_periods_observed=cells, n_hits=hits, wilson_interval=(lo, hi))


def synthesize_order_log(n_customers: int, n_periods: int, category_pis: Mapping[str, float],
                         seed: int) -> OrderLog:
    """Seeded synthetic log: each customer buys each category independently per period."""
    if n_customers < 1 or n_periods < 1:
        raise OrderLogError("need at least one customer and one period")
    rng = np.random.default_rng(seed)
    ids = np.array([f"c{i:05d}" for i in range(n_customers)])
    frames = []
    for category, pi in category_pis.items():
        if not (0.0 <= pi <= 1.0):
            raise OrderLogError(f"buying probability for {category!r} must lie in [0, 1], got {pi}")
        bought = rng.random((n_customers, n_periods)) < pi
        cust, period = np.nonzero(bought)
        frames.append(pd.DataFrame({
            "customer_id": ids[cust],
            "period_index": period,
            "category": category,
            "quantity": rng.integers(1, 4, size=len(cust)),
        }))
    if not frames:
        return OrderLog(pd.DataFrame(columns=list(COLUMNS)))
    return OrderLog(pd.concat(frames, ignore_index=True))
