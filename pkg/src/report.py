# src/report.py
"""
Result tables: rich rendering for people, CSV for machines.

Every numeric column is emitted twice in CSV: the display value (currency
at 2 decimals, percentages at 2 decimals, discounts at 0.1pp) and a
`<name>_full` column at full precision. A provenance footer of `# key=value`
comment lines follows the rows.
"""
from __future__ import annotations
import io
import logging
import math
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Literal, Optional

import pandas as pd
from rich.console import Console
from rich.table import Table

log = logging.getLogger(__name__)

Kind = Literal["money", "pct", "tau", "int", "num", "text"]
_PLACES = {"money": Decimal("0.01"), "pct": Decimal("0.01"), "tau": Decimal("0.001"), "num": Decimal("0.0001")}


def _missing(value: Any) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def fmt_value(value: Any, kind: Kind) -> str:
    """Display form with half-up rounding."""
    if _missing(value):
        return ""
    if kind == "text":
        return str(value)
    if kind == "int":
        return str(int(value))
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    scaled = Decimal(repr(float(value)))
    if kind == "pct":
        scaled = scaled * 100
    shown = scaled.quantize(_PLACES[kind], rounding=ROUND_HALF_UP)
    if shown == 0:
        shown = abs(shown)
    return f"{shown}%" if kind == "pct" else str(shown)


def fmt_full(value: Any, kind: Kind) -> str:
    if _missing(value):
        return ""
    if kind == "text":
        return str(value)
    if kind == "int":
        return str(int(value))
    return repr(float(value))


@dataclass
class Column:
    name: str
    kind: Kind = "num"
    title: Optional[str] = None

    @property
    def label(self) -> str:
        return self.title or self.name


@dataclass
class ResultTable:
    title: str
    columns: List[Column]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    footer: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def add(self, **row: Any) -> None:
        unknown = set(row) - {c.name for c in self.columns}
        if unknown:
            raise KeyError(f"unknown column(s) {sorted(unknown)} for table {self.title!r}")
        self.rows.append(row)

    def column(self, name: str) -> List[Any]:
        return [r.get(name) for r in self.rows]

    # -------------------- machine output --------------------
    def to_frame(self) -> pd.DataFrame:
        data: Dict[str, List[str]] = {}
        for col in self.columns:
            data[col.name] = [fmt_value(r.get(col.name), col.kind) for r in self.rows]
            if col.kind not in ("text", "int"):
                data[f"{col.name}_full"] = [fmt_full(r.get(col.name), col.kind) for r in self.rows]
        return pd.DataFrame(data, columns=list(data))

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.to_frame().to_csv(buf, index=False, lineterminator="\n")
        for note in self.notes:
            buf.write(f"# note: {note}\n")
        if self.footer:
            buf.write("# " + ", ".join(f"{k}={v}" for k, v in self.footer.items()) + "\n")
        return buf.getvalue()

    # -------------------- human output --------------------
    def to_rich(self) -> Table:
        table = Table(title=self.title, header_style="bold")
        for col in self.columns:
            table.add_column(col.label, justify="left" if col.kind == "text" else "right")
        for r in self.rows:
            table.add_row(*(fmt_value(r.get(col.name), col.kind) for col in self.columns))
        if self.notes or self.footer:
            caption = list(self.notes)
            if self.footer:
                caption.append(", ".join(f"{k}={v}" for k, v in self.footer.items()))
            table.caption = "\n".join(caption)
        return table


def emit(tables: List[ResultTable], as_csv: bool, out: Optional[str] = None,
         console: Optional[Console] = None) -> None:
    """Print tables (rich or CSV) or write them as CSV files under `out`."""
    console = console or Console()
    if out:
        written = write_tables(tables, out)
        for path in written:
            log.info("[report] wrote %s", path)
        return
    for i, table in enumerate(tables):
        if as_csv:
            if i:
                console.file.write("\n")
            console.file.write(table.to_csv())
        else:
            console.print(table.to_rich())


def write_tables(tables: List[ResultTable], out: str) -> List[str]:
    """One table to a .csv path; several tables to <out>/<slug>.csv."""
    if len(tables) == 1 and out.endswith(".csv"):
        targets = [out]
    else:
        os.makedirs(out, exist_ok=True)
        targets = [os.path.join(out, f"{slug(t.title)}.csv") for t in tables]
    for table, path in zip(tables, targets):
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(table.to_csv())
    return targets


def slug(title: str) -> str:
    keep = [ch.lower() if ch.isalnum() else "_" for ch in title]
    return "_".join(part for part in "".join(keep).split("_") if part) or "table"
