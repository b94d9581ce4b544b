"""RiskReport rows and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

CSV_HEADER = ("grid", "method", "risk_theory", "risk_mc_mean", "risk_mc_stderr", "trials")


def fmt_float(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def _parse_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


@dataclass(frozen=True)
class RiskRow:
    grid: float
    method: str
    risk_theory: Optional[float] = None
    risk_mc_mean: Optional[float] = None
    risk_mc_stderr: Optional[float] = None
    trials: int = 0

    def __post_init__(self):
        if self.risk_mc_stderr is not None and self.risk_mc_stderr < 0:
            raise ValueError("stderr must be >= 0")


@dataclass
class RiskReport:
    rows: list[RiskRow] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def add(self, row: RiskRow):
        self.rows.append(row)

    def get(self, grid, method) -> RiskRow:
        for r in self.rows:
            if r.grid == grid and r.method == method:
                return r
        raise KeyError((grid, method))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(
                [
                    fmt_float(r.grid),
                    r.method,
                    fmt_float(r.risk_theory),
                    fmt_float(r.risk_mc_mean),
                    fmt_float(r.risk_mc_stderr),
                    str(r.trials),
                ]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RiskReport":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [
            RiskRow(float(g), m, _parse_float(t), _parse_float(mm), _parse_float(se), int(n))
            for g, m, t, mm, se, n in reader
        ]
        return cls(rows)
