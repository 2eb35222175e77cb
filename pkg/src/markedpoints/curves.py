"""Summary curves: a statistic evaluated on a uniform r-grid, plus CSV round-trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["SummaryCurve", "r_grid"]


def r_grid(r_max: float, bins: int = 512) -> np.ndarray:
    """Uniform grid of bins+1 values from 0 to r_max inclusive."""
    if r_max <= 0 or bins < 1:
        raise ValidationError(f"need r_max > 0 and bins >= 1, got {r_max}, {bins}")
    return np.linspace(0.0, float(r_max), bins + 1)


@dataclass
class SummaryCurve:
    """A statistic on an r-grid; NaN marks r values where it is undefined."""

    r: np.ndarray
    values: np.ndarray
    statistic: str
    theoretical: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.r.ndim != 1 or self.r.shape != self.values.shape:
            raise ValidationError("r and values must be 1-D arrays of equal length")
        if len(self.r) < 2 or self.r[0] != 0.0 or np.any(np.diff(self.r) <= 0):
            raise ValidationError("r grid must be strictly increasing and start at 0")
        if self.theoretical is not None:
            self.theoretical = np.asarray(self.theoretical, dtype=float)
            if self.theoretical.shape != self.r.shape:
                raise ValidationError("theoretical curve length mismatch")

    def same_grid(self, other: "SummaryCurve") -> bool:
        return np.array_equal(self.r, other.r)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            items = " ".join(f"{k}={v}" for k, v in sorted(self.meta.items()))
            fh.write(f"# statistic={self.statistic}" + (f" {items}" if items else "") + "\n")
            wr = csv.writer(fh)
            cols = ["r", "value"] + (["theoretical"] if self.theoretical is not None else [])
            wr.writerow(cols)
            for i in range(len(self.r)):
                row = [format(self.r[i], ".12g"), format(self.values[i], ".12g")]
                if self.theoretical is not None:
                    row.append(format(self.theoretical[i], ".12g"))
                wr.writerow(row)

    @staticmethod
    def from_csv(path) -> "SummaryCurve":
        with open(path, newline="") as fh:
            first = fh.readline()
            meta = {}
            statistic = "unknown"
            if first.startswith("#"):
                for tok in first[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        if k == "statistic":
                            statistic = v
                        else:
                            meta[k] = v
                header = fh.readline()
            else:
                header = first
            names = [h.strip() for h in header.strip().split(",")]
            rows = list(csv.reader(fh))
        r = np.array([float(x[0]) for x in rows])
        vals = np.array([float(x[1]) for x in rows])
        theo = None
        if "theoretical" in names:
            theo = np.array([float(x[2]) for x in rows])
        return SummaryCurve(r, vals, statistic, theo, meta)
