"""CSV and JSON report emission.

Floats are written with 17 significant digits so every value round-trips
exactly; aggregates in the JSON summary are computed from the parsed-back
CSV values, so recomputing them from the file gives identical numbers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

COLUMNS = ("trial_id", "seed", "success", "min_margin", "emp_margin_err", "exact_risk",
           "psi1", "psi2", "claim1_rhs", "schapire", "minmargin", "kthmargin", "runtime_ms")
NUMERIC = COLUMNS[3:]
NAN = float("nan")


@dataclass
class TrialReport:
    trial_id: int
    seed: int
    success: bool
    min_margin: float = NAN
    emp_margin_err: float = NAN
    exact_risk: float = NAN
    psi1: float = NAN
    psi2: float = NAN
    claim1_rhs: float = NAN
    schapire: float = NAN
    minmargin: float = NAN
    kthmargin: float = NAN
    runtime_ms: float = NAN
    extras: dict = field(default_factory=dict)

    def check(self):
        for name in ("emp_margin_err", "exact_risk", "psi1", "psi2", "claim1_rhs"):
            v = getattr(self, name)
            if not math.isnan(v) and not -1e-12 <= v <= 1 + 1e-12:
                raise AssertionError(f"{name}={v} is not a probability")
        if not math.isnan(self.min_margin) and not -1 <= self.min_margin <= 1:
            raise AssertionError("min_margin outside [-1, 1]")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def read_csv_columns(text):
    reader = csv.DictReader(io.StringIO(text))
    cols = {c: [] for c in COLUMNS}
    for row in reader:
        for c in COLUMNS:
            cols[c].append(float(row[c]))
    return {c: np.array(v) for c, v in cols.items()}


def describe(values):
    v = np.asarray(values, dtype=np.float64)
    v = v[~np.isnan(v)]
    if v.size == 0:
        return {"count": 0}
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"count": int(v.size), "mean": math.fsum(v.tolist()) / v.size,
            "min": float(q[0]), "q25": float(q[1]), "median": float(q[2]),
            "q75": float(q[3]), "max": float(q[4])}


def gap_ratios(cols):
    """Per-bound (risk - emp) / (bound - emp), NaN where undefined."""
    out = {}
    risk, emp = cols["exact_risk"], cols["emp_margin_err"]
    for name in ("schapire", "minmargin", "kthmargin"):
        denom = cols[name] - emp
        with np.errstate(invalid="ignore", divide="ignore"):
            out[name] = np.where(denom > 0, (risk - emp) / denom, np.nan)
    return out


def aggregates_from_csv(text):
    cols = read_csv_columns(text)
    agg = {c: describe(cols[c]) for c in NUMERIC}
    agg["success_fraction"] = float(cols["success"].mean()) if cols["success"].size else NAN
    agg["gap_ratio"] = {k: describe(v) for k, v in gap_ratios(cols).items()}
    return agg


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if math.isnan(f) else f
    return obj


def summary_json(summary):
    return json.dumps(_clean(summary), indent=2, sort_keys=True, allow_nan=False) + "\n"
