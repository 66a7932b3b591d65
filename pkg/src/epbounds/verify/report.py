"""Result records of the verification engines and their JSON / CSV forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

STATUSES = ("verified", "counterexample", "inconclusive")


def _num(v):
    # JSON has no inf / nan; keep them readable as strings
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass
class Witness:
    x: float
    lhs: float
    rhs: float
    note: str = ""

    def to_dict(self):
        return {"x": _num(float(self.x)), "lhs": _num(float(self.lhs)), "rhs": _num(float(self.rhs)), "note": self.note}


@dataclass
class VerificationReport:
    """Outcome of one sweep over ``[x_lo, x_hi]``.

    ``min_margin`` is the smallest (signed) distance between the step function
    and the envelope over the range, attained at ``argmin``.  Negative means
    the inequality fails there.
    """

    ineq_id: str
    x_lo: float
    x_hi: float
    status: str
    min_margin: float = math.inf
    argmin: float | None = None
    witness: Witness | None = None
    granularity: str = ""
    runtime_s: float = 0.0
    eval_points: int = 0
    n_counterexamples: int = 0
    n_inconclusive: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "counterexample" and self.witness is None:
            raise ValueError("counterexample needs a witness")

    @property
    def verified(self):
        return self.status == "verified"

    @property
    def range(self):
        return (self.x_lo, self.x_hi)

    def to_dict(self):
        return {
            "ineq_id": self.ineq_id,
            "x_lo": _num(float(self.x_lo)),
            "x_hi": _num(float(self.x_hi)),
            "status": self.status,
            "min_margin": _num(float(self.min_margin)),
            "argmin": None if self.argmin is None else _num(float(self.argmin)),
            "witness": None if self.witness is None else self.witness.to_dict(),
            "runtime_s": round(self.runtime_s, 6),
            "eval_points": int(self.eval_points),
            "granularity": self.granularity,
            "n_counterexamples": int(self.n_counterexamples),
            "n_inconclusive": int(self.n_inconclusive),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


@dataclass
class CrossingResult:
    """Smallest integer N such that the inequality holds on ``[N, x_hi]``."""

    ineq_id: str
    smallest_N: int
    method: str
    certified_range: tuple
    witness_below: Witness | None = None
    exact: bool = True
    note: str = ""
    runtime_s: float = 0.0
    report_above: VerificationReport | None = None

    def to_dict(self):
        return {
            "ineq_id": self.ineq_id,
            "smallest_N": int(self.smallest_N),
            "method": self.method,
            "certified_range": [_num(float(v)) for v in self.certified_range],
            "witness_below": None if self.witness_below is None else self.witness_below.to_dict(),
            "exact": self.exact,
            "note": self.note,
            "runtime_s": round(self.runtime_s, 6),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


REPORT_CSV_FIELDS = ("ineq_id", "x_lo", "x_hi", "status", "min_margin", "argmin", "witness", "runtime_s", "eval_points")


def reports_to_csv(reports) -> str:
    """CSV text with one row per report; the witness is packed as ``x;lhs;rhs``."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        d = r.to_dict()
        wt = d["witness"]
        d["witness"] = "" if wt is None else f"{wt['x']!r};{wt['lhs']!r};{wt['rhs']!r}"
        w.writerow({k: d[k] for k in REPORT_CSV_FIELDS})
    return buf.getvalue()


@dataclass
class MertensEstimate:
    """Prime sums up to x and the constants they estimate.

    ``A1 = sum 1/p - log log x - B`` with the reference B, ``A3 = sum log p/p
    - log x - E``, ``A2 = e^-gamma/log x - prod (1 - 1/p)``.  ``B_hat`` and
    ``E_hat`` are corrected by the midpoint of the tail envelope in force;
    ``B_err`` / ``E_err`` are the envelope half widths.
    """

    x: int
    sum_recip: object
    sum_logp: object
    A1: float
    A2: float
    A3: float
    B_hat: float
    E_hat: float
    B_err: float
    E_err: float
    S: float
    S_bounds: tuple
    envelope: str = ""

    def to_dict(self):
        d = asdict(self)
        d["sum_recip"] = float(self.sum_recip)
        d["sum_logp"] = float(self.sum_logp)
        d["S_bounds"] = list(self.S_bounds)
        return d
