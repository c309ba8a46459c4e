"""Check reports: named residuals with tolerances and verdicts.

Every verification family produces a `CheckReport`, an ordered list of
per-point records.  Residuals use a relative-absolute hybrid norm: the
max-abs of the difference divided by (1 + max-abs of the compared
quantities), so identities on large and tiny curvature scales are judged
uniformly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"


@dataclass
class CheckRecord:
    check_id: str
    point: tuple
    lhs_norm: float
    rhs_norm: float
    residual: float
    tolerance: float
    verdict: str
    note: str = ""

    def as_dict(self):
        return {
            "check_id": self.check_id,
            "point": list(self.point),
            "lhs_norm": self.lhs_norm,
            "rhs_norm": self.rhs_norm,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "note": self.note,
        }


@dataclass
class CheckReport:
    records: list = field(default_factory=list)

    def add(self, record: CheckRecord):
        self.records.append(record)

    def extend(self, other: "CheckReport"):
        self.records.extend(other.records)

    @property
    def all_pass(self) -> bool:
        return all(r.verdict != FAIL for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_pass else 1

    def max_residual(self, check_id: str) -> float:
        vals = [r.residual for r in self.records if r.check_id == check_id]
        if not vals:
            raise KeyError(f"no records for {check_id!r}")
        return max(vals)

    def by_id(self, check_id: str) -> list:
        return [r for r in self.records if r.check_id == check_id]

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r.as_dict()) for r in self.records)

    def to_text(self, human: bool = False) -> str:
        fmt = (lambda x: f"{x:.5e}") if human else (lambda x: f"{x:.16e}")
        lines = []
        for r in self.records:
            pt = ",".join(fmt(c) for c in r.point)
            lines.append(
                f"{r.verdict:4s} {r.check_id:34s} residual={fmt(r.residual)} "
                f"tol={fmt(r.tolerance)} lhs={fmt(r.lhs_norm)} rhs={fmt(r.rhs_norm)} "
                f"at=({pt})" + (f" note={r.note}" if r.note else "")
            )
        return "\n".join(lines)


def _flatten_comps(values: np.ndarray, npoints: int) -> np.ndarray:
    return np.abs(np.asarray(values, dtype=float)).reshape(npoints, -1)


def hybrid_records(
    check_id: str,
    points: np.ndarray,
    lhs_values: np.ndarray,
    rhs_values: np.ndarray,
    tolerance: float,
    note: str = "",
) -> list:
    """Per-point records comparing two component arrays of shape (B, ...)."""
    points = np.atleast_2d(points)
    nb = points.shape[0]
    lhs = _flatten_comps(lhs_values, nb)
    rhs = _flatten_comps(rhs_values, nb)
    diff = np.max(
        np.abs(
            np.asarray(lhs_values, dtype=float).reshape(nb, -1)
            - np.asarray(rhs_values, dtype=float).reshape(nb, -1)
        ),
        axis=1,
    )
    lhs_norm = np.max(lhs, axis=1)
    rhs_norm = np.max(rhs, axis=1)
    resid = diff / (1.0 + np.maximum(lhs_norm, rhs_norm))
    out = []
    for b in range(nb):
        verdict = PASS if resid[b] <= tolerance else FAIL
        out.append(
            CheckRecord(
                check_id,
                tuple(float(x) for x in points[b]),
                float(lhs_norm[b]),
                float(rhs_norm[b]),
                float(resid[b]),
                tolerance,
                verdict,
                note,
            )
        )
    return out


def zero_records(check_id, points, values, tolerance, note="", scale_values=None):
    """Records asserting that `values` vanish; normalization optionally uses
    a separate `scale_values` array (e.g. the full tensor for a trace check)."""
    points = np.atleast_2d(points)
    nb = points.shape[0]
    vals = _flatten_comps(values, nb)
    num = np.max(vals, axis=1)
    if scale_values is None:
        den = 1.0 + num
    else:
        den = 1.0 + np.max(_flatten_comps(scale_values, nb), axis=1)
    resid = num / den
    out = []
    for b in range(nb):
        verdict = PASS if resid[b] <= tolerance else FAIL
        out.append(
            CheckRecord(
                check_id,
                tuple(float(x) for x in points[b]),
                float(num[b]),
                0.0,
                float(resid[b]),
                tolerance,
                verdict,
                note,
            )
        )
    return out


def skip_record(check_id, note) -> CheckRecord:
    return CheckRecord(check_id, (), 0.0, 0.0, 0.0, 0.0, SKIP, note)
