"""Named residual records with tolerances, and their serialization."""

import json
import math
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_record(self):
        rec = {
            "name": self.name,
            "residual": _clean(self.residual),
            "tolerance": _clean(self.tolerance),
            "pass": bool(self.passed),
        }
        if self.note:
            rec["note"] = self.note
        return rec


def _clean(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return x


@dataclass
class CheckReport:
    """An ordered list of checks plus run metadata.

    ``add`` keeps the worst residual per name, so reports built from
    independent samples merge the same way regardless of evaluation order.
    """

    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name, residual, tolerance, note="", passed=None):
        residual = float(residual)
        ok = (residual <= tolerance) if passed is None else bool(passed)
        if math.isnan(residual):
            ok = False
        for i, existing in enumerate(self.checks):
            if existing.name == name:
                worst = max(existing.residual, residual)
                self.checks[i] = Check(name, worst, tolerance,
                                       existing.passed and ok,
                                       existing.note or note)
                return self.checks[i]
        check = Check(name, residual, float(tolerance), ok, note)
        self.checks.append(check)
        return check

    def extend(self, other, prefix=""):
        for chk in other.checks:
            self.add(prefix + chk.name, chk.residual, chk.tolerance, chk.note, chk.passed)
        return self

    def __getitem__(self, name):
        for chk in self.checks:
            if chk.name == name:
                return chk
        raise KeyError(name)

    def __contains__(self, name):
        return any(chk.name == name for chk in self.checks)

    @property
    def passed(self):
        return all(chk.passed for chk in self.checks)

    def max_residual(self, names=None):
        vals = [c.residual for c in self.checks if names is None or c.name in names]
        return max(vals) if vals else 0.0

    def residuals(self):
        return {chk.name: chk.residual for chk in self.checks}

    def to_records(self):
        return [chk.to_record() for chk in self.checks]

    def to_dict(self):
        return {"schema": SCHEMA_VERSION, "checks": self.to_records(),
                "meta": dict(self.meta)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __str__(self):
        lines = []
        for chk in self.checks:
            flag = "PASS" if chk.passed else "FAIL"
            extra = f"  ({chk.note})" if chk.note else ""
            lines.append(f"[{flag}] {chk.name}: residual={chk.residual:.3e} "
                         f"tol={chk.tolerance:.1e}{extra}")
        return "\n".join(lines)


def merge_max(reports):
    out = CheckReport()
    for rep in reports:
        out.extend(rep)
        for key, value in rep.meta.items():
            out.meta.setdefault(key, value)
    return out
