"""Structured check results and their canonical JSON serialization.

Every inequality verification produces signed margins (lhs - rhs), never a
bare boolean, so that near-misses are visible.  Reports distinguish three
statuses: ``ok``, ``hypothesis-violation`` (the inputs break a precondition
of the claim being checked, so a negative margin is not a finding), and
``critical`` (a verified inequality failed on hypothesis-satisfying input,
which means either an implementation bug or a genuine counterexample).

JSON is emitted by a small deterministic writer: floats are printed with 17
significant digits, infinities as the strings "inf" / "-inf", and key order
follows insertion order.  Identical payloads serialize to identical bytes.
"""

import math
from dataclasses import dataclass, field

STATUS_OK = "ok"
STATUS_HYPOTHESIS = "hypothesis-violation"
STATUS_CRITICAL = "critical"


@dataclass
class Check:
    """A single two-sided comparison: passes iff margin >= -tolerance."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    witness: dict | None = None

    @property
    def margin(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        return self.margin >= -self.tolerance

    def to_payload(self):
        payload = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.witness is not None:
            payload["witness"] = self.witness
        return payload


@dataclass
class VerificationReport:
    """Outcome of one verification run: checks, status, and free-form data."""

    title: str
    checks: list = field(default_factory=list)
    status: str = STATUS_OK
    summary: dict = field(default_factory=dict)

    def add_check(self, name, lhs, rhs, tolerance, witness=None):
        check = Check(name, float(lhs), float(rhs), float(tolerance), witness)
        self.checks.append(check)
        return check

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def worst_check(self):
        return min(self.checks, key=lambda c: c.margin, default=None)

    def finalize_status(self):
        """Escalate to critical when a check fails under a valid hypothesis."""
        if self.status == STATUS_OK and not self.passed:
            self.status = STATUS_CRITICAL
        return self.status

    def to_payload(self):
        worst = self.worst_check()
        return {
            "title": self.title,
            "status": self.status,
            "passed": self.passed,
            "checks": [c.to_payload() for c in self.checks],
            "worst_margin": worst.margin if worst is not None else None,
            "summary": self.summary,
        }


def _format_float(x):
    if math.isnan(x):
        raise ValueError("NaN is not serializable in reports")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_escape_string(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"report keys must be strings, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(_escape_string(key))
            out.append(":")
            _emit(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, value in enumerate(obj):
            if i:
                out.append(",")
            _emit(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\b": "\\b",
    "\f": "\\f",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def _escape_string(s):
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def dumps(obj):
    """Serialize a payload to deterministic JSON text (no trailing newline)."""
    out = []
    _emit(obj, out)
    return "".join(out)
