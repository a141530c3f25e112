from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class Violation:
    """One failed inequality: which rule, where, and the offending numbers."""

    rule: str
    index: Optional[int] = None
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"rule": self.rule, "index": self.index}
        out.update({k: _jsonable(v) for k, v in self.detail.items()})
        return out


@dataclass(frozen=True)
class Verdict:
    """Outcome of an audit. Truthy iff every checked inequality held.

    ``horizon`` records how far the check ran: all "for every n" claims are
    only certified up to it.
    """

    check: str
    violations: tuple = ()
    horizon: Optional[int] = None
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def __bool__(self):
        return self.passed

    @property
    def first(self):
        return self.violations[0] if self.violations else None

    def to_dict(self):
        return {
            "check": self.check,
            "passed": self.passed,
            "horizon": self.horizon,
            "violations": [v.to_dict() for v in self.violations],
            "info": {k: _jsonable(v) for k, v in self.info.items()},
        }


def _jsonable(value: Any):
    from fractions import Fraction

    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int) and not isinstance(value, bool) and abs(value) > 2**53:
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


class _Collector:
    """Accumulates violations up to a cap so huge audits stay cheap."""

    def __init__(self, check, limit=50):
        self.check = check
        self.limit = limit
        self.items = []
        self.total = 0

    def add(self, rule, index=None, **detail):
        self.total += 1
        if len(self.items) < self.limit:
            self.items.append(Violation(rule, index, detail))

    def verdict(self, horizon=None, **info):
        if self.total > len(self.items):
            info["violations_total"] = self.total
        return Verdict(self.check, tuple(self.items), horizon, info)
