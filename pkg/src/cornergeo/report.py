"""Residual bookkeeping: max-abs tracking with arg-max points and pass/fail."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Residual", "ResidualTracker", "ResidualReport"]


@dataclass
class Residual:
    """One named residual: its worst value, where it occurred, and a verdict.

    ``tolerance`` None marks an informational entry; its ``passed`` stays None
    and does not affect the suite verdict.
    """

    name: str
    max_abs: float
    argmax_point: list | None = None
    tolerance: float | None = None
    passed: bool | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_abs": float(self.max_abs),
            "argmax_point": self.argmax_point,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


class ResidualTracker:
    """Accumulates max-abs residuals by name across sample points."""

    def __init__(self):
        self._worst: dict[str, tuple[float, list | None]] = {}
        self._order: list[str] = []

    def update(self, name: str, value: float, point=None) -> None:
        value = abs(float(value))
        if name not in self._worst:
            self._order.append(name)
            self._worst[name] = (value, _point_list(point))
        elif value > self._worst[name][0]:
            self._worst[name] = (value, _point_list(point))

    def max_abs(self, name: str) -> float:
        return self._worst[name][0]

    def report(self, suite: str, tolerances=None, details=None) -> "ResidualReport":
        """Build a report; ``tolerances`` is a float for all names or a dict."""
        residuals = []
        for name in self._order:
            worst, pt = self._worst[name]
            tol = tolerances.get(name) if isinstance(tolerances, dict) else tolerances
            passed = None if tol is None else bool(worst < tol)
            residuals.append(Residual(name, worst, pt, tol, passed))
        return ResidualReport(suite, residuals, details or {})


def _point_list(point):
    if point is None:
        return None
    return [float(v) for v in np.asarray(point).reshape(-1)]


@dataclass
class ResidualReport:
    suite: str
    residuals: list[Residual] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.residuals) and not self.details.get(
            "failed", False
        )

    def max_abs(self, name: str) -> float:
        for r in self.residuals:
            if r.name == name:
                return r.max_abs
        raise KeyError(name)

    def worst(self) -> float:
        return max((r.max_abs for r in self.residuals), default=0.0)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "residuals": [r.to_dict() for r in self.residuals],
            "details": self.details,
        }
