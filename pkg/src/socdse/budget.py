"""Budgets, metric extraction and the scalar distance-to-budget fitness.

Fitness sums the normalized overshoot of every metric (one latency term per
workload plus system power and area).  Metrics already inside their budget
still contribute, dampened by ``alpha_met``, so the search can trade slack in
a met metric for progress on an unmet one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import SchemaError
from .simulator import SimResult
from .workload import _check_number

DEFAULT_ALPHA_MET = 0.05

METRIC_PRIORITY = ("latency", "power", "area")


@dataclass(frozen=True)
class Budget:
    latency_s: dict[str, float]     # per-workload latency targets
    power_w: float
    area_mm2: float
    alpha_met: float = DEFAULT_ALPHA_MET

    def __post_init__(self):
        for name, value in self.latency_s.items():
            if value <= 0:
                raise SchemaError(f"latency budget for {name!r} must be > 0")
        if self.power_w <= 0 or self.area_mm2 <= 0:
            raise SchemaError("power and area budgets must be > 0")
        if not 0.0 <= self.alpha_met <= 1.0:
            raise SchemaError(f"alpha_met must be in [0, 1], got {self.alpha_met}")

    def scaled(self, *, latency: float = 1.0, power: float = 1.0,
               area: float = 1.0) -> "Budget":
        return Budget(
            {k: v * latency for k, v in self.latency_s.items()},
            self.power_w * power, self.area_mm2 * area, self.alpha_met)

    def to_json_dict(self) -> dict:
        return {
            "workloads": {k: v * 1e3 for k, v in sorted(self.latency_s.items())},
            "power_mw": self.power_w * 1e3,
            "area_mm2": self.area_mm2,
            "alpha_met": self.alpha_met,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Budget":
        if not isinstance(doc, dict):
            raise SchemaError("budget document must be a JSON object")
        unknown = set(doc) - {"workloads", "power_mw", "area_mm2", "alpha_met"}
        if unknown:
            raise SchemaError(f"unknown budget fields: {sorted(unknown)}")
        for key in ("workloads", "power_mw", "area_mm2"):
            if key not in doc:
                raise SchemaError(f"budget document missing field {key!r}")
        if not isinstance(doc["workloads"], dict):
            raise SchemaError("'workloads' must map workload names to latency_ms")
        latency = {
            name: _check_number(ms, f"latency_ms for {name!r}", 0, strict=True) / 1e3
            for name, ms in doc["workloads"].items()
        }
        return cls(
            latency_s=latency,
            power_w=_check_number(doc["power_mw"], "power_mw", 0, strict=True) / 1e3,
            area_mm2=_check_number(doc["area_mm2"], "area_mm2", 0, strict=True),
            alpha_met=(_check_number(doc["alpha_met"], "alpha_met", 0)
                       if "alpha_met" in doc else DEFAULT_ALPHA_MET),
        )

    @classmethod
    def from_json(cls, text: str) -> "Budget":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"budget document is not valid JSON: {exc}") from exc
        return cls.from_json_dict(doc)


@dataclass(frozen=True)
class MetricValues:
    latency_s: dict[str, float]
    power_w: float
    area_mm2: float

    @classmethod
    def from_result(cls, result: SimResult) -> "MetricValues":
        return cls(dict(result.workload_latency), result.power_w, result.area_mm2)


def _terms(values: MetricValues, budget: Budget):
    for name in sorted(budget.latency_s):
        yield f"latency:{name}", values.latency_s.get(name, 0.0), budget.latency_s[name]
    yield "power", values.power_w, budget.power_w
    yield "area", values.area_mm2, budget.area_mm2


def distance_to_budget(values: MetricValues, budget: Budget) -> float:
    """Sum of normalized metric overshoots; met metrics are dampened."""
    total = 0.0
    for _, des, bud in _terms(values, budget):
        term = (des - bud) / bud
        total += term if term > 0 else budget.alpha_met * term
    return total


def meets_budget(values: MetricValues, budget: Budget) -> bool:
    """True iff every metric is at or below its budget."""
    return all(des <= bud for _, des, bud in _terms(values, budget))


def metric_overshoots(values: MetricValues, budget: Budget) -> dict[str, float]:
    """Normalized (value - budget) / budget per top-level metric; the latency
    entry is the worst workload's overshoot."""
    latency = max(
        (values.latency_s.get(name, 0.0) - bud) / bud
        for name, bud in budget.latency_s.items()
    ) if budget.latency_s else float("-inf")
    return {
        "latency": latency,
        "power": (values.power_w - budget.power_w) / budget.power_w,
        "area": (values.area_mm2 - budget.area_mm2) / budget.area_mm2,
    }


def workload_overshoots(values: MetricValues, budget: Budget) -> dict[str, float]:
    return {
        name: (values.latency_s.get(name, 0.0) - bud) / bud
        for name, bud in sorted(budget.latency_s.items())
    }
