"""Benchmark metrics: per-episode ratios, aggregate reports, Wilson intervals.

All goal and inter-robot distances are Manhattan distances on world coordinates.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Optional


class DomainError(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass
class EpisodeResult:
    task_id: str
    benchmark: str  # "mmnav" | "mrs"
    success: bool
    subtasks_total: int = 0
    subtasks_completed: int = 0
    d0: float = 0.0
    dT: float = 0.0
    static_collisions: int = 0
    dynamic_collisions: int = 0
    red_light_violations: int = 0
    D0: float = 0.0
    DT: float = 0.0
    met: bool = False
    steps: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.subtasks_completed <= max(self.subtasks_total, 0):
            raise DomainError("subtasks_completed out of range")
        for name in ("d0", "dT", "D0", "DT"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "EpisodeResult":
        return cls(**doc)


def subtask_success_rate(completed: int, total: int) -> float:
    """Fraction of subtasks completed in the episode."""
    if total < 1:
        raise DomainError("total subtasks must be >= 1")
    if not 0 <= completed <= total:
        raise DomainError("completed out of [0, total]")
    return completed / total


def distance_progress(d0: float, dT: float) -> float:
    """Relative reduction of goal distance, clamped at zero."""
    if d0 <= 0:
        raise DomainError("d0 must be positive")
    if dT < 0:
        raise DomainError("dT must be >= 0")
    return max((d0 - dT) / d0, 0.0)


def task_progress(D0: float, DT: float) -> float:
    """Relative reduction of inter-robot distance, clamped at zero."""
    if D0 <= 0:
        raise DomainError("D0 must be positive")
    if DT < 0:
        raise DomainError("DT must be >= 0")
    return max((D0 - DT) / D0, 0.0)


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 <= successes <= n:
        raise DomainError("successes out of [0, n]")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must be in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class MetricsReport:
    benchmark: str
    episodes: int
    success_rate: float
    success_ci: tuple[float, float]
    subtask_success_rate: float = 0.0
    distance_progress: float = 0.0
    mean_static_collisions: float = 0.0
    mean_dynamic_collisions: float = 0.0
    mean_red_light_violations: float = 0.0
    collaborative_success_rate: Optional[float] = None
    collaborative_ci: Optional[tuple[float, float]] = None
    task_progress: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_table(self) -> str:
        rows = [
            ("episodes", f"{self.episodes}"),
            ("SR %", f"{100 * self.success_rate:.2f}  [{100 * self.success_ci[0]:.2f}, {100 * self.success_ci[1]:.2f}]"),
        ]
        if self.benchmark == "mmnav":
            rows += [
                ("Subtask SR %", f"{100 * self.subtask_success_rate:.2f}"),
                ("Distance Progress %", f"{100 * self.distance_progress:.2f}"),
                ("Static Coll. (mean)", f"{self.mean_static_collisions:.2f}"),
                ("Dynamic Coll. (mean)", f"{self.mean_dynamic_collisions:.2f}"),
                ("Red Light Viol. (mean)", f"{self.mean_red_light_violations:.2f}"),
            ]
        else:
            rows += [
                ("CSR %", f"{100 * (self.collaborative_success_rate or 0):.2f}"
                          f"  [{100 * self.collaborative_ci[0]:.2f}, {100 * self.collaborative_ci[1]:.2f}]"
                          if self.collaborative_ci else "n/a"),
                ("Task Progress %", f"{100 * (self.task_progress or 0):.2f}"),
            ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
        header = f"== {self.benchmark} report =="
        return "\n".join([header] + lines)


def aggregate_report(results: list[EpisodeResult]) -> MetricsReport:
    """Mean episode metrics with Wilson CIs on the proportion metrics."""
    if not results:
        raise EmptyInput("no episode results to aggregate")
    benchmark = results[0].benchmark
    n = len(results)
    successes = sum(1 for r in results if r.success)
    report = MetricsReport(
        benchmark=benchmark,
        episodes=n,
        success_rate=successes / n,
        success_ci=wilson_interval(successes, n),
    )
    if benchmark == "mmnav":
        report.subtask_success_rate = sum(
            subtask_success_rate(r.subtasks_completed, r.subtasks_total) for r in results
        ) / n
        report.distance_progress = sum(distance_progress(r.d0, r.dT) for r in results) / n
        report.mean_static_collisions = sum(r.static_collisions for r in results) / n
        report.mean_dynamic_collisions = sum(r.dynamic_collisions for r in results) / n
        report.mean_red_light_violations = sum(r.red_light_violations for r in results) / n
    else:
        met = sum(1 for r in results if r.met)
        report.collaborative_success_rate = met / n
        report.collaborative_ci = wilson_interval(met, n)
        report.task_progress = sum(task_progress(r.D0, r.DT) for r in results) / n
    return report
