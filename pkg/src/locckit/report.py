"""Machine- and human-readable command reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

VERDICT_PASS = "PASS"
VERDICT_FAIL = "FAIL"
VERDICT_CONSISTENT = "CONSISTENT_DISTINGUISHES"
VERDICT_CONTRADICTION = "CONTRADICTION"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"
VERDICT_NOT_APPLICABLE = "NOT_APPLICABLE"
VERDICT_CONTRADICTION_HYPOTHESIS = "CONTRADICTION_HYPOTHESIS"

VERDICTS = (
    VERDICT_PASS, VERDICT_FAIL, VERDICT_CONSISTENT, VERDICT_CONTRADICTION,
    VERDICT_INCONCLUSIVE, VERDICT_NOT_APPLICABLE,
    VERDICT_CONTRADICTION_HYPOTHESIS,
)


@dataclass
class Report:
    command: str
    scenario_id: str
    verdict: str
    tolerances: dict = field(default_factory=dict)
    per_label: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "scenario_id": self.scenario_id,
            "verdict": self.verdict,
            "tolerances": dict(self.tolerances),
            "per_label": dict(self.per_label),
            "details": self.details,
            "wall_time_s": self.wall_time_s,
        }


def render_machine(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=1)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def render_text(report: Report) -> str:
    lines = [
        f"command:  {report.command}",
        f"scenario: {report.scenario_id}",
        f"verdict:  {report.verdict}",
    ]
    for name, tol in sorted(report.tolerances.items()):
        lines.append(f"tolerance[{name}] = {_fmt(tol)}")
    if report.per_label:
        lines.append("per-label deviations:")
        for label, deviation in report.per_label.items():
            lines.append(f"  {label}: {_fmt(deviation)}")
    for key, value in report.details.items():
        if isinstance(value, list):
            lines.append(f"{key}:")
            for item in value:
                lines.append(f"  - {item}")
        else:
            lines.append(f"{key}: {_fmt(value)}")
    lines.append(f"wall time: {report.wall_time_s:.3f} s")
    return "\n".join(lines)


def render(report: Report, style: str) -> str:
    if style == "machine":
        return render_machine(report)
    return render_text(report)
