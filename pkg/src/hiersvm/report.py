"""Solver reports and their structured-text serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import EvaluationReport


@dataclass(frozen=True)
class HistoryEntry:
    n: int
    value: float  # epigraph t for the hierarchical solver, objective for the baseline
    hinge_loss: float
    residual: float


@dataclass
class SolverReport:
    """Outcome of one training run, shared by both solvers."""

    solver: str
    iterations: int
    converged: bool
    final_residual: float
    final_value: float
    value_label: str
    evaluation: EvaluationReport
    wall_time_s: float
    history: list[HistoryEntry] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def hinge_loss(self) -> float:
        return self.evaluation.hinge_loss

    @property
    def risk_count(self) -> int:
        return self.evaluation.risk_count

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "solver": self.solver,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_residual": self.final_residual,
            "value_label": self.value_label,
            "final_value": self.final_value,
            "wall_time_s": self.wall_time_s,
            "evaluation": self.evaluation.to_dict(),
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_history_csv(self, path: str | Path) -> None:
        """Delimited iteration history: n, <value_label>, hinge_loss, residual."""
        lines = [f"n,{self.value_label},hinge_loss,residual"]
        for e in self.history:
            lines.append(f"{e.n},{e.value!r},{e.hinge_loss!r},{e.residual!r}")
        Path(path).write_text("\n".join(lines) + "\n")
