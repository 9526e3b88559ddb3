"""JSON diagnostic reports and the recommendation rules behind them."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .data import atomic_write_text
from .detect import DataDiagnosis

SCHEMA_VERSION = "1.0"
LOW_CARDINALITY = 10

CALIBRATION_ALTERNATIVES = (
    "binary outcomes: use a PAV-adjusted calibration plot with consistency bands (ppcheck calibration --mode binary)",
    "categorical outcomes: use one-versus-others PAV calibration plots (--mode ovo)",
    "ordinal outcomes: use cumulative PAV calibration plots (--mode ordinal)",
)
COUNT_ALTERNATIVE = "count data: use a discrete rootogram (ppcheck rootogram)"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def jsonable(obj):
    """Recursively convert numpy values and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return v
    return obj


def is_low_cardinality(diag: DataDiagnosis) -> bool:
    return diag.n_unique <= LOW_CARDINALITY and diag.n_unique < diag.n


def recommendations(diag: DataDiagnosis | None, viz: str | None, verdict: dict | None, values=None) -> tuple[list[str], list[str]]:
    """(recommendations, warnings) for a density-style request.

    A KDE or bar check on binary or low-cardinality data triggers a warning
    that names the calibration alternatives (and rootograms for counts).
    """
    recs: list[str] = []
    warns: list[str] = []
    if diag is None:
        return recs, warns
    if viz in ("kde", "bar") and is_low_cardinality(diag):
        kind = "binary" if diag.n_unique <= 2 else "low-cardinality"
        warns.append(
            f"{kind} data ({diag.n_unique} distinct values): a {'KDE' if viz == 'kde' else 'bar'} "
            "check is not informative here"
        )
        recs.extend(CALIBRATION_ALTERNATIVES)
        if values is not None and np.all(values >= 0) and np.all(values == np.round(values)):
            recs.append(COUNT_ALTERNATIVE)
    elif diag.discrete_flag and viz != "qdot":
        masses = ", ".join(f"{v:g}" for v in diag.point_mass_values[:5])
        recs.append(f"point masses at {masses}: a quantile dot plot (--viz qdot) shows them without smearing")
    if verdict is not None and not verdict.get("pass", True) and viz == "kde":
        if diag.left_bound is not None or diag.right_bound is not None:
            recs.append("data look bounded: refit with --bounds auto (boundary reflection) or use --viz qdot")
    return recs, warns


@dataclass
class DiagnosticReport:
    command: str
    seed: int | None
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    diagnosis: dict | None = None
    recommendation: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    exit_code: int = 0

    def add_input(self, name: str, path) -> None:
        self.inputs[name] = {"path": str(path), "sha256": file_digest(Path(path))}

    def to_dict(self) -> dict:
        return jsonable(
            {
                "schema_version": SCHEMA_VERSION,
                "tool_version": __version__,
                "command": self.command,
                "seed": self.seed,
                "inputs": self.inputs,
                "config": self.config,
                "checks": self.checks,
                "diagnosis": self.diagnosis,
                "recommendation": self.recommendation,
                "warnings": self.warnings,
                "exit_code": self.exit_code,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, path) -> None:
        atomic_write_text(path, self.to_json())
