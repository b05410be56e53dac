"""Check lists and deterministic JSON output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .core import format_rational

__all__ = ["Check", "Report", "dumps", "to_jsonable", "matrix_to_json", "matrix_from_json"]


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass" | "fail" | "warn"
    detail: str = ""

    def __post_init__(self):
        if self.status not in ("pass", "fail", "warn"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "fail" and not self.detail:
            raise ValueError(f"failed check {self.name!r} needs a detail")

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class Report:
    command: str = ""
    checks: list[Check] = field(default_factory=list)
    artifacts: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, ok: bool, detail: str = "", soft: bool = False) -> None:
        """Record a check; ``soft`` failures are downgraded to warnings."""
        status = "pass" if ok else ("warn" if soft else "fail")
        self.checks.append(Check(name, status, detail if not ok else ""))

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "artifacts": to_jsonable(self.artifacts),
        }


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj) if obj.ndim == 2 else to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def matrix_to_json(x: np.ndarray) -> list:
    """Row-major list of ``[re, im]`` pairs."""
    x = np.asarray(x, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in x]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
