"""Check records and report bundles produced by the command-line harness.

A bundle collects the per-check verdicts of one run together with the
configuration that produced them. Every PASS/FAIL check carries a
machine-readable ``claim`` slug naming the mathematical property it tests,
so suites can be audited without parsing human-readable messages.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

__all__ = ["CheckRecord", "ReportBundle", "config_hash"]

PASS = "PASS"
FAIL = "FAIL"
INFO = "INFO"

_STATUS_ORDER = {PASS: 0, INFO: 1, FAIL: 2}


def _jsonable(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def config_hash(config: dict) -> str:
    """Stable short hash of a configuration mapping."""
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


@dataclass
class CheckRecord:
    """One verdict: a named check, its status, and its numeric margins."""

    name: str
    status: str
    claim: str
    margins: dict = field(default_factory=dict)
    fixtures: dict = field(default_factory=dict)
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "claim": self.claim,
            "margins": _jsonable(self.margins),
            "fixtures": _jsonable(self.fixtures),
            "message": self.message,
        }


@dataclass
class ReportBundle:
    """All checks and artifacts of one harness invocation."""

    command: str
    config: dict
    tolerances: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timestamp: float = field(default_factory=time.time)

    @property
    def hash(self) -> str:
        return config_hash({"command": self.command, **self.config})

    def add(self, record: CheckRecord) -> CheckRecord:
        if any(c.name == record.name for c in self.checks):
            raise ValueError(f"duplicate check name {record.name!r}")
        self.checks.append(record)
        return record

    def add_artifact(self, path) -> None:
        self.artifacts.append(str(path))

    def worst_status(self) -> str:
        worst = PASS
        for c in self.checks:
            if _STATUS_ORDER[c.status] > _STATUS_ORDER[worst]:
                worst = c.status
        return worst

    def exit_code(self) -> int:
        return 1 if self.worst_status() == FAIL else 0

    def as_dict(self) -> dict:
        return {
            "schema": "report-v1",
            "command": self.command,
            "config": _jsonable(self.config),
            "config_hash": self.hash,
            "tolerances": _jsonable(self.tolerances),
            "timestamp": self.timestamp,
            "checks": [c.as_dict() for c in self.checks],
            "artifacts": list(self.artifacts),
            "worst_status": self.worst_status(),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=1)
            fh.write("\n")

    def summary_lines(self):
        for c in self.checks:
            detail = c.message
            if not detail and c.margins:
                detail = ", ".join(f"{k}={_fmt(v)}" for k, v in c.margins.items())
            yield f"[{c.status}] {c.name}: {detail}" if detail else f"[{c.status}] {c.name}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
