"""Machine-readable outcomes of verification campaigns."""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

PASS, FAIL, PROVEN, UNKNOWN_ESCALATED = "PASS", "FAIL", "PROVEN", "UNKNOWN-ESCALATED"


def _jsonify_scalar(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


@dataclass
class Witness:
    point: tuple
    value: object
    detail: str = ""

    def to_json(self):
        return {
            "point": [_jsonify_scalar(complex(p)) for p in self.point],
            "value": _jsonify_scalar(self.value),
            "detail": self.detail,
        }


@dataclass
class CheckRecord:
    name: str
    status: str
    max_residual: float | None = None
    samples_used: int = 0
    witnesses: list = field(default_factory=list)
    note: str = ""
    fatal: bool = True

    def __post_init__(self):
        if self.status == FAIL and not self.witnesses:
            raise ValueError("FAIL records must carry at least one witness")
        self.witnesses = self.witnesses[:3]

    @property
    def ok(self):
        return self.status in (PASS, PROVEN, UNKNOWN_ESCALATED) or not self.fatal

    def to_json(self):
        return {
            "name": self.name,
            "status": self.status,
            "max_residual": self.max_residual,
            "samples_used": self.samples_used,
            "witnesses": [w.to_json() for w in self.witnesses],
            "note": self.note,
            "fatal": self.fatal,
        }


@dataclass
class Report:
    campaign_id: str
    target: str
    records: list = field(default_factory=list)
    seed: int = 0
    wall_time_s: float = 0.0
    version: str = "0"
    metadata: dict = field(default_factory=dict)

    def add(self, record: CheckRecord):
        self.records.append(record)
        return record

    def extend(self, other: "Report"):
        self.records.extend(other.records)
        self.metadata.update(other.metadata)

    @property
    def passed(self):
        return all(r.ok for r in self.records)

    @property
    def max_residual(self):
        vals = [r.max_residual for r in self.records if r.max_residual is not None]
        return max(vals) if vals else None

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "campaign_id": self.campaign_id,
            "target": self.target,
            "seed": self.seed,
            "wall_time_s": self.wall_time_s,
            "toolkit_version": self.version,
            "passed": self.passed,
            "metadata": self.metadata,
            "checks": [r.to_json() for r in self.records],
        }

    def write(self, path):
        """Atomic JSON write (temp file + rename), deterministic key order."""
        payload = json.dumps(self.to_json(), indent=2, sort_keys=True)
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write(payload + "\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
