"""Verdict reports: deterministic JSON with timing isolated in one field."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field as dc_field
from typing import Any

FORMAT_VERSION = 1
CSV_HEADER = ("claim", "params", "measured", "bound", "holds", "seed", "runtime_ms")


@dataclass
class VerdictReport:
    claim: str
    params: dict
    measured: Any
    bound: Any
    holds: bool | None  # None: observational, nothing asserted
    field: int | None = None
    seed: Any = None
    witness: dict = dc_field(default_factory=dict)
    details: dict = dc_field(default_factory=dict)
    runtime_ms: float = 0.0

    @property
    def failed(self) -> bool:
        return self.holds is False

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "format": FORMAT_VERSION,
            "claim": self.claim,
            "params": self.params,
            "field": self.field,
            "seed": self.seed,
            "measured": self.measured,
            "bound": self.bound,
            "holds": self.holds,
            "witness": self.witness,
            "details": self.details,
        }
        if timing:
            out["timing"] = {"runtime_ms": round(self.runtime_ms, 3)}
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2) + "\n"

    def csv_row(self) -> list:
        return [self.claim, json.dumps(self.params, sort_keys=True, separators=(",", ":")),
                _cell(self.measured), _cell(self.bound),
                "" if self.holds is None else str(self.holds).lower(),
                "" if self.seed is None else self.seed, f"{self.runtime_ms:.3f}"]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def strip_timing(obj: dict) -> dict:
    return {k: v for k, v in obj.items() if k != "timing"}


def stopwatch():
    t0 = time.perf_counter()
    return lambda: (time.perf_counter() - t0) * 1000.0
