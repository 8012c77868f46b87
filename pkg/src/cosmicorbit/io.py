"""Orbit CSV and run-summary JSON formats."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError
from .orbit import Orbit, OrbitRecord

SUMMARY_SCHEMA = 1


def csv_header(dim: int) -> list[str]:
    cols = ["n"]
    cols += [f"x_{i}" for i in range(1, dim + 1)]
    cols += ["norm"]
    for stem in ("q", "x_over_n", "step"):
        cols += [f"{stem}_{i}" for i in range(1, dim + 1)]
    return cols


def write_orbit_csv(orbit: Orbit, path) -> None:
    """One row per record; undefined cells (``q`` at tiny norms, ``n = 0`` quantities) stay empty."""
    # undefined cells are exactly the NaN entries of the derived arrays
    table = np.column_stack([orbit.xs, orbit.norms, orbit.qs, orbit.x_over_n, orbit.steps]).tolist()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(csv_header(orbit.dim)) + "\n")
        fh.writelines(
            f"{n}," + ",".join("" if v != v else "%.17g" % v for v in row) + "\n"
            for n, row in enumerate(table)
        )


def read_orbit_csv(path) -> list[OrbitRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty orbit file")
    header = rows[0]
    d = (len(header) - 2) // 4
    if header != csv_header(d):
        raise ParseError(f"{path}: unexpected header {header}")

    def vec(cells):
        if all(c == "" for c in cells):
            return None
        return np.array([float(c) for c in cells])

    out = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ParseError(f"{path}: line {lineno} has {len(r)} cells, expected {len(header)}")
        out.append(OrbitRecord(
            n=int(r[0]),
            x=vec(r[1:1 + d]),
            norm=float(r[1 + d]),
            q=vec(r[2 + d:2 + 2 * d]),
            x_over_n=vec(r[2 + 2 * d:2 + 3 * d]),
            step=vec(r[2 + 3 * d:2 + 4 * d]),
        ))
    return out


def jsonable(obj):
    """Plain-JSON copy: arrays to lists, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


@dataclass
class RunSummary:
    scenario: str
    dim: int
    n_steps: int
    verdict: dict
    cosmic_limit: Optional[list]
    final_direction: Optional[list]
    direction_spread: Optional[float]
    v_estimate: list
    gap_estimate: Optional[list] = None
    cone_flags: Optional[dict] = None
    one_d: Optional[dict] = None
    reference_limit: Optional[list] = None
    reference_distance: Optional[float] = None
    conjectural: bool = False
    note: Optional[str] = None
    operator_check: Optional[dict] = None
    wall_time: Optional[float] = None
    schema: int = SUMMARY_SCHEMA

    def to_dict(self) -> dict:
        return jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown summary fields: {sorted(unknown)}")
        if data.get("schema") != SUMMARY_SCHEMA:
            raise ParseError(f"unsupported summary schema {data.get('schema')!r}")
        missing = {"scenario", "dim", "n_steps", "verdict", "cosmic_limit", "final_direction",
                   "direction_spread", "v_estimate"} - set(data)
        if missing:
            raise ParseError(f"missing summary fields: {sorted(missing)}")
        vkeys = set(data["verdict"])
        if vkeys != {"case", "v_estimate", "diagnostics", "thresholds"}:
            raise ParseError(f"verdict fields {sorted(vkeys)} do not match schema {SUMMARY_SCHEMA}")
        return cls(**data)


def write_summary(summary: RunSummary, path) -> None:
    Path(path).write_text(summary.to_json(), encoding="utf-8")


def read_summary(path) -> RunSummary:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return RunSummary.from_dict(data)
