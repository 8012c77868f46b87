"""Execute a scenario and write its artifacts."""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io, plotting
from .errors import FixedPointDetected, OrbitTooShort
from .operators import Box, check_operator_class
from .orbit import (APResult, CosmicDetection, Orbit, Trichotomy, alternating_projections, classify_trichotomy,
                    detect_cosmic_limit, iterate, monotonicity_certificate)
from .scenario import Scenario, ap_sets, build_operator, build_set

CONJECTURE_NOTE = "observed direction only; convergence to the reference limit is conjectural (no proof known)"
SET_COLORS = ("black", "blue")


@dataclass
class RunResult:
    scenario: Scenario
    summary: io.RunSummary
    orbit: Orbit
    detection: CosmicDetection
    ap: Optional[APResult] = None


def _verdict(orbit: Orbit, tail_fraction: float) -> dict:
    try:
        v = classify_trichotomy(orbit, tail_fraction=tail_fraction)
        return {"case": v.case.value, "v_estimate": v.v_estimate, "diagnostics": v.diagnostics,
                "thresholds": v.thresholds}
    except OrbitTooShort as exc:
        v = -(orbit.xs[-1] - orbit.xs[0]) / orbit.n_steps
        return {"case": Trichotomy.UNDETERMINED.value, "v_estimate": v,
                "diagnostics": {"reason": str(exc)}, "thresholds": {}}


def execute(s: Scenario, seed: Optional[int] = None, timing: bool = False) -> RunResult:
    """Run a scenario in memory.  ``seed`` only drives the operator-class check."""
    tol = s.tolerances
    t0 = time.perf_counter()
    ap = None
    T = build_operator(s.operator, s.dim, tol)
    if s.is_alternating:
        A, B = ap_sets(s.operator, s.dim)
        ap = alternating_projections(A, B, s.x0, s.n_steps, tol["zero_tol"], tol["proj_tol"])
        orbit = ap.orbit
    else:
        orbit = iterate(T, s.x0, s.n_steps, tol["zero_tol"])
    verdict = _verdict(orbit, tol["tail_fraction"])
    det = detect_cosmic_limit(orbit, tol["window"], tol["dir_tol"])
    one_d = None
    if s.dim == 1:
        try:
            cert = monotonicity_certificate(orbit)
            one_d = {"sign": cert.sign, "certificate": cert.certificate}
        except FixedPointDetected as exc:
            one_d = {"sign": None, "certificate": {"fixed_point_detected": str(exc)}}
    ref_dist = None
    if s.reference_limit is not None and det.final_direction is not None:
        ref = np.asarray(s.reference_limit, dtype=float)
        ref_dist = float(np.linalg.norm(det.final_direction - ref / np.linalg.norm(ref)))
    check = None
    if seed is not None:
        box = Box(np.full(s.dim, -10.0), np.full(s.dim, 10.0))
        check = check_operator_class(T, box, 1000, seed).as_dict()
        check["seed"] = seed
    summary = io.RunSummary(
        scenario=s.name,
        dim=s.dim,
        n_steps=s.n_steps,
        verdict=io.jsonable(verdict),
        cosmic_limit=io.jsonable(det.limit),
        final_direction=io.jsonable(det.final_direction),
        direction_spread=io.jsonable(det.spread),
        v_estimate=io.jsonable(verdict["v_estimate"]),
        gap_estimate=io.jsonable(ap.gap_estimate) if ap else None,
        cone_flags=io.jsonable(ap.cone_analysis.digest()) if ap and ap.cone_analysis else None,
        one_d=io.jsonable(one_d),
        reference_limit=s.reference_limit,
        reference_distance=ref_dist,
        conjectural=s.conjectural,
        note=CONJECTURE_NOTE if s.conjectural else None,
        operator_check=io.jsonable(check),
        wall_time=time.perf_counter() - t0 if timing else None,
    )
    return RunResult(s, summary, orbit, det, ap)


def write_artifacts(result: RunResult, out_dir) -> list[Path]:
    s = result.scenario
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if s.outputs.get("csv", True):
        p = out / f"{s.name}.orbit.csv"
        io.write_orbit_csv(result.orbit, p)
        paths.append(p)
    if s.outputs.get("summary", True):
        p = out / f"{s.name}.summary.json"
        io.write_summary(result.summary, p)
        paths.append(p)
    if s.outputs.get("svg") and s.dim == 2:
        p = out / f"{s.name}.svg"
        p.write_text(phase_svg(result), encoding="utf-8")
        paths.append(p)
        p = out / f"{s.name}.trend.svg"
        p.write_text(plotting.emit_trend_svg(s.name, result.orbit.norms, result.orbit.qs, s.reference_limit),
                     encoding="utf-8")
        paths.append(p)
    return paths


def _sets_of(s: Scenario):
    if s.is_alternating:
        A, B = ap_sets(s.operator, s.dim)
        return [(A, SET_COLORS[0]), (B, SET_COLORS[1])]
    specs = []
    op = s.operator
    if op["type"] == "projector":
        specs = [op["set"]]
    elif op["type"] == "composition":
        specs = [o["set"] for o in op["ops"] if o["type"] == "projector"]
    return [(build_set(sp, s.dim), SET_COLORS[k % 2]) for k, sp in enumerate(specs)]


def phase_svg(result: RunResult) -> str:
    a = result.ap.a if result.ap is not None else None
    return plotting.emit_svg(result.scenario.name, result.orbit.xs, a, _sets_of(result.scenario),
                             result.detection.limit)


def run_scenario(s: Scenario, out_dir, steps: Optional[int] = None, seed: Optional[int] = None,
                 timing: bool = False) -> tuple[io.RunSummary, list[Path]]:
    if steps is not None:
        s = s.with_steps(steps)
    result = execute(s, seed, timing)
    return result.summary, write_artifacts(result, out_dir)
