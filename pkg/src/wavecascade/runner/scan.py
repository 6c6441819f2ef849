"""Scan execution: fields -> wave packet -> target density matrix -> coincidence map."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..atoms import hydrogen_state
from ..cascade import CascadeChannel, coincidence_map
from ..collision import collision_kernel
from ..errors import ConfigError, EmptyResultError
from ..ionization import apply_pump_probe_delay, combine_pathways, equalize_pathway_weights
from .config import Scenario, ScanSpec

COLUMNS = ("scan_var", "theta_k1_rad", "probability")


@contextmanager
def stage(name: str):
    """Prefix errors raised inside a pipeline stage with ``[name]``, keeping their type."""
    try:
        yield
    except ConfigError:
        raise
    except Exception as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
            head = str(exc.args[0]) if exc.args else type(exc).__name__
            exc.args = (f"[{name}] {head}",) + tuple(exc.args[1:])
        raise


@dataclass
class ScanResult:
    scan: ScanSpec
    rows: np.ndarray  # (n_rows, 3) in grid order
    normalization: float
    metadata: dict = field(default_factory=dict)

    @property
    def probabilities(self) -> np.ndarray:
        return self.rows[:, 2]

    def grid(self) -> np.ndarray:
        """Probabilities reshaped to (scan points, theta points)."""
        n = self.scan.points
        return self.rows[:, 2].reshape(n, -1)

    @classmethod
    def empty(cls, scan: ScanSpec, metadata: dict | None = None) -> "ScanResult":
        return cls(scan, np.zeros((0, 3)), 0.0, metadata or {})


class ScanPipeline:
    """Immutable per-scenario state shared by all scan points."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        with stage("field"):
            self.field = scenario.field_spec()
        with stage("ionization"):
            self.atom = scenario.atom()
            self.grid = scenario.energy_grid()
            self.lmax = scenario.get("grid.lmax")
            base = scenario.pathways(self.field)
            if scenario.get("pathways.equalize"):
                eq = equalize_pathway_weights(base, self.grid, self.atom, self.lmax)
                self.weights = [p.weight for p in eq]
            else:
                self.weights = [p.weight for p in base]
        with stage("collision"):
            self.target = scenario.target()
            self.kernel = collision_kernel(self.grid, self.target, scenario.geometry(), self.lmax,
                                           scenario.get("collision.n_theta"), scenario.get("collision.n_phi"))
        with stage("cascade"):
            self.cascade = CascadeChannel(upper=hydrogen_state(self.target.n, self.target.l))
            self.detector1, self.detector2 = scenario.detectors()
            self.mode2 = self.detector2.mode()
            self.cascade.check_channels(self.detector1.mode(0.0), self.mode2)

    def pathways(self, variable: str, value: float):
        fs = self.field
        if variable == "relative_phase":
            comp = fs[self.scenario.get("control.component")]
            fs = fs.replace_component(comp.with_phase(comp.phase + value))
        paths = [p.with_weight(w) for p, w in zip(self.scenario.pathways(fs), self.weights)]
        if variable == "pump_probe_delay":
            paths = apply_pump_probe_delay(paths, value)
        return paths

    def density_matrix(self, variable: str, value: float) -> np.ndarray:
        """Unnormalized density matrix: keeps the yield, which carries the control signal."""
        with stage("ionization"):
            packet = combine_pathways(self.pathways(variable, value), self.grid, self.atom, self.lmax)
        with stage("collision"):
            return self.kernel.raw_density_matrix(packet)

    def coincidences(self, rho: np.ndarray, thetas) -> np.ndarray:
        with stage("cascade"):
            modes = [self.detector1.mode(float(t)) for t in thetas]
            return coincidence_map(rho, modes, self.mode2, self.cascade)


def _timestamp(clock=None) -> str:
    import os
    import time
    from datetime import datetime, timezone

    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else (clock or time.time)()
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_scan(scenario: Scenario, scan: ScanSpec | None = None, threads: int = 1) -> ScanResult:
    """Evaluate the scan grid; rows are ordered scan value major, detector-1 angle minor."""
    scan = scan or scenario.scan()
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if scan.variable == "relative_phase" and not scenario.get("control.component"):
        raise ConfigError("relative-phase scan needs control.component")
    pipe = ScanPipeline(scenario)
    values = scan.values()
    thetas = scan.thetas()
    n_theta = 1 if thetas is None else len(thetas)
    probs = np.empty((len(values), n_theta))

    def point(i: int):
        v = float(values[i])
        rho = pipe.density_matrix(scan.variable, v)
        probs[i] = pipe.coincidences(rho, [v] if thetas is None else thetas)

    if threads == 1:
        for i in range(len(values)):
            point(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fut in [pool.submit(point, i) for i in range(len(values))]:
                fut.result()

    norm = float(probs.max())
    if not norm > 0 or not math.isfinite(norm):
        raise EmptyResultError("[cascade] coincidence probability vanishes on the whole scan grid")
    scan_col = np.repeat(values, n_theta)
    theta_col = values.copy() if thetas is None else np.tile(thetas, len(values))
    rows = np.column_stack([scan_col, theta_col, (probs / norm).ravel()])
    meta = {
        "version": __version__,
        "timestamp": _timestamp(),
        "scenario": scenario.name,
        "config": {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in scenario.values.items()},
        "scan": {
            "variable": scan.variable,
            "lo": scan.lo,
            "hi": scan.hi,
            "points": scan.points,
            "endpoint": scan.endpoint,
            "theta_k1": None if thetas is None else [float(t) for t in thetas],
        },
        "normalization": norm,
        "normalization_note": "probability column divided by the scan maximum",
        "columns": list(COLUMNS),
    }
    return ScanResult(scan, rows, norm, meta)


def scenario_with_scan(scenario: Scenario, variable: str | None = None, lo: float | None = None,
                       hi: float | None = None, points: int | None = None) -> Scenario:
    upd = {}
    if variable is not None:
        upd["scan.variable"] = variable
    if lo is not None:
        upd["scan.lo"] = lo
    if hi is not None:
        upd["scan.hi"] = hi
    if points is not None:
        upd["scan.points"] = points
    vals = dict(scenario.values)
    vals.update(upd)
    from .config import validate

    return validate(vals, {})


__all__ = ["COLUMNS", "ScanPipeline", "ScanResult", "run_scan", "scenario_with_scan", "stage"]
