"""Metrics and experiment drivers: reports, threshold sweeps, power maps, timing."""

from __future__ import annotations

import os
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import Scenario
from .field import pattern_power_grid, to_db
from .precoder import (
    Method,
    PrecoderError,
    PrecoderResult,
    ThresholdSpec,
    dosp,
    grid_max_power,
    mrt,
    ridge_baseline,
    zf,
)
from .geometry import GeometryError
from .socp import SocpError, socp_precoder
from .subspace import DegenerateProjectionError, compute_basis


@dataclass
class EvaluationReport:
    method: Method
    p_us_rel_mrt: float
    grid_max_power_db: float
    fine_grid_max_power_db: float
    threshold_db: float
    tolerance_alpha_db: float
    precompute_seconds: float
    realtime_seconds: float
    k_used: int | None = None
    grid_max_power: float = float("nan")
    fine_grid_max_power: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def meets_threshold(self) -> bool:
        return self.grid_max_power <= ThresholdSpec(self.threshold_db).bound()

    @property
    def meets_alpha(self) -> bool:
        return self.fine_grid_max_power <= 10.0 * ThresholdSpec(self.threshold_db).t_linear

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = Method(self.method).value
        d["p_us_db"] = float(to_db(self.p_us_rel_mrt))
        return d


def run_method(scenario: Scenario, method, threshold: ThresholdSpec | None = None,
               basis=None, socp_opts: dict | None = None) -> tuple[PrecoderResult, float, float]:
    """Run one precoder on ``scenario``.

    Returns ``(result, precompute_seconds, realtime_seconds)``.  The
    precompute part is the SVD for the subspace methods (shared and cached
    on the scenario) and the eigendecomposition for the ridge baseline.
    ``socp_opts={"warm_start": "dosp"}`` starts the SOCP solver from the
    DoSP weights; that DoSP run counts toward the SOCP real time.
    """
    method = Method(method)
    threshold = threshold or scenario.threshold
    A, a_us = scenario.A, scenario.a_us
    precompute = 0.0
    if method in (Method.DOSP, Method.ZF):
        if basis is None:
            basis = scenario.basis
            precompute = scenario.precompute_seconds
    t0 = time.perf_counter()
    if method is Method.MRT:
        res = mrt(a_us)
    elif method is Method.ZF:
        res = zf(A, a_us, basis=basis)
    elif method is Method.DOSP:
        res = dosp(basis, threshold, A=A)
    elif method is Method.RIDGE:
        res = ridge_baseline(A, a_us, threshold)
    else:
        opts = dict(socp_opts or {})
        if isinstance(opts.get("warm_start"), str):
            if opts["warm_start"] != "dosp":
                raise ValueError(f"unknown warm start {opts['warm_start']!r}")
            opts["warm_start"] = dosp(scenario.basis, threshold).weights
        res = socp_precoder(A, a_us, threshold, **opts)
    realtime = time.perf_counter() - t0
    if method is Method.RIDGE:
        precompute = res.diagnostics["precompute_seconds"]
        realtime -= precompute
    return res, precompute, realtime


def fine_grid_max(w, scenario: Scenario) -> float:
    fg = scenario.fine_grid
    return float(np.max(pattern_power_grid(w, scenario.geometry, fg.xs, fg.ys)))


def evaluate(precoder: PrecoderResult, scenario: Scenario, threshold: ThresholdSpec | None = None,
             precompute_seconds: float = 0.0, realtime_seconds: float = 0.0,
             fine: bool = True) -> EvaluationReport:
    """Score a precoder: user power, coarse and fine LER maxima in dB.

    ``fine=False`` skips the fine-grid pass (reported as NaN), which is the
    expensive part at full scale.
    """
    threshold = threshold or scenario.threshold
    w = np.asarray(precoder.weights, dtype=np.complex128)
    p_us = float(abs(np.vdot(w, scenario.a_us)) ** 2)
    g = grid_max_power(w, scenario.A)
    f = fine_grid_max(w, scenario) if fine else float("nan")
    return EvaluationReport(
        method=Method(precoder.method),
        p_us_rel_mrt=p_us,
        grid_max_power_db=float(to_db(g)),
        fine_grid_max_power_db=float(to_db(f)) if fine else float("nan"),
        threshold_db=threshold.t_db_rel_mrt,
        tolerance_alpha_db=threshold.t_db_rel_mrt + 10.0,
        precompute_seconds=precompute_seconds,
        realtime_seconds=realtime_seconds,
        k_used=precoder.k_used,
        grid_max_power=g,
        fine_grid_max_power=f,
        diagnostics=dict(precoder.diagnostics),
    )


_CELL_ERRORS = (PrecoderError, SocpError, DegenerateProjectionError, GeometryError, ValueError,
                np.linalg.LinAlgError)


@dataclass
class SweepRow:
    t_db: float
    method: str
    fine_max_db: float
    grid_max_db: float = float("nan")
    p_us_db: float = float("nan")
    status: str = "ok"
    note: str = ""

    def values(self) -> tuple:
        return (self.t_db, self.method, self.fine_max_db, self.grid_max_db, self.p_us_db,
                self.status, self.note)


SWEEP_COLUMNS = ["t_db", "method", "fine_max_db", "grid_max_db", "p_us_db", "status", "note"]


def _sweep_cell(scenario: Scenario, method: Method, t_db: float, socp_opts) -> SweepRow:
    th = ThresholdSpec(t_db)
    try:
        res, _, _ = run_method(scenario, method, th, socp_opts=socp_opts)
        rep = evaluate(res, scenario, th)
    except _CELL_ERRORS as exc:
        return SweepRow(t_db, method.value, float("nan"), status="error",
                        note=f"{type(exc).__name__}: {exc}".replace(",", ";"))
    status, note = "ok", ""
    if method is Method.SOCP:
        status = "certified" if rep.diagnostics.get("certified") else "uncertified"
        note = str(rep.diagnostics.get("status", ""))
    return SweepRow(t_db, method.value, rep.fine_grid_max_power_db, rep.grid_max_power_db,
                    float(to_db(rep.p_us_rel_mrt)), status, note)


def threshold_sweep(scenario: Scenario, methods, t_list_db, socp_opts: dict | None = None,
                    on_row=None) -> list[SweepRow]:
    """Fine-grid LER maximum for every (threshold, method) pair.

    For each threshold two reference rows (``method`` = ``t`` and
    ``alpha``) carry the threshold and the 10 t tolerance.  A failing cell
    is recorded with ``status="error"`` and the sweep moves on.  ``on_row``
    is called with each row as soon as it is available.
    """
    t_list_db = [float(t) for t in t_list_db]
    if not t_list_db:
        raise ValueError("t_list must not be empty")
    methods = [Method(m) for m in methods]
    rows = []

    def emit(row):
        rows.append(row)
        if on_row is not None:
            on_row(row)

    for t_db in t_list_db:
        emit(SweepRow(t_db, "t", t_db, status="reference"))
        emit(SweepRow(t_db, "alpha", t_db + 10.0, status="reference"))
        for m in methods:
            emit(_sweep_cell(scenario, m, t_db, socp_opts))
    return rows


def achievable_power_map(scenario: Scenario, user_points, threshold: ThresholdSpec | None = None,
                         on_cell=None) -> np.ndarray:
    """DoSP user power (dB rel. MRT) for each candidate user position.

    The LER basis is computed once; each candidate only recomputes the
    projection coefficients and reruns the k-search.  Failed cells are NaN.
    """
    threshold = threshold or scenario.threshold
    pts = np.atleast_2d(np.asarray(user_points, dtype=float))
    base = scenario.basis
    out = np.full(pts.shape[0], np.nan)
    for i, r in enumerate(pts):
        try:
            b = base.with_user(scenario.user_vector(r))
            res = dosp(b, threshold)
            out[i] = float(to_db(res.diagnostics["user_power"]))
        except _CELL_ERRORS:
            pass
        if on_cell is not None:
            on_cell(i, r, out[i])
    return out


def hardware_info() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
    }


def timing_benchmark(scenario: Scenario, methods, repetitions: int = 3,
                     socp_opts: dict | None = None) -> list[dict]:
    """Median precompute and real-time seconds per method.

    The SVD is recomputed in every repetition so its time is measured too;
    the real-time part excludes it.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for m in (Method(x) for x in methods):
        pre, real = [], []
        for _ in range(repetitions):
            basis = None
            p = 0.0
            if m in (Method.DOSP, Method.ZF):
                t0 = time.perf_counter()
                basis = compute_basis(scenario.A, scenario.a_us, scenario.config.sigma_th_rel)
                p = time.perf_counter() - t0
            try:
                _, p_run, r = run_method(scenario, m, basis=basis, socp_opts=socp_opts)
            except _CELL_ERRORS as exc:
                rows.append({"method": m.value, "error": f"{type(exc).__name__}: {exc}"})
                break
            pre.append(p + p_run)
            real.append(r)
        else:
            rows.append({
                "method": m.value,
                "precompute_seconds": statistics.median(pre),
                "realtime_seconds": statistics.median(real),
                "repetitions": repetitions,
            })
    return rows
