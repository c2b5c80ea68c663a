"""Delay-bound discovery: bisection on the feasibility oracle.

Bounds are bracketed by geometric probing around a hint, then refined by
bisection.  Every reported bound is backed by a logged feasible probe and a
logged infeasible probe within the bisection tolerance.  Solver runs that
end numerically inconclusive are treated as infeasible (the conservative
choice for a stability claim) and flagged in the report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .lmi import (
    DelaySystem,
    HierarchyParams,
    assemble_delay_range_lmis,
    assemble_stability_lmis,
    nodv,
)
from .sdp import (
    FEASIBLE,
    INCONCLUSIVE,
    SolverOptions,
    decide_feasibility,
    verify_certificate,
)

__all__ = [
    "ProbeRecord",
    "DelayBoundsReport",
    "SweepResult",
    "NoFeasiblePointError",
    "BracketError",
    "max_delay",
    "min_delay",
    "stability_interval",
    "hierarchy_sweep",
    "DEFAULT_BRACKET",
    "DEFAULT_TOL",
]

DEFAULT_BRACKET = (1e-3, 10.0)
DEFAULT_TOL = 1e-5
_MAX_PROBE_DOUBLINGS = 30


class NoFeasiblePointError(RuntimeError):
    """Geometric probing found no feasible delay (instability or solver trouble)."""


class BracketError(RuntimeError):
    """No sign change found in the probing direction (bound may not exist)."""


@dataclass
class ProbeRecord:
    tau: float
    status: str
    margin: float
    verified: bool | None = None


@dataclass
class DelayBoundsReport:
    """One bound computation: the result plus its complete probe log."""

    system: str
    big_m: int
    m: int
    direction: str
    tau_lower: float | None = None
    tau_upper: float | None = None
    nodv: int = 0
    probes: list[ProbeRecord] = field(default_factory=list)
    wall_time_s: float = 0.0
    inconclusive_probes: int = 0
    range_certified: bool | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema_version"] = 1
        return out


@dataclass
class SweepResult:
    """Rectangular (M, m) grid of bound reports plus monotonicity audit."""

    cells: dict[tuple[int, int], DelayBoundsReport]
    violations: list[dict]
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "cells": [
                {"M": big_m, "m": m, **rep.to_dict()}
                for (big_m, m), rep in sorted(self.cells.items())
            ],
            "violations": self.violations,
            "errors": [
                {"M": big_m, "m": m, "error": msg}
                for (big_m, m), msg in sorted(self.errors.items())
            ],
        }


class _Prober:
    """Feasibility oracle with memoized, logged probes."""

    def __init__(
        self,
        sys: DelaySystem,
        params: HierarchyParams,
        options: SolverOptions,
        report: DelayBoundsReport,
        verify: bool = True,
    ):
        self.sys = sys
        self.params = params
        self.options = options
        self.report = report
        self.verify = verify
        self.cache: dict[float, bool] = {}

    def feasible(self, tau: float) -> bool:
        if tau in self.cache:
            return self.cache[tau]
        problem = assemble_stability_lmis(self.sys, self.params, tau)
        result = decide_feasibility(problem, self.options)
        verified = None
        if result.feasible and self.verify:
            verified = verify_certificate(problem, result)
        ok = result.status == FEASIBLE and verified is not False
        if result.status == INCONCLUSIVE:
            self.report.inconclusive_probes += 1
        self.report.probes.append(
            ProbeRecord(tau, result.status, result.margin, verified)
        )
        self.cache[tau] = ok
        return ok


def _find_feasible(prober: _Prober, hint: float) -> float:
    """Probe hint * 2**(+-k) outward until a feasible delay appears."""
    if prober.feasible(hint):
        return hint
    for k in range(1, _MAX_PROBE_DOUBLINGS + 1):
        for tau in (hint / 2.0**k, hint * 2.0**k):
            if prober.feasible(tau):
                return tau
    raise NoFeasiblePointError(
        f"no feasible delay found near hint {hint} "
        f"within 2**{_MAX_PROBE_DOUBLINGS} in either direction"
    )


def _bisect(prober: _Prober, tau_feas: float, tau_infeas: float, tol: float) -> tuple[float, float]:
    """Shrink a (feasible, infeasible) bracket below tol; returns both ends."""
    while abs(tau_infeas - tau_feas) > tol:
        mid = 0.5 * (tau_feas + tau_infeas)
        if mid == tau_feas or mid == tau_infeas:
            break  # float resolution reached
        if prober.feasible(mid):
            tau_feas = mid
        else:
            tau_infeas = mid
    return tau_feas, tau_infeas


def max_delay(
    sys: DelaySystem,
    params: HierarchyParams,
    bracket_hint: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_TOL,
    options: SolverOptions = SolverOptions(),
    verify: bool = True,
) -> tuple[float, DelayBoundsReport]:
    """Largest certified-stable delay: feasible at the bound, infeasible at
    bound + tol."""
    t0 = time.perf_counter()
    report = DelayBoundsReport(
        sys.name, params.big_m, params.m, "upper", nodv=nodv(params, sys.n_x)
    )
    prober = _Prober(sys, params, options, report, verify)
    hint = bracket_hint[1]
    tau_feas = _find_feasible(prober, hint)
    tau_infeas = None
    probe = tau_feas
    for _ in range(_MAX_PROBE_DOUBLINGS):
        probe *= 2.0
        if not prober.feasible(probe):
            tau_infeas = probe
            break
        tau_feas = probe
    if tau_infeas is None:
        raise BracketError(
            f"feasible up to tau={tau_feas:g}; no upper crossing found "
            "(delay-independent stability in the probed range)"
        )
    tau_feas, _ = _bisect(prober, tau_feas, tau_infeas, tol)
    report.tau_upper = tau_feas
    report.wall_time_s = time.perf_counter() - t0
    return tau_feas, report


def min_delay(
    sys: DelaySystem,
    params: HierarchyParams,
    bracket_hint: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_TOL,
    options: SolverOptions = SolverOptions(),
    verify: bool = True,
) -> tuple[float | None, DelayBoundsReport]:
    """Smallest certified-stable delay, or None when feasibility persists
    down to the probe floor (interval open at zero)."""
    t0 = time.perf_counter()
    report = DelayBoundsReport(
        sys.name, params.big_m, params.m, "lower", nodv=nodv(params, sys.n_x)
    )
    prober = _Prober(sys, params, options, report, verify)
    hint = 0.5 * (bracket_hint[0] + bracket_hint[1]) if bracket_hint[0] < bracket_hint[1] else bracket_hint[0]
    tau_feas = _find_feasible(prober, hint)
    tau_infeas = None
    probe = tau_feas
    for _ in range(_MAX_PROBE_DOUBLINGS):
        probe /= 2.0
        if not prober.feasible(probe):
            tau_infeas = probe
            break
        tau_feas = probe
    if tau_infeas is None:
        report.notes.append(
            f"feasible down to probe floor tau={tau_feas:g}; no lower crossing"
        )
        report.wall_time_s = time.perf_counter() - t0
        return None, report
    tau_feas, _ = _bisect(prober, tau_feas, tau_infeas, tol)
    report.tau_lower = tau_feas
    report.wall_time_s = time.perf_counter() - t0
    return tau_feas, report


def stability_interval(
    sys: DelaySystem,
    params: HierarchyParams,
    bracket_hint: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_TOL,
    options: SolverOptions = SolverOptions(),
    verify: bool = True,
) -> DelayBoundsReport:
    """Certified stability interval [tau_lower, tau_upper].

    Pointwise bounds come from min_delay/max_delay bisection; the whole
    interval is then re-certified with the delay-range LMIs at the found
    endpoints.  A certification failure is reported (range_certified False
    plus a note), never silently shrunk.
    """
    t0 = time.perf_counter()
    lower, low_report = min_delay(sys, params, bracket_hint, tol, options, verify)
    upper, up_report = max_delay(sys, params, bracket_hint, tol, options, verify)
    report = DelayBoundsReport(
        sys.name,
        params.big_m,
        params.m,
        "interval",
        tau_lower=lower,
        tau_upper=upper,
        nodv=nodv(params, sys.n_x),
        probes=low_report.probes + up_report.probes,
        inconclusive_probes=low_report.inconclusive_probes
        + up_report.inconclusive_probes,
        notes=low_report.notes + up_report.notes,
    )
    range_low = lower if lower is not None else min(
        (p.tau for p in low_report.probes if p.status == FEASIBLE), default=None
    )
    if range_low is not None and upper is not None:
        problem = assemble_delay_range_lmis(sys, params, range_low, upper)
        result = decide_feasibility(problem, options)
        certified = result.status == FEASIBLE and (
            not verify or verify_certificate(problem, result)
        )
        report.range_certified = bool(certified)
        if not certified:
            report.notes.append(
                f"range certification failed on [{range_low:g}, {upper:g}] "
                f"(status {result.status}); pointwise bounds reported unchanged"
            )
        if not np.allclose(sys.a_d2, 0.0):
            report.notes.append(
                "distributed-kernel matrix nonzero: endpoint range check is heuristic"
            )
    report.wall_time_s = time.perf_counter() - t0
    return report


def hierarchy_sweep(
    sys: DelaySystem,
    m_big_range: range,
    m_range: range,
    tol: float = DEFAULT_TOL,
    comparison_tol: float = 5e-3,
    bracket_hint: tuple[float, float] = DEFAULT_BRACKET,
    options: SolverOptions = SolverOptions(),
    verify: bool = True,
) -> SweepResult:
    """Upper-bound sweep over an (M, m) grid with monotonicity audit.

    The expected hierarchy is nondecreasing bounds in both M and m; any
    decrease beyond comparison_tol is recorded as a violation.  Per-cell
    failures are captured, not raised, so one bad cell cannot abort a sweep.
    """
    if len(m_big_range) == 0 or len(m_range) == 0:
        raise ValueError("sweep ranges must be nonempty")
    cells: dict[tuple[int, int], DelayBoundsReport] = {}
    errors: dict[tuple[int, int], str] = {}
    for big_m in m_big_range:
        for m in m_range:
            try:
                _, rep = max_delay(
                    sys, HierarchyParams(big_m, m), bracket_hint, tol, options, verify
                )
                cells[(big_m, m)] = rep
            except (NoFeasiblePointError, BracketError, ValueError) as exc:
                errors[(big_m, m)] = str(exc)
    violations = []
    for (big_m, m), rep in cells.items():
        if rep.tau_upper is None:
            continue
        for key, label in (((big_m + 1, m), "M"), ((big_m, m + 1), "m")):
            nxt = cells.get(key)
            if nxt is None or nxt.tau_upper is None:
                continue
            if nxt.tau_upper < rep.tau_upper - comparison_tol:
                violations.append(
                    {
                        "direction": label,
                        "from": {"M": big_m, "m": m, "tau": rep.tau_upper},
                        "to": {"M": key[0], "m": key[1], "tau": nxt.tau_upper},
                    }
                )
    return SweepResult(cells=cells, violations=violations, errors=errors)
