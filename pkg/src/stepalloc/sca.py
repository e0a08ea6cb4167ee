"""Two-level successive-approximation driver plus rounding and repair.

The inner loop alternates one convex sub-problem solve with an auxiliary
refresh until the penalized surrogate value settles.  The outer loop
re-anchors the linearized binary penalty at the latest offload fractions and
repeats until the decision vector stops moving, then the relaxed solution is
rounded to binary offload flags and integer step counts and repaired onto the
budget.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError
from . import model
from .model import Allocation, Params, SystemConfig, params
from .kkt import KktDiagnostics, Multipliers, solve_kkt
from .surrogate import penalized_surrogate, update_auxiliaries

__all__ = [
    "TraceRow",
    "Components",
    "SolveReport",
    "initial_allocation",
    "intra_solve",
    "inter_solve",
    "round_and_repair",
    "objective_breakdown",
]


@dataclass(frozen=True)
class TraceRow:
    outer: int
    inner: int
    penalized: float        # surrogate objective minus the penalty term
    objective: float        # true mixed objective at the iterate
    max_da: float
    max_ds: float


@dataclass(frozen=True)
class Components:
    """Aggregate cost pieces of an allocation."""

    t_total_s: float
    err_mean: float
    accuracy: float
    e_total_j: float
    u_total: float


@dataclass(frozen=True)
class SolveReport:
    allocation_relaxed: Allocation
    allocation_binary: Allocation
    multipliers: Multipliers
    objective_relaxed: float
    objective_binary: float
    components: Components
    trace: tuple[TraceRow, ...]
    status: str                      # converged | max-iterations
    iterations_outer: int
    iterations_inner_total: int
    multibracket_events: int = 0
    start_index: int = 0


def _params_of(cfg) -> Params:
    return cfg if isinstance(cfg, Params) else params(cfg)


def initial_allocation(cfg: SystemConfig, start: int = 0) -> Allocation:
    """Default start: fractional midpoint offload, half the smaller cap.

    Additional starts (start >= 1) draw seeded uniform points; everything is
    reproducible from the config seed.
    """
    p = params(cfg)
    min_cap = np.minimum(p.caps[0], p.caps[1])
    if start == 0:
        a0 = np.full(p.n, 0.5 if cfg.init_a is None else cfg.init_a)
        s0 = min_cap / 2.0 if cfg.init_s is None else np.minimum(cfg.init_s, min_cap)
        s0 = np.broadcast_to(np.asarray(s0, float), (p.n,))
    else:
        rng = np.random.default_rng([cfg.seed, start])
        a0 = rng.uniform(0.1, 0.9, p.n)
        s0 = rng.uniform(0.2, 0.8, p.n) * min_cap
    return Allocation(a0, s0)


def intra_solve(cfg, initial_alloc: Allocation, anchor,
                diag: KktDiagnostics | None = None):
    """Inner fixed-point loop for one penalty anchor.

    Returns (allocation, multipliers, trace rows, converged flag).  The
    traced surrogate value is computed with freshly refreshed auxiliaries, so
    it is non-increasing across iterations whenever branch costs stay
    positive (majorize-minimize descent).
    """
    p = _params_of(cfg)
    anchor = np.asarray(anchor, float)
    tol = cfg.tolerances if isinstance(cfg, SystemConfig) else None
    if tol is None:
        raise TypeError("intra_solve needs a SystemConfig (tolerances required)")

    alloc = initial_alloc
    aux = update_auxiliaries(p, alloc)
    value = penalized_surrogate(p, alloc, aux, anchor)
    trace = [TraceRow(0, 0, value, model.objective_value(p, alloc.a, alloc.s), 0.0, 0.0)]
    mult: Multipliers | None = None
    converged = False
    for k in range(1, tol.max_inner + 1):
        new_alloc, mult = solve_kkt(p, aux, anchor, diag)
        aux = update_auxiliaries(p, new_alloc)
        new_value = penalized_surrogate(p, new_alloc, aux, anchor)
        if not np.isfinite(new_value):
            raise SolverError(
                f"non-finite surrogate value at inner iteration {k}: "
                f"{new_value} (a range [{new_alloc.a.min()}, {new_alloc.a.max()}])")
        da = float(np.max(np.abs(new_alloc.a - alloc.a)))
        ds = float(np.max(np.abs(new_alloc.s - alloc.s)))
        trace.append(TraceRow(0, k, new_value,
                              model.objective_value(p, new_alloc.a, new_alloc.s), da, ds))
        converged = abs(new_value - value) <= tol.inner_tol * (1.0 + abs(value))
        alloc, value = new_alloc, new_value
        if converged:
            break
    assert mult is not None
    return alloc, mult, trace, converged


def inter_solve(cfg: SystemConfig, initial_alloc: Allocation | None = None) -> SolveReport:
    """Full solve: outer anchoring loop, then rounding and repair.

    With n_starts > 1 the solve is repeated from seeded random starts and the
    best binary objective wins.  ``initial_alloc`` overrides the start-0
    initialization.
    """
    best: SolveReport | None = None
    for start in range(cfg.n_starts):
        if initial_alloc is not None and start == 0:
            alloc0 = initial_alloc
        else:
            alloc0 = initial_allocation(cfg, start)
        report = _run_from(cfg, alloc0, start)
        if best is None or report.objective_binary < best.objective_binary:
            best = report
    assert best is not None
    return best


def _run_from(cfg: SystemConfig, alloc0: Allocation, start_index: int) -> SolveReport:
    p = params(cfg)
    tol = cfg.tolerances
    diag = KktDiagnostics()
    alloc = alloc0
    anchor = alloc.a.copy()
    trace: list[TraceRow] = []
    status = "max-iterations"
    mult: Multipliers | None = None
    inner_total = 0
    outer_done = 0
    for i in range(1, tol.max_outer + 1):
        new_alloc, mult, rows, _ = intra_solve(cfg, alloc, anchor, diag)
        trace.extend(dataclasses.replace(r, outer=i) for r in rows)
        inner_total += len(rows) - 1
        change = max(
            float(np.max(np.abs(new_alloc.a - alloc.a))),
            float(np.max(np.abs(new_alloc.s - alloc.s))) / p.s_upper,
        )
        alloc = new_alloc
        anchor = new_alloc.a
        outer_done = i
        if change <= tol.outer_tol:
            status = "converged"
            break
    assert mult is not None
    binary = round_and_repair(cfg, alloc)
    report = SolveReport(
        allocation_relaxed=alloc,
        allocation_binary=binary,
        multipliers=mult,
        objective_relaxed=model.objective_value(p, alloc.a, alloc.s),
        objective_binary=model.objective_value(p, binary.a, binary.s),
        components=objective_breakdown(cfg, binary),
        trace=tuple(trace),
        status=status,
        iterations_outer=outer_done,
        iterations_inner_total=inner_total,
        multibracket_events=diag.multibracket,
        start_index=start_index,
    )
    feas = model.check_feasibility(cfg, binary)
    if not feas.feasible:
        raise SolverError(f"rounded allocation infeasible: edge slack {feas.edge_slack}")
    return report


def round_and_repair(cfg, alloc_relaxed: Allocation) -> Allocation:
    """Round offload fractions at 1/2, re-optimize steps per branch, then
    project the offloaded steps onto the budget and onto integers.

    Local steps are the exact per-device cost minimizers.  Offloaded steps
    minimize the edge cost subject to the shared budget via bisection on a
    common price, then integer rounding trims the largest offloaded entries
    (ties to the lower index) until the budget holds exactly.  Falls back to
    all-local zero steps if anything goes non-finite.
    """
    p = _params_of(cfg)
    a_bin = (alloc_relaxed.a >= 0.5).astype(float)
    try:
        s = np.where(a_bin == 0.0, model.deriv_root(p, 0, np.zeros(p.n), p.caps[0]), 0.0)
        edge = a_bin == 1.0
        if np.any(edge):
            s_edge = model.deriv_root(p, 1, np.zeros(p.n), p.caps[1])
            if float(np.sum(s_edge[edge])) > p.budget:
                s_edge = _project_edge_steps(p, edge)
            s = np.where(edge, s_edge, s)
        if not np.all(np.isfinite(s)):
            raise SolverError("non-finite repaired steps")
    except SolverError:
        return Allocation(np.zeros(p.n), np.zeros(p.n))

    s_int = np.floor(s + 0.5)
    s_int = np.minimum(s_int, np.floor(np.where(a_bin == 1.0, p.caps[1], p.caps[0])))
    s_int = np.maximum(s_int, 0.0)
    # trim the offloaded entries, largest first, until the budget holds
    while float(np.sum(s_int[a_bin == 1.0])) > p.budget:
        masked = np.where(a_bin == 1.0, s_int, -np.inf)
        idx = int(np.argmax(masked))
        if masked[idx] <= 0:
            break
        s_int[idx] -= 1.0
    return Allocation(a_bin, s_int)


def _project_edge_steps(p: Params, edge: np.ndarray) -> np.ndarray:
    """Steps minimizing the edge cost plus a shared price chosen so the
    offloaded total meets the budget."""
    def total(price: float) -> float:
        s = model.deriv_root(p, 1, np.zeros(p.n), p.caps[1], shift=price)
        return float(np.sum(s[edge]))

    hi = 1.0
    for _ in range(200):
        if total(hi) <= p.budget:
            break
        hi *= 2.0
    else:
        raise SolverError("edge budget projection failed to bracket the price")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if total(mid) > p.budget:
            lo = mid
        else:
            hi = mid
    return model.deriv_root(p, 1, np.zeros(p.n), p.caps[1], shift=hi)


def objective_breakdown(cfg, alloc: Allocation) -> Components:
    """Aggregate time, error, accuracy, energy and utility of an allocation.

    Fractional offload values weight the two branches, matching the relaxed
    objective; binary values select one branch exactly.
    """
    p = _params_of(cfg)
    a, s = alloc.a, alloc.s
    t_total = float(np.sum((1 - a) * model.branch_time(p, s, 0) + a * model.branch_time(p, s, 1)))
    err_mean = float(np.mean(model.branch_error(p, s)))
    e_total = float(np.sum((1 - a) * model.branch_energy(p, s, 0) + a * model.branch_energy(p, s, 1)))
    u_total = float(np.sum(model.branch_utility(p, s)))
    return Components(t_total, err_mean, 1.0 - err_mean, e_total, u_total)
