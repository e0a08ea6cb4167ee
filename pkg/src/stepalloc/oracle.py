"""Exhaustive reference solver for small instances.

Enumerates every binary offload assignment and solves the remaining separable
step allocation on an integer-spaced grid, so the reported optimum is a
certified lower bound over that grid.  The search logic is deliberately
independent of the iterative solver; only the cost evaluators are shared.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from . import model
from .model import Allocation, Params, SystemConfig, params

__all__ = ["OracleResult", "inner_fixed_assignment", "brute_force"]

_MAX_UES = 20
_MAX_PRODUCT_GRID = 10**6


@dataclass(frozen=True)
class OracleResult:
    best_a: np.ndarray
    best_s: np.ndarray
    best_objective: float
    assignments_evaluated: int


def _grid(cap: float, step: float) -> np.ndarray:
    """Uniform grid {0, step, 2*step, ...} up to cap.

    Uniform spacing keeps the greedy inner solve exact; with integer caps and
    step 1 the grid covers every feasible integer step count.
    """
    return np.arange(0.0, cap + 1e-12, step)


def _local_best(p: Params, n: int, step: float) -> tuple[float, float]:
    pts = _grid(float(p.caps[0][n]), step)
    vals = model.branch_cost(p, pts[:, None], 0)[:, n]
    k = int(np.argmin(vals))
    return float(pts[k]), float(vals[k])


def _edge_costs(p: Params, n: int, step: float) -> tuple[np.ndarray, np.ndarray]:
    pts = _grid(float(p.caps[1][n]), step)
    return pts, model.branch_cost(p, pts[:, None], 1)[:, n]


def _offloaded_exhaustive(pts_list, vals_list, budget: float):
    """Product-grid search over a small offloaded set."""
    # accumulate step totals and cost totals by broadcasting one axis per device
    sum_s = 0.0
    sum_c = 0.0
    for axis, (pts, vals) in enumerate(zip(pts_list, vals_list)):
        dims = [1] * len(pts_list)
        dims[axis] = len(pts)
        sum_s = sum_s + pts.reshape(dims)
        sum_c = sum_c + vals.reshape(dims)
    feasible = sum_s <= budget + 1e-9
    if not np.any(feasible):
        # zero steps is always feasible since budget >= 0
        return [float(pts[0]) for pts in pts_list], float(sum(v[0] for v in vals_list))
    masked = np.where(feasible, sum_c, np.inf)
    flat = int(np.argmin(masked))
    idx = np.unravel_index(flat, masked.shape)
    choice = [float(pts_list[i][j]) for i, j in enumerate(idx)]
    return choice, float(masked[idx])


def _offloaded_greedy(pts_list, vals_list, budget: float):
    """Exact incremental allocation for a separable convex grid problem.

    Marginal costs along each device's grid are non-decreasing (the branch
    cost is convex), so repeatedly taking the most negative marginal step
    while the budget allows is optimal.  Ties break on the lower device
    index for determinism.
    """
    levels = [0] * len(pts_list)
    spent = 0.0
    heap = []
    for i, (pts, vals) in enumerate(zip(pts_list, vals_list)):
        if len(pts) > 1:
            marg = float(vals[1] - vals[0])
            width = float(pts[1] - pts[0])
            heapq.heappush(heap, (marg, i, 1, width))
    while heap:
        marg, i, level, width = heapq.heappop(heap)
        if marg >= 0.0:
            break
        if spent + width > budget + 1e-9:
            break  # uniform widths: no other step fits either
        levels[i] = level
        spent += width
        pts, vals = pts_list[i], vals_list[i]
        if level + 1 < len(pts):
            heapq.heappush(heap, (float(vals[level + 1] - vals[level]), i,
                                  level + 1, float(pts[level + 1] - pts[level])))
    choice = [float(pts_list[i][levels[i]]) for i in range(len(pts_list))]
    total = float(sum(vals_list[i][levels[i]] for i in range(len(pts_list))))
    return choice, total


def inner_fixed_assignment(cfg, a_binary, grid_step: float = 1.0):
    """Best grid step counts for a fixed binary assignment.

    Local devices take their unconstrained grid minimizer; the offloaded set
    is solved exactly against the shared budget, exhaustively when the
    product grid is small and by exact greedy allocation otherwise.
    Returns (steps vector, objective value).
    """
    p = cfg if isinstance(cfg, Params) else params(cfg)
    if grid_step <= 0:
        raise ConfigError("grid_step: must be > 0")
    a = np.asarray(a_binary, float)
    if not np.all((a == 0.0) | (a == 1.0)):
        raise ConfigError("a_binary: assignment must be binary")
    s = np.zeros(p.n)
    total = 0.0
    offloaded = [n for n in range(p.n) if a[n] == 1.0]
    for n in range(p.n):
        if a[n] == 0.0:
            s_n, val = _local_best(p, n, grid_step)
            s[n] = s_n
            total += val
    if offloaded:
        pts_list, vals_list = zip(*(_edge_costs(p, n, grid_step) for n in offloaded))
        n_points = 1.0
        for pts in pts_list:
            n_points *= len(pts)
        if n_points <= _MAX_PRODUCT_GRID:
            choice, val = _offloaded_exhaustive(pts_list, vals_list, p.budget)
        else:
            choice, val = _offloaded_greedy(pts_list, vals_list, p.budget)
        for n, s_n in zip(offloaded, choice):
            s[n] = s_n
        total += val
    return s, float(total)


def brute_force(cfg, grid_step: float = 1.0) -> OracleResult:
    """Enumerate all binary assignments and keep the best grid allocation.

    Ties break toward fewer offloaded devices, then lexicographically
    smaller assignment vectors.
    """
    p = cfg if isinstance(cfg, Params) else params(cfg)
    if p.n > _MAX_UES:
        raise ConfigError(f"ues: oracle enumeration is capped at {_MAX_UES} devices, got {p.n}")
    best_key = None
    best_a = None
    best_s = None
    best_val = np.inf
    count = 0
    for mask in range(2**p.n):
        a = np.array([(mask >> n) & 1 for n in range(p.n)], dtype=float)
        s, val = inner_fixed_assignment(p, a, grid_step)
        count += 1
        key = (val, int(a.sum()), tuple(a))
        if best_key is None or key < best_key:
            best_key, best_a, best_s, best_val = key, a, s, val
    assert best_a is not None and best_s is not None
    return OracleResult(best_a, best_s, best_val, count)
