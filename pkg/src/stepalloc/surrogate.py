"""Decoupled surrogate objective, surrogate budget constraint and the
linearized binary penalty.

The product terms (1-a)*R0 and a*R1 of the objective, and a*s of the budget
constraint, are replaced by quadratic upper bounds x^2*w + y^2/(4*w) that are
tight when the weight w is refreshed at the current iterate.  That refresh is
``update_auxiliaries``; the weights u (local), v (edge) and z (budget) are
floored at ``eps_aux`` so every sub-problem stays well posed at binary points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import EPS_COST_FLOOR, Allocation, Params, branch_cost

__all__ = [
    "AuxiliaryState",
    "update_auxiliaries",
    "surrogate_objective",
    "surrogate_edge_constraint",
    "penalty_linearized",
    "penalized_surrogate",
]


@dataclass(frozen=True)
class AuxiliaryState:
    """Surrogate weights, one triple per device, all >= eps_aux."""

    u: np.ndarray   # local-branch objective weight
    v: np.ndarray   # edge-branch objective weight
    z: np.ndarray   # budget-coupling weight

    def __post_init__(self) -> None:
        for name in ("u", "v", "z"):
            arr = np.array(getattr(self, name), dtype=float)
            if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
                raise ConfigError(f"{name}: auxiliary entries must be finite and > 0")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _floored_cost(p: Params, s, r: int):
    cost = branch_cost(p, s, r)
    if p.allow_floor:
        return np.maximum(cost, EPS_COST_FLOOR)
    if np.any(cost <= 0):
        bad = int(np.argmax(cost <= 0))
        raise ConfigError(
            f"branch cost for device {bad} is non-positive at its current step "
            "count and cost flooring is disabled (allow_cost_floor=False)"
        )
    return cost


def update_auxiliaries(p: Params, alloc: Allocation) -> AuxiliaryState:
    """Refresh (u, v, z) at the current iterate so the surrogate is tight.

    u = (1-a)/(2*R0(s)), v = a/(2*R1(s)), z = a/(2*s), each floored at
    eps_aux.  Raises ConfigError when a cost is non-positive and flooring is
    disabled.
    """
    a, s = alloc.a, alloc.s
    u = (1.0 - a) / (2.0 * _floored_cost(p, s, 0))
    v = a / (2.0 * _floored_cost(p, s, 1))
    # guard s = 0 the same way costs are floored: a/(2s) would be infinite
    z = a / (2.0 * np.maximum(s, 1e-12))
    eps = p.eps_aux
    return AuxiliaryState(np.maximum(u, eps), np.maximum(v, eps), np.maximum(z, eps))


def surrogate_objective(p: Params, alloc: Allocation, aux: AuxiliaryState) -> float:
    """Value of the decoupled objective G at (a, s) for fixed weights."""
    a, s = alloc.a, alloc.s
    r0 = branch_cost(p, s, 0)
    r1 = branch_cost(p, s, 1)
    g = (r0**2 * aux.u + (1.0 - a) ** 2 / (4.0 * aux.u)
         + r1**2 * aux.v + a**2 / (4.0 * aux.v))
    return float(np.sum(g))


def surrogate_edge_constraint(p: Params, alloc: Allocation, aux: AuxiliaryState) -> float:
    """Slack of the decoupled budget constraint (<= 0 means satisfied).

    sum(s^2 z + a^2/(4 z)) - budget; each term upper-bounds a*s, so a
    satisfied surrogate implies the true budget constraint holds.
    """
    a, s = alloc.a, alloc.s
    return float(np.sum(s**2 * aux.z + a**2 / (4.0 * aux.z)) - p.budget)


def penalty_linearized(a: np.ndarray, anchor: np.ndarray) -> float:
    """First-order expansion of sum a*(a-1) around the anchor; affine in a.

    Understates the true concave expression by sum (a - anchor)^2, so
    subtracting tau times this value over-penalizes fractional decisions.
    """
    a = np.asarray(a, float)
    anchor = np.asarray(anchor, float)
    return float(np.sum(anchor * (anchor - 1.0) + (2.0 * anchor - 1.0) * (a - anchor)))


def penalized_surrogate(p: Params, alloc: Allocation, aux: AuxiliaryState,
                        anchor: np.ndarray) -> float:
    """Objective of one convex sub-problem: G - tau * H(a | anchor)."""
    return surrogate_objective(p, alloc, aux) - p.tau * penalty_linearized(alloc.a, anchor)
