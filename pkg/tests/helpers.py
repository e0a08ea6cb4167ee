"""Shared test utilities: hand-built configurations and an independent
residual checker for the sub-problem optimality system."""
from __future__ import annotations

import math

import numpy as np

from stepalloc.model import Allocation, SystemConfig, UeProfile, params
from stepalloc import model


def profile(**overrides) -> UeProfile:
    """Default-like device profile with keyword tweaks."""
    base = dict(
        delta_t_local=1 / 500,
        delta_t_edge=1 / 1000,
        c1_attenuation=0.05,
        c2_utility=0.02,
        cpu_freq_local=1.5e9,
        cpu_freq_edge_alloc=1.0e10,
        k_local=1e-26,
        s_cap_local=200.0,
        s_cap_edge=500.0,
    )
    base.update(overrides)
    return UeProfile(**base)


def config(n=1, ue=None, *, cost_weights=(1.0, 1.0, 1.0), blend=(0.5, 0.5),
           budget=1000.0, tau=1e5, allow_cost_floor=False, **cfg_overrides) -> SystemConfig:
    ue = ue if ue is not None else profile()
    ues = tuple(ue for _ in range(n)) if isinstance(ue, UeProfile) else tuple(ue)
    return SystemConfig(
        ues=ues, k_edge=1e-26, s_edge_budget=budget, cost_weights=cost_weights,
        blend_weights=blend, tau_penalty=tau, allow_cost_floor=allow_cost_floor,
        **cfg_overrides)


def time_only_config(n=1, r0_at_100=2.0, r1_at_100=4.0, **kw) -> SystemConfig:
    """Pure-time costs tuned so the branch costs hit given values at s=100.

    Costs vanish at s=0, so these configs always need the cost floor.
    """
    ue = profile(delta_t_local=r0_at_100 / 100.0, delta_t_edge=r1_at_100 / 100.0)
    return config(n, ue, cost_weights=(1.0, 0.0, 0.0), blend=(1.0, 0.0),
                  allow_cost_floor=True, **kw)


def kkt_residuals(cfg, aux, anchor, alloc: Allocation, mult) -> dict[str, float]:
    """Re-derive every optimality residual from scratch.

    Uses only the analytic model derivatives and the textbook form of the
    stationarity / complementary-slackness / feasibility conditions, not the
    solver's internals.  Implicit box multipliers for the step variable are
    accounted for by sign at the interval ends.
    """
    p = params(cfg)
    a, s = alloc.a, alloc.s
    anchor = np.asarray(anchor, float)
    u, v, z = aux.u, aux.v, aux.z
    tau = cfg.tau_penalty
    cap0, cap1 = p.caps

    den = 0.5 / u + 0.5 / v + 0.5 * mult.delta / z
    num = 0.5 / u + tau * (2 * anchor - 1) - mult.zeta * (cap0 - cap1)
    stat_a = den * a - num - mult.beta + mult.gamma

    r0 = model.branch_cost(p, s, 0)
    r1 = model.branch_cost(p, s, 1)
    d0 = model.branch_cost_deriv(p, s, 0)
    d1 = model.branch_cost_deriv(p, s, 1)
    phi = 2 * r0 * d0 * u + 2 * r1 * d1 * v + 2 * mult.delta * s * z + mult.zeta
    s_hi = np.maximum(cap0, cap1)
    stat_s = np.where(s <= 1e-9, np.minimum(phi, 0.0),
                      np.where(s >= s_hi - 1e-9, np.maximum(phi, 0.0), phi))

    cap_gap = s - (1 - a) * cap0 - a * cap1
    budget_gap = float(np.sum(s**2 * z + a**2 / (4 * z)) - p.budget)

    return {
        "stationarity_a": float(np.max(np.abs(stat_a))),
        "stationarity_s": float(np.max(np.abs(stat_s))),
        "slack_beta": float(np.max(np.abs(mult.beta * a))),
        "slack_gamma": float(np.max(np.abs(mult.gamma * (a - 1)))),
        "slack_zeta": float(np.max(np.abs(mult.zeta * cap_gap))),
        "slack_delta": abs(mult.delta * budget_gap),
        "primal_box": float(max(np.max(-a, initial=0), np.max(a - 1, initial=0),
                                np.max(-s, initial=0), 0.0)),
        "primal_cap": float(np.max(cap_gap, initial=0.0)),
        "primal_budget": max(budget_gap, 0.0),
        "dual": float(max(np.max(-mult.beta, initial=0), np.max(-mult.gamma, initial=0),
                          np.max(-mult.zeta, initial=0), -mult.delta, 0.0)),
    }


def inner_runs(trace):
    """Split a solve trace into per-inner-loop lists of penalized values."""
    runs: dict[int, list[float]] = {}
    for row in trace:
        runs.setdefault(row.outer, []).append(row.penalized)
    return list(runs.values())


def exp(x: float) -> float:
    return math.exp(x)
