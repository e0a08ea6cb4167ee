"""Closed-form and bisected solution of one convex sub-problem's optimality
system.

Given fixed auxiliary weights (u, v, z) and a penalty anchor, the sub-problem
separates per device once the budget price ``delta`` is known: the offload
fraction has a closed form, the step count is the root of a one-dimensional
monotone function, and the per-device cap price ``zeta`` follows from
complementary slackness.  ``delta`` itself is found by bracketing the
surrogate budget mass, which is non-increasing in the price.

All 1-D roots use safeguarded bisection (no Newton steps); the step solve
scans a safeguard grid first and flags the pathological case of multiple sign
changes, which can only occur when branch costs have been floored.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .model import Allocation, Params, SystemConfig, params
from .surrogate import AuxiliaryState

__all__ = [
    "Multipliers",
    "KktDiagnostics",
    "a_hat",
    "s_tilde",
    "zeta_hat",
    "delta_star",
    "solve_kkt",
]

_GRID = 16            # safeguard grid cells for the step solve
_BISECT_ITERS = 60    # enough for sub-ulp brackets on any realistic cap
_MAX_DOUBLINGS = 60
_SECTIONS = 24        # cells per refinement pass of the budget-price solve
_BUDGET_TOL = 1e-8    # absolute slack treated as "budget met"


@dataclass(frozen=True)
class Multipliers:
    """Dual prices: box prices beta/gamma, cap prices zeta, budget price delta."""

    beta: np.ndarray
    gamma: np.ndarray
    zeta: np.ndarray
    delta: float

    def __post_init__(self) -> None:
        for name in ("beta", "gamma", "zeta"):
            arr = np.array(getattr(self, name), dtype=float)
            if np.any(arr < 0):
                raise SolverError(f"{name}: dual prices must be >= 0")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.delta < 0:
            raise SolverError("delta: dual price must be >= 0")


@dataclass
class KktDiagnostics:
    """Numerical flags raised while solving one sub-problem."""

    multibracket: int = 0   # devices whose step equation had several roots


def _params_of(cfg) -> Params:
    return cfg if isinstance(cfg, Params) else params(cfg)


# ---------------------------------------------------------------------------
# stationarity pieces (all broadcast over a trailing device axis)

def _phi0(p: Params, aux: AuxiliaryState, s, delta):
    """d/ds of the sub-problem Lagrangian, excluding the cap price term."""
    e1 = np.exp(-p.c1 * s)
    e2 = np.exp(-p.c2 * s)
    err = p.eps_fwd * e1
    c1w, c2w, c3w = p.cw
    util = 1.0 - e2
    util_d = p.c2 * e2
    r0 = p.w1 * (c1w * p.dt[0] * s + c2w * err + c3w * p.e_slope[0] * s) - p.w2 * util
    r1 = p.w1 * (c1w * p.dt[1] * s + c2w * err + c3w * p.e_slope[1] * s) - p.w2 * util
    d_err = -c2w * p.c1 * err
    r0_d = p.w1 * (c1w * p.dt[0] + d_err + c3w * p.e_slope[0]) - p.w2 * util_d
    r1_d = p.w1 * (c1w * p.dt[1] + d_err + c3w * p.e_slope[1]) - p.w2 * util_d
    return 2.0 * (r0 * r0_d * aux.u + r1 * r1_d * aux.v) + 2.0 * delta * s * aux.z


def _lagrangian_s_part(p: Params, aux: AuxiliaryState, s, delta, zeta):
    """s-dependent Lagrangian terms; _phi0 + zeta is its derivative."""
    e1 = np.exp(-p.c1 * s)
    err = p.eps_fwd * e1
    util = 1.0 - np.exp(-p.c2 * s)
    c1w, c2w, c3w = p.cw
    r0 = p.w1 * (c1w * p.dt[0] * s + c2w * err + c3w * p.e_slope[0] * s) - p.w2 * util
    r1 = p.w1 * (c1w * p.dt[1] * s + c2w * err + c3w * p.e_slope[1] * s) - p.w2 * util
    return r0**2 * aux.u + r1**2 * aux.v + delta * s**2 * aux.z + zeta * s


def _a_hat_arr(p: Params, aux: AuxiliaryState, anchor, zeta, delta):
    num = 0.5 / aux.u + p.tau * (2.0 * anchor - 1.0) - zeta * (p.caps[0] - p.caps[1])
    den = 0.5 / aux.u + 0.5 / aux.v + 0.5 * delta / aux.z
    return num / den


def _d_of(p: Params, aux: AuxiliaryState, anchor, a_val, zeta, delta):
    """Stationarity expression in the offload variable, evaluated at a_val."""
    num = 0.5 / aux.u + p.tau * (2.0 * anchor - 1.0) - zeta * (p.caps[0] - p.caps[1])
    den = 0.5 / aux.u + 0.5 / aux.v + 0.5 * delta / aux.z
    return den * a_val - num


def _effective_cap(p: Params, a):
    return (1.0 - a) * p.caps[0] + a * p.caps[1]


def _resolve_multibracket(p: Params, aux: AuxiliaryState, n: int, zeta_n: float,
                          delta_n: float) -> float:
    """Pick among several stationary points by direct sub-objective value.

    Only reachable when floored costs make the per-device objective
    non-convex; the choice is the exact 1-D minimum over all bracketed roots
    and both interval ends, not an arbitrary root.
    """
    sub = Params(
        dt=(p.dt[0][n:n + 1], p.dt[1][n:n + 1]),
        e_slope=(p.e_slope[0][n:n + 1], p.e_slope[1][n:n + 1]),
        c1=p.c1[n:n + 1], c2=p.c2[n:n + 1],
        caps=(p.caps[0][n:n + 1], p.caps[1][n:n + 1]),
        eps_fwd=p.eps_fwd, cw=p.cw, w1=p.w1, w2=p.w2, budget=p.budget,
        tau=p.tau, eps_aux=p.eps_aux, allow_floor=p.allow_floor, n=1,
    )
    sub_aux = AuxiliaryState(aux.u[n:n + 1], aux.v[n:n + 1], aux.z[n:n + 1])
    hi = float(max(p.caps[0][n], p.caps[1][n]))
    grid = np.linspace(0.0, hi, 65)
    vals = _phi0(sub, sub_aux, grid[:, None], delta_n)[:, 0] + zeta_n
    candidates = [0.0, hi]
    neg = vals < 0
    for j in range(64):
        if neg[j] != neg[j + 1]:
            lo_b, hi_b = grid[j], grid[j + 1]
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo_b + hi_b)
                if _phi0(sub, sub_aux, np.array([mid]), delta_n)[0] + zeta_n < 0:
                    lo_b = mid
                else:
                    hi_b = mid
            candidates.append(0.5 * (lo_b + hi_b))
    cand = np.array(candidates)
    f_vals = _lagrangian_s_part(sub, sub_aux, cand[:, None], delta_n, zeta_n)[:, 0]
    return float(cand[int(np.argmin(f_vals))])


def _steps_root(p: Params, aux: AuxiliaryState, zeta, delta,
                diag: KktDiagnostics | None = None):
    """Root of _phi0(s) + zeta on [0, s_upper] per device.

    Broadcasts over any leading batch shape.  Returns the left end when the
    derivative starts non-negative and the right end when it stays
    non-positive; multiple interior sign changes are resolved by
    _resolve_multibracket and counted in ``diag``.
    """
    hi_dev = np.maximum(p.caps[0], p.caps[1])
    zeta = np.asarray(zeta, float)
    delta = np.asarray(delta, float)
    shape = np.broadcast_shapes(zeta.shape, delta.shape, hi_dev.shape)
    hi = np.broadcast_to(hi_dev, shape).astype(float)
    lo = np.zeros(shape)

    phi_lo = _phi0(p, aux, lo, delta) + zeta
    phi_hi = _phi0(p, aux, hi, delta) + zeta
    at_lo = phi_lo >= 0
    at_hi = phi_hi <= 0

    # safeguard grid: locate the first sign change and count all of them
    prev_neg = phi_lo < 0
    prev_t = lo
    blo = lo.copy()
    bhi = hi.copy()
    found = np.zeros(shape, dtype=bool)
    nchanges = np.zeros(shape, dtype=np.int64)
    for j in range(1, _GRID + 1):
        t = lo + (hi - lo) * (j / _GRID)
        neg = _phi0(p, aux, t, delta) + zeta < 0
        change = neg != prev_neg
        nchanges += change
        newly = change & ~found
        blo = np.where(newly, prev_t, blo)
        bhi = np.where(newly, t, bhi)
        found |= newly
        prev_neg, prev_t = neg, t

    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (blo + bhi)
        neg = _phi0(p, aux, mid, delta) + zeta < 0
        blo = np.where(neg, mid, blo)
        bhi = np.where(neg, bhi, mid)
    root = 0.5 * (blo + bhi)
    root = np.where(at_hi, hi, root)
    root = np.where(at_lo, lo, root)

    multi = nchanges > 1
    if np.any(multi):
        if diag is not None:
            diag.multibracket += int(np.count_nonzero(multi))
        z_b = np.broadcast_to(zeta, shape)
        d_b = np.broadcast_to(delta, shape)
        flat = root.reshape(-1)
        for idx in np.nonzero(multi.reshape(-1))[0]:
            n = int(idx % p.n)
            flat[idx] = _resolve_multibracket(
                p, aux, n, float(z_b.reshape(-1)[idx]), float(d_b.reshape(-1)[idx]))
        root = flat.reshape(shape)
        root = np.where(at_hi & ~multi, hi, root)
        root = np.where(at_lo & ~multi, lo, root)
    return root


def _solve_given_delta(p: Params, aux: AuxiliaryState, anchor, delta,
                       diag: KktDiagnostics | None = None):
    """Per-device (a, s, zeta) at a fixed budget price.

    First tries zeta = 0; devices whose step root then violates the effective
    cap get their cap price from the complementary-slackness equation, solved
    by bisection in the step variable (the price is -_phi0 at the root, which
    is a monotone reparametrization).
    """
    delta = np.asarray(delta, float)
    zeros = np.zeros(np.broadcast_shapes(delta.shape, (p.n,)))
    s0 = _steps_root(p, aux, zeros, delta, diag)
    a0 = np.clip(_a_hat_arr(p, aux, anchor, zeros, delta), 0.0, 1.0)
    gap0 = s0 - _effective_cap(p, a0)
    viol = gap0 > 0
    if not np.any(viol):
        return a0, s0, zeros

    shape = zeros.shape
    blo = np.zeros(shape)
    bhi = np.broadcast_to(np.maximum(p.caps[0], p.caps[1]), shape).astype(float)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (blo + bhi)
        zeta_mid = -_phi0(p, aux, mid, delta)
        a_mid = np.clip(_a_hat_arr(p, aux, anchor, zeta_mid, delta), 0.0, 1.0)
        psi_neg = mid - _effective_cap(p, a_mid) < 0
        blo = np.where(psi_neg, mid, blo)
        bhi = np.where(psi_neg, bhi, mid)
    s_cap = 0.5 * (blo + bhi)
    zeta_cap = np.maximum(-_phi0(p, aux, s_cap, delta), 0.0)
    a_cap = np.clip(_a_hat_arr(p, aux, anchor, zeta_cap, delta), 0.0, 1.0)

    a = np.where(viol, a_cap, a0)
    s = np.where(viol, s_cap, s0)
    zeta = np.where(viol, zeta_cap, 0.0)
    return a, s, zeta


def _budget_slack(p: Params, aux: AuxiliaryState, a, s):
    """Surrogate budget mass minus the budget (the price's root function)."""
    return np.sum(s**2 * aux.z + a**2 / (4.0 * aux.z), axis=-1) - p.budget


def _phi_budget(p: Params, aux: AuxiliaryState, anchor, delta,
                diag: KktDiagnostics | None = None):
    a, s, _ = _solve_given_delta(p, aux, anchor, delta, diag)
    return _budget_slack(p, aux, a, s)


def _delta_star(p: Params, aux: AuxiliaryState, anchor,
                diag: KktDiagnostics | None = None) -> float:
    slack0 = float(_phi_budget(p, aux, anchor, np.zeros((1, 1)), diag)[0])
    if slack0 <= _BUDGET_TOL:
        return 0.0

    d_hi = 1.0
    for _ in range(_MAX_DOUBLINGS):
        if float(_phi_budget(p, aux, anchor, np.array([[d_hi]]), diag)[0]) <= _BUDGET_TOL:
            break
        d_hi *= 2.0
    else:
        raise SolverError(
            "budget price bracketing exhausted: surrogate budget mass stays "
            f"above the budget ({p.budget}) even at price {d_hi}; the "
            "auxiliary floor keeps the mass positive, so the budget cannot "
            "be met (slack at price 0 was {:.3e})".format(slack0))

    d_lo = 0.0 if d_hi == 1.0 else d_hi / 2.0
    for _ in range(14):
        cand = np.linspace(d_lo, d_hi, _SECTIONS + 1)
        slack = _phi_budget(p, aux, anchor, cand[:, None], diag)
        below = slack <= 0.0
        first = int(np.argmax(below)) if np.any(below) else _SECTIONS
        d_lo, d_hi = cand[max(first - 1, 0)], cand[first]
        if d_hi - d_lo <= 1e-13 * max(1.0, d_hi):
            break
        if abs(float(slack[first])) <= min(_BUDGET_TOL, 1e-7 / max(1.0, d_hi)):
            break
    return float(d_hi)


# ---------------------------------------------------------------------------
# public operations

def a_hat(cfg, n: int, zeta_n: float, delta: float, aux: AuxiliaryState,
          anchor) -> float:
    """Unclamped stationary offload fraction for device n."""
    p = _params_of(cfg)
    anchor = np.asarray(anchor, float)
    return float(_a_hat_arr(p, aux, anchor, np.zeros(p.n) + zeta_n, delta)[n])


def s_tilde(cfg, n: int, zeta_n: float, delta: float, aux: AuxiliaryState) -> float:
    """Stationary step count for device n in [0, max cap]."""
    p = _params_of(cfg)
    zeta = np.zeros(p.n)
    zeta[n] = zeta_n
    return float(_steps_root(p, aux, zeta, np.asarray(delta, float))[n])


def zeta_hat(cfg, n: int, delta: float, aux: AuxiliaryState, anchor) -> float:
    """Cap price for device n: zero when the cap is slack, else the
    complementary-slackness root."""
    p = _params_of(cfg)
    anchor = np.asarray(anchor, float)
    _, _, zeta = _solve_given_delta(p, aux, anchor, np.asarray(delta, float))
    return float(zeta[n])


def delta_star(cfg, aux: AuxiliaryState, anchor) -> float:
    """Budget price: zero when the surrogate budget constraint is slack at
    price zero, else the bracketed root of the budget mass."""
    p = _params_of(cfg)
    return _delta_star(p, aux, np.asarray(anchor, float))


def cap_gap(cfg, alloc: Allocation) -> np.ndarray:
    """Per-device cap constraint value s - effective cap (<= 0 feasible)."""
    p = _params_of(cfg)
    return alloc.s - _effective_cap(p, alloc.a)


def solve_kkt(cfg, aux: AuxiliaryState, anchor,
              diag: KktDiagnostics | None = None) -> tuple[Allocation, Multipliers]:
    """Optimal (a, s) of one convex sub-problem plus all dual prices.

    The offload fraction is the clamped closed form; its box prices are
    reconstructed from the stationarity expression at the box ends so the
    returned tuple satisfies stationarity, primal and dual feasibility and
    complementary slackness of the sub-problem.
    """
    p = _params_of(cfg)
    anchor = np.asarray(anchor, float)
    delta = _delta_star(p, aux, anchor, diag)
    a, s, zeta = _solve_given_delta(p, aux, anchor, np.asarray(delta), diag)
    a = np.asarray(a, float).reshape(p.n)
    s = np.asarray(s, float).reshape(p.n)
    zeta = np.asarray(zeta, float).reshape(p.n)
    beta = np.maximum(_d_of(p, aux, anchor, 0.0, zeta, delta), 0.0)
    gamma = -np.minimum(_d_of(p, aux, anchor, 1.0, zeta, delta), 0.0)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(s))):
        raise SolverError("non-finite sub-problem solution")
    return Allocation(a, s), Multipliers(beta, gamma, zeta, float(delta))
