"""Cost, error, utility and feasibility model for N user devices and one edge
server.

Each device runs a step-based generative task either locally (branch 0) or on
the edge server (branch 1).  The decision variables are a per-device offload
indicator ``a`` (fractional while relaxed, binary after rounding) and a
real-valued step count ``s``.  Everything in this module is a pure function of
those two vectors and the immutable profile data.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import ConfigError

Branch = Literal["local", "edge"]

# Floor applied to branch costs inside auxiliary updates when a configuration
# with non-positive costs is explicitly allowed (SystemConfig.allow_cost_floor).
EPS_COST_FLOOR = 1e-9

_BRANCH_INDEX = {"local": 0, "edge": 1}


def _require(cond: bool, name: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{name}: {message}")


@dataclass(frozen=True)
class UeProfile:
    """Physical and model constants for one user device.

    ``delta_t_*`` are seconds per reverse step, ``c1_attenuation`` is the
    per-step error decay rate, ``c2_utility`` the utility saturation rate.
    ``k_local`` scales local CPU power as k * f^3 per second of compute.
    """

    delta_t_local: float
    delta_t_edge: float
    c1_attenuation: float
    c2_utility: float
    cpu_freq_local: float
    cpu_freq_edge_alloc: float
    k_local: float
    s_cap_local: float
    s_cap_edge: float

    def __post_init__(self) -> None:
        _require(self.delta_t_local > 0, "delta_t_local", "must be > 0")
        _require(self.delta_t_edge > 0, "delta_t_edge", "must be > 0")
        _require(self.c1_attenuation > 0, "c1_attenuation", "must be > 0")
        _require(self.c2_utility >= 0, "c2_utility", "must be >= 0")
        _require(self.cpu_freq_local > 0, "cpu_freq_local", "must be > 0")
        _require(self.cpu_freq_edge_alloc > 0, "cpu_freq_edge_alloc", "must be > 0")
        _require(self.k_local >= 0, "k_local", "must be >= 0")
        _require(self.s_cap_local > 0, "s_cap_local", "must be > 0")
        _require(self.s_cap_edge > 0, "s_cap_edge", "must be > 0")


@dataclass(frozen=True)
class ToleranceSettings:
    """Iteration caps and numeric tolerances for the solver stack."""

    inner_tol: float = 1e-7      # relative change of the penalized surrogate
    outer_tol: float = 1e-4      # max-norm change of (a, s / s_upper)
    bisect_tol: float = 1e-8     # absolute residual target for 1-D roots
    max_inner: int = 100
    max_outer: int = 50
    eps_aux: float = 1e-9        # floor for the auxiliary vectors u, v, z

    def __post_init__(self) -> None:
        _require(self.inner_tol >= 0, "tolerances.inner_tol", "must be >= 0")
        _require(self.outer_tol >= 0, "tolerances.outer_tol", "must be >= 0")
        _require(self.bisect_tol > 0, "tolerances.bisect_tol", "must be > 0")
        _require(self.max_inner >= 1, "tolerances.max_inner", "must be >= 1")
        _require(self.max_outer >= 1, "tolerances.max_outer", "must be >= 1")
        _require(self.eps_aux > 0, "tolerances.eps_aux", "must be > 0")


@dataclass(frozen=True)
class SystemConfig:
    """Full problem instance: device profiles plus shared system parameters.

    ``cost_weights`` = (c1, c2, c3) weight time, error and energy inside the
    raw cost; ``blend_weights`` = (w1, w2) trade that cost against utility.
    Construction validates that both branch costs stay strictly positive over
    the step box for every device; ``allow_cost_floor=True`` skips that check
    and instead floors costs at EPS_COST_FLOOR inside auxiliary updates.
    """

    ues: tuple[UeProfile, ...]
    k_edge: float
    s_edge_budget: float
    cost_weights: tuple[float, float, float]
    blend_weights: tuple[float, float]
    eps_fwd: float = 1.0
    tau_penalty: float = 1e5
    tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
    seed: int = 0
    n_starts: int = 1
    init_a: float | None = None
    init_s: float | None = None
    allow_cost_floor: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "ues", tuple(self.ues))
        object.__setattr__(self, "cost_weights", tuple(float(c) for c in self.cost_weights))
        object.__setattr__(self, "blend_weights", tuple(float(w) for w in self.blend_weights))
        _require(len(self.ues) >= 1, "ues", "need at least one device")
        _require(all(isinstance(u, UeProfile) for u in self.ues), "ues", "entries must be UeProfile")
        _require(self.k_edge >= 0, "k_edge", "must be >= 0")
        _require(self.s_edge_budget >= 0, "s_edge_budget", "must be >= 0")
        _require(len(self.cost_weights) == 3, "cost_weights", "need (c1, c2, c3)")
        _require(all(c >= 0 for c in self.cost_weights), "cost_weights", "must be >= 0")
        _require(len(self.blend_weights) == 2, "blend_weights", "need (w1, w2)")
        _require(all(w >= 0 for w in self.blend_weights), "blend_weights", "must be >= 0")
        _require(0 < self.eps_fwd <= 1, "eps_fwd", "must lie in (0, 1]")
        _require(self.tau_penalty > 0, "tau_penalty", "must be > 0")
        _require(self.n_starts >= 1, "n_starts", "must be >= 1")
        _require(self.seed >= 0, "seed", "must be >= 0")
        if self.init_a is not None:
            _require(0 <= self.init_a <= 1, "init_a", "must lie in [0, 1]")
        if self.init_s is not None:
            _require(self.init_s >= 0, "init_s", "must be >= 0")
        if not self.allow_cost_floor:
            bad = nonpositive_cost_devices(self)
            _require(
                not bad,
                "cost_weights/blend_weights",
                "net cost is not strictly positive over the step box for "
                f"device(s) {bad}; lower the utility weight or set "
                "allow_cost_floor=True",
            )

    @property
    def n_ues(self) -> int:
        return len(self.ues)


@dataclass(frozen=True)
class Params:
    """Vectorized per-device constants; the solver's working representation.

    Branch-indexed pairs hold (local, edge) arrays.  ``e_slope`` is
    joules per step: k * delta_t * f^3.
    """

    dt: tuple[np.ndarray, np.ndarray]
    e_slope: tuple[np.ndarray, np.ndarray]
    c1: np.ndarray
    c2: np.ndarray
    caps: tuple[np.ndarray, np.ndarray]
    eps_fwd: float
    cw: tuple[float, float, float]
    w1: float
    w2: float
    budget: float
    tau: float
    eps_aux: float
    allow_floor: bool
    n: int

    @property
    def s_upper(self) -> float:
        """Global step search bound: the largest cap over devices/branches."""
        return float(max(self.caps[0].max(), self.caps[1].max()))


def params(cfg: SystemConfig) -> Params:
    """Build the vectorized parameter block for a configuration."""
    ues = cfg.ues
    dt0 = np.array([u.delta_t_local for u in ues])
    dt1 = np.array([u.delta_t_edge for u in ues])
    f3 = np.array([u.cpu_freq_local for u in ues]) ** 3
    g3 = np.array([u.cpu_freq_edge_alloc for u in ues]) ** 3
    k_loc = np.array([u.k_local for u in ues])
    return Params(
        dt=(dt0, dt1),
        e_slope=(k_loc * dt0 * f3, cfg.k_edge * dt1 * g3),
        c1=np.array([u.c1_attenuation for u in ues]),
        c2=np.array([u.c2_utility for u in ues]),
        caps=(
            np.array([u.s_cap_local for u in ues]),
            np.array([u.s_cap_edge for u in ues]),
        ),
        eps_fwd=cfg.eps_fwd,
        cw=cfg.cost_weights,
        w1=cfg.blend_weights[0],
        w2=cfg.blend_weights[1],
        budget=cfg.s_edge_budget,
        tau=cfg.tau_penalty,
        eps_aux=cfg.tolerances.eps_aux,
        allow_floor=cfg.allow_cost_floor,
        n=len(ues),
    )


@dataclass(frozen=True)
class Allocation:
    """Decision pair: offload indicators ``a`` and step counts ``s``."""

    a: np.ndarray
    s: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float)
        s = np.array(self.s, dtype=float)
        if a.shape != s.shape or a.ndim != 1:
            raise ConfigError("a/s: must be 1-D vectors of equal length")
        a.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-constraint slack of an allocation; positive slack means satisfied."""

    feasible: bool
    edge_slack: float          # budget - sum(a * s)
    cap_slack: np.ndarray      # (1 - a) * cap0 + a * cap1 - s, per device
    box_violation: float       # worst excursion of a outside [0,1] or s below 0


# ---------------------------------------------------------------------------
# vectorized evaluators (arrays broadcast over a trailing device axis)

def branch_time(p: Params, s, r: int):
    return s * p.dt[r]


def branch_error(p: Params, s):
    return p.eps_fwd * np.exp(-s * p.c1)


def branch_energy(p: Params, s, r: int):
    return s * p.e_slope[r]


def branch_utility(p: Params, s):
    return 1.0 - np.exp(-s * p.c2)


def branch_cost(p: Params, s, r: int):
    """Blended net cost of one branch: w1*(c1*T + c2*err + c3*E) - w2*U."""
    c1w, c2w, c3w = p.cw
    raw = c1w * branch_time(p, s, r) + c2w * branch_error(p, s) + c3w * branch_energy(p, s, r)
    return p.w1 * raw - p.w2 * branch_utility(p, s)


def branch_cost_deriv(p: Params, s, r: int):
    """d/ds of branch_cost; increasing in s (the cost is convex)."""
    c1w, c2w, c3w = p.cw
    raw = c1w * p.dt[r] - c2w * p.c1 * branch_error(p, s) + c3w * p.e_slope[r]
    return p.w1 * raw - p.w2 * p.c2 * np.exp(-s * p.c2)


def blended_cost(p: Params, a, s):
    return (1.0 - a) * branch_cost(p, s, 0) + a * branch_cost(p, s, 1)


def objective_value(p: Params, a, s) -> float:
    """Total blended cost over devices (the quantity the solver minimizes)."""
    return float(np.sum(blended_cost(p, a, s), axis=-1))


def branch_cost_min(p: Params, r: int, lo=None, hi=None):
    """Exact minimizer and minimum of the convex branch cost on [lo, hi]."""
    lo = np.zeros(p.n) if lo is None else np.broadcast_to(np.asarray(lo, float), (p.n,))
    hi = p.caps[r] if hi is None else np.broadcast_to(np.asarray(hi, float), (p.n,))
    s_min = deriv_root(p, r, lo, hi)
    return s_min, branch_cost(p, s_min, r)


def deriv_root(p: Params, r: int, lo, hi, shift=0.0, iters: int = 80):
    """Root of branch_cost_deriv + shift on [lo, hi], clamped to the ends.

    The derivative is non-decreasing, so plain bisection is exact.  ``shift``
    adds a constant (a budget price) to the derivative.
    """
    lo = np.asarray(lo, float).copy()
    hi = np.asarray(hi, float).copy()
    d_lo = branch_cost_deriv(p, lo, r) + shift
    d_hi = branch_cost_deriv(p, hi, r) + shift
    out_lo = d_lo >= 0          # already increasing at the left end
    out_hi = d_hi <= 0          # still decreasing at the right end
    a, b = lo.copy(), hi.copy()
    for _ in range(iters):
        mid = 0.5 * (a + b)
        pos = branch_cost_deriv(p, mid, r) + shift >= 0
        b = np.where(pos, mid, b)
        a = np.where(pos, a, mid)
    root = 0.5 * (a + b)
    root = np.where(out_lo, lo, root)
    root = np.where(out_hi, hi, root)
    return root


def nonpositive_cost_devices(cfg: SystemConfig) -> list[int]:
    """Indices of devices whose branch cost dips to <= 0 on [0, max cap].

    Used by construction-time validation: the surrogate machinery divides by
    these costs, so the default is to reject such weight settings.
    """
    p = params(cfg)
    bad: set[int] = set()
    hi = np.maximum(p.caps[0], p.caps[1])
    for r in (0, 1):
        _, r_min = branch_cost_min(p, r, lo=np.zeros(p.n), hi=hi)
        bad.update(np.nonzero(r_min <= 0.0)[0].tolist())
    return sorted(bad)


# ---------------------------------------------------------------------------
# scalar operations on a configuration

def _branch(mode: Branch) -> int:
    if mode not in _BRANCH_INDEX:
        raise ConfigError(f"mode: expected 'local' or 'edge', got {mode!r}")
    return _BRANCH_INDEX[mode]


def _check_steps(s_n: float) -> float:
    if s_n < 0:
        raise ConfigError(f"s_n: step count must be >= 0, got {s_n}")
    return float(s_n)


def computation_time(cfg: SystemConfig, n: int, s_n: float, mode: Branch) -> float:
    """Seconds to run s_n steps for device n on the given branch."""
    s_n = _check_steps(s_n)
    u = cfg.ues[n]
    dt = u.delta_t_local if _branch(mode) == 0 else u.delta_t_edge
    return s_n * dt


def average_error(cfg: SystemConfig, n: int, s_n: float) -> float:
    """Residual content error after s_n reverse steps; decays exponentially."""
    s_n = _check_steps(s_n)
    return cfg.eps_fwd * float(np.exp(-s_n * cfg.ues[n].c1_attenuation))


def energy(cfg: SystemConfig, n: int, s_n: float, mode: Branch) -> float:
    """Joules consumed by s_n steps for device n on the given branch."""
    s_n = _check_steps(s_n)
    u = cfg.ues[n]
    if _branch(mode) == 0:
        return u.k_local * computation_time(cfg, n, s_n, mode) * u.cpu_freq_local**3
    return cfg.k_edge * computation_time(cfg, n, s_n, mode) * u.cpu_freq_edge_alloc**3


def utility(cfg: SystemConfig, n: int, s_n: float) -> float:
    """Saturating alignment gain of extra steps, in [0, 1)."""
    s_n = _check_steps(s_n)
    return 1.0 - float(np.exp(-s_n * cfg.ues[n].c2_utility))


def net_cost(cfg: SystemConfig, n: int, s_n: float, mode: Branch) -> float:
    """Blended per-device cost: w1*(c1*T + c2*err + c3*E) - w2*U."""
    s_n = _check_steps(s_n)
    p = params(cfg)
    return float(branch_cost(p, np.full(p.n, s_n), _branch(mode))[n])


def net_cost_deriv(cfg: SystemConfig, n: int, s_n: float, mode: Branch) -> float:
    """Analytic d/ds of net_cost at s_n."""
    s_n = _check_steps(s_n)
    p = params(cfg)
    return float(branch_cost_deriv(p, np.full(p.n, s_n), _branch(mode))[n])


def objective(cfg: SystemConfig, alloc: Allocation) -> float:
    """Original mixed objective: sum of branch costs selected by ``a``.

    Defined for fractional ``a`` as the a-weighted blend of the two branches.
    """
    p = params(cfg)
    _validate_alloc(p, alloc)
    return objective_value(p, alloc.a, alloc.s)


def _validate_alloc(p: Params, alloc: Allocation) -> None:
    if alloc.a.shape != (p.n,):
        raise ConfigError(f"allocation: expected {p.n} devices, got {alloc.a.shape[0]}")


def check_feasibility(cfg: SystemConfig, alloc: Allocation, tol: float = 0.0) -> FeasibilityReport:
    """Slack report for the budget, per-device caps and the [0,1]/s>=0 boxes."""
    p = params(cfg)
    _validate_alloc(p, alloc)
    a, s = alloc.a, alloc.s
    edge_slack = float(p.budget - np.sum(a * s))
    cap_slack = (1.0 - a) * p.caps[0] + a * p.caps[1] - s
    box_violation = float(max(np.max(-a, initial=0.0), np.max(a - 1.0, initial=0.0),
                              np.max(-s, initial=0.0), 0.0))
    feasible = bool(edge_slack >= -tol and cap_slack.min() >= -tol and box_violation <= tol)
    return FeasibilityReport(feasible, edge_slack, cap_slack, box_violation)


def with_overrides(cfg: SystemConfig, **changes) -> SystemConfig:
    """Return a copy of cfg with the given fields replaced (re-validated)."""
    return replace(cfg, **changes)
