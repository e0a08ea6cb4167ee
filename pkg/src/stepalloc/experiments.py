"""Experiment harness: reference configurations, seeded instance families,
the random baseline, parameter sweeps and their CSV serialization.

Cost weights are stored as literal numbers but built by presets that
normalize each cost component by its magnitude at half the local step cap, so
"equal weights" means equal influence rather than equal raw coefficients (raw
equal weights would let the energy term dwarf everything else).
"""
from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, StepAllocError
from . import model
from .model import Allocation, SystemConfig, ToleranceSettings, UeProfile, params
from .oracle import brute_force
from .sca import Components, inter_solve, objective_breakdown

__all__ = [
    "WEIGHT_PRESETS",
    "ASSUMED_DEFAULT_FIELDS",
    "CSV_HEADER",
    "SweepSpec",
    "ExperimentRecord",
    "normalized_cost_weights",
    "default_config",
    "config_metadata",
    "sample_instance",
    "random_baseline",
    "run_sweep",
    "write_records",
    "read_records",
    "consumption_sweep_spec",
    "utility_study_specs",
    "BUDGET_GRID",
    "UTILITY_STUDY_CAPS",
]

# emphasis -> raw (time, error, energy) mix, normalized to sum 1 before the
# per-component magnitude normalization is applied
WEIGHT_PRESETS = {
    "equal": (1.0, 1.0, 1.0),
    "time": (5.0, 1.0, 1.0),
    "error": (1.0, 5.0, 1.0),
    "energy": (1.0, 1.0, 5.0),
}

# defaults that are implementation choices rather than part of the reference
# scenario; echoed in emitted metadata so downstream users can tell them apart
ASSUMED_DEFAULT_FIELDS = ("C1", "C2", "S_caps", "weight_presets", "tolerances")

BUDGET_GRID = tuple(float(v) for v in range(1000, 10001, 1000))
UTILITY_STUDY_CAPS = (100.0, 200.0, 400.0)

CSV_HEADER = ("method,seed,swept_param,swept_value,c1,c2,c3,w1,w2,objective,"
              "T_total_s,accuracy,E_total_J,U_total,offloaded_count,"
              "iter_outer,iter_inner,wall_ms,status")

_SWEEPABLE = ("s_edge_budget", "cost_weights", "s_cap_local")


def normalized_cost_weights(ues, eps_fwd: float = 1.0, emphasis: str = "equal"):
    """(c1, c2, c3) scaled so each cost component is O(1) at the reference
    point s = local cap / 2 on the local branch."""
    if emphasis not in WEIGHT_PRESETS:
        raise ConfigError(f"emphasis: unknown preset {emphasis!r}; "
                          f"expected one of {sorted(WEIGHT_PRESETS)}")
    mix = np.array(WEIGHT_PRESETS[emphasis], dtype=float)
    mix /= mix.sum()
    s_ref = np.array([u.s_cap_local for u in ues]) / 2.0
    dt0 = np.array([u.delta_t_local for u in ues])
    c1 = np.array([u.c1_attenuation for u in ues])
    e_slope = np.array([u.k_local * u.delta_t_local * u.cpu_freq_local**3 for u in ues])
    t_ref = float(np.mean(dt0 * s_ref))
    err_ref = float(np.mean(eps_fwd * np.exp(-c1 * s_ref)))
    e_ref = float(np.mean(e_slope * s_ref))
    return (mix[0] / t_ref, mix[1] / err_ref, mix[2] / e_ref)


def _uniform_profiles(n_ues: int, s_cap_local: float, s_cap_edge: float,
                      c1: float, c2: float) -> tuple[UeProfile, ...]:
    return tuple(
        UeProfile(
            delta_t_local=1.0 / 500.0,
            delta_t_edge=1.0 / 1000.0,
            c1_attenuation=c1,
            c2_utility=c2,
            cpu_freq_local=1.5e9,
            cpu_freq_edge_alloc=1.0e10,
            k_local=1e-26,
            s_cap_local=s_cap_local,
            s_cap_edge=s_cap_edge,
        )
        for _ in range(n_ues)
    )


def default_config(n_ues: int = 30, *, s_cap_local: float = 200.0,
                   s_cap_edge: float = 500.0, preset: str = "equal",
                   blend: tuple[float, float] = (0.5, 0.5),
                   s_edge_budget: float = 5000.0, seed: int = 0,
                   c1: float = 0.05, c2: float = 0.02,
                   tau_penalty: float = 1e5,
                   allow_cost_floor: bool = False) -> SystemConfig:
    """Reference scenario: uniform devices with the default constants.

    Fixed per-step intervals 1/500 (local) and 1/1000 (edge), CPU rates
    1.5 GHz / 10 GHz, power coefficients 1e-26, full initial noise
    (eps_fwd = 1) and penalty weight 1e5.  Everything listed in
    ASSUMED_DEFAULT_FIELDS is an implementation default.
    """
    ues = _uniform_profiles(n_ues, s_cap_local, s_cap_edge, c1, c2)
    weights = normalized_cost_weights(ues, 1.0, preset)
    return SystemConfig(
        ues=ues,
        k_edge=1e-26,
        s_edge_budget=s_edge_budget,
        cost_weights=weights,
        blend_weights=blend,
        eps_fwd=1.0,
        tau_penalty=tau_penalty,
        seed=seed,
        allow_cost_floor=allow_cost_floor,
    )


def config_metadata(preset: str = "equal") -> dict:
    """Provenance notes emitted next to a dumped configuration."""
    return {
        "assumed_defaults": list(ASSUMED_DEFAULT_FIELDS),
        "weight_preset": preset,
        "note": "fields listed under assumed_defaults are implementation "
                "choices, not part of the reference scenario",
    }


def sample_instance(n_ues: int, seed: int, family: str = "default") -> SystemConfig:
    """Seeded random instance around the reference scenario.

    ``default`` jitters device constants mildly (used for the N=30 studies);
    ``mixed`` draws cheaper edge allocations, heterogeneous caps and a tight
    budget so that offloading is attractive for part of the population (used
    for the small oracle-comparison studies).  Draws that fail the positive-
    cost validation are redrawn deterministically.
    """
    family_code = {"default": 11, "mixed": 123}.get(family)
    if family_code is None:
        raise ConfigError(f"family: unknown instance family {family!r}")
    for attempt in range(60):
        rng = np.random.default_rng([family_code, n_ues, seed, attempt])
        try:
            return _draw_instance(rng, n_ues, seed, family)
        except ConfigError:
            continue
    raise ConfigError(f"family {family!r}: no valid draw after 60 attempts (seed {seed})")


def _draw_instance(rng: np.random.Generator, n_ues: int, seed: int, family: str) -> SystemConfig:
    if family == "default":
        # ranges keep the worst-corner device (cheap local energy, strong
        # utility, fast error decay) on the positive-cost side with margin
        f = rng.uniform(1.35e9, 1.65e9, n_ues)
        g = rng.uniform(0.95e10, 1.05e10, n_ues)
        c1 = rng.uniform(0.046, 0.054, n_ues)
        c2 = rng.uniform(0.005, 0.010, n_ues)
        cap0 = np.full(n_ues, 200.0)
        cap1 = np.full(n_ues, 500.0)
        budget = 5000.0
    else:
        f = rng.uniform(1.15e9, 2.0e9, n_ues)
        g = rng.uniform(1.8e9, 4.0e9, n_ues)
        c1 = rng.uniform(0.035, 0.08, n_ues)
        c2 = rng.uniform(0.004, 0.009, n_ues)
        cap0 = rng.integers(120, 251, n_ues).astype(float)
        cap1 = rng.integers(300, 601, n_ues).astype(float)
        budget = float(rng.integers(80, 501)) * n_ues / 6.0
    ues = tuple(
        UeProfile(
            delta_t_local=1.0 / 500.0,
            delta_t_edge=1.0 / 1000.0,
            c1_attenuation=float(c1[i]),
            c2_utility=float(c2[i]),
            cpu_freq_local=float(f[i]),
            cpu_freq_edge_alloc=float(g[i]),
            k_local=1e-26,
            s_cap_local=float(cap0[i]),
            s_cap_edge=float(cap1[i]),
        )
        for i in range(n_ues)
    )
    weights = normalized_cost_weights(ues, 1.0)
    return SystemConfig(
        ues=ues,
        k_edge=1e-26,
        s_edge_budget=budget,
        cost_weights=weights,
        blend_weights=(0.5, 0.5),
        seed=seed,
    )


def random_baseline(cfg: SystemConfig, seed: int) -> Allocation:
    """Coin-flip offloading with uniform step counts, projected onto the
    budget by proportional scaling and integer-rounded with largest-first
    trimming."""
    p = params(cfg)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, p.n).astype(float)
    cap = np.where(a == 1.0, p.caps[1], p.caps[0])
    s = rng.uniform(0.0, 1.0, p.n) * cap
    used = float(np.sum(s[a == 1.0]))
    if used > p.budget:
        scale = p.budget / used if used > 0 else 0.0
        s = np.where(a == 1.0, s * scale, s)
    s = np.floor(s + 0.5)
    s = np.minimum(s, np.floor(cap))
    while float(np.sum(s[a == 1.0])) > p.budget:
        masked = np.where(a == 1.0, s, -np.inf)
        idx = int(np.argmax(masked))
        if masked[idx] <= 0:
            break
        s[idx] -= 1.0
    return Allocation(a, s)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    swept_param: str                    # one of _SWEEPABLE
    values: tuple
    seeds: tuple[int, ...]
    methods: tuple[str, ...]            # proposed | baseline | oracle
    grid_step: float = 1.0              # oracle only

    def __post_init__(self) -> None:
        if self.swept_param not in _SWEEPABLE:
            raise ConfigError(f"swept_param: expected one of {_SWEEPABLE}, "
                              f"got {self.swept_param!r}")
        if not self.values:
            raise ConfigError("values: must be non-empty")
        if not self.methods:
            raise ConfigError("methods: must be non-empty")
        for m in self.methods:
            if m not in ("proposed", "baseline", "oracle"):
                raise ConfigError(f"methods: unknown method {m!r}")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class ExperimentRecord:
    method: str
    seed: int
    swept_param: str
    swept_value: float
    c1: float
    c2: float
    c3: float
    w1: float
    w2: float
    objective: float
    t_total_s: float
    accuracy: float
    e_total_j: float
    u_total: float
    offloaded_count: int
    iter_outer: int
    iter_inner: int
    wall_ms: float
    status: str


def apply_swept_value(base: SystemConfig, param: str, value) -> SystemConfig:
    """Instantiate one sweep point.  ``s_cap_local`` replaces every device's
    local cap while keeping the literal cost weights."""
    if param == "s_edge_budget":
        return replace(base, s_edge_budget=float(value))
    if param == "cost_weights":
        return replace(base, cost_weights=tuple(float(c) for c in value))
    if param == "s_cap_local":
        ues = tuple(replace(u, s_cap_local=float(value)) for u in base.ues)
        return replace(base, ues=ues)
    raise ConfigError(f"swept_param: cannot apply {param!r}")


def _swept_scalar(param: str, value, index: int) -> float:
    """CSV column value for a sweep point; vector sweeps record the index."""
    if param == "cost_weights":
        return float(index)
    return float(value)


def _solve_record(spec: SweepSpec, method: str, seed: int, index: int, value) -> ExperimentRecord:
    start = time.perf_counter()
    common = dict(method=method, seed=seed, swept_param=spec.swept_param,
                  swept_value=_swept_scalar(spec.swept_param, value, index),
                  c1=spec.base.cost_weights[0], c2=spec.base.cost_weights[1],
                  c3=spec.base.cost_weights[2], w1=spec.base.blend_weights[0],
                  w2=spec.base.blend_weights[1])
    try:
        cfg = replace(apply_swept_value(spec.base, spec.swept_param, value), seed=seed)
        c1, c2, c3 = cfg.cost_weights
        w1, w2 = cfg.blend_weights
        common.update(c1=c1, c2=c2, c3=c3, w1=w1, w2=w2)
        if method == "proposed":
            report = inter_solve(cfg)
            comp = report.components
            alloc = report.allocation_binary
            rec = ExperimentRecord(
                **common, objective=report.objective_binary,
                t_total_s=comp.t_total_s, accuracy=comp.accuracy,
                e_total_j=comp.e_total_j, u_total=comp.u_total,
                offloaded_count=int(alloc.a.sum()),
                iter_outer=report.iterations_outer,
                iter_inner=report.iterations_inner_total,
                wall_ms=(time.perf_counter() - start) * 1e3,
                status=report.status)
        elif method == "baseline":
            alloc = random_baseline(cfg, seed)
            comp = objective_breakdown(cfg, alloc)
            rec = ExperimentRecord(
                **common, objective=model.objective(cfg, alloc),
                t_total_s=comp.t_total_s, accuracy=comp.accuracy,
                e_total_j=comp.e_total_j, u_total=comp.u_total,
                offloaded_count=int(alloc.a.sum()), iter_outer=0, iter_inner=0,
                wall_ms=(time.perf_counter() - start) * 1e3, status="ok")
        else:  # oracle
            result = brute_force(cfg, spec.grid_step)
            alloc = Allocation(result.best_a, result.best_s)
            comp = objective_breakdown(cfg, alloc)
            rec = ExperimentRecord(
                **common, objective=result.best_objective,
                t_total_s=comp.t_total_s, accuracy=comp.accuracy,
                e_total_j=comp.e_total_j, u_total=comp.u_total,
                offloaded_count=int(alloc.a.sum()), iter_outer=0, iter_inner=0,
                wall_ms=(time.perf_counter() - start) * 1e3, status="ok")
    except StepAllocError as exc:
        rec = ExperimentRecord(
            **common, objective=float("nan"), t_total_s=float("nan"),
            accuracy=float("nan"), e_total_j=float("nan"), u_total=float("nan"),
            offloaded_count=0, iter_outer=0, iter_inner=0,
            wall_ms=(time.perf_counter() - start) * 1e3,
            status=f"error:{type(exc).__name__}")
    return rec


def _record_task(args) -> ExperimentRecord:
    return _solve_record(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[ExperimentRecord]:
    """Solve every (method, value, seed) combination of the sweep.

    Failures are captured per record in the status column.  Emission order is
    deterministic (method, then value, then seed, in the order listed in the
    spec) regardless of worker scheduling.
    """
    tasks = [
        (spec, method, seed, index, value)
        for method in spec.methods
        for index, value in enumerate(spec.values)
        for seed in spec.seeds
    ]
    if jobs <= 1:
        return [_record_task(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_record_task, tasks))


def consumption_sweep_spec(preset: str = "equal", budgets=BUDGET_GRID,
                           seeds=(0,), methods=("proposed", "baseline"),
                           n_ues: int = 30) -> SweepSpec:
    """Budget sweep for one weight preset, proposed against the baseline."""
    try:
        base = default_config(n_ues, preset=preset)
    except ConfigError:
        # utility can outgrow heavily-discounted costs; run floored
        base = default_config(n_ues, preset=preset, allow_cost_floor=True)
    return SweepSpec(base=base, swept_param="s_edge_budget",
                     values=tuple(budgets), seeds=tuple(seeds),
                     methods=tuple(methods))


def utility_study_specs(caps=UTILITY_STUDY_CAPS, budgets=BUDGET_GRID,
                        seeds=(0,), n_ues: int = 30) -> list[tuple[float, SweepSpec]]:
    """Budget sweeps at blend (0.3, 0.7) for several local step caps.

    The utility-heavy blend makes the local branch cost dip below zero, so
    these configurations run with the cost floor enabled.
    """
    specs = []
    for cap in caps:
        base = default_config(n_ues, s_cap_local=float(cap), blend=(0.3, 0.7),
                              allow_cost_floor=True)
        specs.append((float(cap), SweepSpec(base=base, swept_param="s_edge_budget",
                                            values=tuple(budgets), seeds=tuple(seeds),
                                            methods=("proposed",))))
    return specs


# ---------------------------------------------------------------------------
# CSV

def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def record_to_row(rec: ExperimentRecord, include_timing: bool = False) -> str:
    wall = rec.wall_ms if include_timing else 0.0
    return ",".join([
        rec.method, str(rec.seed), rec.swept_param, _fmt(rec.swept_value),
        _fmt(rec.c1), _fmt(rec.c2), _fmt(rec.c3), _fmt(rec.w1), _fmt(rec.w2),
        _fmt(rec.objective), _fmt(rec.t_total_s), _fmt(rec.accuracy),
        _fmt(rec.e_total_j), _fmt(rec.u_total), str(rec.offloaded_count),
        str(rec.iter_outer), str(rec.iter_inner), _fmt(wall), rec.status,
    ])


def write_records(path, records, include_timing: bool = False) -> None:
    """Write the records as UTF-8 CSV with the fixed header.

    By default the wall_ms column is written as 0 so identical inputs produce
    byte-identical files; pass include_timing=True to record measured times.
    """
    lines = [CSV_HEADER]
    lines.extend(record_to_row(r, include_timing) for r in records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_records(path) -> list[ExperimentRecord]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"csv: header mismatch in {path}")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        out.append(ExperimentRecord(
            method=parts[0], seed=int(parts[1]), swept_param=parts[2],
            swept_value=float(parts[3]), c1=float(parts[4]), c2=float(parts[5]),
            c3=float(parts[6]), w1=float(parts[7]), w2=float(parts[8]),
            objective=float(parts[9]), t_total_s=float(parts[10]),
            accuracy=float(parts[11]), e_total_j=float(parts[12]),
            u_total=float(parts[13]), offloaded_count=int(parts[14]),
            iter_outer=int(parts[15]), iter_inner=int(parts[16]),
            wall_ms=float(parts[17]), status=parts[18]))
    return out
