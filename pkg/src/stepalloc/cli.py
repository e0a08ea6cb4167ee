"""Command-line front end: single solves, sweeps, oracle comparison, the
random baseline and config generation.

Exit codes: 0 success, 1 invalid configuration, 2 solver did not converge
(results are still written), 3 internal error.  Machine-readable output goes
to --out; stdout carries progress only.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .errors import ConfigError, SolverError, StepAllocError
from .model import SystemConfig, ToleranceSettings, UeProfile
from .experiments import (
    ExperimentRecord,
    SweepSpec,
    config_metadata,
    default_config,
    random_baseline,
    run_sweep,
    write_records,
    _solve_record,
)
from .oracle import brute_force
from .sca import inter_solve, objective_breakdown
from . import model

log = logging.getLogger("stepalloc")

_UE_FIELDS = {f.name for f in dataclasses.fields(UeProfile)}
_TOL_FIELDS = {f.name for f in dataclasses.fields(ToleranceSettings)}
_CFG_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_META_KEY = "_meta"   # optional provenance block, ignored on load


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def config_to_dict(cfg: SystemConfig, meta: dict | None = None) -> dict:
    data = {
        "ues": [dataclasses.asdict(u) for u in cfg.ues],
        "k_edge": cfg.k_edge,
        "s_edge_budget": cfg.s_edge_budget,
        "cost_weights": list(cfg.cost_weights),
        "blend_weights": list(cfg.blend_weights),
        "eps_fwd": cfg.eps_fwd,
        "tau_penalty": cfg.tau_penalty,
        "tolerances": dataclasses.asdict(cfg.tolerances),
        "seed": cfg.seed,
        "n_starts": cfg.n_starts,
        "init_a": cfg.init_a,
        "init_s": cfg.init_s,
        "allow_cost_floor": cfg.allow_cost_floor,
    }
    if meta is not None:
        data[_META_KEY] = meta
    return data


def config_from_dict(data: dict) -> SystemConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    data = dict(data)
    data.pop(_META_KEY, None)
    _reject_unknown(data, _CFG_FIELDS, "config")
    if "ues" not in data:
        raise ConfigError("ues: missing required key")
    ues = []
    for i, entry in enumerate(data["ues"]):
        if not isinstance(entry, dict):
            raise ConfigError(f"ues[{i}]: must be an object")
        _reject_unknown(entry, _UE_FIELDS, f"ues[{i}]")
        ues.append(UeProfile(**entry))
    kwargs = {k: v for k, v in data.items() if k != "ues"}
    if "tolerances" in kwargs:
        tol = kwargs["tolerances"]
        if not isinstance(tol, dict):
            raise ConfigError("tolerances: must be an object")
        _reject_unknown(tol, _TOL_FIELDS, "tolerances")
        kwargs["tolerances"] = ToleranceSettings(**tol)
    for key in ("cost_weights", "blend_weights"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return SystemConfig(ues=tuple(ues), **kwargs)


def load_config(path: str) -> SystemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}")
    return config_from_dict(data)


def load_sweep_spec(path: str) -> SweepSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("sweep: top level must be a JSON object")
    data = dict(data)
    data.pop(_META_KEY, None)
    allowed = {"base", "swept_param", "values", "seeds", "methods", "grid_step"}
    _reject_unknown(data, allowed, "sweep")
    for key in ("base", "swept_param", "values", "seeds", "methods"):
        if key not in data:
            raise ConfigError(f"sweep.{key}: missing required key")
    base = config_from_dict(data["base"])
    values = data["values"]
    if data["swept_param"] == "cost_weights":
        values = tuple(tuple(v) for v in values)
    return SweepSpec(base=base, swept_param=data["swept_param"],
                     values=tuple(values), seeds=tuple(data["seeds"]),
                     methods=tuple(data["methods"]),
                     grid_step=float(data.get("grid_step", 1.0)))


def _single_record_csv(out: str, rec: ExperimentRecord, include_timing: bool) -> None:
    write_records(out, [rec], include_timing)


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v progress, -vv debug")
    parser = argparse.ArgumentParser(
        prog="stepalloc",
        description="Joint edge-offloading and generation-step allocation solver",
        parents=[shared])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_out=True):
        sp.add_argument("--config", required=True, help="path to config JSON")
        if needs_out:
            sp.add_argument("--out", required=True, help="output file path")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--timing", action="store_true",
                        help="write measured wall times instead of zeros")

    sp = sub.add_parser("solve", parents=[shared], help="solve one configuration")
    add_common(sp)

    sp = sub.add_parser("sweep", parents=[shared], help="run a sweep specification")
    add_common(sp)
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers")

    sp = sub.add_parser("baseline", parents=[shared], help="random baseline allocation")
    add_common(sp)

    sp = sub.add_parser("compare-oracle", parents=[shared],
                        help="solver vs exhaustive oracle")
    add_common(sp)
    sp.add_argument("--grid-step", type=float, default=1.0)

    sp = sub.add_parser("print-default-config", parents=[shared],
                        help="write the reference configuration as JSON")
    sp.add_argument("--out", default=None, help="file path (default stdout)")
    return parser


def _apply_seed(cfg: SystemConfig, seed: int | None) -> SystemConfig:
    if seed is None:
        return cfg
    return model.with_overrides(cfg, seed=seed)


def _cmd_solve(args) -> int:
    cfg = _apply_seed(load_config(args.config), args.seed)
    log.info("solving %d devices, budget %g", cfg.n_ues, cfg.s_edge_budget)
    spec = SweepSpec(base=cfg, swept_param="s_edge_budget",
                     values=(cfg.s_edge_budget,), seeds=(cfg.seed,),
                     methods=("proposed",))
    rec = _solve_record(spec, "proposed", cfg.seed, 0, cfg.s_edge_budget)
    _single_record_csv(args.out, rec, args.timing)
    log.info("status %s, objective %g", rec.status, rec.objective)
    if rec.status.startswith("error"):
        return 3
    return 0 if rec.status == "converged" else 2


def _cmd_baseline(args) -> int:
    cfg = _apply_seed(load_config(args.config), args.seed)
    spec = SweepSpec(base=cfg, swept_param="s_edge_budget",
                     values=(cfg.s_edge_budget,), seeds=(cfg.seed,),
                     methods=("baseline",))
    rec = _solve_record(spec, "baseline", cfg.seed, 0, cfg.s_edge_budget)
    _single_record_csv(args.out, rec, args.timing)
    log.info("baseline objective %g", rec.objective)
    return 0


def _cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.config)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seeds=(args.seed,))
    log.info("sweep: %d values x %d seeds x %d methods",
             len(spec.values), len(spec.seeds), len(spec.methods))
    records = run_sweep(spec, jobs=args.jobs)
    write_records(args.out, records, args.timing)
    if any(r.status.startswith("error") for r in records):
        return 3
    proposed = [r for r in records if r.method == "proposed"]
    if any(r.status != "converged" for r in proposed):
        return 2
    return 0


def _cmd_compare_oracle(args) -> int:
    cfg = _apply_seed(load_config(args.config), args.seed)
    log.info("solver run on %d devices", cfg.n_ues)
    report = inter_solve(cfg)
    log.info("oracle enumeration (grid step %g)", args.grid_step)
    oracle = brute_force(cfg, args.grid_step)
    ratio = (report.objective_binary / oracle.best_objective
             if oracle.best_objective != 0 else float("inf"))
    payload = {
        "solver_objective": report.objective_binary,
        "oracle_objective": oracle.best_objective,
        "ratio": ratio,
        "solver_status": report.status,
        "solver_offloaded": int(report.allocation_binary.a.sum()),
        "oracle_offloaded": int(oracle.best_a.sum()),
        "assignments_evaluated": oracle.assignments_evaluated,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("solver %g vs oracle %g (ratio %.4f)",
             report.objective_binary, oracle.best_objective, ratio)
    return 0 if report.status == "converged" else 2


def _cmd_print_default(args) -> int:
    cfg = default_config()
    text = json.dumps(config_to_dict(cfg, meta=config_metadata()), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    log.handlers.clear()
    handler = logging.StreamHandler(sys.stdout)   # progress is stdout-only
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.addHandler(handler)
    log.setLevel(level)
    log.propagate = False
    commands = {
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "baseline": _cmd_baseline,
        "compare-oracle": _cmd_compare_oracle,
        "print-default-config": _cmd_print_default,
    }
    try:
        return commands[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except StepAllocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
