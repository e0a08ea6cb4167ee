#!/usr/bin/env python3
"""Budget sweep over every weight preset plus the random baseline.

Writes one CSV combining all presets; series are distinguished by their
(c1, c2, c3) columns.  Usage: run_consumption_study.py [out.csv]
"""
import sys

from stepalloc.experiments import (
    WEIGHT_PRESETS,
    consumption_sweep_spec,
    run_sweep,
    write_records,
)


def main(out_path: str = "consumption_study.csv") -> None:
    records = []
    for preset in WEIGHT_PRESETS:
        methods = ("proposed", "baseline") if preset == "equal" else ("proposed",)
        spec = consumption_sweep_spec(preset=preset, methods=methods)
        print(f"preset {preset}: {len(spec.values)} budgets x {len(methods)} methods")
        records.extend(run_sweep(spec))
    write_records(out_path, records)
    print(f"wrote {len(records)} records to {out_path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
