#!/usr/bin/env python3
"""Budget sweeps at blend (0.3, 0.7) for three local step caps.

Writes one CSV per cap so each file is one curve.  Usage:
run_utility_study.py [out_prefix]
"""
import sys

from stepalloc.experiments import run_sweep, utility_study_specs, write_records


def main(prefix: str = "utility_study") -> None:
    for cap, spec in utility_study_specs():
        records = run_sweep(spec)
        path = f"{prefix}_cap{int(cap)}.csv"
        write_records(path, records)
        print(f"cap {cap:g}: wrote {len(records)} records to {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
