#!/usr/bin/env python3
"""Regenerate the reference CSVs under data/ used by the plotting package's
tests and as rendering examples.  Output is deterministic, so reruns must be
byte-identical."""
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

from run_consumption_study import main as consumption
from run_utility_study import main as utility

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    DATA.mkdir(exist_ok=True)
    consumption(str(DATA / "reference_consumption.csv"))
    utility(str(DATA / "reference_utility"))


if __name__ == "__main__":
    main()
