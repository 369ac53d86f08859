#!/usr/bin/env python3
"""SIMAM against the cross-validated LASSO on held-out one-step predictions.

Runs the nine-node design with Gaussian and uniform noise and the 36-node
design, each into its own directory under ``--out-dir``.
"""
import argparse
import sys
from pathlib import Path

from simam.cli import main

RUNS = [
    ("predict9", "gaussian:0.05", "m9_gaussian"),
    ("predict9", "uniform:0.1", "m9_uniform"),
    ("predict36", "gaussian:0.05", "m36_gaussian"),
]

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="results/prediction")
    a = p.parse_args()
    status = 0
    for preset, noise, name in RUNS:
        print(f"== {name}")
        status |= main(["experiment", "--preset", preset, "--scale", a.scale, "--noise", noise,
                        "--seed", str(a.seed), "--out-dir", str(Path(a.out_dir) / name)])
    sys.exit(status)
