#!/usr/bin/env python3
"""Estimation error against sample size for the nine-node logistic design.

Writes the per-T report plus a CSV of mean error against T^(-1/3), and prints
the log-log slope.  ``--scale paper`` uses T = 100..1050 and 100 replicates.
"""
import argparse
import sys

from simam.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="results/convergence")
    a = p.parse_args()
    sys.exit(main(["experiment", "--preset", "convergence", "--scale", a.scale,
                   "--seed", str(a.seed), "--out-dir", a.out_dir]))
