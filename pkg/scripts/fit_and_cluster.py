#!/usr/bin/env python3
"""Fit a network to a series CSV, then write spectral clusters and the influence ranking."""
import argparse
import sys
from pathlib import Path

from simam.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("series", help="CSV with one row per time point and one column per node")
    p.add_argument("--k-clusters", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="results/network")
    a = p.parse_args()
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = str(out / "model.json")
    for argv in (["fit", "--input", a.series, "--init", "lasso", "--seed", str(a.seed),
                  "--out", model],
                 ["cluster", "--model", model, "--k-clusters", str(a.k_clusters),
                  "--seed", str(a.seed), "--out", str(out / "clusters.csv")],
                 ["cluster", "--model", model, "--rank-influence",
                  "--out", str(out / "influence.csv")]):
        code = main(argv)
        if code:
            sys.exit(code)
