"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 ingest, 4 fit, 5 shape mismatch.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigError, DomainError, FitError, IngestError, SchemaError, SizeError
from .estimator import fit_network, rollout_predict
from .experiments import convergence_study, prediction_study
from .model import EarlyStop, NodeConfig, validate_series
from .network import influence_ranking, spectral_cluster
from .simulation import (Gaussian, convergence_design, gen_ground_truth, parse_noise,
                         sim9_design, sim36_design, simulate_series)
from .stats import per_node_rmse

EXIT_USAGE, EXIT_INGEST, EXIT_FIT, EXIT_SHAPE = 2, 3, 4, 5

log = logging.getLogger("simam")

PRESET_DESIGNS = {"sim9": sim9_design, "sim36": sim36_design, "convergence": convergence_design}

SCALES = {
    # preset -> scale -> settings
    "convergence": {
        "desk": {"T_grid": list(range(100, 601, 100)), "replicates": 20},
        "paper": {"T_grid": list(range(100, 1051, 50)), "replicates": 100},
    },
    "predict9": {
        "desk": {"replicates": 20, "max_iters": 300},
        "paper": {"replicates": 50, "max_iters": 300},
    },
    "predict36": {
        "desk": {"replicates": 10, "max_iters": 300},
        "paper": {"replicates": 50, "max_iters": 300},
    },
}


class UsageError(Exception):
    pass


def _manifest(command, args):
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}
    return {"command": command, "flags": flags}


def _default_threads():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args):
    if args.paper_design:
        design = PRESET_DESIGNS[args.paper_design]()
        if args.noise:
            design = dataclasses.replace(design, noise=parse_noise(args.noise))
        M, s_star, links, noise = design.M, design.s_star, design.link_indices(), design.noise
        T = args.T if args.T is not None else design.T
    else:
        if args.M is None or args.T is None or args.s_star is None:
            raise UsageError("--M, --T and --s-star are required without --paper-design")
        M, T, s_star = args.M, args.T, args.s_star
        links = tuple(range(1, M + 1))
        try:
            noise = parse_noise(args.noise) if args.noise else Gaussian(0.05)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    if not 1 <= s_star <= M:
        raise UsageError(f"--s-star must lie in [1, M={M}]")
    if T < 2:
        raise UsageError("--T must be >= 2")
    ss = np.random.SeedSequence(args.seed)
    gt_seed, series_seed = ss.spawn(2)
    truth = gen_ground_truth(M, s_star, links, noise, gt_seed)
    X, _ = simulate_series(truth, T, series_seed)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    io.write_series_csv(f"{prefix}_series.csv", X)
    io.write_json(f"{prefix}_truth.json", truth.to_dict())
    io.write_json(f"{prefix}_manifest.json", _manifest("simulate", args))
    print(f"wrote {prefix}_series.csv ({T + 1} x {M})")
    return 0


# --------------------------------------------------------------------------
# fit / predict


def _parse_sparsity(value):
    if value == "lasso-cv":
        return None
    try:
        s = int(value)
    except ValueError:
        raise UsageError("--sparsity must be an integer or 'lasso-cv'") from None
    if s < 1:
        raise UsageError("--sparsity must be >= 1")
    return s


def _parse_early_stop(value):
    if value is None:
        return None
    try:
        frac, patience = value.split(",")
        return EarlyStop(float(frac), int(patience))
    except (ValueError, ConfigError) as exc:
        raise UsageError(f"--early-stop expects FRAC,PATIENCE ({exc})") from None


def cmd_fit(args):
    if not 0.0 < args.train_frac <= 1.0:
        raise UsageError("--train-frac must lie in (0, 1]")
    try:
        cfg = NodeConfig(sparsity=_parse_sparsity(args.sparsity), step_size=args.step_size,
                         max_iters=args.max_iters, init=args.init,
                         early_stop=_parse_early_stop(args.early_stop))
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    X = io.read_series_csv(args.input)
    if args.train_frac < 1.0:
        X = X.head(int(round(X.T * args.train_frac)) + 1)
    try:
        cfg.check(X.M)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    model = fit_network(X, cfg, rng_seed=args.seed, threads=args.threads)
    model.manifest = _manifest("fit", args)
    model.manifest["flags"].pop("threads", None)
    io.write_model(args.out, model)
    print(f"wrote {args.out} (M={model.M}, T={X.T})")
    return 0


def cmd_predict(args):
    model = io.read_model(args.model)
    X = io.read_series_csv(args.input, min_transitions=1)
    if X.M != model.M:
        print(f"error: model has M={model.M} nodes but {args.input} has {X.M} columns",
              file=sys.stderr)
        return EXIT_SHAPE
    pred = rollout_predict(model, X)
    io.write_matrix_csv(args.out, pred, header=[f"node_{j}" for j in range(model.M)])
    rmse = per_node_rmse(pred, X.responses)
    metrics = {
        "n_predictions": int(pred.shape[0]),
        "per_node_rmse": rmse.tolist(),
        "per_node_mse": (rmse ** 2).tolist(),
        "mse": float(np.mean((pred - X.responses) ** 2)),
        "manifest": _manifest("predict", args),
    }
    metrics_path = args.metrics or f"{args.out}.metrics.json"
    io.write_json(metrics_path, metrics)
    print(f"wrote {args.out} and {metrics_path}")
    return 0


# --------------------------------------------------------------------------
# experiment


def cmd_experiment(args):
    if args.replicates is not None and args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    settings = dict(SCALES[args.preset][args.scale])
    if args.replicates is not None:
        settings["replicates"] = args.replicates
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        noise = parse_noise(args.noise) if args.noise else Gaussian(0.05)
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    if args.preset == "convergence":
        design = convergence_design()
        design = dataclasses.replace(design, noise=noise)
        report, rate = convergence_study(design, settings["T_grid"], settings["replicates"],
                                         seed=args.seed, workers=args.threads)
        pairs = [(float(r["x"]) ** (-1.0 / 3.0), r["mean"]) for r in report.select("network_rmse")]
        io.write_rows(out / "convergence_cuberoot.csv", ["T_inv_cuberoot", "mean_network_rmse"],
                      pairs)
        if rate is None:
            print("rate fit: absent (fewer than two T values)")
        else:
            print(f"log-log slope {rate['loglog_slope']:.4f}, "
                  f"R^2 vs T^(-1/3) {rate['cuberoot_r2']:.4f}")
        n_ok = sum(r["n"] for r in report.rows)
    else:
        make = sim9_design if args.preset == "predict9" else sim36_design
        design = make(noise)
        report, outcomes = prediction_study(design, settings["replicates"], seed=args.seed,
                                            max_iters=settings["max_iters"],
                                            workers=args.threads, name=args.preset)
        io.write_rows(out / f"{args.preset}_replicates.csv",
                      ["replicate", "simam_test_mse", "lasso_test_mse", "simam_train_mse",
                       "lasso_train_mse", "network_rmse"],
                      [(i, o["simam_test"], o["lasso_test"], o["simam_train"], o["lasso_train"],
                        o["network_rmse"]) for i, o in enumerate(outcomes)])
        print(f"SIMAM below LASSO on test MSE in {report.metadata['simam_beats_lasso']}"
              f"/{len(outcomes)} replicates")
        n_ok = len(outcomes)
    report.metadata["manifest"] = _manifest("experiment", args)
    report.write_csv(out / f"{args.preset}_report.csv")
    report.write_json(out / f"{args.preset}_report.json")
    if n_ok == 0:
        print("error: every replicate failed", file=sys.stderr)
        return EXIT_FIT
    return 0


# --------------------------------------------------------------------------
# cluster


def cmd_cluster(args):
    model = io.read_model(args.model)
    if args.rank_influence:
        ranking = influence_ranking(model.network)
        rows = [(rank, node, total) for rank, (node, total) in enumerate(ranking, start=1)]
        io.write_rows(args.out, ["rank", "node_id", "row_sum"], rows)
    else:
        if args.k_clusters is None:
            raise UsageError("give --k-clusters K or --rank-influence")
        if not 1 <= args.k_clusters <= model.M:
            raise UsageError(f"--k-clusters must lie in [1, M={model.M}]")
        labels = spectral_cluster(model.network, args.k_clusters, seed=args.seed)
        io.write_rows(args.out, ["node_id", "label"], list(enumerate(labels.tolist())))
    print(f"wrote {args.out}")
    return 0


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="simam", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic series with known network")
    s.add_argument("--M", type=int)
    s.add_argument("--T", type=int)
    s.add_argument("--s-star", type=int)
    s.add_argument("--noise", help="gaussian:SIGMA or uniform:A (default gaussian:0.05)")
    s.add_argument("--links", choices=["scaled-logistic"], default="scaled-logistic")
    s.add_argument("--paper-design", choices=sorted(PRESET_DESIGNS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit the network to a series CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--sparsity", default="lasso-cv", help="integer or 'lasso-cv'")
    f.add_argument("--step-size", type=float, default=0.1)
    f.add_argument("--max-iters", type=int, default=2000)
    f.add_argument("--init", choices=["paper", "lasso"], default="paper")
    f.add_argument("--early-stop", metavar="FRAC,PATIENCE")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--train-frac", type=float, default=1.0)
    f.add_argument("--threads", type=int, default=_default_threads())
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="one-step-ahead predictions from a fitted model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--metrics", help="metrics JSON path (default: OUT.metrics.json)")
    pr.set_defaults(func=cmd_predict)

    e = sub.add_parser("experiment", help="run a simulation study preset")
    e.add_argument("--preset", choices=sorted(SCALES), required=True)
    e.add_argument("--scale", choices=["desk", "paper"], default="desk")
    e.add_argument("--replicates", type=int)
    e.add_argument("--noise", help="gaussian:SIGMA or uniform:A (default gaussian:0.05)")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--threads", type=int, default=_default_threads())
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_experiment)

    c = sub.add_parser("cluster", help="spectral clusters or influence ranking of a model")
    c.add_argument("--model", required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--k-clusters", type=int)
    g.add_argument("--rank-influence", action="store_true")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_cluster)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"simam {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST if args.command == "fit" else EXIT_SHAPE
    except FitError as exc:
        print(f"error: fit failed for nodes {exc.nodes}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST


if __name__ == "__main__":
    sys.exit(main())
