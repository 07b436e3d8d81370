"""``curverewire`` command line.

Every subcommand writes its outputs under ``--out-dir`` and prints the
path of each file it produced. Exit codes: 0 success, 1 bad arguments or
numerical failure, 2 unreadable input, 3 training/evaluation graph mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from .curvature import METRICS, compute, curvature_profile
from .data import (
    Dataset,
    complete_graph,
    cycle_graph,
    gen_binary_tree,
    gen_erdos_renyi,
    gen_sbm,
    load_dataset,
    make_splits,
    path_graph,
    star_graph,
    two_triangle_bridge,
)
from .graph import GraphInputError, is_connected, largest_connected_component, read_edge_list
from .rewiring import RewiringConfig, RewiringConfigError, build_edge_bank
from .sgc import KERNELS, FingerprintMismatchError, ModelConfig, TrainConfig, TrainingDivergedError, evaluate, train
from .spectral import cheeger_constant, cheeger_mixing_check, spectral_report

log = logging.getLogger("curverewire")

EXIT_INPUT = 2
EXIT_FINGERPRINT = 3

GENERATORS = ("er", "sbm", "complete", "cycle", "path", "star", "tree", "bridge")


class InputError(Exception):
    pass


def _add_graph_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph source (an edge list or a generator)")
    g.add_argument("--graph", type=Path, help="edge list file: one 'u v' pair per line, optional 'n=' header")
    g.add_argument("--gen", choices=GENERATORS, help="generate a graph instead of reading one")
    g.add_argument("--n", type=int, default=100, help="nodes (er, complete, cycle, path), leaves (star), depth (tree)")
    g.add_argument("--p", type=float, default=0.08, help="edge probability for er")
    g.add_argument("--block-sizes", type=int, nargs="+", default=[50, 50], help="block sizes for sbm")
    g.add_argument("--p-in", type=float, default=0.5)
    g.add_argument("--p-out", type=float, default=0.02)


def _graph_from_args(args):
    if args.graph is not None:
        try:
            return read_edge_list(args.graph)
        except (OSError, GraphInputError, ValueError) as exc:
            raise InputError(f"cannot read graph {args.graph}: {exc}") from exc
    rng = np.random.default_rng(args.seed)
    gen = args.gen or "er"
    if gen == "er":
        return gen_erdos_renyi(args.n, args.p, rng)
    if gen == "sbm":
        return gen_sbm(args.block_sizes, args.p_in, args.p_out, rng).graph
    if gen == "bridge":
        return two_triangle_bridge()
    fixed = {"complete": complete_graph, "cycle": cycle_graph, "path": path_graph, "star": star_graph, "tree": gen_binary_tree}
    return fixed[gen](args.n)


def _connected(g, what: str):
    if g.n and not is_connected(g):
        sub, _ = largest_connected_component(g)
        log.warning("%s: input is disconnected; using its largest component (%d of %d nodes)", what, sub.n, g.n)
        return sub
    return g


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(path)


def _record(args, name: str, config: dict, outputs: dict, seconds: float) -> None:
    rec = ex.ExperimentRecord(command=name, config=config, seed=args.seed, outputs=outputs, wall_times={"total": seconds})
    _write(args.out_dir / f"{name}_record.json", rec.to_json())


# --- subcommands -------------------------------------------------------------


def cmd_curvature(args) -> int:
    g = _graph_from_args(args)
    vec = compute(g, args.metric)
    out = args.out or args.out_dir / f"curvature_{args.metric}.csv"
    vec.to_csv(g, out)
    print(out)
    prof = curvature_profile(g, args.metric)
    _write(args.out_dir / f"curvature_{args.metric}_profile.json", ex.dumps(prof))
    return 0


def cmd_spectral(args) -> int:
    g = _connected(_graph_from_args(args), "spectral")
    rep = spectral_report(g, args.epsilon).to_dict()
    ch = cheeger_constant(g)
    rep["cheeger"] = ch.to_dict()
    rep["h"], rep["method"] = ch.h, ch.method
    if ch.method == "exact":
        chk = cheeger_mixing_check(g, args.epsilon)
        rep["mixing_cheeger_check"] = {"lhs": chk.lhs, "rhs": chk.rhs, "holds": chk.holds}
    rep["n"], rep["m"] = g.n, g.m
    rep["fingerprint"] = g.fingerprint
    _write(args.out_dir / "spectral.json", ex.dumps(rep))
    return 0


def cmd_tradeoff(args) -> int:
    g = _connected(_graph_from_args(args), "tradeoff")
    rows = ex.tradeoff(g, args.steps, args.epsilon)
    path = args.out_dir / "tradeoff.csv"
    ex.write_trajectory_csv(rows, path)
    print(path)
    return 0


def cmd_bench(args) -> int:
    if any(n <= 1 for n in args.sizes):
        raise InputError("--sizes must all exceed 1")
    t0 = time.perf_counter()
    rows = ex.bench_curvature(args.sizes, args.model, args.degree, args.reps, args.seed)
    path = args.out_dir / "bench_curvature.csv"
    ex.write_bench_csv(rows, path)
    print(path)
    _record(args, "bench", {"sizes": args.sizes, "model": args.model, "degree": args.degree, "reps": args.reps},
            {f"n{r.n}": {"jlc_s": r.jlc_seconds, "bfc_s": r.bfc_seconds} for r in rows}, time.perf_counter() - t0)
    return 0


def _dataset_from_args(args) -> Dataset:
    if args.data is not None:
        try:
            return load_dataset(args.data)
        except (OSError, GraphInputError, ValueError) as exc:
            raise InputError(f"cannot read dataset {args.data}: {exc}") from exc
    return ex.benchmark_sbm(args.seed, args.feature_sigma, tuple(args.block_sizes), args.p_in, args.p_out)


def _add_dataset_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, help="directory with edges.txt, features.csv, labels.csv")
    p.add_argument("--feature-sigma", type=float, default=1.0,
                   help="feature noise of the built-in SBM task (used when --data is absent)")
    p.add_argument("--block-sizes", type=int, nargs="+", default=[100, 100], help="built-in SBM block sizes")
    p.add_argument("--p-in", type=float, default=0.10, help="built-in SBM within-block edge probability")
    p.add_argument("--p-out", type=float, default=0.05, help="built-in SBM between-block edge probability")
    p.add_argument("--split", choices=("fractional", "per-class"), default="fractional")


def cmd_train(args) -> int:
    ds = _dataset_from_args(args)
    splits = make_splits(ds.y, args.split, np.random.default_rng([args.seed, 7]))
    config = {"pA": args.pA, "pD": args.pD, "alpha": args.alpha, "lr": args.lr, "wd": args.wd,
              "K": args.K, "dropout": args.dropout, "kernel": args.kernel, "epochs": args.epochs}
    rcfg = RewiringConfig(args.pA, args.pD, args.alpha, seed=args.seed)
    mcfg = ModelConfig(K=args.K, kernel=args.kernel, dropout=args.dropout)
    tcfg = TrainConfig(lr=args.lr, wd=args.wd, epochs=args.epochs, seed=args.seed, rewiring=rcfg)
    fp = ds.graph.fingerprint
    t0 = time.perf_counter()
    model, hist = train(ds.graph, ds.X, ds.y, splits, mcfg, tcfg)
    if ds.graph.fingerprint != fp or model.graph_fingerprint != fp:
        raise FingerprintMismatchError("training graph changed during rewiring")
    metrics = {
        "config": config,
        "seed": args.seed,
        "dataset": ds.name,
        "n": ds.graph.n,
        "m": ds.graph.m,
        "train_acc": evaluate(model, ds.graph, ds.X, ds.y, splits.train),
        "val_acc": evaluate(model, ds.graph, ds.X, ds.y, splits.val),
        "test_acc": evaluate(model, ds.graph, ds.X, ds.y, splits.test),
        "final_train_loss": hist.train_loss[-1],
        "fingerprint": fp,
        "fingerprint_match": True,
    }
    path = args.out_dir / "history.csv"
    hist.to_csv(path)
    print(path)
    _write(args.out_dir / "metrics.json", ex.dumps(metrics))
    model.save(args.out_dir / "model.bin")
    print(args.out_dir / "model.bin")
    log.info("trained in %.2fs", time.perf_counter() - t0)
    return 0


def cmd_sweep(args) -> int:
    try:
        grid = json.loads(Path(args.grid).read_text(encoding="utf-8")) if Path(args.grid).exists() else json.loads(args.grid)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read grid {args.grid}: {exc}") from exc
    task = ex.FixedTask(_dataset_from_args(args), args.split) if args.data is not None else ex.SBMTask(args.feature_sigma, tuple(args.block_sizes), args.p_in, args.p_out)
    seeds = range(args.seed, args.seed + args.seeds)
    cells = ex.sweep(task, grid, seeds, args.epochs, args.threads)
    path = args.out_dir / "sweep.csv"
    ex.write_sweep_csv(cells, path)
    print(path)
    best = ex.best_cell(cells)
    summary = {
        "best_config": best.config,
        "best_val_mean": best.val_mean,
        "best_test_mean": best.test_mean,
        "fingerprints_ok": all(c.fingerprints_ok for c in cells),
        "runs": sum(len(c.test_accs) for c in cells),
    }
    _write(args.out_dir / "sweep_best.json", ex.dumps(summary))
    return 0 if summary["fingerprints_ok"] else EXIT_FINGERPRINT


def cmd_rewire(args) -> int:
    g = _connected(_graph_from_args(args), "rewire")
    bank = build_edge_bank(g, args.pA)
    _write(args.out_dir / "edge_bank.json", bank.to_json() + "\n")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("--threads", type=int, default=1, help="sweep workers (CURVEREWIRE_THREADS overrides)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="curverewire", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", parents=[common], help="edge curvature CSV and profile")
    _add_graph_source(p)
    p.add_argument("--metric", choices=METRICS, default="jlc")
    p.add_argument("--out", type=Path, help="CSV path (default: OUT_DIR/curvature_<metric>.csv)")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("spectral", parents=[common], help="spectral gap, Cheeger and mixing report")
    _add_graph_source(p)
    p.add_argument("--epsilon", type=float, default=5e-4)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("tradeoff", parents=[common], help="greedy remove/add trajectories of lambda2 and mixing steps")
    _add_graph_source(p)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=5e-4)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("bench", parents=[common], help="JLC vs BFC runtime")
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000])
    p.add_argument("--model", choices=("er", "sbm"), default="er")
    p.add_argument("--degree", "--p", type=float, default=10.0, dest="degree", help="expected degree")
    p.add_argument("--reps", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("train", parents=[common], help="train and evaluate one SGC")
    _add_dataset_source(p)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--kernel", choices=KERNELS, default="rw")
    p.add_argument("--pA", type=float, default=0.0)
    p.add_argument("--pD", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--wd", type=float, default=5e-4)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--epochs", type=int, default=1000)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", parents=[common], help="grid x seeds with bootstrap confidence intervals")
    _add_dataset_source(p)
    p.add_argument("--grid", required=True, help=f"JSON object (or file) mapping keys in {ex.GRID_KEYS} to value lists")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--epochs", type=int, default=1000)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rewire", parents=[common], help="dump the candidate edge bank with its scores")
    _add_graph_source(p)
    p.add_argument("--pA", type=float, default=0.1)
    p.set_defaults(func=cmd_rewire)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.threads = ex.resolve_threads(args.threads)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FingerprintMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINGERPRINT
    except (RewiringConfigError, TrainingDivergedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
