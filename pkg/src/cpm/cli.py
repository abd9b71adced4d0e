"""Command line interface: ``cpm generate | embed | evaluate``.

Exit codes: 0 success, 1 usage, 2 data or contract error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from pathlib import Path


from .dataset import (Dataset, generate_augmented_swiss_roll, generate_ball_shell,
                      generate_gaussian_cloud, generate_gaussian_clusters, load_csv, save_csv)
from .exceptions import CPMError, OptimizationDivergedError
from .pipeline import RunConfig, compute_distances, run_cpm, run_mds

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# table I/O with header sniffing
# ---------------------------------------------------------------------------

def _sniff_header(path):
    with open(path, encoding="utf-8", newline="") as fh:
        first = next(csv.reader(fh), None)
    if not first:
        return None
    try:
        [float(c) for c in first]
        return None
    except ValueError:
        return [c.strip() for c in first]


def read_table(path, label_column=None, header=None) -> Dataset:
    """Load a CSV; a header row whose last cell is ``label`` marks the label column."""
    names = _sniff_header(path)
    has_header = names is not None if header is None else header
    if label_column is None and names and "label" in names:
        label_column = names.index("label")
    return load_csv(path, has_header=has_header, label_column=label_column)


def write_table(data, path, labels=None):
    coords = data.points if hasattr(data, "points") else data.coords
    prefix = "x" if hasattr(data, "points") else "y"
    labels = labels if labels is not None else getattr(data, "labels", None)
    header = [f"{prefix}{k + 1}" for k in range(coords.shape[1])]
    if labels is not None:
        header.append("label")
    save_csv(data, path, labels=labels, header=header)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpm", description="Capacity preserving mapping for visualization.")
    parser.add_argument("--version", action="version", version="cpm 0.1.0")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gsub = gen.add_subparsers(dest="generator", parser_class=_Parser)
    g = gsub.add_parser("gaussian")
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--dim", type=int, default=5)
    bs = gsub.add_parser("ball-shell")
    bs.add_argument("--dim", type=int, default=5)
    bs.add_argument("--n1", type=int, default=500)
    bs.add_argument("--n2", type=int, default=500)
    bs.add_argument("--inner", type=float, default=1.0)
    bs.add_argument("--outer", type=float, default=1.3)
    sr = gsub.add_parser("swiss-roll")
    sr.add_argument("--n", type=int, default=1000)
    sr.add_argument("--p", type=int, default=6)
    sr.add_argument("--variance", type=float, default=25.0)
    cl = gsub.add_parser("clusters")
    cl.add_argument("--k", type=int, default=5)
    cl.add_argument("--per-cluster", type=int, default=100)
    cl.add_argument("--dim", type=int, default=10)
    cl.add_argument("--center-scale", type=float, default=10.0)
    for p in (g, bs, sr, cl):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)

    emb = sub.add_parser("embed", help="embed a CSV dataset")
    emb.add_argument("--in", dest="input", required=True)
    emb.add_argument("--out", required=True)
    emb.add_argument("--diag", help="diagnostics JSON path")
    emb.add_argument("--method", choices=["cpm", "mds"], default="cpm")
    emb.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    emb.add_argument("--metric", choices=["euclidean", "geodesic"])
    emb.add_argument("--knn", type=int)
    emb.add_argument("--dim", dest="target_dim", type=int, choices=[2, 3])
    emb.add_argument("--scales", dest="num_scales", type=int)
    emb.add_argument("--smoothing", dest="smoothing_width", type=int)
    emb.add_argument("--epsilon-factor", type=float)
    emb.add_argument("--max-iters", type=int)
    emb.add_argument("--tol", type=float)
    emb.add_argument("--init", choices=["mds", "random"])
    emb.add_argument("--optimizer", choices=["momentum", "lbfgs"])
    emb.add_argument("--seed", type=int)
    emb.add_argument("--label-column", type=int)
    emb.add_argument("--dump-distances", help="write the input distance matrix as CSV")
    emb.add_argument("--kl-history", help="write the KL history as a JSON array")
    emb.add_argument("--threads", type=int)

    ev = sub.add_parser("evaluate", help="score an embedding against its source data")
    ev.add_argument("--orig", required=True)
    ev.add_argument("--emb", required=True)
    ev.add_argument("--metric", choices=["euclidean", "geodesic"], default="euclidean")
    ev.add_argument("--knn", type=int, default=10)
    ev.add_argument("--shepard", help="Shepard pairs CSV path")
    ev.add_argument("--proximity", help="proximity error curve CSV path")
    ev.add_argument("--p-grid", default="0.1,0.2,0.3,0.4,0.5")
    ev.add_argument("--variances", help="cluster variance CSV path (embedded space)")
    ev.add_argument("--trajectory", help="per-label trajectory CSV path")
    ev.add_argument("--crowding", action="store_true", help="print the ball/shell crowding score")
    ev.add_argument("--label-column", type=int)
    ev.add_argument("--threads", type=int)
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_generate(args) -> int:
    if args.generator is None:
        raise UsageError("generate: choose one of gaussian, ball-shell, swiss-roll, clusters")
    if args.generator == "gaussian":
        data = generate_gaussian_cloud(args.n, args.dim, rng=args.seed)
    elif args.generator == "ball-shell":
        data = generate_ball_shell(args.dim, args.n1, args.n2, args.inner, args.outer, rng=args.seed)
    elif args.generator == "swiss-roll":
        data = generate_augmented_swiss_roll(args.n, args.p, args.variance, rng=args.seed)
    else:
        data = generate_gaussian_clusters(args.k, args.per_cluster, args.dim,
                                          args.center_scale, rng=args.seed)
    write_table(data, args.out)
    print(f"N={data.N}")
    print(f"n={data.n}")
    return EXIT_OK


def _config_from_args(args) -> RunConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for name in ("metric", "knn", "target_dim", "num_scales", "smoothing_width",
                 "epsilon_factor", "max_iters", "tol", "init", "seed", "optimizer"):
        value = getattr(args, name)
        if value is not None:
            base[name] = value
    return RunConfig.from_dict(base)


def _dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_embed(args) -> int:
    config = _config_from_args(args)
    data = read_table(args.input, args.label_column)
    stage = "distances"
    try:
        distances, notes = compute_distances(data, config.metric, config.knn)
        if args.dump_distances:
            distances.to_csv(args.dump_distances)
        if args.method == "mds":
            stage = "mds"
            emb, _ = run_mds(data, config, distances)
            result = None
        else:
            stage = "cpm"
            result = run_cpm(data, config, distances)
            emb = result.embedding
    except CPMError as exc:
        exc.stage = stage
        raise
    write_table(emb, args.out, labels=data.labels)

    diag = {
        "method": args.method,
        "config": config.to_dict(),
        "N": data.N,
        "n": data.n,
        "warnings": notes,
    }
    if result is not None:
        diag["dimension_curve"] = result.curve.to_dict()
        diag["kl_history"] = [float(x) for x in result.kl_history]
    if args.diag:
        _dump_json(diag, args.diag)
    if args.kl_history and result is not None:
        _dump_json(diag["kl_history"], args.kl_history)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    print(f"N={data.N}")
    if result is not None:
        print(f"kl={result.kl_history[-1]!r}")
    return EXIT_OK


def run_evaluate(args) -> int:
    from .evaluation import (cluster_variances, crowding_overlap_score, proximity_error_curve,
                             shepard_pairs, spearman_rank_correlation, write_proximity_csv,
                             write_shepard_csv, write_trajectory_csv, write_variance_csv)

    orig = read_table(args.orig, args.label_column)
    emb = read_table(args.emb)
    if orig.N != emb.N:
        raise CPMContractMismatch(f"--orig has {orig.N} points but --emb has {emb.N}")
    labels = orig.labels if orig.labels is not None else emb.labels
    distances, _ = compute_distances(orig, args.metric, args.knn)

    shepard = shepard_pairs(distances, emb.points)
    if args.shepard:
        write_shepard_csv(shepard, args.shepard)
    print(f"spearman={spearman_rank_correlation(shepard)!r}")

    needs_labels = args.proximity or args.variances or args.crowding or args.trajectory
    if needs_labels and labels is None:
        raise CPMContractMismatch("labels are required for the requested reports")
    if args.proximity:
        grid = [float(x) for x in args.p_grid.split(",") if x.strip()]
        curve = proximity_error_curve(distances, emb.points, labels, grid)
        write_proximity_csv(curve, args.proximity)
        for p, e in curve:
            print(f"proximity_error[{p:g}]={e!r}")
    if args.variances:
        labs, var = cluster_variances(emb.points, labels)
        write_variance_csv(labs, var, args.variances)
    if args.trajectory:
        write_trajectory_csv(emb.points, labels, args.trajectory)
    if args.crowding:
        print(f"crowding={crowding_overlap_score(emb.points, labels)!r}")
    return EXIT_OK


class CPMContractMismatch(CPMError):
    pass


@contextlib.contextmanager
def _thread_limit(threads):
    if threads is None:
        env = os.environ.get("CPM_THREADS")
        threads = int(env) if env else None
    if threads is None:
        yield
        return
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=threads):
        yield


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("choose a command: generate, embed, evaluate")
        with _thread_limit(getattr(args, "threads", None)):
            if args.command == "generate":
                return run_generate(args)
            if args.command == "embed":
                return run_embed(args)
            return run_evaluate(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except OptimizationDivergedError as exc:
        stage = getattr(exc, "stage", None)
        print(f"error{f' in {stage}' if stage else ''}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CPMError, OSError, ValueError) as exc:
        stage = getattr(exc, "stage", None)
        print(f"error{f' in {stage}' if stage else ''}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
