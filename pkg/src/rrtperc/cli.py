"""Command-line entry point.

Exit codes: 0 on success, 2 for invalid arguments, 3 when an experiment
misses one of its declared tolerances. ``RRTPERC_SEED`` sets the default
seed (otherwise 0).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import destruction, limits, percolation, trees
from .experiments import EXPERIMENTS, PRESETS, ExperimentConfig, run_replicated
from .rng import RngStream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TOLERANCE = 3


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("RRTPERC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"RRTPERC_SEED must be an integer, got {raw!r}") from None


def _write(args, text: str | bytes):
    if args.out is None or args.out == "-":
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    mode = "wb" if isinstance(text, bytes) else "w"
    with open(args.out, mode) as fh:
        fh.write(text)


def _tree_from(args, stream: RngStream) -> trees.RootedTree:
    if getattr(args, "tree", None):
        data = Path(args.tree).read_bytes()
        if data[:4] == trees.BINARY_MAGIC:
            return trees.RootedTree.from_bytes(data)
        return trees.RootedTree.from_json(data.decode())
    if args.n is None:
        raise UsageError("give --n or --tree")
    if args.n < 0:
        raise UsageError("n must be >= 0")
    return trees.generate_rrt(args.n, stream.substream(0))


def _p_from(args, n: int) -> float:
    if (args.p is None) == (args.t is None):
        raise UsageError("give exactly one of --p and --t")
    if args.p is not None:
        return args.p
    return percolation.supercritical_p(n, args.t)


def cmd_generate(args) -> int:
    tree = _tree_from(args, RngStream(args.seed))
    _write(args, tree.to_bytes() if args.format == "bin" else tree.to_json())
    return EXIT_OK


def cmd_percolate(args) -> int:
    stream = RngStream(args.seed)
    tree = _tree_from(args, stream)
    p = _p_from(args, tree.n)
    marked = percolation.percolate(tree, p, stream.substream(1))
    ct = percolation.cluster_size_tree(marked, stream.substream(2))
    if args.format == "csv":
        _write(args, ct.to_csv(("size",)))
    else:
        clusters = percolation.extract_clusters(marked)
        payload = {
            "n": tree.n,
            "p": p,
            "marks": sorted(marked.marks),
            "clusters": [
                {"root": c.root_vertex, "size": c.size, "generation": c.generation} for c in clusters
            ],
            "cluster_sizes": json.loads(ct.to_json()),
        }
        _write(args, json.dumps(payload))
    return EXIT_OK


def cmd_destroy(args) -> int:
    stream = RngStream(args.seed)
    tree = _tree_from(args, stream)
    record = destruction.destroy(tree, stream.substream(1))
    ct = destruction.tree_of_components(record)
    if args.ranked:
        ct = destruction.rank_component_tree(ct, stream.substream(2))
    if args.t is not None:
        ct = destruction.truncate_components(ct, args.t)
    if args.format == "csv":
        _write(args, ct.to_csv(("size", "birth")))
    elif args.cut_tree:
        _write(args, destruction.cut_tree(record).to_json())
    else:
        _write(args, ct.to_json())
    return EXIT_OK


def cmd_isolate(args) -> int:
    stream = RngStream(args.seed)
    if args.n is None or args.n < 1:
        raise UsageError("isolate needs --n >= 1")
    if args.method == "walk":
        w = destruction.im_coupled_walk(args.n, stream)
        payload = {
            "n": args.n,
            "X_n": w.X_n,
            "L_n": w.L_n,
            "cut_sizes": w.cut_sizes.tolist(),
            "xi": w.xi.tolist(),
        }
    else:
        if args.method == "tree":
            cuts = destruction.isolate_root(trees.generate_rrt(args.n, stream.substream(0)), stream.substream(1))
        else:
            cuts = destruction.isolate_root_size_chain(args.n, stream)
        payload = {"n": args.n, "X_n": int(cuts.size), "cut_sizes": cuts.tolist()}
    _write(args, json.dumps(payload))
    return EXIT_OK


def cmd_limit(args) -> int:
    stream = RngStream(args.seed)
    if args.depth < 0 or args.breadth < 1:
        raise UsageError("need depth >= 0 and breadth >= 1")
    kind = args.kind
    if kind in ("truncated", "G") and args.t is None:
        raise UsageError(f"--t is required for {kind}")
    if kind == "Z":
        tree = limits.sample_Z(args.depth, args.breadth, stream)
        columns = ("Z",)
    elif kind == "decorated":
        tree = limits.sample_Z_with_times(args.depth, args.breadth, stream)
        columns = ("Z", "z")
    elif kind == "truncated":
        tree = limits.sample_truncated(args.t, args.depth, args.breadth, stream)
        columns = ("Z", "z")
    else:
        tree = limits.sample_G(args.t, args.depth, args.breadth, stream)
        columns = ("G",)
    _write(args, tree.to_csv(columns) if args.format == "csv" else tree.to_json())
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        obj = json.loads(Path(args.config).read_text())
    else:
        if args.name is None:
            raise UsageError("give an experiment name or --config")
        if args.name not in PRESETS:
            raise UsageError(f"unknown experiment {args.name!r}; choose from {sorted(PRESETS)}")
        obj = {"name": args.name, **PRESETS[args.name], "seed": args.seed}
        if args.n is not None:
            obj["n_grid"] = [args.n]
        if args.replicates is not None:
            obj["replicates"] = args.replicates
        if args.p is not None:
            obj["p"] = args.p
            obj.pop("t", None)
        if args.t is not None:
            obj["t"] = args.t
            obj.pop("p", None)
    if args.threads is not None:
        obj["workers"] = args.threads
    config = ExperimentConfig.from_dict(obj)
    report = run_replicated(config)
    _write(args, report.to_csv() if args.format == "csv" else report.to_json())
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrtperc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv")):
        p.add_argument("--seed", type=int, default=None, help="default: $RRTPERC_SEED or 0")
        p.add_argument("--out", "-o", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("generate", help="sample a random recursive tree")
    p.add_argument("--n", type=int, required=True)
    common(p, ("json", "bin"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("percolate", help="percolate a tree and encode its clusters")
    p.add_argument("--n", type=int)
    p.add_argument("--tree", help="tree file (JSON or binary) instead of --n")
    p.add_argument("--p", type=float)
    p.add_argument("--t", type=float, help="use p = 1 - t / ln n")
    common(p)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("destroy", help="run the destruction process")
    p.add_argument("--n", type=int)
    p.add_argument("--tree")
    p.add_argument("--t", type=float, help="keep components born before t")
    p.add_argument("--ranked", action="store_true", help="rank children by size")
    p.add_argument("--cut-tree", action="store_true", help="emit the cut-tree instead")
    common(p)
    p.set_defaults(func=cmd_destroy)

    p = sub.add_parser("isolate", help="cut sizes until the root is isolated")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("chain", "tree", "walk"), default="chain")
    common(p, ("json",))
    p.set_defaults(func=cmd_isolate)

    p = sub.add_parser("limit", help="sample a limit tree")
    p.add_argument("--kind", choices=("Z", "decorated", "truncated", "G"), default="Z")
    p.add_argument("--depth", type=int, default=limits.DEFAULT_DEPTH)
    p.add_argument("--breadth", type=int, default=limits.DEFAULT_BREADTH)
    p.add_argument("--t", type=float)
    common(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("experiment", help="run a named experiment with tolerances")
    p.add_argument("name", nargs="?", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--n", type=int, help="single grid point instead of the preset grid")
    p.add_argument("--replicates", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--threads", type=int, help="worker processes")
    common(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"rrtperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
