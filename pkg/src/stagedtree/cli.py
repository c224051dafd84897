"""Command-line entry point.

Subcommands: inspect, expfam, check, from-bn, fit, select.  Every command
reads JSON/CSV inputs, writes a JSON object to stdout (or ``--output``), and
exits 0 on success, 2 on validation errors (with a machine-readable error
object), 1 on internal errors.  ``-`` stands for stdin/stdout.  All floats
are printed with 12 significant digits so outputs are byte-stable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .algebra import classify, stage_equations
from .bayesnet import DiscreteBN, bn_to_staged_tree
from .errors import StagedTreeError
from .expfam import natural_parameters, render_formulas, statistic_layout
from .fit import SearchConfig, bic, ingest_csv, select_staging
from .tree import ParameterVector, StagedTree, dimensions


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(payload: dict, args) -> None:
    text = json.dumps(_round_floats(payload), indent=2 if args.pretty else None, sort_keys=False)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_tree(path: str) -> StagedTree:
    return StagedTree.from_json(_read_text(path))


def _load_theta(spec: str, tree: StagedTree) -> ParameterVector:
    if spec == "uniform":
        return ParameterVector.uniform(tree)
    raw = json.loads(_read_text(spec))
    vals = {}
    for stage, probs in raw.items():
        for j, p in enumerate(probs, start=1):
            vals[(stage, j)] = float(p)
    return ParameterVector(vals)


def worker_count() -> int:
    """Honor the STK_THREADS cap; informational, execution is single-threaded."""
    try:
        return max(1, int(os.environ.get("STK_THREADS", "1")))
    except ValueError:
        return 1


# -- subcommands --------------------------------------------------------------


def cmd_inspect(args) -> dict:
    tree = _load_tree(args.tree)
    d0, d = dimensions(tree)
    return {
        "k": tree.k,
        "n": tree.n,
        "d0": d0,
        "d": d,
        "root": tree.root,
        "inner": list(tree.inner),
        "stages": {v: tree.stage_of[v] for v in tree.inner},
        "downward": dict(tree.downward),
        "atoms": [[[v, j] for v, j in x.steps] for x in tree.atoms],
    }


def cmd_expfam(args) -> dict:
    tree = _load_tree(args.tree)
    theta = _load_theta(args.theta, tree)
    form = natural_parameters(tree, theta)
    out = {
        "layout": [[v, j] for v, j in statistic_layout(tree)],
        "eta": {f"{v},{j}": val for (v, j), val in form.eta.items()},
        "psi": form.psi,
    }
    if args.symbolic:
        out["formulas"] = render_formulas(tree)
    return out


def cmd_check(args) -> dict:
    tree = _load_tree(args.tree)
    report = classify(tree)
    out = {
        "regular": report["regular"],
        "balanced": report["balanced"],
        "simple": report["simple"],
        "d0": report["d0"],
        "d": report["d"],
        "witness": list(report["witnesses"][0]) if report["witnesses"] else None,
    }
    if args.equations != "none":
        eqs = stage_equations(tree)
        if args.equations == "pretty":
            out["equations"] = [eq.pretty(tree) for eq in eqs]
        else:
            out["equations"] = [
                {"pair": [eq.vi, eq.vs], "edge": eq.j, "linear": eq.linear}
                for eq in eqs
            ]
    return out


def cmd_from_bn(args) -> dict:
    bn = DiscreteBN.from_json(_read_text(args.bn))
    order = args.order.split(",") if args.order else None
    tree = bn_to_staged_tree(bn, order)
    # output stays a pure tree-description so it can be piped into `check -`
    return tree.to_spec()


def cmd_fit(args) -> dict:
    tree = _load_tree(args.tree)
    table = ingest_csv(args.data, tree)
    result = bic(tree, table, alpha=args.alpha)
    out = result.as_dict()
    out["bic_convention"] = "d*log(N) - 2*loglik"
    return out


def cmd_select(args) -> dict:
    tree = _load_tree(args.tree_graph)
    table = ingest_csv(args.data, tree)
    config = SearchConfig()
    if args.config:
        raw = json.loads(_read_text(args.config))
        config = SearchConfig(
            max_merges=raw.get("max_merges"),
            same_depth=raw.get("same_depth", True),
            alpha=raw.get("alpha", 0.0),
        )
    result = select_staging(tree, table, config)
    out = result.fit.as_dict()
    out["bic_convention"] = "d*log(N) - 2*loglik"
    out["stages"] = {v: result.tree.stage_of[v] for v in result.tree.inner}
    out["trace"] = [
        {
            "kept": step.kept,
            "absorbed": step.absorbed,
            "bic_before": step.bic_before,
            "bic_after": step.bic_after,
        }
        for step in result.trace
    ]
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagedtree", description="Staged tree models as curved exponential families"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", default=None, help="output path, '-' for stdout")
        p.add_argument("--pretty", action="store_true", help="indent the JSON output")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized probes")

    p = sub.add_parser("inspect", help="summarize a tree-description file")
    p.add_argument("tree")
    common(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("expfam", help="natural parameters, statistic layout, cumulant")
    p.add_argument("tree")
    p.add_argument("--theta", default="uniform", help="'uniform' or a JSON label file")
    p.add_argument("--symbolic", action="store_true", help="also print label formulas")
    common(p)
    p.set_defaults(func=cmd_expfam)

    p = sub.add_parser("check", help="regular/balanced/simple classification")
    p.add_argument("tree")
    p.add_argument("--equations", choices=["none", "json", "pretty"], default="none")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("from-bn", help="unfold a Bayesian network into a staged tree")
    p.add_argument("bn")
    p.add_argument("--order", default=None, help="comma-separated topological order")
    common(p)
    p.set_defaults(func=cmd_from_bn)

    p = sub.add_parser("fit", help="closed-form MLE and BIC for a staging")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.0, help="Laplace smoothing")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="greedy BIC-driven stage-merge search")
    p.add_argument("--tree-graph", required=True, dest="tree_graph")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None, help="JSON search configuration")
    common(p)
    p.set_defaults(func=cmd_select)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload = args.func(args)
    except (StagedTreeError, OSError, json.JSONDecodeError, KeyError) as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, args)
        return 2
    except Exception as exc:  # pragma: no cover - internal errors
        sys.stderr.write(f"internal error: {exc}\n")
        return 1
    _emit(payload, args)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
