"""Command-line front end: ``select``, ``oracle``, ``check`` and ``simulate``.

Exit codes: 0 success, 2 malformed input or arguments, 3 domain larger than
the configured cap.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import (
    AnalysisError, MinimumKind, check_lattice_convexity, check_ucurve, classify_minimum,
    consistency_experiment, estimation_errors, rep_seed, space_stats, target_model,
)
from .domain import DomainError, FiniteDomain, Sample, sample_from
from .estimators import EstimateCache, EstimatorSpec, FixedCosts
from .io import InputError, dump_report, parse_rational, rational, read_costs, read_dataset, read_distribution
from .lattice import LatticeError, MaterializedSpace, PartitionLattice, feature_lattice, l2_space
from .learner import TieRule
from .search import (
    SearchConfig, StochasticConfig, exhaustive_search_costs, learn_final_hypothesis, report_to_dot,
    ucurve_search_costs,
)

EXIT_OK, EXIT_INPUT, EXIT_CAP = 0, 2, 3
COST_TABLE_LIMIT = 10_000
DEFAULTS = {
    "space": "partition",
    "estimator": "holdout:1/2",
    "mode": "reuse",
    "seed": 0,
    "fallback": 0,
    "stochastic": None,
    "start": "coarsest",
    "order": "canonical",
    "prune_worse": False,
    "convexity_prune": False,
    "tie": "prefer_one",
    "cap": 9,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# -- option parsing -------------------------------------------------------------

def parse_estimator(text: str, tie: TieRule) -> EstimatorSpec:
    kind, _, arg = text.partition(":")
    try:
        if kind == "holdout":
            return EstimatorSpec.holdout(parse_rational(arg), tie)
        if kind == "kfold":
            return EstimatorSpec.kfold(int(arg), tie)
    except (InputError, ValueError) as exc:
        raise CliError(f"bad estimator {text!r}: {exc}") from None
    raise CliError(f"bad estimator {text!r}; use holdout:V or kfold:K")


def parse_mode(text: str) -> Fraction | None:
    """``None`` for reuse, else the share of the data held back for the final hypothesis."""
    if text == "reuse":
        return None
    kind, _, arg = text.partition(":")
    if kind == "independent":
        try:
            frac = parse_rational(arg)
        except InputError:
            frac = None
        if frac is not None and 0 < frac < 1:
            return frac
    raise CliError(f"bad mode {text!r}; use reuse or independent:FRAC with 0 < FRAC < 1")


def parse_stochastic(text: str | None, seed: int) -> StochasticConfig | None:
    if not text:
        return None
    r, _, b = text.partition(":")
    try:
        return StochasticConfig(int(r), int(b), seed)
    except ValueError as exc:
        raise CliError(f"bad stochastic setting {text!r}: {exc}") from None


def search_config(args) -> SearchConfig:
    try:
        return SearchConfig(
            start_policy=args.start, seed=args.seed, fallback=args.fallback,
            prune_worse=args.prune_worse, convexity_prune=args.convexity_prune,
            stochastic=parse_stochastic(args.stochastic, args.seed), neighbor_order=args.order,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def build_space(kind: str, domain: FiniteDomain, cap: int, costs: dict | None = None):
    if len(domain) > cap:
        raise CliError(f"domain has {len(domain)} points, above the cap of {cap}", EXIT_CAP)
    try:
        if kind == "partition":
            return PartitionLattice(domain)
        if kind == "l2":
            return l2_space(domain)
        if kind == "feature":
            return feature_lattice(domain)
        if kind == "keys":
            if costs is None:
                raise CliError("--space keys needs a costs file")
            return MaterializedSpace(domain, costs.keys(), name="keys")
    except LatticeError as exc:
        raise CliError(str(exc)) from None
    raise CliError(f"unknown space {kind!r}")


def _split_independent(sample: Sample, frac: Fraction | None):
    if frac is None:
        return sample, None
    hold = round(frac * sample.n)
    if not 0 < hold < sample.n:
        raise CliError(f"independent share {frac} leaves an empty part of a {sample.n}-row sample")
    return sample[: sample.n - hold], sample[sample.n - hold:]


# -- report pieces ----------------------------------------------------------------

def _node_entry(space, node, value):
    return {"node": node.encode(), "vc_dim": space.vc_dim(node), "estimate": rational(value)}


def _config_echo(args) -> dict:
    keys = ["space", "estimator", "mode", "seed", "fallback", "stochastic", "start", "order",
            "prune_worse", "convexity_prune", "tie", "cap"]
    return {k: getattr(args, k) for k in keys}


def _domain_table(domain: FiniteDomain, labels=None) -> list:
    rows = []
    for i, p in enumerate(domain.points):
        row = {"point": str(p)}
        if domain.features is not None:
            row["features"] = "".join(str(b) for b in domain.features[i])
        if labels is not None:
            row["label"] = labels[i]
        rows.append(row)
    return rows


def _search_section(report, space) -> dict:
    strong = report.strong_local_minima
    return {
        "selected": _node_entry(space, report.selected, report.selected_value),
        "global_minima": [_node_entry(space, p, v) for p, v in report.global_minima],
        "strong_local_minima": None if strong is None else [_node_entry(space, p, v) for p, v in strong],
        "statistics": {
            "method": report.method,
            "space_size": space.size(),
            "nodes_visited": report.nodes_visited,
            "estimates_computed": report.estimates_computed,
            "suboptimal": report.suboptimal,
        },
    }


def _truth_section(report, space, dist, mode, eval_sample) -> dict:
    if [str(p) for p in dist.domain.points] != [str(p) for p in report.selected.domain.points]:
        raise CliError("distribution points do not match the dataset's domain")
    dist = type(dist)(report.selected.domain, dist.prob)
    target = target_model(space, dist)
    errs = estimation_errors(report, dist, mode, eval_sample)
    return {
        "target": _node_entry(space, target.target_node, None) | {"error": rational(target.target_error)},
        "discrimination_gap": rational(target.mde),
        "selected_error": rational(target.model_errors[report.selected]),
        "errors": {
            "uniform_deviation": rational(errs.type_i),
            "within_model": rational(errs.type_ii),
            "model_bias": rational(errs.type_iii),
            "total_excess": rational(errs.type_iv),
        },
    }


def _plotting():
    try:
        from . import plotting
    except ImportError:
        raise CliError("--plot needs matplotlib (pip install 'artifact[plot]')") from None
    return plotting


def _write_side_outputs(args, report, space):
    if args.dot:
        Path(args.dot).write_text(report_to_dot(report, space), encoding="utf-8")
    if args.plot:
        _plotting().plot_search(report, space, args.plot)


# -- commands ---------------------------------------------------------------------

def _run_selection(args, exhaustive: bool) -> dict:
    domain, sample = read_dataset(args.data)
    tie = TieRule(args.tie)
    spec = parse_estimator(args.estimator, tie)
    holdback = parse_mode(args.mode)
    space = build_space(args.space, domain, args.cap)
    selection, final_sample = _split_independent(sample, holdback)
    try:
        costs = EstimateCache(selection, spec)
    except DomainError as exc:
        raise CliError(str(exc)) from None
    if exhaustive:
        report = exhaustive_search_costs(space, costs)
    else:
        report = ucurve_search_costs(space, costs, search_config(args))
    mode = "reuse" if final_sample is None else "independent"
    report.final_hypothesis = learn_final_hypothesis(report.selected, final_sample or selection, mode, tie)
    out = {
        "command": "oracle" if exhaustive else "select",
        "version": __version__,
        "config": _config_echo(args),
        "input": {"rows": sample.n, "selection_rows": selection.n,
                  "final_rows": (final_sample or selection).n, "points": len(domain)},
        "space": {"kind": args.space, "nodes": space.size()},
        "estimator": spec.describe(),
    }
    out.update(_search_section(report, space))
    out["final_hypothesis"] = _domain_table(domain, report.final_hypothesis.labels)
    if exhaustive and space.size() <= COST_TABLE_LIMIT:
        out["costs"] = [_node_entry(space, p, v) for p, v in report.costs.items()]
    if args.dist:
        dist = read_distribution(args.dist)
        out["truth"] = _truth_section(report, space, dist, mode, final_sample or selection)
    _write_side_outputs(args, report, space)
    return out


def cmd_select(args) -> dict:
    return _run_selection(args, exhaustive=False)


def cmd_oracle(args) -> dict:
    return _run_selection(args, exhaustive=True)


def _check_costs(args):
    """(space, cost oracle or cache) from either a costs file or a dataset."""
    if args.costs:
        domain, table = read_costs(args.costs)
        kind = args.space if args.space_given else "keys"
        space = build_space(kind, domain, args.cap, table)
        missing = [p for p in space.nodes() if p not in table]
        if missing:
            raise CliError(f"costs file has no entry for {len(missing)} node(s), e.g. {missing[0].encode()}")
        return space, FixedCosts(table)
    domain, sample = read_dataset(args.data)
    space = build_space(args.space, domain, args.cap)
    spec = parse_estimator(args.estimator, TieRule(args.tie))
    try:
        return space, EstimateCache(sample, spec)
    except DomainError as exc:
        raise CliError(str(exc)) from None


def cmd_check(args) -> dict:
    out = {"command": "check", "version": __version__, "property": args.property}
    if args.property == "stats":
        if args.costs or args.data:
            space, _ = _check_costs(args)
        elif args.points:
            space = build_space(args.space, FiniteDomain.range(args.points), args.cap)
        else:
            raise CliError("stats needs a dataset, a costs file or --points N")
        st = space_stats(space)
        out["space"] = {"kind": space.name, "points": len(space.domain)}
        out["stats"] = {"node_count": st.node_count, "vc_dim_max": st.vc_dim_max, "maximal_count": st.maximal_count}
        return out
    space, costs = _check_costs(args)
    out["space"] = {"kind": space.name, "points": len(space.domain), "nodes": space.size()}
    if args.property in ("ucurve-weak", "ucurve-strong"):
        res = check_ucurve(costs, space, args.property.split("-")[1])
        out["holds"] = res.holds
        out["chains"] = res.detail["chains"]
        out["violations"] = [
            {"chain": [p.encode() for p in v.chain], "node": v.node.encode(),
             "node_cost": rational(costs.value(v.node)), "cheaper": v.cheaper.encode(),
             "cheaper_cost": rational(costs.value(v.cheaper))}
            for v in res.violations
        ]
    else:
        res = check_lattice_convexity(costs, space)
        out["holds"] = res.holds
        out["diamonds"] = res.detail["diamonds"]
        out["compatible"] = res.detail["compatible"]
        out["violations"] = [
            {"meet": v.low.encode(), "left": v.left.encode(), "right": v.right.encode(), "join": v.high.encode(),
             "join_cost": rational(v.high_value), "bound": rational(v.bound),
             "text": f"{float(v.high_value):.4g} < {float(v.bound):.4g}"}
            for v in res.violations
        ]
    out["minima"] = [
        {"node": p.encode(), "cost": rational(costs.value(p)),
         "kinds": sorted(k.value for k in classify_minimum(costs, space, p))}
        for p in space.nodes()
        if MinimumKind.NONE not in classify_minimum(costs, space, p)
    ] if space.size() <= 5000 else None
    return out


def cmd_simulate(args) -> dict:
    dist = read_distribution(args.dist_file)
    if args.space in ("feature", "keys"):
        raise CliError(f"--space {args.space} is not available for distributions (points carry no features)")
    tie = TieRule(args.tie)
    spec = parse_estimator(args.estimator, tie)
    holdback = parse_mode(args.mode)
    space = build_space(args.space, dist.domain, args.cap)
    try:
        sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    except ValueError:
        raise CliError(f"bad sizes {args.sizes!r}") from None
    if not sizes or sizes[0] <= 0:
        raise CliError("sizes must be positive integers")
    if args.reps < 0:
        raise CliError("reps must be nonnegative")
    config = search_config(args)
    try:
        rows = consistency_experiment(dist, space, sizes, args.reps, spec, args.seed, config, holdback)
    except (DomainError, AnalysisError) as exc:
        raise CliError(str(exc)) from None
    target = target_model(space, dist)
    out = {
        "command": "simulate",
        "version": __version__,
        "config": _config_echo(args) | {"sizes": sizes, "reps": args.reps},
        "space": {"kind": args.space, "nodes": space.size()},
        "estimator": spec.describe(),
        "target": _node_entry(space, target.target_node, None) | {"error": rational(target.target_error)},
        "discrimination_gap": rational(target.mde),
        "rows": [
            {"n": r.n, "reps": r.reps, "selected_is_target": rational(r.selected_is_target),
             "error_is_target": rational(r.error_is_target), "mean_model_bias": rational(r.mean_type_iii)}
            for r in rows
        ],
    }
    if args.dot and args.reps > 0:
        stem = Path(args.dot)
        for n in sizes:
            data = sample_from(dist, n, rep_seed(args.seed, n, 0))
            data, _ = _split_independent(data, holdback)
            rep = ucurve_search_costs(space, EstimateCache(data, spec), config)
            stem.with_name(f"{stem.stem}_n{n}{stem.suffix or '.dot'}").write_text(report_to_dot(rep, space))
    if args.plot and rows:
        _plotting().plot_consistency(rows, args.plot)
    return out


# -- argument wiring ----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, search: bool = True):
    p.add_argument("--space", choices=["partition", "feature", "l2", "keys"], default=argparse.SUPPRESS,
                   help="Learning Space (default partition; keys = exactly the nodes of a costs file)")
    p.add_argument("--estimator", default=argparse.SUPPRESS, help="holdout:V (count or share) or kfold:K")
    p.add_argument("--tie", choices=[t.value for t in TieRule], default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--cap", type=int, default=argparse.SUPPRESS, help="largest allowed domain (default 9)")
    p.add_argument("--config", help="JSON file with defaults for any option")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    if search:
        p.add_argument("--mode", default=argparse.SUPPRESS, help="reuse or independent:FRAC")
        p.add_argument("--fallback", type=int, default=argparse.SUPPRESS,
                       help="search the rest exhaustively once fewer than C candidates remain")
        p.add_argument("--stochastic", default=argparse.SUPPRESS, help="R:B restarts and evaluation budget")
        p.add_argument("--start", choices=["coarsest", "random"], default=argparse.SUPPRESS)
        p.add_argument("--order", choices=["canonical", "cheapest_first"], default=argparse.SUPPRESS)
        p.add_argument("--prune-worse", dest="prune_worse", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--convexity-prune", dest="convexity_prune", action="store_true", default=argparse.SUPPRESS,
                       help="skip joins of two worse up-neighbors (only sound under lattice convexity)")
        p.add_argument("--dot", help="write the priced Hasse subgraph as DOT")
        p.add_argument("--plot", help="write a figure (format from the extension)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lspace", description="Model selection over partition Learning Spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("select", "U-curve search, then learn the final hypothesis"),
                           ("oracle", "exhaustive search over every node")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("data", help="CSV with columns f1..fd,label")
        p.add_argument("--dist", help="ground-truth dist.json over the same points, adds a truth section")
        _common(p)

    p = sub.add_parser("check", help="U-curve, convexity or size checks")
    src = p.add_mutually_exclusive_group()
    src.add_argument("data", nargs="?", help="CSV dataset (costs are estimated)")
    src.add_argument("--costs", help="costs.json mapping node encodings to costs")
    p.add_argument("--property", required=True, choices=["ucurve-weak", "ucurve-strong", "convexity", "stats"])
    p.add_argument("--points", type=int, help="for stats without data: domain 1..N")
    _common(p, search=False)

    p = sub.add_parser("simulate", help="Monte Carlo consistency experiment")
    p.add_argument("dist_file", metavar="dist.json")
    p.add_argument("--sizes", default="20,200,2000")
    p.add_argument("--reps", type=int, default=200)
    _common(p)
    return parser


def _resolve(args) -> argparse.Namespace:
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise CliError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        unknown = sorted(set(config) - set(DEFAULTS))
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}")
    args.space_given = "space" in vars(args) or "space" in config
    for key, default in DEFAULTS.items():
        if key not in vars(args):
            setattr(args, key, config.get(key, default))
    for key in ("dot", "plot", "dist", "costs", "points", "data"):
        if not hasattr(args, key):
            setattr(args, key, None)
    return args


COMMANDS = {"select": cmd_select, "oracle": cmd_oracle, "check": cmd_check, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args)
        report = COMMANDS[args.command](args)
        text = dump_report(report, args.out)
        if not args.out:
            sys.stdout.write(text)
        return EXIT_OK
    except CliError as exc:
        print(f"lspace: error: {exc}", file=sys.stderr)
        return exc.code
    except (InputError, DomainError, LatticeError, AnalysisError) as exc:
        print(f"lspace: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
