"""Ground-truth quantities, property checkers and Monte Carlo consistency runs.

Everything here enumerates the space, so it is meant for desk-scale domains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .domain import DomainError, JointDistribution, Sample, empirical_measure, sample_from
from .estimators import CostOracle, EstimatorSpec
from .lattice import LearningSpace, Partition, PartitionLattice, join, leq, meet
from .learner import Hypothesis, best_in_model, bayes_loss, true_loss
from .search import SearchConfig, SearchReport, ucurve_search

ENUMERATION_LIMIT = 200_000
CHAIN_LIMIT = 200_000
TYPE_I_BLOCK_CAP = 20


class AnalysisError(ValueError):
    pass


def _cost_fn(costs) -> Callable[[Partition], Fraction]:
    if isinstance(costs, CostOracle):
        return costs.value
    if isinstance(costs, Mapping):
        def look(p):
            try:
                return costs[p]
            except KeyError:
                raise AnalysisError(f"no cost for node {p.encode()}") from None
        return look
    if callable(costs):
        return costs
    raise TypeError("costs must be a mapping, a cost oracle or a callable")


def _nodes(space: LearningSpace, limit: int = ENUMERATION_LIMIT) -> list[Partition]:
    if space.size() > limit:
        raise AnalysisError(f"space has {space.size()} nodes, above the enumeration limit {limit}")
    return list(space.nodes())


# -- ground truth -------------------------------------------------------------

@dataclass(frozen=True)
class TargetSummary:
    target_node: Partition
    target_error: Fraction
    mde: Fraction | float          # math.inf when every node reaches the target error
    target_hypothesis: Hypothesis
    model_errors: dict = field(compare=False, repr=False, default_factory=dict)


def target_model(space: LearningSpace, dist: JointDistribution) -> TargetSummary:
    """Smallest node holding a best hypothesis, its error and the discrimination gap."""
    errors = {}
    hyps = {}
    for p in _nodes(space):
        hyps[p], errors[p] = best_in_model(p, dist)
    best = min(errors.values())
    target = min((p for p, e in errors.items() if e == best), key=lambda p: (space.vc_dim(p), p.sort_key))
    gaps = [e - best for e in errors.values() if e > best]
    mde = min(gaps) if gaps else math.inf
    return TargetSummary(target, best, mde, hyps[target], errors)


@dataclass(frozen=True)
class ErrorQuadruple:
    type_i: Fraction | None
    type_ii: Fraction
    type_iii: Fraction
    type_iv: Fraction


def uniform_deviation(node: Partition, sample: Sample, dist: JointDistribution) -> Fraction:
    """Largest |empirical error - true error| over every hypothesis of the node's model.

    The gap is additive over blocks, so the supremum is the larger of the sum of
    per-block maxima and minus the sum of per-block minima. Exact, no sampling.
    """
    if len(node.blocks) > TYPE_I_BLOCK_CAP:
        raise AnalysisError(
            f"model has {len(node.blocks)} blocks; exact deviation is limited to {TYPE_I_BLOCK_CAP}"
        )
    m = empirical_measure(sample)
    hi = lo = Fraction(0)
    for b in node.blocks:
        gaps = []
        for y in (0, 1):
            emp = Fraction(sum(m.counts[i][1 - y] for i in b), m.total)
            tru = sum((dist.prob[i][1 - y] for i in b), Fraction(0))
            gaps.append(emp - tru)
        hi += max(gaps)
        lo += min(gaps)
    return max(hi, -lo)


def estimation_errors(report: SearchReport, dist: JointDistribution, mode: str = "reuse",
                      eval_sample: Sample | None = None) -> ErrorQuadruple:
    """Errors of the learned hypothesis against the model's best and the overall best.

    ``eval_sample`` is the sample the final hypothesis was learned on (the
    selection sample when reusing, the held-back one otherwise); without it the
    uniform deviation is not computed.
    """
    if mode not in ("reuse", "independent"):
        raise ValueError(f"unknown mode {mode!r}")
    if report.final_hypothesis is None:
        raise AnalysisError("the report carries no final hypothesis")
    _, model_error = best_in_model(report.selected, dist)
    overall = bayes_loss(dist)
    ii = true_loss(report.final_hypothesis, dist) - model_error
    iii = model_error - overall
    i = None if eval_sample is None else uniform_deviation(report.selected, eval_sample, dist)
    return ErrorQuadruple(i, ii, iii, ii + iii)


# -- minima and U-curve properties -------------------------------------------

class MinimumKind(str, Enum):
    STRONG_LOCAL = "strong_local"
    WEAK_LOCAL = "weak_local"
    GLOBAL = "global"
    NONE = "none"


def is_strong_minimum(costs, space: LearningSpace, node: Partition) -> bool:
    c = _cost_fn(costs)
    v = c(node)
    return all(c(nb) >= v for nb in space.up(node) + space.down(node))


def is_weak_minimum(costs, space: LearningSpace, node: Partition) -> bool:
    """Chain-local minimum of some maximal chain (chain ends count as +infinity)."""
    c = _cost_fn(costs)
    v = c(node)
    down, up = space.down(node), space.up(node)
    low_ok = not down or any(c(p) >= v for p in down)
    high_ok = not up or any(c(p) >= v for p in up)
    return low_ok and high_ok


def classify_minimum(costs, space: LearningSpace, node: Partition) -> frozenset:
    """Kinds of minimum ``node`` is; strong minima are also weak."""
    c = _cost_fn(costs)
    kinds = set()
    if is_strong_minimum(c, space, node):
        kinds |= {MinimumKind.STRONG_LOCAL, MinimumKind.WEAK_LOCAL}
    elif is_weak_minimum(c, space, node):
        kinds.add(MinimumKind.WEAK_LOCAL)
    if c(node) == min(c(p) for p in _nodes(space)):
        kinds.add(MinimumKind.GLOBAL)
    return frozenset(kinds or {MinimumKind.NONE})


def maximal_chains(space: LearningSpace, limit: int = CHAIN_LIMIT) -> Iterator[tuple]:
    """Every maximal continuous chain, from a minimal node up to a maximal one."""
    count = 0
    starts = [p for p in _nodes(space) if not space.down(p)]
    stack = [(p,) for p in reversed(starts)]
    while stack:
        chain = stack.pop()
        ups = sorted(space.up(chain[-1]), key=lambda p: p.sort_key)
        if not ups:
            count += 1
            if count > limit:
                raise AnalysisError(f"more than {limit} maximal chains; enumeration refused")
            yield chain
            continue
        for q in reversed(ups):
            stack.append(chain + (q,))


@dataclass(frozen=True)
class Violation:
    chain: tuple
    node: Partition
    cheaper: Partition


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    violations: tuple = ()
    detail: dict = field(default_factory=dict, compare=False)


def _chain_local_minima(values: Sequence) -> list[int]:
    out = []
    for i, v in enumerate(values):
        left = values[i - 1] if i > 0 else math.inf
        right = values[i + 1] if i + 1 < len(values) else math.inf
        if left >= v <= right:
            out.append(i)
    return out


def check_ucurve(costs, space: LearningSpace, strength: str = "weak", max_violations: int = 1000) -> CheckResult:
    """Exhaustive chain check of the U-curve property.

    weak: every strong local minimum is a minimum of every maximal chain through it.
    strong: every chain-local minimum of a maximal chain is that chain's minimum.
    """
    if strength not in ("weak", "strong"):
        raise ValueError("strength must be 'weak' or 'strong'")
    c = _cost_fn(costs)
    strong_nodes = None
    if strength == "weak":
        strong_nodes = {p for p in _nodes(space) if is_strong_minimum(c, space, p)}
    violations = []
    chains = 0
    for chain in maximal_chains(space):
        chains += 1
        values = [c(p) for p in chain]
        low = min(values)
        if strength == "weak":
            suspects = [i for i, p in enumerate(chain) if p in strong_nodes]
        else:
            suspects = _chain_local_minima(values)
        for i in suspects:
            if values[i] > low and len(violations) < max_violations:
                violations.append(Violation(chain, chain[i], chain[values.index(low)]))
    return CheckResult(not violations, tuple(violations), {"chains": chains})


@dataclass(frozen=True)
class ConvexityViolation:
    low: Partition
    left: Partition
    right: Partition
    high: Partition
    high_value: Fraction
    bound: Fraction


def diamonds(space: LearningSpace) -> Iterator[tuple]:
    """(meet, p1, p2, join) squares of the Hasse diagram with both sides one step long."""
    for w in _nodes(space):
        ups = sorted(space.up(w), key=lambda p: p.sort_key)
        for i, p1 in enumerate(ups):
            for p2 in ups[i + 1:]:
                if meet(p1, p2) != w:
                    continue
                top = join(p1, p2)
                if top in space and top in space.up(p1) and top in space.up(p2):
                    yield w, p1, p2, top


def check_ucurve_compatible(space: LearningSpace) -> CheckResult:
    """For every node, each strictly larger node's lower covers inside the upper set
    are that node alone or at least two nodes, and dually below."""
    nodes = _nodes(space, 5000)
    bad = []
    for m in nodes:
        above = {p for p in nodes if p != m and leq(m, p)}
        below = {p for p in nodes if p != m and leq(p, m)}
        for p in above:
            lower = [q for q in space.down(p) if q == m or q in above]
            if lower != [m] and len(lower) < 2:
                bad.append((m, p))
        for p in below:
            upper = [q for q in space.up(p) if q == m or q in below]
            if upper != [m] and len(upper) < 2:
                bad.append((m, p))
    return CheckResult(not bad, tuple(bad))


def check_lattice_convexity(costs, space: LearningSpace) -> CheckResult:
    """Check cost(join) >= cost(p1) + cost(p2) - cost(meet) on every Hasse diamond.

    The compatibility verdict is reported separately in ``detail``.
    """
    c = _cost_fn(costs)
    violations = []
    count = 0
    for w, p1, p2, top in diamonds(space):
        count += 1
        bound = c(p1) + c(p2) - c(w)
        if c(top) < bound:
            violations.append(ConvexityViolation(w, p1, p2, top, c(top), bound))
    compat = check_ucurve_compatible(space).holds if space.size() <= 5000 else None
    return CheckResult(not violations, tuple(violations), {"diamonds": count, "compatible": compat})


# -- statistics -----------------------------------------------------------------

@dataclass(frozen=True)
class SpaceStats:
    node_count: int
    vc_dim_max: int
    maximal_count: int


def space_stats(space: LearningSpace) -> SpaceStats:
    if isinstance(space, PartitionLattice):
        n = len(space.domain)
        return SpaceStats(space.size(), n, 1)
    nodes = _nodes(space)
    return SpaceStats(
        len(nodes),
        max(space.vc_dim(p) for p in nodes),
        sum(1 for p in nodes if not space.up(p)),
    )


# -- consistency ----------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    reps: int
    selected_is_target: Fraction
    error_is_target: Fraction
    mean_type_iii: Fraction


def rep_seed(seed: int, n: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, n, rep]).generate_state(1)[0])


def consistency_experiment(dist: JointDistribution, space: LearningSpace, sizes: Sequence[int], reps: int,
                           spec: EstimatorSpec, seed: int, config: SearchConfig | None = None,
                           independent: Fraction | None = None) -> list[ConsistencyRow]:
    """Monte Carlo: how often the selected model matches the target, per sample size.

    With ``independent`` set, that share of each sample is held back to learn
    the final hypothesis and the rest drives selection.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if reps <= 0:
        return []
    target = target_model(space, dist)
    rows = []
    for n in sizes:
        hits = same_error = 0
        total_iii = Fraction(0)
        for r in range(reps):
            data = sample_from(dist, n, rep_seed(seed, n, r))
            final = None
            if independent is not None:
                cut = n - round(Fraction(independent) * n)
                data, final = data[:cut], data[cut:]
            report = ucurve_search(space, data, spec, config, final_sample=final)
            err = target.model_errors.get(report.selected)
            if err is None:
                err = best_in_model(report.selected, dist)[1]
            hits += report.selected == target.target_node
            same_error += err == target.target_error
            total_iii += err - target.target_error
        rows.append(ConsistencyRow(n, reps, Fraction(hits, reps), Fraction(same_error, reps), total_iii / reps))
    return rows
