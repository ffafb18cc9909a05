"""U-curve search over a Learning Space, the exhaustive oracle and least-VC selection.

The walk stands on one node at a time. A node none of whose Hasse neighbors is
strictly cheaper is a strong local minimum: it is recorded and every node
comparable to it is pruned. Otherwise the walk steps to a cheaper neighbor that
has not been pruned, dropping the node it leaves, or restarts when there is
none. Under the weak U-curve property the recorded minima contain every global
minimum reachable through the pruning, which is what makes the search exact.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .domain import DomainError, Sample
from .estimators import CostOracle, EstimateCache, EstimatorSpec
from .lattice import LearningSpace, Partition, comparable, join, meet
from .learner import Hypothesis, TieRule, erm_on_partition


@dataclass(frozen=True)
class StochasticConfig:
    restarts: int
    budget: int
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("stochastic mode needs at least one restart")
        if self.budget <= 0:
            raise ValueError("stochastic budget must be positive")


@dataclass(frozen=True)
class SearchConfig:
    start_policy: str = "coarsest"        # or "random"
    seed: int = 0                         # used by the random start policy
    fallback: int = 0                     # exhaustive search once fewer than this many candidates remain
    prune_worse: bool = False             # drop evaluated neighbors that cost more than the current node
    convexity_prune: bool = False         # caller asserts the lattice-convexity condition
    stochastic: StochasticConfig | None = None
    neighbor_order: str = "canonical"     # or "cheapest_first"

    def __post_init__(self):
        if self.start_policy not in ("coarsest", "random"):
            raise ValueError(f"unknown start policy {self.start_policy!r}")
        if self.neighbor_order not in ("canonical", "cheapest_first"):
            raise ValueError(f"unknown neighbor order {self.neighbor_order!r}")
        if self.fallback < 0:
            raise ValueError("fallback threshold must be nonnegative")


@dataclass(frozen=True)
class TraceEvent:
    step: int
    event: str
    node: Partition
    value: Fraction | None = None


@dataclass
class SearchReport:
    method: str
    strong_local_minima: list | None   # [(node, value)] in canonical order; None if not computed
    global_minima: list                # [(node, value)] in canonical order
    selected: Partition
    selected_value: Fraction
    nodes_visited: int
    estimates_computed: int
    costs: dict                        # every cost priced during the run
    trace: list = field(default_factory=list)
    edges: list = field(default_factory=list)   # walk moves as (from, to)
    suboptimal: bool = False
    final_hypothesis: Hypothesis | None = None


class ExclusionSet:
    """Nodes pruned from the candidate set.

    A node is excluded iff it is comparable to a recorded minimum or was
    removed explicitly; the candidate set itself is never materialized.
    """

    def __init__(self):
        self.minima: list[Partition] = []
        self.removed: set[Partition] = set()

    def record_minimum(self, node: Partition):
        self.minima.append(node)

    def remove(self, node: Partition):
        self.removed.add(node)

    def __contains__(self, node: Partition) -> bool:
        if node in self.removed:
            return True
        return any(comparable(node, m) for m in self.minima)


class _Candidates:
    """Lazy view of the nodes not yet excluded, in canonical order.

    Exclusion only grows, so a node once skipped stays skipped and a single
    pass over the enumeration serves every restart.
    """

    def __init__(self, space: LearningSpace, excluded: ExclusionSet):
        self.space = space
        self.excluded = excluded
        self._it = iter(space.nodes())
        self._buffer: list[Partition] = []

    def _fill(self, upto: int) -> bool:
        while len(self._buffer) < upto:
            nxt = next(self._it, None)
            if nxt is None:
                return False
            self._buffer.append(nxt)
        return True

    def _compact(self):
        self._buffer = [p for p in self._buffer if p not in self.excluded]

    def first(self) -> Partition | None:
        while True:
            while self._buffer and self._buffer[0] in self.excluded:
                self._buffer.pop(0)
            if self._buffer:
                return self._buffer[0]
            if not self._fill(1):
                return None

    def fewer_than(self, c: int) -> list[Partition] | None:
        """All remaining candidates if there are fewer than ``c``, else ``None``."""
        if c <= 0:
            return None
        self._compact()
        while len(self._buffer) < c:
            nxt = next(self._it, None)
            if nxt is None:
                return list(self._buffer)
            if nxt not in self.excluded:
                self._buffer.append(nxt)
        return None

    def all(self) -> list[Partition]:
        self._buffer.extend(self._it)
        self._compact()
        return list(self._buffer)


class _BudgetExhausted(Exception):
    pass


class _Budgeted(CostOracle):
    def __init__(self, inner: CostOracle, budget: int):
        self.inner = inner
        self.budget = budget
        self._seen: set = set()

    def value(self, node):
        if node not in self._seen:
            if len(self._seen) >= self.budget:
                raise _BudgetExhausted
            self._seen.add(node)
        return self.inner.value(node)

    @property
    def evaluations(self):
        return len(self._seen)

    def known(self):
        return self.inner.known()


def _neighborhood(space: LearningSpace, node: Partition) -> list[Partition]:
    return sorted(space.down(node) + space.up(node), key=lambda p: p.sort_key)


def minimum_exhausted(node: Partition, value: Fraction, space: LearningSpace, costs: CostOracle) -> bool:
    """True iff no immediate neighbor of ``node`` is strictly cheaper than ``value``."""
    return all(costs.value(nb) >= value for nb in _neighborhood(space, node))


def _skip_joins(space, node, value, ups, costs, excluded, trace, step):
    # both up-neighbors worse than their meet: under the convexity condition their join is worse still
    worse = [p for p in ups if costs.value(p) > value]
    for i, p1 in enumerate(worse):
        for p2 in worse[i + 1:]:
            if meet(p1, p2) != node:
                continue
            top = join(p1, p2)
            if top in space and top not in excluded.removed:
                excluded.remove(top)
                trace.append(TraceEvent(step, "skip_join", top))


def convexity_skip(p1: Partition, p2: Partition, costs: CostOracle, asserted: bool) -> bool:
    """Whether ``join(p1, p2)`` may be skipped: both nodes cost more than their meet and the caller asserts convexity."""
    if not asserted:
        return False
    return min(costs.value(p1), costs.value(p2)) > costs.value(meet(p1, p2))


def _least_vc_expansion(seeds: list[Partition], space: LearningSpace, costs: CostOracle):
    best = min(costs.value(p) for p in seeds)
    pool = {p for p in seeds if costs.value(p) == best}
    frontier = sorted(pool, key=lambda p: p.sort_key)
    while frontier:
        node = frontier.pop()
        for nb in space.down(node):
            v = costs.value(nb)
            if v < best:
                best, pool, frontier = v, {nb}, [nb]
                break
            if v == best and nb not in pool:
                pool.add(nb)
                frontier.append(nb)
    return best, sorted(pool, key=lambda p: p.sort_key)


def _least_vc(nodes, space: LearningSpace) -> Partition:
    return min(nodes, key=lambda p: (space.vc_dim(p), p.sort_key))


def select_least_vc(global_minima: list[Partition], space: LearningSpace, costs: CostOracle) -> Partition:
    """Least-VC node reachable from the minima through equal-cost downward steps.

    If the downward walk meets a strictly cheaper node, the walk restarts from
    it. Ties in VC dimension go to the canonical order.
    """
    if not global_minima:
        raise ValueError("select_least_vc needs at least one minimum")
    if len({costs.value(p) for p in global_minima}) != 1:
        raise ValueError("global minima must share one estimate")
    _, pool = _least_vc_expansion(list(global_minima), space, costs)
    return _least_vc(pool, space)


def _finish(method, space, costs, minima, candidates, visited, trace, edges, suboptimal, strong=True):
    seeds = [p for p, _ in minima] + list(candidates)
    best, pool = _least_vc_expansion(seeds, space, costs)
    selected = _least_vc(pool, space)
    known = costs.known()
    return SearchReport(
        method=method,
        strong_local_minima=sorted(minima, key=lambda t: t[0].sort_key) if strong else None,
        global_minima=[(p, best) for p in pool],
        selected=selected,
        selected_value=best,
        nodes_visited=len(visited),
        estimates_computed=costs.evaluations,
        costs={p: known[p] for p in sorted(known, key=lambda p: p.sort_key)},
        trace=trace,
        edges=edges,
        suboptimal=suboptimal,
    )


def _walk_step(space, node, value, costs, excluded, config, trace, step):
    """Scan the neighborhood; return (is_minimum, next_node)."""
    full_scan = config.prune_worse or config.neighbor_order == "cheapest_first" or config.convexity_prune
    cheaper_found = False
    best_move = None
    for nb in _neighborhood(space, node):
        v = costs.value(nb)
        if v < value:
            cheaper_found = True
            if nb not in excluded:
                if config.neighbor_order == "canonical":
                    if best_move is None:
                        best_move = (nb, v)
                        if not full_scan:
                            break
                elif best_move is None or v < best_move[1]:
                    best_move = (nb, v)
    if full_scan and (config.prune_worse or config.neighbor_order == "cheapest_first"):
        for nb in _neighborhood(space, node):
            if costs.value(nb) > value and nb not in excluded.removed:
                excluded.remove(nb)
                trace.append(TraceEvent(step, "prune_worse", nb, costs.value(nb)))
    if config.convexity_prune:
        _skip_joins(space, node, value, space.up(node), costs, excluded, trace, step)
    if not cheaper_found:
        return True, None
    return False, None if best_move is None else best_move[0]


def ucurve_search_costs(space: LearningSpace, costs: CostOracle, config: SearchConfig | None = None) -> SearchReport:
    """U-curve search driven by any cost oracle (estimates or injected costs)."""
    config = config or SearchConfig()
    if config.stochastic is not None:
        return _stochastic_search(space, costs, config)
    excluded = ExclusionSet()
    cand = _Candidates(space, excluded)
    rng = random.Random(config.seed)
    minima: list = []
    exhaustive: list[Partition] = []
    visited: set = set()
    trace: list = []
    edges: list = []
    step = 0
    while True:
        rest = cand.fewer_than(config.fallback)
        if rest is not None:
            for p in rest:
                costs.value(p)
                visited.add(p)
                trace.append(TraceEvent(step, "fallback", p, costs.value(p)))
            exhaustive = rest
            break
        if config.start_policy == "random":
            pool = cand.all()
            node = rng.choice(pool) if pool else None
        else:
            node = cand.first()
        if node is None:
            break
        value = costs.value(node)
        trace.append(TraceEvent(step, "start", node, value))
        while True:
            step += 1
            visited.add(node)
            is_min, nxt = _walk_step(space, node, value, costs, excluded, config, trace, step)
            if is_min:
                minima.append((node, value))
                excluded.record_minimum(node)
                trace.append(TraceEvent(step, "minimum", node, value))
                break
            excluded.remove(node)
            if nxt is None:
                trace.append(TraceEvent(step, "dead_end", node, value))
                break
            edges.append((node, nxt))
            node, value = nxt, costs.value(nxt)
            trace.append(TraceEvent(step, "move", node, value))
    if not minima and not exhaustive:
        raise DomainError("search ended without evaluating any node")
    return _finish("ucurve", space, costs, minima, exhaustive, visited, trace, edges, False)


def _sample_node(space: LearningSpace, rng: random.Random, cache: dict) -> Partition:
    if "nodes" not in cache:
        cache["nodes"] = list(space.nodes())
    return rng.choice(cache["nodes"])


def _stochastic_search(space, costs, config):
    st = config.stochastic
    budgeted = _Budgeted(costs, st.budget)
    rng = random.Random(st.seed)
    node_cache: dict = {}
    minima: dict = {}
    visited: set = set()
    trace: list = []
    edges: list = []
    step = 0
    exhausted = False
    try:
        for _ in range(st.restarts):
            node = _sample_node(space, rng, node_cache)
            value = budgeted.value(node)
            trace.append(TraceEvent(step, "start", node, value))
            while True:
                step += 1
                visited.add(node)
                best = None
                for nb in _neighborhood(space, node):
                    v = budgeted.value(nb)
                    if v < value and (best is None or v < best[1]):
                        best = (nb, v)
                if best is None:
                    minima[node] = value
                    trace.append(TraceEvent(step, "minimum", node, value))
                    break
                edges.append((node, best[0]))
                node, value = best
                trace.append(TraceEvent(step, "move", node, value))
    except _BudgetExhausted:
        exhausted = True
    found = list(minima.items())
    fallback = []
    if not found:
        known = costs.known()
        if not known:
            raise DomainError("stochastic budget exhausted before any node was priced")
        low = min(known.values())
        fallback = [p for p, v in known.items() if v == low]
    report = _finish("stochastic", space, costs, found, fallback, visited, trace, edges, exhausted)
    report.estimates_computed = costs.evaluations
    return report


def exhaustive_search_costs(space: LearningSpace, costs: CostOracle, classify_limit: int = 5000) -> SearchReport:
    """Price every node. Strong local minima are listed only for spaces up to ``classify_limit`` nodes."""
    nodes = list(space.nodes())
    values = {p: costs.value(p) for p in nodes}
    best = min(values.values())
    minima_nodes = [p for p in nodes if values[p] == best]
    strong = None
    if len(nodes) <= classify_limit:
        strong = [(p, values[p]) for p in nodes if minimum_exhausted(p, values[p], space, costs)]
    trace = [TraceEvent(0, "evaluate", p, values[p]) for p in nodes]
    report = _finish("exhaustive", space, costs, strong or [], minima_nodes, nodes, trace, [], False,
                     strong=strong is not None)
    return report


def learn_final_hypothesis(selected: Partition, sample: Sample, mode: str = "reuse",
                           tie: TieRule = TieRule.PREFER_ONE) -> Hypothesis:
    """ERM of the selected model.

    ``mode`` names where ``sample`` comes from: ``"reuse"`` (the selection
    sample itself) or ``"independent"`` (a second sample held back from selection).
    Both learn the same way; the distinction matters for the error analysis.
    """
    if mode not in ("reuse", "independent"):
        raise ValueError(f"unknown mode {mode!r}")
    if sample.n == 0:
        raise DomainError("cannot learn the final hypothesis from an empty sample")
    return erm_on_partition(selected, sample, tie)


def ucurve_search(space: LearningSpace, sample: Sample, spec: EstimatorSpec,
                  config: SearchConfig | None = None, final_sample: Sample | None = None) -> SearchReport:
    """U-curve search with estimated costs; the final hypothesis reuses ``sample`` unless ``final_sample`` is given."""
    report = ucurve_search_costs(space, EstimateCache(sample, spec), config)
    mode = "reuse" if final_sample is None else "independent"
    report.final_hypothesis = learn_final_hypothesis(report.selected, final_sample or sample, mode, spec.tie)
    return report


def exhaustive_search(space: LearningSpace, sample: Sample, spec: EstimatorSpec,
                      final_sample: Sample | None = None) -> SearchReport:
    report = exhaustive_search_costs(space, EstimateCache(sample, spec))
    mode = "reuse" if final_sample is None else "independent"
    report.final_hypothesis = learn_final_hypothesis(report.selected, final_sample or sample, mode, spec.tie)
    return report


def _dot_id(node: Partition) -> str:
    return '"' + node.encode() + '"'


def report_to_dot(report: SearchReport, space: LearningSpace) -> str:
    """Priced part of the Hasse diagram; strong minima double-circled, selected node filled, walk moves bold."""
    strong = {p for p, _ in report.strong_local_minima or []}
    nodes = list(report.costs)
    present = set(nodes)
    moves = {(a, b) for a, b in report.edges}
    lines = ["digraph search {", "  rankdir=BT;", "  node [shape=ellipse, fontname=Helvetica];"]
    for p in nodes:
        attrs = [f'label="{p.encode()}\\n{float(report.costs[p]):.4g}"']
        if p in strong:
            attrs.append("shape=doublecircle")
        if p == report.selected:
            attrs.append('style=filled, fillcolor="lightblue"')
        lines.append(f"  {_dot_id(p)} [{', '.join(attrs)}];")
    for p in nodes:
        for q in sorted(space.up(p), key=lambda r: r.sort_key):
            if q in present:
                style = ", style=bold, color=red" if (p, q) in moves or (q, p) in moves else ""
                lines.append(f"  {_dot_id(p)} -> {_dot_id(q)} [dir=none{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
