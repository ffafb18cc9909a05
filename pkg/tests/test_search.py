import random
from fractions import Fraction

import pytest

from lspace import (
    DomainError, EstimateCache, EstimatorSpec, FiniteDomain, FixedCosts, MaterializedSpace, Partition,
    PartitionLattice, Sample, SearchConfig, StochasticConfig, convexity_skip, exhaustive_search,
    exhaustive_search_costs, l2_space, learn_final_hypothesis, minimum_exhausted, sample_from,
    select_least_vc, ucurve_search, ucurve_search_costs,
)
from lspace.search import report_to_dot

from conftest import BOOLEAN4_STRONG, boolean4, random_distribution


def test_minimum_exhausted_on_boolean_costs():
    space, costs, by_key = boolean4()
    fc = FixedCosts(costs)
    assert minimum_exhausted(by_key["13"], costs[by_key["13"]], space, fc)
    assert not minimum_exhausted(by_key["134"], costs[by_key["134"]], space, fc)
    assert not minimum_exhausted(by_key["24"], costs[by_key["24"]], space, fc)


def test_minimum_exhausted_isolated_node():
    d = FiniteDomain.range(4)
    p = Partition.parse(d, "1,2|3,4")
    space = MaterializedSpace(d, [p, Partition.parse(d, "1,3|2,4")])
    assert minimum_exhausted(p, Fraction(9), space, FixedCosts({p: 9}))


def test_ucurve_on_boolean_costs_finds_the_three_strong_minima():
    space, costs, by_key = boolean4()
    report = ucurve_search_costs(space, FixedCosts(costs))
    found = {p for p, _ in report.strong_local_minima}
    assert found == {by_key[k] for k in BOOLEAN4_STRONG}
    assert report.selected == by_key["23"]
    assert report.selected_value == Fraction(41, 1000)


def test_single_node_space():
    d = FiniteDomain.range(3)
    p = Partition.coarsest(d)
    report = ucurve_search_costs(MaterializedSpace(d, [p]), FixedCosts({p: Fraction(1, 3)}))
    assert report.selected == p and report.edges == [] and report.nodes_visited == 1


def test_exhaustive_counts():
    rng = random.Random(0)
    for n, size in ((4, 15), (8, 4140)):
        dist = random_distribution(rng, n)
        report = exhaustive_search(PartitionLattice(dist.domain), sample_from(dist, 40, 1), EstimatorSpec.holdout(20))
        assert report.estimates_computed == size == report.nodes_visited


def test_exhaustive_on_four_node_sublattice(split_sample, split_spec, split_nodes):
    space = MaterializedSpace(split_nodes[0].domain, split_nodes)
    report = exhaustive_search(space, split_sample, split_spec)
    assert report.selected == split_nodes[3]
    assert report.selected_value == Fraction(33, 100)


def test_full_lattice_search_on_split_example(split_sample, split_spec, split_nodes):
    space = PartitionLattice(split_nodes[0].domain)
    report = ucurve_search(space, split_sample, split_spec)
    oracle = exhaustive_search(space, split_sample, split_spec)
    assert report.selected_value == oracle.selected_value == Fraction(33, 100)
    # the finest partition ties at the minimum; least VC selects a two-block node instead
    assert oracle.costs[split_nodes[3]] == Fraction(33, 100)
    assert report.selected == oracle.selected and len(report.selected) == 2


def test_select_least_vc():
    d = FiniteDomain.range(3)
    p, q = Partition.parse(d, "1,2|3"), Partition.parse(d, "1|2|3")
    space = PartitionLattice(d)
    costs = FixedCosts({r: Fraction(1, 2) for r in space.nodes()} | {p: Fraction(1, 5), q: Fraction(1, 5)})
    assert select_least_vc([q, p], space, costs) == p
    # one minimum whose down-neighbor ties
    assert select_least_vc([q], space, costs) == p
    with pytest.raises(ValueError):
        select_least_vc([p, Partition.coarsest(d)], space, costs)


def test_select_least_vc_tie_from_merging_identical_labels():
    d = FiniteDomain.range(3)
    # points 1 and 2 are both mostly 1 in training and validation: merging them changes nothing
    train = Sample.from_counts(d, [(0, 3), (1, 3), (3, 0)])
    val = Sample.from_counts(d, [(1, 2), (0, 2), (2, 0)])
    cache = EstimateCache(train + val, EstimatorSpec.holdout(val.n))
    finest = Partition.finest(d)
    merged = Partition.parse(d, "1,2|3")
    assert cache.value(finest) == cache.value(merged)
    assert select_least_vc([finest], PartitionLattice(d), cache) == merged


def test_learn_final_hypothesis(split_domain, split_sample, split_nodes):
    pooled = learn_final_hypothesis(split_nodes[3], split_sample)
    # pooled counts: a1 (38,12), a2 (3,23), a3 (3,21), b (45,55)
    assert pooled.labels == (0, 1, 1, 1)
    mass = Sample.from_pairs(split_domain, [("a3", 0)] * 3)
    assert learn_final_hypothesis(split_nodes[3], mass, "independent").labels == (1, 1, 0, 1)
    coarse = Partition.coarsest(split_domain)
    assert learn_final_hypothesis(coarse, split_sample).labels == (1, 1, 1, 1)
    with pytest.raises(DomainError):
        learn_final_hypothesis(coarse, Sample(split_domain))


def test_convexity_skip(split_domain, split_sample, split_spec, split_nodes):
    cache = EstimateCache(split_sample, split_spec)
    assert not convexity_skip(split_nodes[1], split_nodes[2], cache, True)
    d = FiniteDomain.range(3)
    p1, p2 = Partition.parse(d, "1|2,3"), Partition.parse(d, "1,2|3")
    costs = FixedCosts({p1: Fraction(3, 10), p2: Fraction(3, 10), Partition.coarsest(d): Fraction(1, 5)})
    assert convexity_skip(p1, p2, costs, True)
    assert not convexity_skip(p1, p2, costs, False)


CONFIGS = [
    SearchConfig(),
    SearchConfig(fallback=6),
    SearchConfig(prune_worse=True),
    SearchConfig(neighbor_order="cheapest_first"),
    SearchConfig(start_policy="random", seed=3),
]


@pytest.mark.parametrize("config", CONFIGS, ids=["plain", "fallback", "prune", "cheapest", "random-start"])
def test_variants_agree_with_oracle_on_holdout(config):
    rng = random.Random(21)
    for trial in range(60):
        n = rng.choice([3, 4, 5])
        dist = random_distribution(rng, n)
        sample = sample_from(dist, rng.choice([30, 60]), trial)
        space = PartitionLattice(dist.domain)
        cache = EstimateCache(sample, EstimatorSpec.holdout(Fraction(1, 2)))
        got = ucurve_search_costs(space, cache, config)
        want = exhaustive_search_costs(space, cache)
        assert got.selected_value == want.selected_value
        assert got.estimates_computed <= space.size()


def test_convexity_prune_on_supermodular_costs():
    space, _, by_key = boolean4()
    rng = random.Random(5)
    for _ in range(30):
        w = {i: Fraction(rng.randint(-10, 10), 100) for i in range(1, 5)}
        c = {(i, j): Fraction(rng.randint(0, 10), 100) for i in range(1, 5) for j in range(i + 1, 5)}
        costs = {}
        for key, node in by_key.items():
            s = [int(ch) for ch in key]
            costs[node] = sum((w[i] for i in s), Fraction(1)) + sum(c[(i, j)] for i in s for j in s if i < j)
        got = ucurve_search_costs(space, FixedCosts(costs), SearchConfig(convexity_prune=True))
        assert got.selected_value == min(costs.values())


def test_stochastic_mode():
    space, costs, _ = boolean4()
    tiny = ucurve_search_costs(space, FixedCosts(costs), SearchConfig(stochastic=StochasticConfig(5, 3, seed=1)))
    assert tiny.suboptimal and tiny.estimates_computed <= 3
    cfg = SearchConfig(stochastic=StochasticConfig(30, 1000, seed=2))
    a = ucurve_search_costs(space, FixedCosts(costs), cfg)
    b = ucurve_search_costs(space, FixedCosts(costs), cfg)
    assert not a.suboptimal
    assert (a.selected, a.selected_value, a.trace) == (b.selected, b.selected_value, b.trace)
    assert a.selected_value == Fraction(41, 1000)
    with pytest.raises(ValueError):
        StochasticConfig(1, 0)


def test_report_values_match_recomputed_estimates():
    rng = random.Random(8)
    dist = random_distribution(rng, 5)
    sample = sample_from(dist, 60, 2)
    spec = EstimatorSpec.kfold(3)
    report = ucurve_search(PartitionLattice(dist.domain), sample, spec)
    fresh = EstimateCache(sample, spec)
    for node, value in report.costs.items():
        assert fresh.value(node) == value
    for node, value in report.strong_local_minima + report.global_minima:
        assert fresh.value(node) == value


def test_search_on_l2_space():
    rng = random.Random(13)
    for trial in range(30):
        dist = random_distribution(rng, 5)
        sample = sample_from(dist, 60, trial)
        cache = EstimateCache(sample, EstimatorSpec.holdout(30))
        space = l2_space(dist.domain)
        assert ucurve_search_costs(space, cache).selected_value == exhaustive_search_costs(space, cache).selected_value


def test_dot_export_marks_minima_and_selection():
    space, costs, by_key = boolean4()
    report = ucurve_search_costs(space, FixedCosts(costs))
    dot = report_to_dot(report, space)
    assert dot.startswith("digraph search {")
    assert dot.count("doublecircle") == 3
    selected_line = next(line for line in dot.splitlines() if line.strip().startswith(f'"{by_key["23"].encode()}" ['))
    assert "filled" in selected_line
