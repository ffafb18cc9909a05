import random
from fractions import Fraction

import pytest

from lspace import (
    DomainError, EstimateCache, EstimatorSpec, FiniteDomain, FixedCosts, Partition, PartitionLattice,
    Sample, best_in_model, estimate, estimate_all, leq, sample_from,
)

from conftest import random_distribution


def test_holdout_values(split_domain, split_sample, split_spec, split_nodes):
    values = [estimate(p, split_sample, split_spec).value for p in split_nodes]
    assert values == [Fraction(48, 100), Fraction(44, 100), Fraction(41, 100), Fraction(33, 100)]
    est = estimate(split_nodes[1], split_sample, split_spec)
    assert len(est.per_pair) == 1
    assert est.per_pair[0][0].labels == (0, 0, 1, 1)


def test_holdout_share_resolves_against_sample_size(split_sample, split_nodes):
    assert estimate(split_nodes[3], split_sample, EstimatorSpec.holdout(Fraction(1, 2))).value == Fraction(33, 100)


def test_kfold_on_identical_folds_equals_single_pair():
    d = FiniteDomain.range(3)
    fold = Sample.from_pairs(d, [(1, 0), (1, 1), (2, 1), (3, 0), (3, 0), (2, 1)])
    node = Partition.parse(d, "1,2|3")
    hold = estimate(node, fold + fold, EstimatorSpec.holdout(6)).value
    assert estimate(node, fold + fold + fold, EstimatorSpec.kfold(3)).value == hold


def test_two_fold_on_six_rows_by_hand():
    d = FiniteDomain.range(2)
    # fold 1: (1,1) (1,1) (2,0); fold 2: (1,0) (2,0) (2,0)
    s = Sample.from_pairs(d, [(1, 1), (1, 1), (2, 0), (1, 0), (2, 0), (2, 0)])
    node = Partition.coarsest(d)
    # train on fold 2 -> majority 0, fold 1 has two 1s: 2/3; train on fold 1 -> majority 1, fold 2 all 0: 3/3
    assert estimate(node, s, EstimatorSpec.kfold(2)).value == Fraction(5, 6)


def test_pairs_form_matches_holdout(split_sample, split_nodes):
    spec = EstimatorSpec.pairs([(range(100), range(100, 200))])
    for p in split_nodes:
        assert estimate(p, split_sample, spec).value == estimate(p, split_sample, EstimatorSpec.holdout(100)).value
    with pytest.raises(DomainError):
        EstimatorSpec.pairs([((0, 1), (1, 2))])


def test_invalid_specs(split_sample, split_nodes):
    with pytest.raises(DomainError):
        estimate(split_nodes[0], split_sample, EstimatorSpec.holdout(200))
    with pytest.raises(DomainError):
        estimate(split_nodes[0], split_sample, EstimatorSpec.kfold(7))
    with pytest.raises(DomainError):
        EstimatorSpec.kfold(1)


def test_estimate_all_caches_each_node_once(split_domain, split_sample, split_spec):
    cache = EstimateCache(split_sample, split_spec)
    nodes = list(PartitionLattice(split_domain).nodes())
    out = estimate_all(nodes + nodes[:3], split_sample, split_spec, cache)
    assert len(out) == 15 and cache.evaluations == 15
    again = cache.get(nodes[0])
    assert again is out[nodes[0]]


def test_refinement_can_raise_the_estimate():
    d = FiniteDomain.range(2)
    train = Sample.from_counts(d, [(0, 1), (5, 0)])
    val = Sample.from_counts(d, [(1, 0), (1, 0)])
    cache = EstimateCache(train + val, EstimatorSpec.holdout(2))
    coarse, fine = Partition.coarsest(d), Partition.finest(d)
    assert leq(coarse, fine)
    assert cache.value(coarse) == 0 and cache.value(fine) == Fraction(1, 2)


def test_fixed_costs_reject_unknown_nodes(split_nodes):
    costs = FixedCosts({split_nodes[0]: Fraction(1, 2)})
    assert costs.value(split_nodes[0]) == Fraction(1, 2)
    with pytest.raises(KeyError):
        costs.value(split_nodes[1])


def test_estimate_approaches_model_error_as_n_grows():
    rng = random.Random(12)
    dist = random_distribution(rng, 4)
    node = Partition.parse(dist.domain, "1,2|3,4")
    _, truth = best_in_model(node, dist)
    medians = []
    for n in (100, 1000, 10_000):
        gaps = sorted(abs(estimate(node, sample_from(dist, n, s), EstimatorSpec.holdout(Fraction(1, 2))).value - truth)
                      for s in range(21))
        medians.append(gaps[10])
    assert medians[0] > medians[1] > medians[2]
