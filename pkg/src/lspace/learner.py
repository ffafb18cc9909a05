"""Empirical risk minimization over the model of a partition.

The model of a partition is every 0/1 labeling constant on each block, so ERM
decomposes into a majority vote per block. All losses are exact fractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .domain import DomainError, EmpiricalMeasure, FiniteDomain, JointDistribution, Sample, empirical_measure
from .lattice import Partition


class TieRule(str, Enum):
    """Label given to a block whose two label counts are equal (including empty blocks)."""

    PREFER_ONE = "prefer_one"
    PREFER_ZERO = "prefer_zero"


@dataclass(frozen=True)
class Hypothesis:
    """A 0/1 labeling of the domain, ``labels[i]`` for the ``i``-th point."""

    domain: FiniteDomain
    labels: tuple

    def __call__(self, point) -> int:
        return self.labels[self.domain.index(point)]

    def respects(self, node: Partition) -> bool:
        return all(len({self.labels[i] for i in b}) == 1 for b in node.blocks)

    def as_mapping(self) -> dict:
        return dict(zip(self.domain.points, self.labels))

    def encode(self) -> str:
        return "".join(str(y) for y in self.labels)


def _block_label(c0, c1, tie: TieRule) -> int:
    if c1 > c0:
        return 1
    if c0 > c1:
        return 0
    return 1 if tie is TieRule.PREFER_ONE else 0


def block_counts(node: Partition, counts: Sequence) -> list[tuple]:
    return [(sum(counts[i][0] for i in b), sum(counts[i][1] for i in b)) for b in node.blocks]


def erm_labels(node: Partition, counts: Sequence, tie: TieRule = TieRule.PREFER_ONE) -> tuple:
    """Per-point ERM labels given per-point ``(count0, count1)`` weights (ints or fractions)."""
    labels = [0] * len(node.domain)
    for b, (c0, c1) in zip(node.blocks, block_counts(node, counts)):
        y = _block_label(c0, c1, tie)
        for i in b:
            labels[i] = y
    return tuple(labels)


def erm_on_partition(node: Partition, data, tie: TieRule = TieRule.PREFER_ONE) -> Hypothesis:
    """Empirical risk minimizer in the model of ``node``.

    ``data`` is a :class:`Sample`, an :class:`EmpiricalMeasure` or a
    :class:`JointDistribution` (the last gives the best hypothesis of the model).
    """
    if isinstance(data, Sample):
        counts = data.counts()
    elif isinstance(data, (EmpiricalMeasure, JointDistribution)):
        counts = data.counts if isinstance(data, EmpiricalMeasure) else data.prob
    else:
        raise TypeError(f"cannot learn from {type(data).__name__}")
    return Hypothesis(node.domain, erm_labels(node, counts, tie))


def _error(labels: Sequence, table: Sequence) -> Fraction | int:
    # mass of the label that the hypothesis does not predict
    return sum(row[1 - y] for y, row in zip(labels, table))


def empirical_loss(h: Hypothesis, data) -> Fraction:
    """Fraction of misclassified pairs in a sample or empirical measure."""
    if isinstance(data, Sample):
        m = empirical_measure(data)
    elif isinstance(data, EmpiricalMeasure):
        m = data
    else:
        raise TypeError("empirical_loss expects a Sample or EmpiricalMeasure")
    if m.domain != h.domain:
        raise DomainError("hypothesis and data live on different domains")
    return Fraction(_error(h.labels, m.counts), m.total)


def true_loss(h: Hypothesis, dist: JointDistribution) -> Fraction:
    if dist.domain != h.domain:
        raise DomainError("hypothesis and distribution live on different domains")
    return Fraction(_error(h.labels, dist.prob))


def best_in_model(node: Partition, dist: JointDistribution) -> tuple[Hypothesis, Fraction]:
    """Target hypothesis of the model and its true error (ties labeled 1)."""
    h = erm_on_partition(node, dist, TieRule.PREFER_ONE)
    return h, true_loss(h, dist)


def bayes_loss(dist: JointDistribution) -> Fraction:
    """Error of the best labeling over all hypotheses."""
    return sum((min(p0, p1) for p0, p1 in dist.prob), Fraction(0))


def model_hypotheses(node: Partition):
    """Every labeling in the model of ``node`` (``2 ** len(node)`` of them)."""
    k = len(node.blocks)
    for mask in range(1 << k):
        labels = [0] * len(node.domain)
        for j, b in enumerate(node.blocks):
            for i in b:
                labels[i] = (mask >> j) & 1
        yield Hypothesis(node.domain, tuple(labels))
