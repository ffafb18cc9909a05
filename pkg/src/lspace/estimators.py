"""Model-error estimators as means over (training, validation) pairs.

Hold-out is one pair, k-fold is k pairs; both are constructors for the
general pairs form. Estimates are exact fractions and memoized per node.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .domain import DomainError, Sample, kfold_indices
from .lattice import Partition
from .learner import Hypothesis, TieRule, erm_labels


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run.

    ``kind`` is ``"holdout"`` (``param`` = validation size, an int count or a
    Fraction share of N in (0, 1)), ``"kfold"`` (``param`` = k) or ``"pairs"``
    (``param`` = tuple of (train indices, validation indices)).
    """

    kind: str
    param: object
    tie: TieRule = TieRule.PREFER_ONE

    @classmethod
    def holdout(cls, v, tie: TieRule = TieRule.PREFER_ONE) -> "EstimatorSpec":
        v = Fraction(v) if not isinstance(v, float) else Fraction(repr(v))
        if v <= 0:
            raise DomainError("hold-out size must be positive")
        if v.denominator == 1:
            return cls("holdout", int(v), tie)
        if v > 1:
            raise DomainError("a fractional hold-out share must lie strictly between 0 and 1")
        return cls("holdout", v, tie)

    @classmethod
    def kfold(cls, k: int, tie: TieRule = TieRule.PREFER_ONE) -> "EstimatorSpec":
        if int(k) < 2:
            raise DomainError("k-fold needs k >= 2")
        return cls("kfold", int(k), tie)

    @classmethod
    def pairs(cls, pairs: Iterable, tie: TieRule = TieRule.PREFER_ONE) -> "EstimatorSpec":
        frozen = []
        for train, val in pairs:
            train, val = tuple(train), tuple(val)
            if not train or not val:
                raise DomainError("every pair needs nonempty training and validation sets")
            if set(train) & set(val):
                raise DomainError("training and validation indices of a pair must be disjoint")
            frozen.append((train, val))
        if not frozen:
            raise DomainError("at least one pair is required")
        return cls("pairs", tuple(frozen), tie)

    def validation_size(self, n: int) -> int:
        v = self.param
        if isinstance(v, Fraction):
            v = round(v * n)
        if not 0 < v < n:
            raise DomainError(f"validation size must satisfy 0 < v_n < n (got v_n={v}, n={n})")
        return v

    def resolve(self, n: int) -> list[tuple[tuple, tuple]]:
        """Concrete (train, validation) index tuples for a sample of size ``n``."""
        if self.kind == "holdout":
            cut = n - self.validation_size(n)
            return [(tuple(range(cut)), tuple(range(cut, n)))]
        if self.kind == "kfold":
            folds = kfold_indices(n, self.param)
            return [
                (tuple(i for r in folds if r is not f for i in r), tuple(f))
                for f in folds
            ]
        if self.kind == "pairs":
            for train, val in self.param:
                if max(train + val) >= n or min(train + val) < 0:
                    raise DomainError("pair indices fall outside the sample")
            return list(self.param)
        raise DomainError(f"unknown estimator kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "pairs":
            return f"pairs:{len(self.param)}"
        return f"{self.kind}:{self.param}"


@dataclass(frozen=True)
class ModelEstimate:
    node: Partition
    value: Fraction
    per_pair: tuple  # (Hypothesis, validation loss) per pair


def _counts(sample: Sample, idx: Sequence[int]) -> list[list[int]]:
    table = [[0, 0] for _ in sample.domain.points]
    for i in idx:
        table[sample.points[i]][sample.labels[i]] += 1
    return table


class _PairTables:
    def __init__(self, sample: Sample, spec: EstimatorSpec):
        if sample.n == 0:
            raise DomainError("cannot estimate from an empty sample")
        self.spec = spec
        self.pairs = [
            (_counts(sample, tr), _counts(sample, va), len(va)) for tr, va in spec.resolve(sample.n)
        ]

    def evaluate(self, node: Partition) -> ModelEstimate:
        per_pair = []
        for train, val, size in self.pairs:
            labels = erm_labels(node, train, self.spec.tie)
            wrong = sum(row[1 - y] for y, row in zip(labels, val))
            per_pair.append((Hypothesis(node.domain, labels), Fraction(wrong, size)))
        value = sum((loss for _, loss in per_pair), Fraction(0)) / len(per_pair)
        return ModelEstimate(node, value, tuple(per_pair))


def estimate(node: Partition, sample: Sample, spec: EstimatorSpec) -> ModelEstimate:
    if node.domain != sample.domain:
        raise DomainError("node and sample live on different domains")
    return _PairTables(sample, spec).evaluate(node)


class CostOracle:
    """Anything exposing ``value(node)``; ``evaluations`` counts distinct nodes priced."""

    def value(self, node: Partition) -> Fraction:
        raise NotImplementedError

    @property
    def evaluations(self) -> int:
        raise NotImplementedError

    def known(self) -> dict:
        """Costs priced so far, keyed by node."""
        raise NotImplementedError


class EstimateCache(CostOracle):
    """Memoized estimator over one sample; each node is estimated at most once."""

    def __init__(self, sample: Sample, spec: EstimatorSpec):
        self.sample = sample
        self.spec = spec
        self._tables = _PairTables(sample, spec)
        self._store: dict[Partition, ModelEstimate] = {}

    def get(self, node: Partition) -> ModelEstimate:
        hit = self._store.get(node)
        if hit is None:
            if node.domain != self.sample.domain:
                raise DomainError("node and sample live on different domains")
            hit = self._store.setdefault(node, self._tables.evaluate(node))
        return hit

    def value(self, node: Partition) -> Fraction:
        return self.get(node).value

    @property
    def evaluations(self) -> int:
        return len(self._store)

    def known(self) -> dict:
        return {p: e.value for p, e in self._store.items()}


class FixedCosts(CostOracle):
    """Injected costs, e.g. a published fixture; unknown nodes are an error."""

    def __init__(self, costs: Mapping[Partition, Fraction]):
        self._costs = {p: Fraction(v) for p, v in costs.items()}
        self._seen: set = set()

    def value(self, node: Partition) -> Fraction:
        try:
            v = self._costs[node]
        except KeyError:
            raise KeyError(f"no cost given for node {node.encode()}") from None
        self._seen.add(node)
        return v

    @property
    def evaluations(self) -> int:
        return len(self._seen)

    def known(self) -> dict:
        return {p: self._costs[p] for p in self._seen}

    def table(self) -> dict:
        return dict(self._costs)


def estimate_all(nodes: Iterable[Partition], sample: Sample, spec: EstimatorSpec,
                 cache: EstimateCache | None = None) -> dict[Partition, ModelEstimate]:
    cache = cache or EstimateCache(sample, spec)
    return {p: cache.get(p) for p in nodes}
