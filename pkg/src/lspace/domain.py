"""Finite input domains, exact joint distributions, samples and empirical measures.

All probabilities are :class:`fractions.Fraction` so that ties between model
errors can be detected by plain equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

LABELS = (0, 1)


class DomainError(ValueError):
    """Raised on malformed domains, distributions or samples."""


@dataclass(frozen=True, eq=False)
class FiniteDomain:
    """An ordered, finite set of opaque point identifiers.

    ``features`` optionally carries one 0/1 vector per point (all the same
    width); the feature-selection lattice needs them, nothing else does.
    """

    points: tuple
    features: tuple | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise DomainError("a domain needs at least one point")
        if len(set(points)) != len(points):
            raise DomainError("domain points must be pairwise distinct")
        object.__setattr__(self, "points", points)
        if self.features is not None:
            feats = tuple(tuple(int(b) for b in row) for row in self.features)
            if len(feats) != len(points):
                raise DomainError("one feature vector per point is required")
            widths = {len(row) for row in feats}
            if len(widths) != 1:
                raise DomainError("feature vectors must share one width")
            if any(b not in (0, 1) for row in feats for b in row):
                raise DomainError("features must be 0/1")
            object.__setattr__(self, "features", feats)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    @classmethod
    def range(cls, n: int) -> "FiniteDomain":
        """Domain ``1..n``."""
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_feature_rows(cls, rows: Iterable[Sequence[int]]) -> "FiniteDomain":
        """Domain of the distinct 0/1 rows, numbered ``1..n`` in lexicographic order."""
        distinct = sorted({tuple(int(b) for b in r) for r in rows})
        return cls(tuple(range(1, len(distinct) + 1)), tuple(distinct))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator:
        return iter(self.points)

    def __contains__(self, point) -> bool:
        return point in self._index

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteDomain):
            return NotImplemented
        return self.points == other.points and self.features == other.features

    def __hash__(self) -> int:
        return hash(self.points)

    def index(self, point: Hashable) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise DomainError(f"point {point!r} is not in the domain") from None

    @property
    def dimension(self) -> int | None:
        return None if self.features is None else len(self.features[0])


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats go through their shortest repr so 0.1 becomes 1/10
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Exact table ``P(X = x, Y = y)``; ``prob[i] = (P(x_i, 0), P(x_i, 1))``."""

    domain: FiniteDomain
    prob: tuple

    def __post_init__(self):
        table = tuple((_as_fraction(p0), _as_fraction(p1)) for p0, p1 in self.prob)
        if len(table) != len(self.domain):
            raise DomainError("distribution table does not match the domain")
        if any(p < 0 for row in table for p in row):
            raise DomainError("probabilities must be nonnegative")
        total = sum(p for row in table for p in row)
        if total != 1:
            raise DomainError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "prob", table)

    @classmethod
    def from_mapping(cls, domain: FiniteDomain, table: Mapping) -> "JointDistribution":
        """Build from ``{(point, label): probability}``; missing entries are 0."""
        rows = [[Fraction(0), Fraction(0)] for _ in domain.points]
        for (point, label), p in table.items():
            if label not in LABELS:
                raise DomainError(f"label {label!r} is not 0/1")
            rows[domain.index(point)][label] += _as_fraction(p)
        return cls(domain, tuple(tuple(r) for r in rows))

    @classmethod
    def from_conditional(cls, domain: FiniteDomain, marginal: Sequence, p_one: Sequence):
        """Build from ``P(X = x_i)`` and ``P(Y = 1 | X = x_i)``."""
        rows = []
        for px, p1 in zip(marginal, p_one, strict=True):
            px, p1 = _as_fraction(px), _as_fraction(p1)
            rows.append((px * (1 - p1), px * p1))
        return cls(domain, tuple(rows))

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.domain == other.domain and self.prob == other.prob

    __hash__ = None

    def __getitem__(self, key) -> Fraction:
        point, label = key
        return self.prob[self.domain.index(point)][label]

    def as_mapping(self) -> dict:
        return {(x, y): self.prob[i][y] for i, x in enumerate(self.domain.points) for y in LABELS}


@dataclass(frozen=True, eq=False)
class Sample:
    """Ordered observations; ``points`` holds domain indices, ``labels`` 0/1."""

    domain: FiniteDomain
    points: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        pts, ys = tuple(self.points), tuple(self.labels)
        if len(pts) != len(ys):
            raise DomainError("points and labels differ in length")
        n = len(self.domain)
        if any(not (0 <= i < n) for i in pts):
            raise DomainError("sample refers to points outside the domain")
        if any(y not in LABELS for y in ys):
            raise DomainError("labels must be 0/1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", ys)

    @classmethod
    def from_pairs(cls, domain: FiniteDomain, pairs: Iterable) -> "Sample":
        pts, ys = [], []
        for point, label in pairs:
            pts.append(domain.index(point))
            ys.append(int(label))
        return cls(domain, tuple(pts), tuple(ys))

    @classmethod
    def from_counts(cls, domain: FiniteDomain, counts: Sequence) -> "Sample":
        """Deterministic sample realizing ``counts[i] = (#(x_i, 0), #(x_i, 1))``."""
        pts, ys = [], []
        for i, row in enumerate(counts):
            for y in LABELS:
                pts.extend([i] * int(row[y]))
                ys.extend([y] * int(row[y]))
        return cls(domain, tuple(pts), tuple(ys))

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def pairs(self) -> list:
        return [(self.domain.points[i], y) for i, y in zip(self.points, self.labels)]

    def __getitem__(self, item) -> "Sample":
        if not isinstance(item, slice):
            raise TypeError("samples are sliced, not indexed")
        return Sample(self.domain, self.points[item], self.labels[item])

    def take(self, indices: Iterable[int]) -> "Sample":
        idx = list(indices)
        return Sample(self.domain, tuple(self.points[i] for i in idx), tuple(self.labels[i] for i in idx))

    def __add__(self, other: "Sample") -> "Sample":
        if other.domain != self.domain:
            raise DomainError("cannot concatenate samples over different domains")
        return Sample(self.domain, self.points + other.points, self.labels + other.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (self.domain, self.points, self.labels) == (other.domain, other.points, other.labels)

    __hash__ = None

    def counts(self) -> tuple:
        table = [[0, 0] for _ in self.domain.points]
        for i, y in zip(self.points, self.labels):
            table[i][y] += 1
        return tuple(tuple(r) for r in table)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Exact counts of a sample; ``counts[i] = (#(x_i, 0), #(x_i, 1))``."""

    domain: FiniteDomain
    counts: tuple
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise DomainError("an empirical measure needs a positive total")
        if sum(c for row in self.counts for c in row) != self.total:
            raise DomainError("counts do not sum to total")

    def frequency(self, point, label: int) -> Fraction:
        return Fraction(self.counts[self.domain.index(point)][label], self.total)

    def frequencies(self) -> dict:
        return {
            (x, y): Fraction(self.counts[i][y], self.total)
            for i, x in enumerate(self.domain.points)
            for y in LABELS
        }

    def as_distribution(self) -> JointDistribution:
        return JointDistribution(
            self.domain,
            tuple((Fraction(c0, self.total), Fraction(c1, self.total)) for c0, c1 in self.counts),
        )


def empirical_measure(sample: Sample) -> EmpiricalMeasure:
    if sample.n == 0:
        raise DomainError("the empirical measure of an empty sample is undefined")
    return EmpiricalMeasure(sample.domain, sample.counts(), sample.n)


def sample_from(dist: JointDistribution, n: int, seed: int) -> Sample:
    """Draw ``n`` i.i.d. pairs from ``dist`` with a private generator seeded by ``seed``."""
    if n < 0:
        raise DomainError("sample size must be nonnegative")
    if n == 0:
        return Sample(dist.domain)
    weights = np.array([float(p) for row in dist.prob for p in row])
    weights /= weights.sum()
    draws = np.random.default_rng(seed).choice(len(weights), size=n, p=weights)
    return Sample(dist.domain, tuple(int(d) // 2 for d in draws), tuple(int(d) % 2 for d in draws))


def split_holdout(sample: Sample, v_n: int) -> tuple[Sample, Sample]:
    """Training = first ``n - v_n`` pairs, validation = last ``v_n``."""
    if not 0 < v_n < sample.n:
        raise DomainError(f"validation size must satisfy 0 < v_n < n (got v_n={v_n}, n={sample.n})")
    cut = sample.n - v_n
    return sample[:cut], sample[cut:]


def kfold_indices(n: int, k: int) -> list[range]:
    if k < 2:
        raise DomainError("k-fold needs k >= 2")
    if n % k:
        raise DomainError(f"sample size {n} is not divisible by k={k}")
    size = n // k
    return [range(j * size, (j + 1) * size) for j in range(k)]


def kfold_split(sample: Sample, k: int) -> list[Sample]:
    return [sample[r.start:r.stop] for r in kfold_indices(sample.n, k)]
