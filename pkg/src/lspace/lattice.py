"""Set partitions and the Learning Spaces built from them.

A node of every space is a :class:`Partition`; the model it stands for is the
set of hypotheses constant on each block, whose VC dimension is the number of
blocks. ``p <= q`` means ``q`` refines ``p`` (``q``'s model contains ``p``'s).
"""
from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence

from .domain import DomainError, FiniteDomain

BLOCK_SEP = "|"
POINT_SEP = ","


class LatticeError(ValueError):
    pass


class Partition:
    """Canonical set partition of a :class:`FiniteDomain`.

    ``blocks`` is a tuple of sorted index tuples ordered by least element, so
    two partitions are equal exactly when their ``blocks`` are equal.
    """

    __slots__ = ("domain", "blocks", "_labels", "_hash")

    def __init__(self, domain: FiniteDomain, blocks: Iterable[Iterable[int]]):
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks))
        seen = [i for b in canon for i in b]
        if any(not b for b in canon):
            raise LatticeError("blocks must be nonempty")
        if sorted(seen) != list(range(len(domain))):
            raise LatticeError("blocks must cover the domain exactly once")
        self._init(domain, canon)

    def _init(self, domain, canon):
        self.domain = domain
        self.blocks = canon
        self._labels = None
        self._hash = hash(canon)

    @classmethod
    def _trusted(cls, domain: FiniteDomain, canon: tuple) -> "Partition":
        p = cls.__new__(cls)
        p._init(domain, canon)
        return p

    @classmethod
    def from_labels(cls, domain: FiniteDomain, labels: Sequence) -> "Partition":
        """Partition whose blocks are the level sets of ``labels[i]``."""
        groups: dict = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        return cls._trusted(domain, tuple(sorted(tuple(g) for g in groups.values())))

    @classmethod
    def from_points(cls, domain: FiniteDomain, blocks: Iterable[Iterable]) -> "Partition":
        """Build from blocks of point identifiers (rather than indices)."""
        return cls(domain, [[domain.index(x) for x in b] for b in blocks])

    @classmethod
    def coarsest(cls, domain: FiniteDomain) -> "Partition":
        return cls._trusted(domain, (tuple(range(len(domain))),))

    @classmethod
    def finest(cls, domain: FiniteDomain) -> "Partition":
        return cls._trusted(domain, tuple((i,) for i in range(len(domain))))

    @classmethod
    def parse(cls, domain: FiniteDomain, text: str) -> "Partition":
        """Inverse of :meth:`encode`, e.g. ``"1,2|3|4"``."""
        names = {str(x): i for i, x in enumerate(domain.points)}
        blocks = []
        for chunk in text.strip().split(BLOCK_SEP):
            block = []
            for tok in chunk.split(POINT_SEP):
                tok = tok.strip()
                if tok not in names:
                    raise LatticeError(f"unknown point {tok!r} in {text!r}")
                block.append(names[tok])
            blocks.append(block)
        return cls(domain, blocks)

    def encode(self) -> str:
        pts = self.domain.points
        return BLOCK_SEP.join(POINT_SEP.join(str(pts[i]) for i in b) for b in self.blocks)

    def __repr__(self) -> str:
        return f"Partition({self.encode()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks and (self.domain is other.domain or self.domain == other.domain)

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def labels(self) -> tuple:
        """``labels[i]`` is the position of the block holding point ``i``."""
        if self._labels is None:
            lab = [0] * len(self.domain)
            for j, b in enumerate(self.blocks):
                for i in b:
                    lab[i] = j
            self._labels = tuple(lab)
        return self._labels

    @property
    def sort_key(self) -> tuple:
        return (len(self.blocks), self.blocks)

    def point_blocks(self) -> list[list]:
        pts = self.domain.points
        return [[pts[i] for i in b] for b in self.blocks]


def _same_domain(p1: Partition, p2: Partition):
    if not (p1.domain is p2.domain or p1.domain == p2.domain):
        raise LatticeError("partitions live on different domains")


def leq(p1: Partition, p2: Partition) -> bool:
    """True iff ``p2`` refines ``p1`` (every block of ``p2`` sits inside a block of ``p1``)."""
    _same_domain(p1, p2)
    if len(p2.blocks) < len(p1.blocks):
        return False
    lab = p1.labels
    return all(len({lab[i] for i in b}) == 1 for b in p2.blocks)


def comparable(p1: Partition, p2: Partition) -> bool:
    return leq(p1, p2) or leq(p2, p1)


def meet(p1: Partition, p2: Partition) -> Partition:
    """Finest common coarsening: connected components of the two block relations."""
    _same_domain(p1, p2)
    parent = list(range(len(p1.domain)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for p in (p1, p2):
        for b in p.blocks:
            root = find(b[0])
            for i in b[1:]:
                r = find(i)
                if r != root:
                    parent[r] = root
    return Partition.from_labels(p1.domain, [find(i) for i in range(len(p1.domain))])


def join(p1: Partition, p2: Partition) -> Partition:
    """Coarsest common refinement: intersect blocks pairwise."""
    _same_domain(p1, p2)
    return Partition.from_labels(p1.domain, list(zip(p1.labels, p2.labels)))


def vc_dim(node: Partition) -> int:
    return len(node.blocks)


# -- enumeration ------------------------------------------------------------

def _subsets_lex(seq: tuple, max_size: int, start: int = 0, prefix: tuple = ()) -> Iterator[tuple]:
    yield prefix
    if len(prefix) == max_size:
        return
    for i in range(start, len(seq)):
        yield from _subsets_lex(seq, max_size, i + 1, prefix + (seq[i],))


def _partitions_k(elems: tuple, k: int) -> Iterator[tuple]:
    # yields canonical block tuples with exactly k blocks, in lexicographic order
    if k == 0:
        if not elems:
            yield ()
        return
    if len(elems) < k:
        return
    if k == 1:
        yield (elems,)
        return
    first, rest = elems[0], elems[1:]
    for extra in _subsets_lex(rest, len(rest) - (k - 1)):
        taken = set(extra)
        remaining = tuple(e for e in rest if e not in taken)
        for tail in _partitions_k(remaining, k - 1):
            yield ((first,) + extra,) + tail


def partitions_with_blocks(domain: FiniteDomain, k: int) -> Iterator[Partition]:
    for canon in _partitions_k(tuple(range(len(domain))), k):
        yield Partition._trusted(domain, canon)


def all_partitions(domain: FiniteDomain) -> Iterator[Partition]:
    """Every partition, coarsest first; within a rank, lexicographic by blocks."""
    for k in range(1, len(domain) + 1):
        yield from partitions_with_blocks(domain, k)


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _two_splits(block: tuple) -> Iterator[tuple[tuple, tuple]]:
    head, rest = block[0], block[1:]
    for r in range(len(rest)):
        for extra in combinations(rest, r):
            left = (head,) + extra
            taken = set(extra)
            yield left, tuple(e for e in rest if e not in taken)


def split_neighbors(p: Partition) -> Iterator[Partition]:
    """Refinements of ``p`` splitting exactly one block in two."""
    for j, b in enumerate(p.blocks):
        if len(b) < 2:
            continue
        others = p.blocks[:j] + p.blocks[j + 1:]
        for left, right in _two_splits(b):
            yield Partition._trusted(p.domain, tuple(sorted(others + (left, right))))


def merge_neighbors(p: Partition) -> Iterator[Partition]:
    """Coarsenings of ``p`` merging exactly two blocks."""
    bl = p.blocks
    for a, b in combinations(range(len(bl)), 2):
        merged = tuple(sorted(bl[a] + bl[b]))
        others = tuple(x for j, x in enumerate(bl) if j != a and j != b)
        yield Partition._trusted(p.domain, tuple(sorted(others + (merged,))))


def feature_set_to_partition(domain: FiniteDomain, features: Iterable[int]) -> Partition:
    """Blocks are classes of points agreeing on every (1-based) feature in ``features``."""
    if domain.features is None:
        raise LatticeError("domain points carry no feature vectors")
    feats = sorted(set(features))
    d = domain.dimension
    if any(not 1 <= f <= d for f in feats):
        raise LatticeError(f"features must lie in 1..{d}")
    keys = [tuple(row[f - 1] for f in feats) for row in domain.features]
    return Partition.from_labels(domain, keys)


# -- spaces -----------------------------------------------------------------

class LearningSpace:
    """Finite poset of partition nodes with on-demand Hasse neighborhoods."""

    name = "space"

    def __init__(self, domain: FiniteDomain):
        self.domain = domain

    def nodes(self) -> Iterator[Partition]:
        raise NotImplementedError

    def __contains__(self, node: Partition) -> bool:
        raise NotImplementedError

    def up(self, node: Partition) -> list[Partition]:
        raise NotImplementedError

    def down(self, node: Partition) -> list[Partition]:
        raise NotImplementedError

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def bottom(self) -> Partition:
        """Coarsest node in canonical order (the restart default)."""
        return next(iter(self.nodes()))

    def require(self, node: Partition):
        if node.domain != self.domain or node not in self:
            raise LatticeError(f"{node.encode()} is not a node of this space")

    def vc_dim(self, node: Partition) -> int:
        return len(node.blocks)


class PartitionLattice(LearningSpace):
    """Every partition of the domain; neighbors are generated, never stored."""

    name = "partition"

    def nodes(self) -> Iterator[Partition]:
        return all_partitions(self.domain)

    def __contains__(self, node) -> bool:
        return isinstance(node, Partition) and node.domain == self.domain

    def size(self) -> int:
        return bell_number(len(self.domain))

    def bottom(self) -> Partition:
        return Partition.coarsest(self.domain)

    def up(self, node):
        self.require(node)
        return list(split_neighbors(node))

    def down(self, node):
        self.require(node)
        return list(merge_neighbors(node))


class MaterializedSpace(LearningSpace):
    """Explicit node set viewed as a sub-poset of the partition lattice.

    Covers are computed inside the sub-poset, so removing nodes can create new
    Hasse edges. Construction checks that every cover strictly increases the
    VC dimension.
    """

    name = "restricted"

    def __init__(self, domain: FiniteDomain, nodes: Iterable[Partition], name: str | None = None):
        super().__init__(domain)
        uniq = {}
        for p in nodes:
            if p.domain != domain:
                raise LatticeError("node from another domain")
            uniq.setdefault(p, None)
        if not uniq:
            raise LatticeError("a space needs at least one node")
        self._nodes = sorted(uniq, key=lambda p: p.sort_key)
        self._set = frozenset(self._nodes)
        self._up: dict = {}
        self._down: dict = {}
        if name:
            self.name = name
        self._check_axiom_ii()

    def _check_axiom_ii(self):
        for p in self._nodes:
            for q in self.up(p):
                if len(q.blocks) <= len(p.blocks):
                    raise LatticeError(f"cover {p.encode()} < {q.encode()} does not raise the VC dimension")

    def nodes(self):
        return iter(self._nodes)

    def __contains__(self, node) -> bool:
        return node in self._set

    def size(self) -> int:
        return len(self._nodes)

    def bottom(self):
        return self._nodes[0]

    def _covers(self, node, above: bool) -> list[Partition]:
        if above:
            cand = [q for q in self._nodes if q != node and leq(node, q)]
            return [q for q in cand if not any(r != q and leq(r, q) for r in cand)]
        cand = [q for q in self._nodes if q != node and leq(q, node)]
        return [q for q in cand if not any(r != q and leq(q, r) for r in cand)]

    def up(self, node):
        if node not in self._up:
            self.require(node)
            self._up[node] = self._covers(node, True)
        return list(self._up[node])

    def down(self, node):
        if node not in self._down:
            self.require(node)
            self._down[node] = self._covers(node, False)
        return list(self._down[node])


def restricted(base: LearningSpace, predicate: Callable[[Partition], bool], name: str = "restricted") -> MaterializedSpace:
    return MaterializedSpace(base.domain, (p for p in base.nodes() if predicate(p)), name=name)


def l2_space(domain: FiniteDomain) -> MaterializedSpace:
    """Nodes with at most two blocks."""
    nodes = list(partitions_with_blocks(domain, 1)) + list(partitions_with_blocks(domain, 2))
    return MaterializedSpace(domain, nodes, name="l2")


def feature_lattice(domain: FiniteDomain) -> MaterializedSpace:
    """Partitions induced by every feature subset (duplicates collapse to one node)."""
    d = domain.dimension
    if d is None:
        raise LatticeError("the feature lattice needs feature vectors")
    if d > 16:
        raise LatticeError("feature lattice limited to 16 features")
    nodes = (feature_set_to_partition(domain, [f + 1 for f in range(d) if mask >> f & 1]) for mask in range(1 << d))
    return MaterializedSpace(domain, nodes, name="feature")


def neighbors(space: LearningSpace, node: Partition, direction: str) -> list[Partition]:
    if direction == "up":
        return space.up(node)
    if direction == "down":
        return space.down(node)
    raise ValueError("direction must be 'up' or 'down'")


def hasse_distance(space: LearningSpace, p1: Partition, p2: Partition) -> int | None:
    """Undirected shortest-path length in the Hasse diagram; ``None`` if unreachable."""
    space.require(p1)
    space.require(p2)
    if p1 == p2:
        return 0
    seen = {p1}
    frontier = deque([(p1, 0)])
    while frontier:
        node, dist = frontier.popleft()
        for nb in space.up(node) + space.down(node):
            if nb == p2:
                return dist + 1
            if nb not in seen:
                seen.add(nb)
                frontier.append((nb, dist + 1))
    return None


def enumerate_nodes(space: LearningSpace) -> Iterator[Partition]:
    return space.nodes()


def maximal_nodes(space: LearningSpace) -> list[Partition]:
    return [p for p in space.nodes() if not space.up(p)]


def covers_all_hypotheses(space: LearningSpace) -> bool:
    """Whether every 0/1 labeling of the domain respects some node (union of models is everything)."""
    n = len(space.domain)
    nodes = list(space.nodes())
    for mask in range(1 << (n - 1)):
        labels = [(mask >> i) & 1 for i in range(n)]
        if not any(all(len({labels[i] for i in b}) == 1 for b in p.blocks) for p in nodes):
            return False
    return True


def boolean_embedding(m: int) -> tuple[FiniteDomain, dict]:
    """Boolean lattice on ``{1..m}`` as partitions of ``{0..m}``.

    Subset ``A`` maps to singletons ``{i}`` for ``i`` in ``A`` plus one block
    holding 0 and the rest; inclusion of subsets becomes refinement.
    """
    domain = FiniteDomain(tuple(range(m + 1)))
    table = {}
    for mask in range(1 << m):
        subset = frozenset(i + 1 for i in range(m) if mask >> i & 1)
        rest = [0] + [i for i in range(1, m + 1) if i not in subset]
        table[subset] = Partition(domain, [rest] + [[i] for i in sorted(subset)])
    return domain, table
