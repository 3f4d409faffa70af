"""Set partitions, pair partitions, and crossing structure on {1,...,k}."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import ConfigurationError, EnumerationGuardError

PARTITION_GUARD = 12
PAIR_PARTITION_GUARD = 16


@dataclass(frozen=True, eq=False)
class Partition:
    """A partition of {1,...,k} in canonical form.

    Blocks are stored sorted by their minimum element, elements ascending,
    e.g. Partition of {{2,4},{1,3}} prints as "{1,3}{2,4}".  Equality is by
    block structure, so a PairPartition equals the plain Partition with the
    same blocks.
    """

    blocks: tuple

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __post_init__(self):
        if any(len(tuple(b)) == 0 for b in self.blocks):
            raise ConfigurationError("blocks must be nonempty")
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0]))
        object.__setattr__(self, "blocks", canon)
        seen = set()
        for block in canon:
            for element in block:
                if element in seen:
                    raise ConfigurationError(f"element {element} appears twice")
                seen.add(element)
        k = len(seen)
        if seen != set(range(1, k + 1)):
            raise ConfigurationError("blocks must cover {1,...,k} exactly")

    @property
    def k(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_index(self) -> dict:
        """Element -> index of its block in canonical order."""
        out = {}
        for i, block in enumerate(self.blocks):
            for element in block:
                out[element] = i
        return out

    def same_block(self, i: int, j: int) -> bool:
        idx = self.block_index()
        return idx[i] == idx[j]

    def canonical_string(self) -> str:
        return "".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)

    def __str__(self):
        return self.canonical_string()


@dataclass(frozen=True, eq=False)
class PairPartition(Partition):
    """A partition whose blocks all have exactly two elements."""

    def __post_init__(self):
        super().__post_init__()
        if any(len(b) != 2 for b in self.blocks):
            raise ConfigurationError("pair partition blocks must have size 2")

    @property
    def crossing(self) -> bool:
        return is_crossing(self)


def is_crossing(pp: PairPartition) -> bool:
    """True iff two blocks interleave as i < j < l < m with i~l and j~m."""
    arcs = [tuple(b) for b in pp.blocks]
    for a in range(len(arcs)):
        i, l = arcs[a]
        for b in range(a + 1, len(arcs)):
            j, m = arcs[b]
            if i < j < l < m or j < i < m < l:
                return True
    return False


def _restricted_growth_strings(k: int) -> Iterator[list]:
    # Iterative successor walk over restricted growth strings: a[0] = 0 and
    # a[i] <= 1 + max(a[:i]).  Each string encodes one partition.
    a = [0] * k
    b = [1] * k
    while True:
        yield a
        j = k - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        bound = max(b[j], a[j] + 1)
        for i in range(j + 1, k):
            a[i] = 0
            b[i] = bound


def partition_from_labels(labels) -> Partition:
    """Partition grouping positions 1..k by equal label."""
    groups: dict = {}
    for position, label in enumerate(labels, start=1):
        groups.setdefault(label, []).append(position)
    return Partition(tuple(tuple(g) for g in groups.values()))


def enumerate_partitions(k: int) -> Iterator[Partition]:
    """All partitions of {1,...,k} via restricted-growth-string iteration."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if k > PARTITION_GUARD:
        raise EnumerationGuardError(
            f"partition enumeration limited to k <= {PARTITION_GUARD}, got {k}"
        )
    for rgs in _restricted_growth_strings(k):
        yield partition_from_labels(rgs)


def enumerate_pair_partitions(k: int) -> Iterator[PairPartition]:
    """All perfect matchings of {1,...,k}; there are (k-1)!! of them."""
    if k < 1 or k % 2 == 1:
        raise ConfigurationError(f"pair partitions need even k >= 2, got {k}")
    if k > PAIR_PARTITION_GUARD:
        raise EnumerationGuardError(
            f"pair partition enumeration limited to k <= {PAIR_PARTITION_GUARD}, got {k}"
        )
    for blocks in _matchings(tuple(range(1, k + 1))):
        yield PairPartition(blocks)


def _matchings(items: tuple) -> Iterator[tuple]:
    if not items:
        yield ()
        return
    first = items[0]
    for pos in range(1, len(items)):
        partner = items[pos]
        rest = items[1:pos] + items[pos + 1 :]
        for sub in _matchings(rest):
            yield ((first, partner),) + sub


def enumerate_noncrossing_pair_partitions(k: int) -> Iterator[PairPartition]:
    """Non-crossing perfect matchings, built directly by interval splitting;
    there are Catalan(k/2) of them."""
    if k < 1 or k % 2 == 1:
        raise ConfigurationError(f"pair partitions need even k >= 2, got {k}")
    if k > PAIR_PARTITION_GUARD:
        raise EnumerationGuardError(
            f"pair partition enumeration limited to k <= {PAIR_PARTITION_GUARD}, got {k}"
        )
    for blocks in _noncrossing_matchings(tuple(range(1, k + 1))):
        yield PairPartition(blocks)


def _noncrossing_matchings(items: tuple) -> Iterator[tuple]:
    # The first element pairs at an odd offset; inside and outside segments
    # are matched independently, which forbids crossings by construction.
    if not items:
        yield ()
        return
    first = items[0]
    for pos in range(1, len(items), 2):
        partner = items[pos]
        inside = items[1:pos]
        outside = items[pos + 1 :]
        for left in _noncrossing_matchings(inside):
            for right in _noncrossing_matchings(outside):
                yield ((first, partner),) + left + right
