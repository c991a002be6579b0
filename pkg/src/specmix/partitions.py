"""Set partitions of {1, ..., k} in restricted-growth form.

A partition is stored as its restricted-growth string (RGS): ``labels[i]`` is
the (1-based) index of the block containing element ``i + 1``, blocks being
numbered in order of their smallest element.  This makes equality, hashing
and ordering trivial, which the memoized moment engine relies on.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

K_MAX = 12


class PartitionError(ValueError):
    """Invalid partition data or out-of-range request."""


def canonical_labels(raw: Sequence) -> tuple[int, ...]:
    """Relabel an arbitrary sequence of block tags into restricted-growth form."""
    seen: dict = {}
    out = []
    for tag in raw:
        if tag not in seen:
            seen[tag] = len(seen) + 1
        out.append(seen[tag])
    return tuple(out)


def _check_rgs(labels: Sequence[int]) -> None:
    top = 0
    for i, lab in enumerate(labels):
        if not isinstance(lab, int) or lab < 1 or lab > top + 1:
            raise PartitionError(f"labels {tuple(labels)} are not a restricted-growth string (position {i})")
        top = max(top, lab)


@dataclass(frozen=True, order=True)
class Partition:
    """A partition of {1..k}, canonical restricted-growth labels."""

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise PartitionError("a partition needs k >= 1")
        _check_rgs(labels)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "Partition":
        elems = sorted(x for b in blocks for x in b)
        k = len(elems)
        if elems != list(range(1, k + 1)):
            raise PartitionError(f"blocks {blocks} do not partition 1..{k}")
        tag = {}
        for j, b in enumerate(blocks):
            if not b:
                raise PartitionError("empty block")
            for x in b:
                tag[x] = j
        return cls(canonical_labels(tag[i] for i in range(1, k + 1)))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        return parse_partition(text)

    @classmethod
    def discrete(cls, k: int) -> "Partition":
        return cls(tuple(range(1, k + 1)))

    @classmethod
    def single_block(cls, k: int) -> "Partition":
        return cls((1,) * k)

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def n_blocks(self) -> int:
        return max(self.labels)

    def __len__(self) -> int:
        return self.n_blocks

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for i, lab in enumerate(self.labels, start=1):
            out[lab - 1].append(i)
        return tuple(tuple(b) for b in out)

    def block_sizes(self) -> tuple[int, ...]:
        sizes = [0] * self.n_blocks
        for lab in self.labels:
            sizes[lab - 1] += 1
        return tuple(sizes)

    def same_block(self, i: int, j: int) -> bool:
        return self.labels[i - 1] == self.labels[j - 1]

    def refines(self, other: "Partition") -> bool:
        """True when every block of ``self`` lies inside a block of ``other``."""
        if other.k != self.k:
            return False
        image: dict[int, int] = {}
        for a, b in zip(self.labels, other.labels):
            if image.setdefault(a, b) != b:
                return False
        return True

    def __str__(self) -> str:
        return format_blocks(self.blocks)


@dataclass(frozen=True)
class InducedPartition:
    """Partition induced on a subset ``support`` of {1..k}."""

    support: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if not self.support:
            raise PartitionError("induced partition needs a non-empty support")
        if len(self.support) != len(self.labels):
            raise PartitionError("support and labels differ in length")
        if list(self.support) != sorted(set(self.support)):
            raise PartitionError("support must be strictly increasing")
        _check_rgs(self.labels)

    @classmethod
    def restrict(cls, pi: Partition, support: Sequence[int]) -> "InducedPartition":
        support = tuple(sorted(support))
        return cls(support, canonical_labels(pi.labels[i - 1] for i in support))

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(max(self.labels))]
        for x, lab in zip(self.support, self.labels):
            out[lab - 1].append(x)
        return tuple(tuple(b) for b in out)

    def relabeled(self) -> Partition:
        """Collapse the gaps in the support: a partition of {1..|support|}."""
        return Partition(self.labels)

    def __str__(self) -> str:
        return format_blocks(self.blocks)


def format_blocks(blocks) -> str:
    return "".join("{" + ",".join(str(x) for x in b) + "}" for b in blocks)


_BLOCK_RE = re.compile(r"\{([^{}]*)\}")


def parse_partition(text: str) -> Partition:
    """Parse ``"{1,8,10}{2,4}{3,5}{6,7,9}"``; block order is free.

    Raises PartitionError with the character offset of the first problem.
    """
    pos = 0
    blocks = []
    s = text.strip()
    while pos < len(s):
        if s[pos].isspace() or s[pos] == ",":
            pos += 1
            continue
        m = _BLOCK_RE.match(s, pos)
        if m is None:
            raise PartitionError(f"expected '{{' at position {pos} in {text!r}")
        body = m.group(1).strip()
        if not body:
            raise PartitionError(f"empty block at position {pos}")
        try:
            blocks.append([int(tok) for tok in body.split(",")])
        except ValueError:
            raise PartitionError(f"non-integer element in block at position {pos}") from None
        pos = m.end()
    if not blocks:
        raise PartitionError("no blocks found")
    return Partition.from_blocks(blocks)


# ----------------------------------------------------------------- enumeration

def _check_k(k: int, k_max: int | None = None) -> None:
    k_max = K_MAX if k_max is None else k_max
    if not isinstance(k, int) or k < 1 or k > k_max:
        raise PartitionError(f"k={k} out of range 1..K_MAX={k_max}")


def enumerate_partitions(k: int, k_max: int | None = None) -> Iterator[Partition]:
    """All partitions of {1..k}, in lexicographic restricted-growth order."""
    _check_k(k, k_max)
    for labels in _rgs(k):
        yield _trusted(labels)


def _trusted(labels: tuple[int, ...]) -> Partition:
    # labels already known to be a valid RGS; skip the check on hot paths
    p = object.__new__(Partition)
    object.__setattr__(p, "labels", labels)
    return p


def _rgs(k: int) -> Iterator[tuple[int, ...]]:
    a = [1] * k
    b = [1] + [2] * (k - 1)  # b[i] = max(a[:i]) + 1, the largest value allowed at i
    yield tuple(a)
    while True:
        j = k - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        top = max(b[j], a[j] + 1)
        for i in range(j + 1, k):
            a[i] = 1
            b[i] = top
        yield tuple(a)


def enumerate_pairings(k: int, k_max: int | None = None) -> Iterator[Partition]:
    """Partitions of {1..k} into blocks of size exactly two, (k-1)!! of them."""
    _check_k(k, k_max)
    if k % 2:
        raise PartitionError(f"pairings need an even k, got {k}")
    out = []

    def rec(labels: list[int], nxt: int) -> None:
        try:
            i = labels.index(0)
        except ValueError:
            out.append(tuple(labels))
            return
        for j in range(i + 1, k):
            if labels[j] == 0:
                labels[i] = labels[j] = nxt
                rec(labels, nxt + 1)
                labels[i] = labels[j] = 0

    rec([0] * k, 1)
    for labels in sorted(out):
        yield Partition(labels)


def bell_number(k: int) -> int:
    """Bell number via the Bell triangle (independent of the RGS enumerator)."""
    row = [1]
    for _ in range(k - 1):
        new = [row[-1]]
        for x in row:
            new.append(new[-1] + x)
        row = new
    return row[-1] if k >= 1 else 1


# ------------------------------------------------------------- crossing tests

def is_noncrossing(pi: Partition) -> bool:
    lab = pi.labels
    for x, y, z, t in itertools.combinations(range(pi.k), 4):
        if lab[x] == lab[z] and lab[y] == lab[t] and lab[x] != lab[y]:
            return False
    return True


def _blocks_cross(a: Sequence[int], b: Sequence[int]) -> bool:
    # a, b sorted disjoint element lists
    tagged = sorted([(x, 0) for x in a] + [(x, 1) for x in b])
    seq = [t for _, t in tagged]
    # interleaving pattern 0..1..0..1 or 1..0..1..0
    changes = sum(1 for i in range(1, len(seq)) if seq[i] != seq[i - 1])
    return changes >= 3


def nc_closure(pi: Partition) -> Partition:
    """Smallest non-crossing partition above ``pi`` in refinement order."""
    blocks = [list(b) for b in pi.blocks]
    merged = True
    while merged:
        merged = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if _blocks_cross(blocks[i], blocks[j]):
                    blocks[i] = sorted(blocks[i] + blocks[j])
                    del blocks[j]
                    merged = True
                    break
            if merged:
                break
    return Partition.from_blocks(blocks)


def connected_components(pi: Partition) -> list[InducedPartition]:
    """Partitions induced by ``pi`` on the blocks of its nc-closure."""
    return [InducedPartition.restrict(pi, b) for b in nc_closure(pi).blocks]


def is_connected(pi: Partition) -> bool:
    return nc_closure(pi).n_blocks == 1


def thin(pi: Partition | InducedPartition) -> InducedPartition:
    """Erase ``l`` whenever its cyclic successor lies in the same block.

    Removal is one element at a time, smallest index first, until no
    cyclically adjacent same-block pair remains.  A lone surviving element
    is kept (its successor is itself).
    """
    if isinstance(pi, Partition):
        support = list(range(1, pi.k + 1))
        block = dict(zip(support, pi.labels))
    else:
        support = list(pi.support)
        block = dict(zip(pi.support, pi.labels))
    changed = True
    while changed and len(support) > 1:
        changed = False
        m = len(support)
        for i in range(m):
            if block[support[i]] == block[support[(i + 1) % m]]:
                del support[i]
                changed = True
                break
    return InducedPartition(tuple(support), canonical_labels(block[x] for x in support))


def _cyclic_changes(labels: Sequence[int]) -> int:
    m = len(labels)
    if m < 2:
        return 0
    return sum(1 for j in range(m) if labels[j] != labels[(j + 1) % m])


def kappa(pi: Partition | InducedPartition) -> int:
    """Number of block changes along the cycle, summed over connected components.

    Each component is run through in the induced cyclic order of its support.
    """
    if isinstance(pi, InducedPartition):
        pi = pi.relabeled()
    return sum(_cyclic_changes(c.labels) for c in connected_components(pi))


def cyclic_canonical(labels: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least RGS over the cyclic rotations of ``labels``."""
    m = len(labels)
    return min(canonical_labels(labels[r:] + labels[:r]) for r in range(m)) if m else ()


def catalan_number(n: int) -> int:
    from math import comb

    return comb(2 * n, n) // (n + 1)
