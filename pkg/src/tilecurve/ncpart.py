"""Non-crossing partitions on a cyclically ordered ground set.

A partition of indices drawn from ``[2n] = {0, ..., 2n-1}`` is stored as a
tuple of blocks, each block a sorted tuple, blocks sorted by their minimum.
The white side of a connection lives on the even indices, the black side on
the odd indices; a :class:`Cnc` couples a partition of the evens with its
unique maximal complement on the odds.  Blocks of the two sides are joined
by the adjacency relation, which always forms a tree; merging two same-side
blocks through a common adjacent block is the elementary step from which
spanning trees of tiles are built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

Block = tuple[int, ...]
Partition = tuple[Block, ...]


class MergeRejected(Exception):
    """Raised when two blocks cannot be merged without creating a crossing."""


class MalformedPartition(Exception):
    pass


def canon(blocks) -> Partition:
    """Canonical form: each block sorted, blocks sorted by minimum."""
    bs = [tuple(sorted(b)) for b in blocks]
    if any(not b for b in bs):
        raise MalformedPartition("empty block")
    return tuple(sorted(bs))


def check_partition(blocks: Partition, ground) -> None:
    seen: set[int] = set()
    for b in blocks:
        for x in b:
            if x in seen:
                raise MalformedPartition(f"index {x} in two blocks")
            seen.add(x)
    if seen != set(ground):
        raise MalformedPartition("blocks do not cover the ground set")


def is_noncrossing(blocks, ambient: int | None = None) -> bool:
    """True iff no a<b<c<d has a,c in one block and b,d in another.

    The indices are compared in their natural order, which is also their
    cyclic order on the circle.  ``ambient`` is accepted for symmetry with
    callers but does not affect the test.
    """
    blocks = canon(blocks)
    owner: dict[int, int] = {}
    for i, b in enumerate(blocks):
        for x in b:
            if x in owner:
                raise MalformedPartition(f"index {x} in two blocks")
            owner[x] = i
    remaining = {i: len(b) for i, b in enumerate(blocks)}
    stack: list[int] = []
    for x in sorted(owner):
        i = owner[x]
        if stack and stack[-1] == i:
            pass
        elif i in stack:
            return False  # reopening a block that is not on top crosses
        else:
            stack.append(i)
        remaining[i] -= 1
        if remaining[i] == 0:
            stack.pop()
    return True


def meet(partitions: list[Partition]) -> Partition:
    """Common refinement: blocks are the non-empty pairwise intersections."""
    if not partitions:
        raise MalformedPartition("meet of no partitions")
    ground = sorted(x for b in partitions[0] for x in b)
    for pi in partitions[1:]:
        if sorted(x for b in pi for x in b) != ground:
            raise MalformedPartition("ground-set mismatch in meet")
    key: dict[int, tuple[int, ...]] = {}
    for x in ground:
        ks = []
        for pi in partitions:
            for i, b in enumerate(pi):
                if x in b:
                    ks.append(i)
                    break
        key[x] = tuple(ks)
    groups: dict[tuple[int, ...], list[int]] = {}
    for x in ground:
        groups.setdefault(key[x], []).append(x)
    return canon(groups.values())


def cyc_interval(i: int, j: int, size: int) -> list[int]:
    """Closed cyclic interval [i, j] inside {0, ..., size-1}."""
    if i <= j:
        return list(range(i, j + 1))
    return list(range(i, size)) + list(range(0, j + 1))


def complement(pi: Partition, size: int) -> Partition:
    """The unique maximal partition of the opposite parity compatible with pi.

    ``pi`` partitions the even (or odd) indices of ``[size]``; the result
    partitions the odd (resp. even) ones so that the union is non-crossing,
    computed as the meet over blocks of their component partitions.
    """
    ground = sorted(x for b in pi for x in b)
    if not ground:
        raise MalformedPartition("empty partition")
    parity = ground[0] % 2
    if any(x % 2 != parity for x in ground):
        raise MalformedPartition("mixed parity ground set")
    other = [x for x in range(size) if x % 2 != parity]
    per_block: list[Partition] = []
    for b in pi:
        comps = []
        for a, bnext in zip(b, b[1:] + (b[0],)):
            inside = [x for x in cyc_interval(a, bnext, size)[1:-1] if x % 2 != parity]
            if inside:
                comps.append(tuple(inside))
        if len(b) == 1:
            comps = [tuple(other)]
        per_block.append(canon(comps))
    return meet(per_block)


@dataclass(frozen=True)
class Cnc:
    """A complementary pair of non-crossing partitions on ``[size]``.

    ``white`` partitions the even indices, ``black`` the odd ones, and each
    is the complement of the other.  ``marking`` singles out an adjacent
    (white block, black block) pair.
    """

    size: int
    white: Partition
    black: Partition
    marking: tuple[Block, Block] | None = None

    @property
    def n(self) -> int:
        return self.size // 2

    def validate(self) -> None:
        if self.size % 2 != 0 or self.size <= 0:
            raise MalformedPartition("size must be a positive even integer")
        check_partition(self.white, range(0, self.size, 2))
        check_partition(self.black, range(1, self.size, 2))
        if not is_noncrossing(self.white + self.black):
            raise MalformedPartition("white/black union is crossing")
        if complement(self.white, self.size) != self.black:
            raise MalformedPartition("black side is not the complement")
        if len(self.white) + len(self.black) != self.n + 1:
            raise MalformedPartition("block count is not n+1")
        if self.marking is not None:
            bw, bb = self.marking
            if bw not in self.white or bb not in self.black:
                raise MalformedPartition("marking does not name existing blocks")
            if (bw, bb) not in self.adjacency():
                raise MalformedPartition("marked blocks are not adjacent")

    def block_of(self, i: int) -> Block:
        for b in self.white if i % 2 == 0 else self.black:
            if i in b:
                return b
        raise KeyError(i)

    def adjacency(self) -> tuple[tuple[Block, Block], ...]:
        """The block pairs (white, black) joined by the i/i+1 rule.

        There are exactly n of them and they form a tree on the n+1 blocks.
        """
        pairs = set()
        for i in range(self.size):
            a = self.block_of(i)
            b = self.block_of((i + 1) % self.size)
            pairs.add((a, b) if i % 2 == 0 else (b, a))
        return tuple(sorted(pairs))

    def adjacency_witness(self, bw: Block, bb: Block) -> tuple[int, int]:
        """The unique (i, j) with i, j in bw and i+1, j-1 in bb (mod size)."""
        ii = [i for i in bw if (i + 1) % self.size in bb]
        jj = [j for j in bw if (j - 1) % self.size in bb]
        if len(ii) != 1 or len(jj) != 1:
            raise MalformedPartition("blocks are not adjacent through a unique arc")
        return ii[0], jj[0]

    def text(self) -> str:
        def fmt(p: Partition) -> str:
            return "".join("{" + " ".join(map(str, b)) + "}" for b in p)

        s = f"w:{fmt(self.white)} b:{fmt(self.black)}"
        if self.marking is not None:
            bw, bb = self.marking
            s += " mark:({%s},{%s})" % (" ".join(map(str, bw)), " ".join(map(str, bb)))
        return s


def cnc_from_white(size: int, white, marking=None) -> Cnc:
    w = canon(white)
    if not is_noncrossing(w):
        raise MalformedPartition("white side is crossing")
    c = Cnc(size, w, complement(w, size), marking)
    c.validate()
    return c


def parse_cnc(text: str) -> Cnc:
    """Inverse of :meth:`Cnc.text`, for fixtures and plan files."""
    parts = text.split()
    chunks: dict[str, str] = {}
    for p in parts:
        key, _, val = p.partition(":")
        chunks[key] = val
    def blocks(s: str) -> Partition:
        out = []
        for grp in s.strip("{}").split("}{"):
            out.append(tuple(int(t) for t in grp.split()))
        return canon(out)

    white = blocks(chunks["w"])
    black = blocks(chunks["b"])
    marking = None
    if "mark" in chunks:
        inner = chunks["mark"].strip("()")
        bw_s, bb_s = inner.split("},{")
        bw = tuple(sorted(int(t) for t in bw_s.strip("{}").split()))
        bb = tuple(sorted(int(t) for t in bb_s.strip("{}").split()))
        marking = (bw, bb)
    size = 2 * (len([x for b in white for x in b]))
    c = Cnc(size, white, black, marking)
    c.validate()
    return c


def merge(cnc: Cnc, b1: Block, b2: Block) -> Cnc:
    """Join two same-side blocks through their common adjacent block.

    Succeeds iff some opposite-side block c is adjacent to both; c then
    splits into the two arcs cut off by the union, and the marking (if any)
    is transported.  Raises :class:`MergeRejected` otherwise.
    """
    b1, b2 = tuple(sorted(b1)), tuple(sorted(b2))
    side_w = b1 in cnc.white
    same = cnc.white if side_w else cnc.black
    other = cnc.black if side_w else cnc.white
    if b1 not in same or b2 not in same or b1 == b2:
        raise MalformedPartition("merge arguments must be distinct same-side blocks")
    adj = cnc.adjacency()
    def neighbours(b: Block) -> set[Block]:
        out = set()
        for x, y in adj:
            pair = (x, y) if side_w else (y, x)
            if pair[0] == b:
                out.add(pair[1])
        return out

    common = neighbours(b1) & neighbours(b2)
    if not common:
        raise MergeRejected(f"no block adjacent to both {b1} and {b2}")
    if len(common) > 1:
        raise MalformedPartition("adjacency is not a tree")
    (c,) = common
    # bracket b2 inside a cyclic gap of b1
    gap = None
    if len(b1) == 1:
        gap = (b1[0], b1[0])
    else:
        for u, v in zip(b1, b1[1:] + (b1[0],)):
            inside = set(cyc_interval(u, v, cnc.size)[1:-1])
            if set(b2) <= inside:
                gap = (u, v)
                break
    if gap is None:
        raise MergeRejected(f"{b2} does not sit in a single gap of {b1}")
    u, v = gap
    c_lo = tuple(sorted(set(c) & set(cyc_interval(u, b2[0], cnc.size))))
    c_hi = tuple(sorted(set(c) & set(cyc_interval(b2[-1], v, cnc.size))))
    if not c_lo or not c_hi or set(c_lo) | set(c_hi) != set(c):
        raise MergeRejected("common block does not split into the two cut arcs")
    merged = tuple(sorted(set(b1) | set(b2)))
    new_same = canon([b for b in same if b not in (b1, b2)] + [merged])
    new_other = canon([b for b in other if b != c] + [c_lo, c_hi])
    white, black = (new_same, new_other) if side_w else (new_other, new_same)

    marking = cnc.marking
    if marking is not None:
        mw, mb = marking
        mark_same, mark_other = (mw, mb) if side_w else (mb, mw)
        if mark_same in (b1, b2) and mark_other == c:
            new_mark = (merged, c_lo)  # either cut arc works; take the low one
        elif mark_other == c:
            new_mark = (mark_same, c_lo if _adjacent_raw(cnc.size, mark_same, c_lo) else c_hi)
        elif mark_same in (b1, b2):
            new_mark = (merged, mark_other)
        else:
            new_mark = (mark_same, mark_other)
        marking = new_mark if side_w else (new_mark[1], new_mark[0])

    out = Cnc(cnc.size, white, black, marking)
    out.validate()
    return out


def _adjacent_raw(size: int, a: Block, b: Block) -> bool:
    sa, sb = set(a), set(b)
    return any((i + 1) % size in sb for i in sa) and any((j + 1) % size in sa for j in sb)


def enumerate_nc(n: int, cap: int = 12):
    """All non-crossing partitions of [n], lexicographically by canonical form.

    The count is the n-th Catalan number; ``cap`` bounds n so oracle suites
    stay fast.
    """
    if n > cap:
        raise ValueError(f"enumeration cap exceeded: {n} > {cap}")

    def rec(elems: tuple[int, ...]):
        if not elems:
            yield ()
            return
        first, rest = elems[0], elems[1:]
        for r in range(len(rest) + 1):
            for tail in itertools.combinations(rest, r):
                block = (first,) + tail
                # the complement of the block splits into independent gaps
                gaps = []
                cur: list[int] = []
                for x in rest:
                    if x in tail:
                        gaps.append(tuple(cur))
                        cur = []
                    else:
                        cur.append(x)
                gaps.append(tuple(cur))
                for combo in itertools.product(*(list(rec(g)) for g in gaps)):
                    blocks = [block]
                    for part in combo:
                        blocks.extend(part)
                    yield canon(blocks)

    return sorted(set(rec(tuple(range(n)))))


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def enumerate_cnc(size: int, cap: int = 12):
    """All unmarked Cnc on [size], driven by the white-side enumeration."""
    n = size // 2
    out = []
    for pw in enumerate_nc(n, cap):
        white = canon([tuple(2 * x for x in b) for b in pw])
        out.append(cnc_from_white(size, white))
    return out
