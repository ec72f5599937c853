"""Connections of tiles at vertices, the successor map and boundary circuits.

A connection assigns to every vertex a complementary pair of non-crossing
partitions over the positions of its link: even positions name the white
tiles around the vertex, odd positions the black ones, and tiles of one color
are connected when their positions share a block.  Postcritical vertices
additionally carry a marking, an adjacent block pair recording where the
point sits on the deformed curve.

Every positively oriented edge has a unique successor at its terminal point:
the outgoing edge of the cyclically next white tile inside the block of the
edge's own tile.  Iterating the successor map partitions the edges of each
cluster into boundary circuits; clusters with a single circuit are trees.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ncpart
from .ncpart import Cnc
from .rulecomplex import CellComplex, WHITE


class ConnectionError_(Exception):
    pass


@dataclass(frozen=True)
class Connection:
    """Per-vertex cnc-partitions over link positions, immutable once built."""

    cx: CellComplex
    parts: dict  # vertex -> Cnc

    @property
    def level(self) -> int:
        return self.cx.level

    def at(self, v: int) -> Cnc:
        return self.parts[v]

    def validate(self) -> None:
        if len(self.parts) != self.cx.n_vertices:
            raise ConnectionError_("connection does not cover every vertex")
        for v, cnc in sorted(self.parts.items()):
            cnc.validate()
            if cnc.size != len(self.cx.link_tiles[v]):
                raise ConnectionError_(f"vertex {v}: cnc size {cnc.size} vs link {len(self.cx.link_tiles[v])}")
        for t, v in enumerate(self.cx.post_vertex):
            if self.parts[v].marking is None:
                raise ConnectionError_(f"postcritical point {t} carries no marking")
        for v, cnc in self.parts.items():
            if cnc.marking is not None and v not in self.cx.post_vertex:
                raise ConnectionError_(f"non-postcritical vertex {v} is marked")

    def text(self) -> str:
        return "\n".join(f"v{v}: {cnc.text()}" for v, cnc in sorted(self.parts.items()))


def disconnected_cnc(cx: CellComplex, v: int) -> Cnc:
    size = len(cx.link_tiles[v])
    return ncpart.cnc_from_white(size, [(i,) for i in range(0, size, 2)])


def full_black_cnc(cx: CellComplex, v: int) -> Cnc:
    """All black tiles joined, whites all separate (the state on the curve)."""
    size = len(cx.link_tiles[v])
    white = ncpart.canon([(i,) for i in range(0, size, 2)])
    return Cnc(size, white, ncpart.canon([tuple(range(1, size, 2))]))


@dataclass(frozen=True)
class EulerCircuit:
    """A closed successor path of positively oriented edges, no repeats."""

    level: int
    edges: tuple
    marked_pos: dict  # post vertex -> index i of the pass (edges[i], edges[i+1])

    def __len__(self) -> int:
        return len(self.edges)

    def based_at(self, start_edge: int) -> "EulerCircuit":
        r = self.edges.index(start_edge)
        n = len(self.edges)
        shifted = self.edges[r:] + self.edges[:r]
        marked = {v: (i - r) % n for v, i in self.marked_pos.items()}
        return EulerCircuit(self.level, shifted, marked)


def link_position(cx: CellComplex, v: int, tile: int) -> int:
    return cx.link_tiles[v].index(tile)


def successor(conn: Connection, e: int) -> int:
    """The successor edge at the terminal point of e.

    e must be positively oriented, which every edge id is by convention; the
    result is the outgoing edge of the cyclically next white tile connected
    to e's tile at the terminal vertex.
    """
    cx = conn.cx
    v = cx.edge_term[e]
    w = cx.edge_white[e]
    i = link_position(cx, v, w)
    cnc = conn.at(v)
    block = cnc.block_of(i)
    j = _cyclic_next(block, i)
    return cx.link_edges[v][j]


def _cyclic_next(block, i: int) -> int:
    members = sorted(block)
    return members[(members.index(i) + 1) % len(members)]


def marked_edge_pair(conn: Connection, v: int):
    """The succeeding edge pair realizing the marking at v."""
    cx = conn.cx
    cnc = conn.at(v)
    if cnc.marking is None:
        raise ConnectionError_(f"vertex {v} is not marked")
    bw, bb = cnc.marking
    i, j = cnc.adjacency_witness(bw, bb)
    # E ends at v inside tile i, E' leaves v inside tile j
    size = cnc.size
    e_in = cx.link_edges[v][(i + 1) % size]
    e_out = cx.link_edges[v][j]
    return e_in, e_out


def boundary_circuit(conn: Connection, start: int) -> EulerCircuit:
    """Follow successors from ``start`` until the circuit closes.

    Records, for every marked vertex whose marked pass the circuit realizes,
    the position of that pass.
    """
    cx = conn.cx
    marked_pairs = {}
    for v, cnc in conn.parts.items():
        if cnc.marking is not None:
            marked_pairs[marked_edge_pair(conn, v)] = v
    edges = [start]
    seen = {start}
    while True:
        nxt = successor(conn, edges[-1])
        if nxt == start:
            break
        if nxt in seen:
            raise ConnectionError_("successor path re-enters itself off the base point")
        seen.add(nxt)
        edges.append(nxt)
    marked_pos = {}
    n = len(edges)
    for i in range(n):
        pair = (edges[i], edges[(i + 1) % n])
        if pair in marked_pairs:
            marked_pos[marked_pairs[pair]] = i
    return EulerCircuit(cx.level, tuple(edges), marked_pos)


@dataclass(frozen=True)
class Cluster:
    color: int
    tiles: frozenset
    nodes: frozenset  # ('t', tile) and ('b', vertex, block)
    edges: frozenset

    @property
    def ident(self) -> int:
        return min(self.tiles)


def clusters(conn: Connection, color: int) -> list[Cluster]:
    """Components of the connection graph of one color, by least tile id."""
    cx = conn.cx
    tiles = [t for t in range(cx.n_tiles) if cx.tile_color[t] == color]
    parent: dict = {("t", t): ("t", t) for t in tiles}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for v in sorted(conn.parts):
        cnc = conn.at(v)
        side = cnc.white if color == WHITE else cnc.black
        for block in side:
            node = ("b", v, block)
            for i in block:
                union(node, ("t", cx.link_tiles[v][i]))
    groups: dict = {}
    for node in parent:
        groups.setdefault(find(node), []).append(node)
    out = []
    for members in groups.values():
        tset = frozenset(n[1] for n in members if n[0] == "t")
        if not tset:
            continue
        eset = frozenset(e for t in tset for e in cx.tile_word[t])
        out.append(Cluster(color, tset, frozenset(members), eset))
    return sorted(out, key=lambda c: c.ident)


def all_circuits(conn: Connection, cluster: Cluster) -> list[EulerCircuit]:
    """The boundary circuits of a cluster; they partition its edges."""
    remaining = set(cluster.edges)
    out = []
    while remaining:
        start = min(remaining)
        circ = boundary_circuit(conn, start)
        out.append(circ)
        for e in circ.edges:
            if e not in remaining:
                raise ConnectionError_("circuit left its cluster")
            remaining.remove(e)
    return out


def is_tree(conn: Connection, cluster: Cluster) -> bool:
    """Single boundary circuit, equivalently an acyclic connection subgraph."""
    circs = all_circuits(conn, cluster)
    single = len(circs) == 1
    # cross-check against acyclicity: a connected graph is a tree iff
    # #edges == #nodes - 1
    cx = conn.cx
    graph_edges = 0
    for node in cluster.nodes:
        if node[0] == "b":
            graph_edges += len(node[2])
    acyclic = graph_edges == len(cluster.nodes) - 1
    if single != acyclic:
        raise ConnectionError_("circuit count and acyclicity disagree")
    return single


def connected_at(conn: Connection, x: int, y: int, v: int) -> bool:
    """Whether tiles x and y are joined at v (same block of the link cnc)."""
    cx = conn.cx
    i = link_position(cx, v, x)
    j = link_position(cx, v, y)
    if (i - j) % 2 != 0:
        return False
    cnc = conn.at(v)
    return cnc.block_of(i) == cnc.block_of(j)
