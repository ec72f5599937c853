"""Level-by-level pullback of connections and the verification suite.

The level-1 connection determines a connection of tiles at every deeper
level.  At a vertex new to the level, the connection is a copy of the one at
its image.  At an old vertex the link covers the link of the postcritical
image point; anchored at a distinguished edge over the marked edge there,
the new partition repeats the level-1 blocks once per covering sheet, except
that the two blocks flanking the marked edge fuse across sheets exactly as
the previous level's blocks prescribe.  Postcritical vertices get re-marked
at the distinguished edge, so every circuit of the tower is based
compatibly.

The boundary circuit of the pulled-back white spanning tree is the next
curve approximation.  The suite checks, per level: every vertex partition is
complementary non-crossing, the white graph is a spanning tree with a single
all-edges circuit, consecutive circuits are degree-fold covers, the circle
grids refine exactly, the map acts on grid points as t -> d t + theta0, and
the chains replacing an edge reproduce the transition matrix rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import connect, lengths, ncpart, spantree
from .connect import Connection, EulerCircuit
from .lengths import LengthSystem, ParamGrid
from .rulecomplex import CellComplex, WHITE


class LiftError(Exception):
    pass


def pullback_connection(conn_n: Connection, conn_1: Connection, cx_next: CellComplex,
                        tilde_choice=min) -> Connection:
    """The connection of next-level tiles induced by conn_n and conn_1.

    ``tilde_choice`` picks the distinguished outgoing parent edge at
    non-postcritical old vertices; the result does not depend on it.
    """
    parts = {}
    for v in range(cx_next.n_vertices):
        if v in cx_next.old_vertex:
            parts[v] = _pullback_old(conn_n, conn_1, cx_next, v, tilde_choice)
        else:
            parts[v] = _pullback_new(conn_n, cx_next, v)
    out = Connection(cx_next, parts)
    out.validate()
    return out


def _pullback_new(conn_n: Connection, cx_next: CellComplex, v: int):
    """Copy of the connection at the image vertex, along the link bijection."""
    cx_n = conn_n.cx
    w = cx_next.image_vertex[v]
    link_v = cx_next.link_tiles[v]
    link_w = cx_n.link_tiles[w]
    size = len(link_v)
    if len(link_w) != size:
        raise LiftError(f"new vertex {v} branches over its image")
    r = link_w.index(cx_next.image_tile[link_v[0]])
    for i in range(size):
        if cx_next.image_tile[link_v[i]] != link_w[(i + r) % size]:
            raise LiftError(f"link of new vertex {v} does not cover its image link")
    base = conn_n.at(w)

    def shift(p):
        return ncpart.canon([tuple(sorted((q - r) % size for q in b)) for b in p])

    return ncpart.Cnc(size, shift(base.white), shift(base.black))


def _pullback_old(conn_n: Connection, conn_1: Connection, cx_next: CellComplex, v: int,
                  tilde_choice=min):
    """The sheet-fused partition at a vertex of the previous level."""
    cx_n = conn_n.cx
    cx_1 = conn_1.cx
    u = cx_next.old_vertex[v]
    p_idx = cx_n.vertex_postindex[u]
    p = cx_1.post_vertex[p_idx]
    cnc1 = conn_1.at(p)
    if cnc1.marking is None:
        raise LiftError(f"level-1 connection is unmarked at point {p_idx}")
    _, e1_marked = connect.marked_edge_pair(conn_1, p)

    size1 = len(cx_1.link_tiles[p])
    L = len(cx_next.link_tiles[v])
    m = L // size1
    if L != m * size1:
        raise LiftError(f"link of old vertex {v} is not a cover of the point's link")

    # distinguished edge over the marked one: the first sub-edge of an
    # outgoing parent edge; at a postcritical vertex the marked parent edge,
    # otherwise the least-id one (the outcome is independent of this choice)
    if u in cx_n.post_vertex:
        if conn_n.at(u).marking is None:
            raise LiftError(f"level-{cx_n.level} connection is unmarked at vertex {u}")
        _, en_tilde = connect.marked_edge_pair(conn_n, u)
    else:
        outs = [cx_n.link_edges[u][q] for q in range(0, len(cx_n.link_edges[u]), 2)]
        en_tilde = tilde_choice(outs)
    sub0 = cx_next.child_edge.get(("sub", en_tilde, 0))
    if sub0 is None:
        raise LiftError(f"no sub-edge over the distinguished edge at vertex {u}")

    link_edges_v = cx_next.link_edges[v]
    link_edges_p = cx_1.link_edges[p]
    a0 = link_edges_v.index(sub0)
    # the curve germ leaving the point starts its arc's level-1 chain
    e_germ = cx_1.curve[p_idx][0][0]
    q0 = link_edges_p.index(e_germ)
    for i in range(L):
        if cx_next.deep1_edge[link_edges_v[(a0 + i) % L]] != link_edges_p[(q0 + i) % size1]:
            raise LiftError(f"anchor resolution failed at vertex {v}")
    r_star = (link_edges_p.index(e1_marked) - q0) % size1
    anchor = (a0 + r_star) % L

    # partitions in the distinguished labelings
    b1pos = link_edges_p.index(e1_marked)
    cone1 = _rotate(cnc1, b1pos)
    anpos = cx_n.link_edges[u].index(en_tilde)
    cone_n = _rotate(conn_n.at(u), anpos)
    b1_star = cone1.block_of(0)
    c1_star = cone1.block_of(size1 - 1)
    blocks = []
    for b1 in cone1.white + cone1.black:
        if b1 in (b1_star, c1_star):
            continue
        for j in range(m):
            blocks.append(tuple(sorted(x + size1 * j for x in b1)))
    for bn in cone_n.white:
        blocks.append(tuple(sorted(x + size1 * (q // 2) for q in bn for x in b1_star)))
    for cn in cone_n.black:
        blocks.append(tuple(sorted(x + size1 * ((q - 1) // 2) for q in cn for x in c1_star)))

    whites = ncpart.canon([(tuple((x + anchor) % L for x in b)) for b in blocks if b[0] % 2 == 0])
    blacks = ncpart.canon([(tuple((x + anchor) % L for x in b)) for b in blocks if b[0] % 2 == 1])
    marking = None
    if u in cx_n.post_vertex:
        wb = next(b for b in whites if anchor % L in b)
        bb = next(b for b in blacks if (anchor - 1) % L in b)
        marking = (wb, bb)
    out = ncpart.Cnc(L, whites, blacks, marking)
    out.validate()  # every pulled-back partition must be complementary non-crossing
    return out


def _rotate(cnc: ncpart.Cnc, r: int) -> ncpart.Cnc:
    size = cnc.size

    def shift(p):
        return ncpart.canon([tuple(sorted((q - r) % size for q in b)) for b in p])

    return ncpart.Cnc(size, shift(cnc.white), shift(cnc.black))


def gamma(conn: Connection) -> EulerCircuit:
    """The approximation at conn's level: the white tree's boundary circuit.

    Based at the marked pass of the base point; it must cover every edge
    once, each positively oriented.
    """
    cx = conn.cx
    circuit = spantree.plan_circuit(conn)
    if len(circuit.edges) != cx.n_edges:
        raise LiftError(
            f"boundary circuit covers {len(circuit.edges)} of {cx.n_edges} edges"
        )
    if sorted(circuit.edges) != list(range(cx.n_edges)):
        raise LiftError("boundary circuit repeats an edge")
    return circuit


def verify_dfold(circ_next: EulerCircuit, circ: EulerCircuit, cx_next: CellComplex) -> bool:
    """F maps succeeding edges to succeeding edges: images walk the lower circuit."""
    n = len(circ.edges)
    index = {e: i for i, e in enumerate(circ.edges)}
    m0 = index[cx_next.image_edge[circ_next.edges[0]]]
    for j, e in enumerate(circ_next.edges):
        if cx_next.image_edge[e] != circ.edges[(m0 + j) % n]:
            return False
    return True


def verify_semiconjugacy(
    grid_next: ParamGrid,
    grid: ParamGrid,
    cx_next: CellComplex,
    cx: CellComplex,
    theta0: Fraction,
    d: int,
) -> bool:
    """Exact check of t -> d t + theta0 on every grid point, plus refinement.

    Every lower grid point must be an upper grid point with the same vertex,
    and the image of the vertex at an upper grid point must sit at the
    mapped parameter of the lower grid.
    """
    al_next, al = grid_next.alphas, grid.alphas
    index_next = {a: i for i, a in enumerate(al_next)}
    index_low = {a: i for i, a in enumerate(al)}
    # refinement with matching vertices
    for j, a in enumerate(al):
        i = index_next.get(a)
        if i is None:
            return False
        v_up = cx_next.edge_init[grid_next.circuit.edges[i]]
        v_low = cx.edge_init[grid.circuit.edges[j]]
        if cx_next.old_vertex.get(v_up) != v_low:
            return False
    # the circle map on grid points
    for i, a in enumerate(al_next):
        phi = (d * a + theta0) % 1
        j = index_low.get(phi)
        if j is None:
            return False
        v_up = cx_next.edge_init[grid_next.circuit.edges[i]]
        v_low = cx.edge_init[grid.circuit.edges[j]]
        if cx_next.image_vertex[v_up] != v_low:
            return False
    return True


def chain_rows(
    grid_next: ParamGrid, grid: ParamGrid, cx_next: CellComplex, cx: CellComplex, ls: LengthSystem
) -> bool:
    """Type counts of the chain replacing each edge equal its type's matrix row."""
    al_next, al = grid_next.alphas, grid.alphas
    index_next = {a: i for i, a in enumerate(al_next)}
    if any(a not in index_next for a in al):
        return False
    cuts = [index_next[a] for a in al] + [len(al_next)]
    for j in range(len(al)):
        counts = [0] * cx.k
        for i in range(cuts[j], cuts[j + 1]):
            counts[cx_next.edge_type[grid_next.circuit.edges[i]]] += 1
        ty = cx.edge_type[grid.circuit.edges[j]]
        if tuple(counts) != tuple(ls.m[ty]):
            return False
    return True


@dataclass
class LevelState:
    cx: CellComplex
    conn: Connection
    circuit: EulerCircuit
    grid: ParamGrid


@dataclass
class LevelReport:
    level: int
    edges: int
    cnc_ok: bool
    c1: bool
    c2: bool
    eulerian: bool
    dfold: bool
    semiconjugacy: bool
    chains_match: bool

    @property
    def ok(self) -> bool:
        return all(
            (self.cnc_ok, self.c1, self.c2, self.eulerian, self.dfold,
             self.semiconjugacy, self.chains_match)
        )

    def line(self) -> str:
        flags = " ".join(
            f"{name}={'ok' if val else 'FAIL'}"
            for name, val in (
                ("cnc", self.cnc_ok), ("c1", self.c1), ("c2", self.c2),
                ("euler", self.eulerian), ("dfold", self.dfold),
                ("semiconj", self.semiconjugacy), ("chains", self.chains_match),
            )
        )
        return f"level {self.level}: edges={self.edges} {flags}"


@dataclass
class Tower:
    rule: object
    plan: spantree.TreePlan
    ls: LengthSystem
    levels: list  # LevelState, index = level (starting at 1)
    reports: list


def level0_connection(cx0: CellComplex) -> Connection:
    """The trivial marked connection at level 0, whose circuit is the curve."""
    parts = {}
    for v in range(cx0.n_vertices):
        parts[v] = ncpart.Cnc(2, ((0,),), ((1,),), ((0,), (1,)))
    return Connection(cx0, parts)


def build_tower(rule, max_level: int, plan: spantree.TreePlan | None = None, *,
                max_edges: int = 2**20) -> Tower:
    """Plan, pull back to every level up to max_level, verify everything."""
    from . import rulecomplex

    cxs = rulecomplex.build_levels(rule, max_level, max_edges=max_edges)
    if plan is None:
        plan = spantree.build_plan(cxs[1])
    elif plan.conn.cx is not cxs[1]:
        plan = spantree.plan_from_doc(cxs[1], spantree.plan_to_doc(plan))
    ls = lengths.build_length_system(cxs[1], plan.circuit, spantree.plan_hash(plan))
    conn0 = level0_connection(cxs[0])
    circ0 = gamma(conn0)
    states = [LevelState(cxs[0], conn0, circ0, lengths.alpha_grid(ls, cxs[0], circ0))]
    states.append(LevelState(cxs[1], plan.conn, plan.circuit,
                             lengths.alpha_grid(ls, cxs[1], plan.circuit)))
    reports = [_verify_level(states[1], states[0], ls, plan.c1, plan.c2)]
    for n in range(1, max_level):
        conn = pullback_connection(states[n].conn, states[1].conn, cxs[n + 1])
        circuit = gamma(conn)
        grid = lengths.alpha_grid(ls, cxs[n + 1], circuit)
        states.append(LevelState(cxs[n + 1], conn, circuit, grid))
        reports.append(_verify_level(states[n + 1], states[n], ls))
    return Tower(rule, plan, ls, states, reports)


def _verify_level(state: LevelState, below: LevelState | None, ls: LengthSystem,
                  c1: bool | None = None, c2: bool | None = None) -> LevelReport:
    cx = state.cx
    cnc_ok = True
    try:
        state.conn.validate()
    except Exception:
        cnc_ok = False
    if c1 is None:
        cls = connect.clusters(state.conn, WHITE)
        c1 = len(cls) == 1 and connect.is_tree(state.conn, cls[0])
    if c2 is None:
        c2, _ = spantree.homotopy_class_report(cx, state.conn, state.circuit)
    eulerian = sorted(state.circuit.edges) == list(range(cx.n_edges))
    if below is None:
        dfold = semi = chains = True
    else:
        dfold = verify_dfold(state.circuit, below.circuit, cx)
        semi = verify_semiconjugacy(state.grid, below.grid, cx, below.cx, ls.theta0, ls.d)
        chains = chain_rows(state.grid, below.grid, cx, below.cx, ls)
    return LevelReport(cx.level, cx.n_edges, cnc_ok, c1, c2, eulerian, dfold, semi, chains)
