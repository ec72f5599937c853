"""Subdivision rules and the cell complexes obtained by iterating them.

A rule file describes the level-1 decomposition of the sphere relative to an
invariant Jordan curve: ``2d`` tiles colored white/black, ``kd`` typed edges,
and for each of the ``k`` curve arcs the chain of level-1 edges composing it.
Tile boundary words list the k edges in type-ascending order; traversed that
way every edge runs in its positive direction (the one that bounds its white
tile positively), so the words alone determine the whole incidence structure,
including vertices, cyclic vertex links and cell orientations.

Iterated subdivision replaces every tile by a copy of the rule's subdivision
of the 0-tile of matching color; copies are glued along shared edges through
the curve chains.  Cell identity is hierarchical (parent, local index), which
makes subdivision deterministic and exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

WHITE, BLACK = 0, 1


class RuleError(Exception):
    """Schema or invariant violation in a rule file, with location."""


class ComplexError(Exception):
    """The tile words do not glue into a workable complex."""


# ---------------------------------------------------------------------------
# rule files


@dataclass(frozen=True)
class SubdivisionRule:
    degree: int
    post: tuple[str, ...]
    tile_names: tuple[str, ...]
    tile_color: tuple[int, ...]
    tile_word: tuple[tuple[int, ...], ...]  # slot index == edge type
    edge_names: tuple[str, ...]
    edge_type: tuple[int, ...]
    curve: tuple[tuple[tuple[int, int], ...], ...]  # per type: ((edge, dir), ...)
    geometry: dict | None = None

    @property
    def k(self) -> int:
        return len(self.post)

    def edge_index(self, name: str) -> int:
        return self.edge_names.index(name)

    def to_doc(self) -> dict:
        tiles = []
        for t, name in enumerate(self.tile_names):
            boundary = [
                {"edge": self.edge_names[e], "type": j, "orient": 1}
                for j, e in enumerate(self.tile_word[t])
            ]
            tiles.append(
                {"id": name, "color": "white" if self.tile_color[t] == WHITE else "black",
                 "boundary": boundary}
            )
        doc = {
            "degree": self.degree,
            "post": list(self.post),
            "tiles": tiles,
            "edges": [{"id": n, "type": self.edge_type[e]} for e, n in enumerate(self.edge_names)],
            "curve": [
                [{"edge": self.edge_names[e], "dir": d} for e, d in chain]
                for chain in self.curve
            ],
        }
        if self.geometry is not None:
            doc["geometry"] = self.geometry
        return doc


def parse_rule(doc, p0: str | None = None) -> SubdivisionRule:
    """Parse and structurally validate a rule document.

    ``doc`` may be a dict, a JSON string, or a path-like pointing at a JSON
    file.  Identifiers are interned to dense integer ids in file order.
    Raises :class:`RuleError` with a location on any schema violation.
    """
    if hasattr(doc, "__fspath__") or (
        isinstance(doc, (str, bytes)) and not str(doc).lstrip().startswith("{")
    ):
        with open(doc, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    elif isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise RuleError("top level: expected a JSON object")

    def need(key, typ):
        if key not in doc:
            raise RuleError(f"top level: missing key {key!r}")
        if not isinstance(doc[key], typ):
            raise RuleError(f"{key}: wrong type")
        return doc[key]

    degree = need("degree", int)
    post = tuple(need("post", list))
    k = len(post)
    if degree < 1:
        raise RuleError("degree: must be a positive integer")
    if k < 3:
        raise RuleError("post: need at least 3 postcritical points")
    if len(set(post)) != k:
        raise RuleError("post: duplicate labels")

    edges_doc = need("edges", list)
    edge_names, edge_type = [], []
    for i, ed in enumerate(edges_doc):
        if not isinstance(ed, dict) or "id" not in ed or "type" not in ed:
            raise RuleError(f"edges[{i}]: expected {{id, type}}")
        if ed["id"] in edge_names:
            raise RuleError(f"edges[{i}]: duplicate id {ed['id']!r}")
        if not isinstance(ed["type"], int) or not 0 <= ed["type"] < k:
            raise RuleError(f"edges[{i}]: type out of range")
        edge_names.append(ed["id"])
        edge_type.append(ed["type"])
    eidx = {n: i for i, n in enumerate(edge_names)}

    tiles_doc = need("tiles", list)
    tile_names, tile_color, tile_word = [], [], []
    for i, td in enumerate(tiles_doc):
        loc = f"tiles[{i}]"
        if not isinstance(td, dict) or "id" not in td or "color" not in td:
            raise RuleError(f"{loc}: expected {{id, color, boundary}}")
        if td["id"] in tile_names:
            raise RuleError(f"{loc}: duplicate id {td['id']!r}")
        if td["color"] not in ("white", "black"):
            raise RuleError(f"{loc}: color must be white or black")
        boundary = td.get("boundary")
        if not isinstance(boundary, list) or len(boundary) != k:
            raise RuleError(f"{loc}: boundary must list exactly {k} edges")
        slots = [None] * k
        for j, sl in enumerate(boundary):
            sloc = f"{loc}.boundary[{j}]"
            if not isinstance(sl, dict) or "edge" not in sl:
                raise RuleError(f"{sloc}: expected {{edge, type, orient}}")
            if sl["edge"] not in eidx:
                raise RuleError(f"{sloc}: dangling edge reference {sl['edge']!r}")
            e = eidx[sl["edge"]]
            ty = sl.get("type", edge_type[e])
            if ty != edge_type[e]:
                raise RuleError(f"{sloc}: slot type {ty} contradicts edge type {edge_type[e]}")
            if sl.get("orient", 1) != 1:
                raise RuleError(f"{sloc}: edge traversed against its orientation")
            if slots[ty] is not None:
                raise RuleError(f"{loc}: two edges of type {ty}")
            slots[ty] = e
        # the listed order must be a type-ascending rotation
        listed = [edge_type[eidx[sl["edge"]]] for sl in boundary]
        if listed != [(listed[0] + j) % k for j in range(k)]:
            raise RuleError(f"{loc}: boundary types are not cyclically ascending")
        tile_names.append(td["id"])
        tile_color.append(WHITE if td["color"] == "white" else BLACK)
        tile_word.append(tuple(slots))

    if len(tiles_doc) != 2 * degree:
        raise RuleError(f"tiles: expected {2*degree} tiles, found {len(tiles_doc)}")
    if len(edges_doc) != k * degree:
        raise RuleError(f"edges: expected {k*degree} edges, found {len(edges_doc)}")

    curve_doc = need("curve", list)
    if len(curve_doc) != k:
        raise RuleError(f"curve: expected {k} chains, found {len(curve_doc)}")
    curve = []
    for t, chain in enumerate(curve_doc):
        if not isinstance(chain, list) or not chain:
            raise RuleError(f"curve[{t}]: expected a non-empty list")
        entries = []
        for j, en in enumerate(chain):
            if not isinstance(en, dict) or "edge" not in en or en.get("dir") not in (1, -1):
                raise RuleError(f"curve[{t}][{j}]: expected {{edge, dir: +-1}}")
            if en["edge"] not in eidx:
                raise RuleError(f"curve[{t}][{j}]: dangling edge reference")
            entries.append((eidx[en["edge"]], en["dir"]))
        curve.append(tuple(entries))

    rule = SubdivisionRule(
        degree=degree,
        post=post,
        tile_names=tuple(tile_names),
        tile_color=tuple(tile_color),
        tile_word=tuple(tile_word),
        edge_names=tuple(edge_names),
        edge_type=tuple(edge_type),
        curve=tuple(curve),
        geometry=doc.get("geometry"),
    )
    if p0 is not None:
        rule = rebase(rule, p0)
    return rule


def rebase(rule: SubdivisionRule, p0: str) -> SubdivisionRule:
    """Designate a different postcritical point as the base point p0."""
    if p0 not in rule.post:
        raise RuleError(f"unknown postcritical label {p0!r}")
    r = rule.post.index(p0)
    if r == 0:
        return rule
    k = rule.k
    geometry = rule.geometry
    if geometry is not None:
        geometry = json.loads(json.dumps(geometry))
        for key in ("white", "black"):
            poly = geometry["chart"][key]
            geometry["chart"][key] = poly[r:] + poly[:r]
        for name, poly in geometry["tiles"].items():
            geometry["tiles"][name] = poly[r:] + poly[:r]
    return SubdivisionRule(
        degree=rule.degree,
        post=rule.post[r:] + rule.post[:r],
        tile_names=rule.tile_names,
        tile_color=rule.tile_color,
        tile_word=tuple(w[r:] + w[:r] for w in rule.tile_word),
        edge_names=rule.edge_names,
        edge_type=tuple((t - r) % k for t in rule.edge_type),
        curve=rule.curve[r:] + rule.curve[:r],
        geometry=geometry,
    )


def rule_sides(rule: SubdivisionRule) -> list[int]:
    """Which 0-tile each level-1 tile sits in (0 = white side).

    A curve edge traversed positively by the curve has its white tile on the
    white side; sides propagate across shared non-curve edges.  Conflicting
    propagation means the declared curve chains do not bound.
    """
    on_curve = {e for chain in rule.curve for e, _ in chain}
    edge_white = [-1] * len(rule.edge_names)
    edge_black = [-1] * len(rule.edge_names)
    for t, word in enumerate(rule.tile_word):
        for e in word:
            if rule.tile_color[t] == WHITE:
                if edge_white[e] != -1:
                    raise RuleError(f"edge {rule.edge_names[e]!r} glued to two white tiles")
                edge_white[e] = t
            else:
                if edge_black[e] != -1:
                    raise RuleError(f"edge {rule.edge_names[e]!r} glued to two black tiles")
                edge_black[e] = t
    for e in range(len(rule.edge_names)):
        if edge_white[e] == -1 or edge_black[e] == -1:
            raise RuleError(f"edge {rule.edge_names[e]!r} is not shared by a white and a black tile")
    side = [-1] * len(rule.tile_names)
    for chain in rule.curve:
        for e, d in chain:
            w, b = edge_white[e], edge_black[e]
            sw = 0 if d == 1 else 1
            for tile, s in ((w, sw), (b, 1 - sw)):
                if side[tile] not in (-1, s):
                    raise RuleError(
                        f"curve chains assign tile {rule.tile_names[tile]!r} to both sides"
                    )
                side[tile] = s
    # flood across interior edges
    changed = True
    while changed:
        changed = False
        for e in range(len(rule.edge_names)):
            if e in on_curve:
                continue
            w, b = edge_white[e], edge_black[e]
            sw, sb = side[w], side[b]
            s = sw if sw != -1 else sb
            if s == -1:
                continue
            for tile in (w, b):
                if side[tile] == -1:
                    side[tile] = s
                    changed = True
                elif side[tile] != s:
                    raise RuleError(
                        f"interior edge {rule.edge_names[e]!r} joins tiles on opposite sides"
                    )
    if -1 in side:
        raise RuleError("curve chains leave some tiles unreachable")
    return side


# ---------------------------------------------------------------------------
# cell complexes


@dataclass
class CellComplex:
    level: int
    k: int
    d: int
    tile_color: list
    tile_word: list
    tile_name: list
    edge_type: list
    edge_name: list
    curve: list  # per 0-edge type: [(edge, dir), ...] at this level
    # parents and one-level images; None at level 0
    tile_parent: list | None = None
    tile_local: list | None = None
    edge_origin: list | None = None  # ('sub', parent_edge, pos) | ('int', parent_tile, rule_edge)
    image_tile: list | None = None
    image_edge: list | None = None
    image_vertex: list | None = None
    deep1_tile: list | None = None
    deep1_edge: list | None = None
    deep1_vertex: list | None = None
    # filled by _complete()
    edge_white: list = field(default_factory=list)
    edge_black: list = field(default_factory=list)
    n_vertices: int = 0
    corner_vertex: dict = field(default_factory=dict)
    link_tiles: list = field(default_factory=list)
    link_edges: list = field(default_factory=list)
    vertex_postindex: list = field(default_factory=list)
    edge_init: list = field(default_factory=list)
    edge_term: list = field(default_factory=list)
    edge_cpos: dict = field(default_factory=dict)
    vertex_ctypes: dict = field(default_factory=dict)
    vertex_cpos: dict = field(default_factory=dict)
    post_vertex: list = field(default_factory=list)
    child_tile: dict = field(default_factory=dict)
    child_edge: dict = field(default_factory=dict)
    old_vertex: dict = field(default_factory=dict)  # this-level vertex -> parent-level vertex
    issues: list = field(default_factory=list)

    @property
    def n_tiles(self) -> int:
        return len(self.tile_word)

    @property
    def n_edges(self) -> int:
        return len(self.edge_type)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_tiles

    def degree_of(self, v: int) -> int:
        """Local branching degree: half the number of tiles around v."""
        return len(self.link_tiles[v]) // 2

    def out_edge(self, tile: int, v: int) -> int:
        """The boundary edge of ``tile`` with initial point v."""
        return self.tile_word[tile][self.vertex_postindex[v]]

    def in_edge(self, tile: int, v: int) -> int:
        return self.tile_word[tile][(self.vertex_postindex[v] - 1) % self.k]


def _complete(cx: CellComplex) -> CellComplex:
    """Derive edge sides, vertices, links, orientations and curve positions."""
    k = cx.k
    cx.edge_white = [-1] * cx.n_edges
    cx.edge_black = [-1] * cx.n_edges
    for t, word in enumerate(cx.tile_word):
        for e in word:
            if cx.tile_color[t] == WHITE:
                if cx.edge_white[e] != -1:
                    raise ComplexError(f"edge {cx.edge_name[e]} glued to two white tiles")
                cx.edge_white[e] = t
            else:
                if cx.edge_black[e] != -1:
                    raise ComplexError(f"edge {cx.edge_name[e]} glued to two black tiles")
                cx.edge_black[e] = t
    for e in range(cx.n_edges):
        if cx.edge_white[e] == -1 or cx.edge_black[e] == -1:
            raise ComplexError(f"edge {cx.edge_name[e]} lacks a white or black side")

    def ccw_next(corner):
        t, c = corner
        if cx.tile_color[t] == WHITE:
            e = cx.tile_word[t][(c - 1) % k]
            return (cx.edge_black[e], c), e
        e = cx.tile_word[t][c]
        return (cx.edge_white[e], c), e

    seen = set()
    for t in range(cx.n_tiles):
        for c in range(k):
            corner = (t, c)
            if corner in seen:
                continue
            cycle, crossed = [corner], []
            seen.add(corner)
            cur = corner
            while True:
                nxt, e = ccw_next(cur)
                crossed.append(e)
                if nxt == corner:
                    break
                if nxt in seen:
                    raise ComplexError("corner orbit is not a cycle")
                seen.add(nxt)
                cycle.append(nxt)
                cur = nxt
            v = cx.n_vertices
            cx.n_vertices += 1
            if len(cycle) % 2 != 0:
                cx.issues.append(f"vertex {v}: odd link length {len(cycle)}")
            if len({c for _, c in cycle}) != 1:
                cx.issues.append(f"vertex {v}: inconsistent corner index")
            # rotate so position 0 is the least-id white corner
            whites = [i for i, (tt, _) in enumerate(cycle) if cx.tile_color[tt] == WHITE]
            if not whites:
                cx.issues.append(f"vertex {v}: no white corner")
                r = 0
            else:
                r = min(whites, key=lambda i: cycle[i][0])
            cycle = cycle[r:] + cycle[:r]
            # crossed[i] is the edge between cycle[i] and cycle[i+1]; after the
            # rotation, link edge i precedes link tile i ccw
            crossed = crossed[r - 1 :] + crossed[: r - 1] if r else crossed[-1:] + crossed[:-1]
            for i, (tt, _) in enumerate(cycle):
                if cx.tile_color[tt] != (WHITE if i % 2 == 0 else BLACK):
                    cx.issues.append(f"vertex {v}: link colors do not alternate")
                    break
            for corner2 in cycle:
                cx.corner_vertex[corner2] = v
            cx.link_tiles.append(tuple(t for t, _ in cycle))
            cx.link_edges.append(tuple(crossed))
            cx.vertex_postindex.append(cycle[0][1])

    cx.edge_init = [-1] * cx.n_edges
    cx.edge_term = [-1] * cx.n_edges
    for e in range(cx.n_edges):
        w, ty = cx.edge_white[e], cx.edge_type[e]
        cx.edge_init[e] = cx.corner_vertex[(w, ty)]
        cx.edge_term[e] = cx.corner_vertex[(w, (ty + 1) % k)]

    # curve positions; chains are listed in the positive direction of the curve
    for t, chain in enumerate(cx.curve):
        prev_end = None
        for i, (e, d) in enumerate(chain):
            a, b = (cx.edge_init[e], cx.edge_term[e]) if d == 1 else (cx.edge_term[e], cx.edge_init[e])
            if e in cx.edge_cpos:
                cx.issues.append(f"edge {cx.edge_name[e]} appears twice on the curve")
            cx.edge_cpos[e] = (t, i, d)
            if prev_end is not None and a != prev_end:
                cx.issues.append(f"curve chain {t} breaks before {cx.edge_name[e]}")
            if i == 0:
                cx.post_vertex.append(a)
            cx.vertex_ctypes.setdefault(a, set())
            cx.vertex_ctypes[a].add(t)
            cx.vertex_cpos.setdefault(a, (t, i))
            prev_end = b
        cx.vertex_ctypes.setdefault(prev_end, set())
        cx.vertex_ctypes[prev_end].add(t)
    # close up: terminal of chain t must be the start of chain t+1
    for t in range(k):
        e, d = cx.curve[t][-1]
        end = cx.edge_term[e] if d == 1 else cx.edge_init[e]
        if end != cx.post_vertex[(t + 1) % k]:
            cx.issues.append(f"curve chain {t} does not end at the next postcritical point")
    cx.vertex_ctypes = {v: frozenset(s) for v, s in cx.vertex_ctypes.items()}
    if len(set(cx.post_vertex)) != k:
        cx.issues.append("postcritical points on the curve are not distinct")

    if cx.tile_parent is not None:
        for t in range(cx.n_tiles):
            cx.child_tile[(cx.tile_parent[t], cx.tile_local[t])] = t
        for e in range(cx.n_edges):
            cx.child_edge[cx.edge_origin[e]] = e
    return cx


def level0(rule: SubdivisionRule) -> CellComplex:
    k = rule.k
    cx = CellComplex(
        level=0,
        k=k,
        d=rule.degree,
        tile_color=[WHITE, BLACK],
        tile_word=[tuple(range(k)), tuple(range(k))],
        tile_name=["W", "B"],
        edge_type=list(range(k)),
        edge_name=[f"C{t}" for t in range(k)],
        curve=[((t, 1),) for t in range(k)],
    )
    return _complete(cx)


def subdivide(cx: CellComplex, rule: SubdivisionRule) -> CellComplex:
    """Replace every tile by the rule's subdivision of its color's 0-tile."""
    k, d = rule.k, rule.degree
    side = rule_sides(rule)
    on_curve = {e: rule_cpos for e, rule_cpos in _rule_cpos(rule).items()}
    locals_for = {
        WHITE: [x for x in range(len(rule.tile_names)) if side[x] == 0],
        BLACK: [x for x in range(len(rule.tile_names)) if side[x] == 1],
    }
    if not locals_for[WHITE] or not locals_for[BLACK]:
        raise ComplexError("the curve must leave level-1 tiles on both sides")
    interiors_for = {
        s: [e for e in range(len(rule.edge_names)) if e not in on_curve and side[_rw(rule, e)] == s]
        for s in (0, 1)
    }

    base = cx.level == 0
    new = CellComplex(
        level=cx.level + 1,
        k=k,
        d=d,
        tile_color=[],
        tile_word=[],
        tile_name=[],
        edge_type=[],
        edge_name=[],
        curve=[],
        tile_parent=[],
        tile_local=[],
        edge_origin=[],
        image_tile=[],
        image_edge=[],
        image_vertex=[],
    )

    sub_id: dict[tuple[int, int], int] = {}
    for E in range(cx.n_edges):
        chain = rule.curve[cx.edge_type[E]]
        for s, (le, _) in enumerate(chain):
            sub_id[(E, s)] = len(new.edge_type)
            new.edge_type.append(rule.edge_type[le])
            new.edge_origin.append(("sub", E, s))
            new.edge_name.append(rule.edge_names[le] if base else f"{cx.edge_name[E]}.{s}")
    int_id: dict[tuple[int, int], int] = {}
    for T in range(cx.n_tiles):
        for le in interiors_for[0 if cx.tile_color[T] == WHITE else 1]:
            int_id[(T, le)] = len(new.edge_type)
            new.edge_type.append(rule.edge_type[le])
            new.edge_origin.append(("int", T, le))
            new.edge_name.append(rule.edge_names[le] if base else f"{cx.tile_name[T]}/{rule.edge_names[le]}")

    for T in range(cx.n_tiles):
        for x in locals_for[cx.tile_color[T]]:
            word = []
            for u in range(k):
                le = rule.tile_word[x][u]
                if le in on_curve:
                    t0, s, _ = on_curve[le]
                    word.append(sub_id[(cx.tile_word[T][t0], s)])
                else:
                    word.append(int_id[(T, le)])
            new.tile_color.append(rule.tile_color[x])
            new.tile_word.append(tuple(word))
            new.tile_name.append(rule.tile_names[x] if base else f"{cx.tile_name[T]}/{rule.tile_names[x]}")
            new.tile_parent.append(T)
            new.tile_local.append(x)

    # curve chains at the new level: expand each old chain entry
    for t in range(k):
        entries = []
        for E, D in cx.curve[t]:
            chain = rule.curve[cx.edge_type[E]]
            subs = [(sub_id[(E, s)], chain[s][1]) for s in range(len(chain))]
            if D == 1:
                entries.extend(subs)
            else:
                entries.extend((e, -dd) for e, dd in reversed(subs))
        new.curve.append(tuple(entries))

    _complete(new)

    # one-level image maps
    for t in range(new.n_tiles):
        T, x = new.tile_parent[t], new.tile_local[t]
        if base:
            new.image_tile.append(rule.tile_color[x])  # 0-tile of matching color
        else:
            new.image_tile.append(cx.child_tile[(cx.image_tile[T], x)])
    for e in range(new.n_edges):
        origin = new.edge_origin[e]
        if origin[0] == "sub":
            _, E, s = origin
            if base:
                new.image_edge.append(new.edge_type[e])  # image is the 0-edge of its type
            else:
                new.image_edge.append(cx.child_edge[("sub", cx.image_edge[E], s)])
        else:
            _, T, le = origin
            if base:
                new.image_edge.append(new.edge_type[e])
            else:
                new.image_edge.append(cx.child_edge[("int", cx.image_tile[T], le)])
    if base:
        # the level-1 edges must biject with the rule's edges
        seen_rule_edges = []
        for e in range(new.n_edges):
            origin = new.edge_origin[e]
            seen_rule_edges.append(
                origin[2] if origin[0] == "int" else rule.curve[cx.edge_type[origin[1]]][origin[2]][0]
            )
        if sorted(seen_rule_edges) != list(range(new.n_edges)):
            raise ComplexError("rule edges do not biject with level-1 edges")
    for v in range(new.n_vertices):
        t0, c0 = _anchor_corner(new, v)
        if base:
            new.image_vertex.append(c0)  # level-0 vertex index == post index
        else:
            new.image_vertex.append(cx.corner_vertex[(new.image_tile[t0], c0)])

    if new.level == 1:
        new.deep1_tile = list(range(new.n_tiles))
        new.deep1_edge = list(range(new.n_edges))
        new.deep1_vertex = list(range(new.n_vertices))
    else:
        new.deep1_tile = [cx.deep1_tile[i] for i in new.image_tile]
        new.deep1_edge = [cx.deep1_edge[i] for i in new.image_edge]
        new.deep1_vertex = [cx.deep1_vertex[i] for i in new.image_vertex]

    # identify the vertices that already existed at the previous level: they
    # are the endpoints of the parent edges, reached through the end
    # sub-edges of each chain
    for E in range(cx.n_edges):
        chain = rule.curve[cx.edge_type[E]]
        e0, el = sub_id[(E, 0)], sub_id[(E, len(chain) - 1)]
        a = new.edge_init[e0] if chain[0][1] == 1 else new.edge_term[e0]
        b = new.edge_term[el] if chain[-1][1] == 1 else new.edge_init[el]
        for v_new, v_old in ((a, cx.edge_init[E]), (b, cx.edge_term[E])):
            if new.old_vertex.setdefault(v_new, v_old) != v_old:
                raise ComplexError("inconsistent identification of an old vertex")
    return new


def _anchor_corner(cx: CellComplex, v: int):
    return (cx.link_tiles[v][0], cx.vertex_postindex[v])


def _rw(rule: SubdivisionRule, e: int) -> int:
    for t, word in enumerate(rule.tile_word):
        if e in word and rule.tile_color[t] == WHITE:
            return t
    raise RuleError(f"edge {rule.edge_names[e]!r} has no white tile")


def _rule_cpos(rule: SubdivisionRule) -> dict[int, tuple[int, int, int]]:
    out = {}
    for t, chain in enumerate(rule.curve):
        for i, (e, d) in enumerate(chain):
            if e in out:
                raise RuleError(f"edge {rule.edge_names[e]!r} appears twice on the curve")
            out[e] = (t, i, d)
    return out


def level1(rule: SubdivisionRule) -> CellComplex:
    return subdivide(level0(rule), rule)


def build_levels(rule: SubdivisionRule, n: int, *, max_edges: int = 2**20):
    """Complexes for levels 0..n; refuses to blow past ``max_edges``."""
    if rule.k * rule.degree**max(n, 0) > max_edges:
        raise ComplexError(f"level {n} would exceed {max_edges} edges")
    out = [level0(rule)]
    for _ in range(n):
        out.append(subdivide(out[-1], rule))
    return out


def vertex_link(cx: CellComplex, v: int):
    """The cyclic link around v as (tile, edge) pairs, edge entering ccw.

    Position 0 holds the anchor tile (least-id incident white tile); even
    positions hold white tiles and their out-going edges at v.
    """
    return tuple(zip(cx.link_tiles[v], cx.link_edges[v]))


def tile_contacts(cx: CellComplex, t: int) -> frozenset[int]:
    """The 0-edges met by tile t (through boundary edges or vertices)."""
    out = set()
    for e in cx.tile_word[t]:
        if e in cx.edge_cpos:
            out.add(cx.edge_cpos[e][0])
        for v in (cx.edge_init[e], cx.edge_term[e]):
            out.update(cx.vertex_ctypes.get(v, ()))
    return frozenset(out)


def check_no_opposite_sides(cx: CellComplex) -> bool:
    """True iff no tile joins opposite sides of the curve.

    For k >= 4 a tile must not meet two non-adjacent 0-edges; for k = 3 it
    must not meet all three.
    """
    k = cx.k
    for t in range(cx.n_tiles):
        contacts = tile_contacts(cx, t)
        if k == 3:
            if len(contacts) == 3:
                return False
        else:
            for a in contacts:
                for b in contacts:
                    if (a - b) % k not in (0, 1, k - 1):
                        return False
    return True


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    counts: dict
    degrees: list
    checks: list  # (name, ok, detail)

    @property
    def ok(self) -> bool:
        return all(okay for _, okay, _ in self.checks)

    def text(self) -> str:
        lines = [
            "cells: V={V} E={E} T={T} chi={chi}".format(**self.counts),
            "local degrees: " + " ".join(map(str, self.degrees)),
        ]
        for name, okay, detail in self.checks:
            lines.append(f"[{'ok' if okay else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
        return "\n".join(lines)


def validate(rule: SubdivisionRule) -> ValidationReport:
    """Run every structural invariant on the rule and its level-1 complex.

    Validation is total: failures become report entries instead of raising,
    so hand-written rule files get all their diagnostics at once.
    """
    checks = []
    counts = {"V": 0, "E": 0, "T": 0, "chi": 0}
    degrees: list[int] = []

    whites = sum(1 for c in rule.tile_color if c == WHITE)
    checks.append(
        ("tile counts (2d tiles, d white and d black)",
         len(rule.tile_names) == 2 * rule.degree and whites == rule.degree,
         f"{len(rule.tile_names)} tiles, {whites} white")
    )
    checks.append(
        ("edge count kd", len(rule.edge_names) == rule.k * rule.degree,
         f"{len(rule.edge_names)} edges")
    )
    per_type = [0] * rule.k
    for t in rule.edge_type:
        per_type[t] += 1
    checks.append(
        ("d edges of each type", all(c == rule.degree for c in per_type), str(per_type))
    )

    try:
        rule_sides(rule)
        checks.append(("curve chains bound two consistent sides", True, ""))
    except RuleError as exc:
        checks.append(("curve chains bound two consistent sides", False, str(exc)))

    try:
        cx = level1(rule)
    except (RuleError, ComplexError) as exc:
        checks.append(("level-1 complex builds", False, str(exc)))
        return ValidationReport(counts, degrees, checks)
    checks.append(("level-1 complex builds", True, ""))

    counts = {
        "V": cx.n_vertices,
        "E": cx.n_edges,
        "T": cx.n_tiles,
        "chi": cx.euler_characteristic(),
    }
    degrees = sorted(cx.degree_of(v) for v in range(cx.n_vertices))
    checks.append(("Euler characteristic 2", cx.euler_characteristic() == 2,
                   f"chi = {cx.euler_characteristic()}"))
    checks.append(("vertex links alternate and corners agree", not cx.issues,
                   "; ".join(cx.issues[:4])))

    for color, name in ((WHITE, "white"), (BLACK, "black")):
        tiles = [t for t in range(cx.n_tiles) if cx.tile_color[t] == color]
        parent = {t: t for t in tiles}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for v in range(cx.n_vertices):
            prev = None
            for t in cx.link_tiles[v]:
                if cx.tile_color[t] != color:
                    continue
                if prev is not None:
                    parent[find(prev)] = find(t)
                prev = t
        comps = {find(t) for t in tiles}
        checks.append((f"{name} tiles form a connected set", len(comps) <= 1,
                       f"{len(comps)} components"))

    # the curve visits the postcritical points in order and is a Jordan curve
    visits: list[int] = []
    okcurve = True
    for t, chain in enumerate(cx.curve):
        for e, dd in chain:
            visits.append(cx.edge_init[e] if dd == 1 else cx.edge_term[e])
    okcurve = len(set(visits)) == len(visits)
    checks.append(("curve is a closed Jordan arc chain", okcurve and not any(
        "curve" in msg for msg in cx.issues), ""))
    checks.append(
        ("postcritical points lie on the curve in order",
         len(set(cx.post_vertex)) == cx.k, "")
    )
    return ValidationReport(counts, degrees, checks)


def squared(rule: SubdivisionRule) -> SubdivisionRule:
    """The rule of the squared map: level-2 cells relative to the same curve."""
    cx0 = level0(rule)
    cx1 = subdivide(cx0, rule)
    cx2 = subdivide(cx1, rule)
    geometry = None
    if rule.geometry is not None:
        from . import render

        frames = render.tile_frames([cx0, cx1, cx2], rule.geometry)
        geometry = {
            "chart": rule.geometry["chart"],
            "tiles": {
                cx2.tile_name[t]: [
                    [round(x, 12), round(y, 12)]
                    for x, y in render.tile_polygon(cx2, t, frames[2], rule.geometry)
                ]
                for t in range(cx2.n_tiles)
            },
        }
    return SubdivisionRule(
        degree=rule.degree**2,
        post=rule.post,
        tile_names=tuple(cx2.tile_name),
        tile_color=tuple(cx2.tile_color),
        tile_word=tuple(cx2.tile_word),
        edge_names=tuple(cx2.edge_name),
        edge_type=tuple(cx2.edge_type),
        curve=tuple(cx2.curve),
        geometry=geometry,
    )


def reversed_rule(rule: SubdivisionRule) -> SubdivisionRule:
    """The same complex relative to the oppositely oriented curve.

    Colors swap, the postcritical points are listed in the reversed cyclic
    order, and every type is renumbered accordingly.
    """
    k = rule.k
    new_type = tuple((k - 1 - t) % k for t in rule.edge_type)
    new_post = (rule.post[0],) + tuple(reversed(rule.post[1:]))
    new_words = []
    for word in rule.tile_word:
        slots = [None] * k
        for e in word:
            slots[new_type[e]] = e
        new_words.append(tuple(slots))
    new_curve = []
    for j in range(k):
        old = rule.curve[(k - 1 - j) % k]
        new_curve.append(tuple((e, d) for e, d in reversed(old)))
    geometry = None
    if rule.geometry is not None:
        geometry = {
            "chart": {"white": rule.geometry["chart"]["black"],
                      "black": rule.geometry["chart"]["white"]},
            "tiles": dict(rule.geometry["tiles"]),
        }
    return SubdivisionRule(
        degree=rule.degree,
        post=new_post,
        tile_names=rule.tile_names,
        tile_color=tuple(1 - c for c in rule.tile_color),
        tile_word=tuple(new_words),
        edge_names=rule.edge_names,
        edge_type=new_type,
        curve=tuple(new_curve),
        geometry=geometry,
    )
