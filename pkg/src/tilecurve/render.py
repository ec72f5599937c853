"""Planar realization of tiles and SVG output of curve approximations.

Geometry is optional rule metadata: one polygon per level-1 tile inside an
unfolded chart of the sphere, with the two 0-tile polygons as the chart.
Polygon corner j sits at the tile's corner of index j, so every tile carries
an affine map from its image 0-tile polygon onto itself; composing those maps
down the parent chain places every deeper tile, hence every vertex, in the
chart.  The mathematics never consumes these coordinates.
"""

from __future__ import annotations

Affine = tuple[float, float, float, float, float, float]  # x' = a x + b y + e, y' = c x + d y + f

IDENTITY: Affine = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


class GeometryError(Exception):
    pass


def apply(m: Affine, p) -> tuple[float, float]:
    a, b, c, d, e, f = m
    return (a * p[0] + b * p[1] + e, c * p[0] + d * p[1] + f)


def compose(m: Affine, n: Affine) -> Affine:
    """The map p -> m(n(p))."""
    a1, b1, c1, d1, e1, f1 = m
    a2, b2, c2, d2, e2, f2 = n
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        a1 * e2 + b1 * f2 + e1,
        c1 * e2 + d1 * f2 + f1,
    )


def affine_from_corners(src, dst) -> Affine:
    """The affine map sending src[i] to dst[i]; needs three independent corners."""
    (x0, y0), (x1, y1), (x2, y2) = src[0], src[1], src[2]
    u1, v1 = x1 - x0, y1 - y0
    u2, v2 = x2 - x0, y2 - y0
    det = u1 * v2 - u2 * v1
    if abs(det) < 1e-12:
        raise GeometryError("degenerate polygon corners")
    p1 = (dst[1][0] - dst[0][0], dst[1][1] - dst[0][1])
    p2 = (dst[2][0] - dst[0][0], dst[2][1] - dst[0][1])
    a = (p1[0] * v2 - p2[0] * v1) / det
    b = (p2[0] * u1 - p1[0] * u2) / det
    c = (p1[1] * v2 - p2[1] * v1) / det
    d = (p2[1] * u1 - p1[1] * u2) / det
    e = dst[0][0] - a * x0 - b * y0
    f = dst[0][1] - c * x0 - d * y0
    m = (a, b, c, d, e, f)
    for s, t in zip(src, dst):
        ix, iy = apply(m, s)
        if abs(ix - t[0]) > 1e-6 or abs(iy - t[1]) > 1e-6:
            raise GeometryError("polygon corners are not affinely consistent")
    return m


def chart_polygon(geometry: dict, color: int):
    return geometry["chart"]["white" if color == 0 else "black"]


def tile_frames(cxs, geometry: dict) -> list[list[Affine]]:
    """Per level, the affine map from each tile's 0-tile polygon to the chart."""
    frames: list[list[Affine]] = [[IDENTITY, IDENTITY]]
    level1_frame: dict[int, Affine] = {}
    for n, cx in enumerate(cxs[1:], start=1):
        row = []
        for t in range(cx.n_tiles):
            if n == 1:
                poly = geometry["tiles"].get(cx.tile_name[t])
                if poly is None:
                    raise GeometryError(f"no polygon for tile {cx.tile_name[t]}")
                m = affine_from_corners(chart_polygon(geometry, cx.tile_color[t]), poly)
                level1_frame[cx.tile_local[t]] = m
                row.append(m)
            else:
                parent = cx.tile_parent[t]
                row.append(compose(frames[n - 1][parent], level1_frame[cx.tile_local[t]]))
        frames.append(row)
    return frames


def tile_polygon(cx, t: int, frames_row, geometry: dict):
    return [apply(frames_row[t], p) for p in chart_polygon(geometry, cx.tile_color[t])]


def vertex_positions(cx, frames_row, geometry: dict) -> list[tuple[float, float]]:
    """One chart position per vertex, read off its anchor tile's polygon."""
    out = []
    for v in range(cx.n_vertices):
        t = cx.link_tiles[v][0]
        poly = tile_polygon(cx, t, frames_row, geometry)
        out.append(poly[cx.vertex_postindex[v]])
    return out


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "-0.000000" if s == "-0.000000" else s


def render_svg(cx, circuit, frames_row, geometry: dict, *, stroke: float = 0.004,
               color: str = "#15508a", dots: bool = True, scale: float = 720.0) -> str:
    """A closed polyline through the chart positions of the circuit's vertices."""
    if not circuit.edges:
        raise GeometryError("empty circuit")
    pos = vertex_positions(cx, frames_row, geometry)
    pts = [pos[cx.edge_init[e]] for e in circuit.edges]
    xs = [p[0] for poly in (chart_polygon(geometry, 0), chart_polygon(geometry, 1)) for p in poly]
    ys = [p[1] for poly in (chart_polygon(geometry, 0), chart_polygon(geometry, 1)) for p in poly]
    pad = 0.05 * max(max(xs) - min(xs), max(ys) - min(ys))
    x0, y0 = min(xs) - pad, min(ys) - pad
    w, h = max(xs) - min(xs) + 2 * pad, max(ys) - min(ys) + 2 * pad

    def sx(p):
        return _fmt((p[0] - x0) * scale / w)

    def sy(p):
        # flip so the chart's y axis points up
        return _fmt((h - (p[1] - y0)) * scale / w)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(scale)}" '
        f'height="{_fmt(scale * h / w)}" viewBox="0 0 {_fmt(scale)} {_fmt(scale * h / w)}">',
        f'<path fill="none" stroke="{color}" stroke-width="{_fmt(stroke * scale)}" '
        'stroke-linejoin="round" d="'
        + "M " + " L ".join(f"{sx(p)} {sy(p)}" for p in pts) + ' Z"/>',
    ]
    if dots:
        for t in range(cx.k):
            p = pos[cx.post_vertex[t]]
            lines.append(
                f'<circle cx="{sx(p)}" cy="{sy(p)}" r="{_fmt(0.008 * scale)}" fill="#222222"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
