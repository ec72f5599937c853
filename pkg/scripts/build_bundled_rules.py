"""Regenerate the bundled rule files.

Writes the two Lattes-style pillow rules, the squared variant of the second
one, the reversed-orientation variant, plus two small synthetic fixtures.
Run from the repository root:

    python3 scripts/build_bundled_rules.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tilecurve import rulecomplex as rc

RULES = pathlib.Path(__file__).resolve().parents[1] / "src" / "tilecurve" / "rules"

S = 0.707106781187  # sqrt(2)/2 rounded to 12 digits


def tile(tid, color, slots, edge_type):
    return {
        "id": tid,
        "color": color,
        "boundary": [{"edge": e, "type": edge_type[e], "orient": 1} for e in slots],
    }


def chain(*entries):
    return [{"edge": e, "dir": d} for e, d in entries]


def lattes_g():
    edge_type = {
        "b0": 0, "b1": 0, "t0": 0, "t1": 0,
        "fS": 1, "fN": 1, "gS": 1, "gN": 1,
        "fE": 2, "fW": 2, "gE": 2, "gW": 2,
        "r0": 3, "r1": 3, "l0": 3, "l1": 3,
    }
    tiles = [
        tile("S00", "white", ["b0", "fS", "fW", "l1"], edge_type),
        tile("S10", "black", ["b1", "fS", "fE", "r0"], edge_type),
        tile("S11", "white", ["t0", "fN", "fE", "r1"], edge_type),
        tile("S01", "black", ["t1", "fN", "fW", "l0"], edge_type),
        tile("U00", "black", ["b0", "gS", "gW", "l1"], edge_type),
        tile("U10", "white", ["b1", "gS", "gE", "r0"], edge_type),
        tile("U01", "white", ["t1", "gN", "gW", "l0"], edge_type),
        tile("U11", "black", ["t0", "gN", "gE", "r1"], edge_type),
    ]
    # pillow chart: white square of side 1/2, black square unfolded across x=1/2
    def refl(p):
        return [1.0 - p[0], p[1]]

    front = {
        "0": [0.0, 0.0], "bm": [0.25, 0.0], "1": [0.5, 0.0],
        "lm": [0.0, 0.25], "ctr": [0.25, 0.25], "rm": [0.5, 0.25],
        "-1": [0.0, 0.5], "tm": [0.25, 0.5], "inf": [0.5, 0.5],
    }
    geometry = {
        "chart": {
            "white": [front["0"], front["1"], front["inf"], front["-1"]],
            "black": [refl(front["0"]), front["1"], front["inf"], refl(front["-1"])],
        },
        "tiles": {
            "S00": [front["0"], front["bm"], front["ctr"], front["lm"]],
            "S10": [front["1"], front["bm"], front["ctr"], front["rm"]],
            "S11": [front["inf"], front["tm"], front["ctr"], front["rm"]],
            "S01": [front["-1"], front["tm"], front["ctr"], front["lm"]],
            "U00": [refl(front["0"]), refl(front["bm"]), refl(front["ctr"]), refl(front["lm"])],
            "U10": [refl(front["1"]), refl(front["bm"]), refl(front["ctr"]), refl(front["rm"])],
            "U01": [refl(front["-1"]), refl(front["tm"]), refl(front["ctr"]), refl(front["lm"])],
            "U11": [refl(front["inf"]), refl(front["tm"]), refl(front["ctr"]), refl(front["rm"])],
        },
    }
    return {
        "degree": 4,
        "post": ["0", "1", "inf", "-1"],
        "tiles": tiles,
        "edges": [{"id": e, "type": t} for e, t in edge_type.items()],
        "curve": [
            chain(("b0", 1), ("b1", -1)),
            chain(("r0", -1), ("r1", 1)),
            chain(("t0", 1), ("t1", -1)),
            chain(("l0", -1), ("l1", 1)),
        ],
        "geometry": geometry,
    }


def lattes_h():
    edge_type = {
        "el0": 0, "el1": 0, "mf": 1, "mu": 1,
        "er0": 2, "er1": 2, "eb": 3, "et": 3,
    }
    tiles = [
        tile("FL", "black", ["el1", "mf", "er0", "eb"], edge_type),
        tile("FU", "white", ["el0", "mf", "er1", "et"], edge_type),
        tile("UL", "white", ["el1", "mu", "er0", "eb"], edge_type),
        tile("UU", "black", ["el0", "mu", "er1", "et"], edge_type),
    ]
    def refl(p):
        return [2 * S - p[0], p[1]]

    pos = {
        "p0": [0.0, 0.0], "p1": [S, 0.0], "p2": [S, 1.0], "p3": [0.0, 1.0],
        "c1": [0.0, 0.5], "c2": [S, 0.5],
    }
    geometry = {
        "chart": {
            "white": [pos["p0"], pos["p1"], pos["p2"], pos["p3"]],
            "black": [refl(pos["p0"]), pos["p1"], pos["p2"], refl(pos["p3"])],
        },
        "tiles": {
            "FL": [pos["p0"], pos["c1"], pos["c2"], pos["p1"]],
            "FU": [pos["p3"], pos["c1"], pos["c2"], pos["p2"]],
            "UL": [refl(pos["p0"]), refl(pos["c1"]), refl(pos["c2"]), refl(pos["p1"])],
            "UU": [refl(pos["p3"]), refl(pos["c1"]), refl(pos["c2"]), refl(pos["p2"])],
        },
    }
    return {
        "degree": 2,
        "post": ["p0", "p1", "p2", "p3"],
        "tiles": tiles,
        "edges": [{"id": e, "type": t} for e, t in edge_type.items()],
        "curve": [
            chain(("eb", -1)),
            chain(("er0", -1), ("er1", 1)),
            chain(("et", 1)),
            chain(("el0", 1), ("el1", -1)),
        ],
        "geometry": geometry,
    }


def identity_k4():
    edge_type = {"c0": 0, "c1": 1, "c2": 2, "c3": 3}
    tiles = [
        tile("TW", "white", ["c0", "c1", "c2", "c3"], edge_type),
        tile("TB", "black", ["c0", "c1", "c2", "c3"], edge_type),
    ]
    return {
        "degree": 1,
        "post": ["q0", "q1", "q2", "q3"],
        "tiles": tiles,
        "edges": [{"id": e, "type": t} for e, t in edge_type.items()],
        "curve": [chain((f"c{t}", 1)) for t in range(4)],
    }


def beachball5():
    # ten quadrilaterals between eleven meridians of a lens-shaped sphere;
    # the curve is the union of meridians 0 and 1
    edge_type = {}
    for i in range(10):
        edge_type[f"up{i}"] = 0 if i % 2 == 0 else 3
        edge_type[f"lo{i}"] = 1 if i % 2 == 0 else 2
    tiles = []
    for i in range(10):
        j = (i + 1) % 10
        if i % 2 == 0:
            slots = [f"up{i}", f"lo{i}", f"lo{j}", f"up{j}"]
        else:
            slots = [f"up{j}", f"lo{j}", f"lo{i}", f"up{i}"]
        tiles.append(tile(f"Q{i}", "white" if i % 2 == 0 else "black", slots, edge_type))
    return {
        "degree": 5,
        "post": ["N", "A0", "S", "A1"],
        "tiles": tiles,
        "edges": [{"id": e, "type": t} for e, t in edge_type.items()],
        "curve": [
            chain(("up0", 1)),
            chain(("lo0", 1)),
            chain(("lo1", 1)),
            chain(("up1", 1)),
        ],
    }


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    rule = rc.parse_rule(doc)
    report = rc.validate(rule)
    status = "ok" if report.ok else "INVALID"
    print(f"{path.name}: {status}  V={report.counts['V']} E={report.counts['E']} T={report.counts['T']}")
    if not report.ok:
        print(report.text())
        raise SystemExit(1)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def main():
    g = lattes_g()
    h = lattes_h()
    dump(RULES / "lattes_g.json", g)
    dump(RULES / "lattes_h.json", h)
    dump(RULES / "identity_k4.json", identity_k4())
    dump(RULES / "beachball5.json", beachball5())
    h_rule = rc.parse_rule(h)
    dump(RULES / "lattes_h2.json", rc.squared(h_rule).to_doc())
    dump(RULES / "lattes_h_alt_orders" / "reversed.json", rc.reversed_rule(h_rule).to_doc())


if __name__ == "__main__":
    main()
