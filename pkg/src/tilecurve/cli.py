"""Command line entry points.

Subcommands: validate | subdivide | tree | lengths | curve | render | search.
Exit codes: 0 success, 1 invariant or verification failure, 2 IO or parse
error, 3 search budget exhausted.  All outputs are deterministic: identical
inputs yield byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import connect, lengths, lift, render, rulecomplex, spantree

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunConfig:
    rule: Path
    level: int = 3
    p0: str | None = None
    out: Path | None = None
    budget: int = 200000
    all: bool = False
    stroke: float = 0.004
    dots: bool = True
    max_edges: int = 2**20


def _load(config: RunConfig):
    try:
        return rulecomplex.parse_rule(config.rule, p0=config.p0)
    except OSError as exc:
        raise SystemExit2(f"cannot read rule file: {exc}")
    except (json.JSONDecodeError, rulecomplex.RuleError) as exc:
        raise SystemExit2(f"invalid rule file: {exc}")


class SystemExit2(Exception):
    pass


def _write(path: Path, data: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(data, encoding="utf-8")


def cmd_validate(config: RunConfig) -> int:
    rule = _load(config)
    report = rulecomplex.validate(rule)
    print(report.text())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_subdivide(config: RunConfig) -> int:
    rule = _load(config)
    try:
        cxs = rulecomplex.build_levels(rule, config.level, max_edges=config.max_edges)
    except rulecomplex.ComplexError as exc:
        print(f"subdivision failed: {exc}")
        return EXIT_FAIL
    for cx in cxs:
        print(
            f"level {cx.level}: tiles={cx.n_tiles} edges={cx.n_edges} "
            f"vertices={cx.n_vertices} chi={cx.euler_characteristic()}"
        )
    return EXIT_OK


def cmd_tree(config: RunConfig) -> int:
    rule = _load(config)
    cx = rulecomplex.level1(rule)
    try:
        plan = spantree.build_plan(cx)
    except spantree.ConstructionError as exc:
        print(f"construction failed: {exc}")
        return EXIT_FAIL
    doc = spantree.plan_to_doc(plan)
    print(f"main tree {plan.main_cluster}; circuit of {len(plan.circuit.edges)} edges; "
          f"C1={'ok' if plan.c1 else 'FAIL'} C2={'ok' if plan.c2 else 'FAIL'}")
    for t, ok, detail in plan.segments:
        label = "order" if t < 0 else f"arc {t}"
        print(f"  [{ 'ok' if ok else 'FAIL' }] {label}" + (f": {detail}" if detail else ""))
    if config.out is not None:
        _write(config.out / "plan.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"wrote {config.out / 'plan.json'}")
    return EXIT_OK if plan.c1 and plan.c2 else EXIT_FAIL


def cmd_lengths(config: RunConfig) -> int:
    rule = _load(config)
    cx = rulecomplex.level1(rule)
    try:
        plan = spantree.build_plan(cx)
        ls = lengths.build_length_system(cx, plan.circuit, spantree.plan_hash(plan))
    except (spantree.ConstructionError, lengths.LengthError) as exc:
        print(f"failed: {exc}")
        return EXIT_FAIL
    print(ls.text())
    print(f"plan {ls.plan_hash[:16]}")
    return EXIT_OK


def _curve_doc(state: lift.LevelState) -> list:
    out = []
    cx = state.cx
    for i, e in enumerate(state.circuit.edges):
        a = state.grid.alphas[i]
        out.append(
            {
                "t": f"{a.numerator}/{a.denominator}",
                "vertex": cx.edge_init[e],
                "edge": cx.edge_name[e],
                "type": cx.edge_type[e],
            }
        )
    return out


def cmd_curve(config: RunConfig) -> int:
    rule = _load(config)
    try:
        tower = lift.build_tower(rule, config.level, max_edges=config.max_edges)
    except (spantree.ConstructionError, rulecomplex.ComplexError, lift.LiftError,
            lengths.LengthError) as exc:
        print(f"construction failed: {exc}")
        return EXIT_FAIL
    ok = True
    for report in tower.reports:
        print(report.line())
        ok = ok and report.ok
    if config.out is not None:
        for state in tower.levels[1:]:
            path = config.out / f"curve_level{state.cx.level}.json"
            _write(path, json.dumps(_curve_doc(state), indent=1, sort_keys=True) + "\n")
        print(f"wrote {config.level} curve files to {config.out}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_render(config: RunConfig) -> int:
    rule = _load(config)
    if rule.geometry is None:
        print("rule carries no geometry; add a \"geometry\" section with one "
              "polygon per level-1 tile to render")
        return EXIT_FAIL
    try:
        tower = lift.build_tower(rule, config.level, max_edges=config.max_edges)
        frames = render.tile_frames([st.cx for st in tower.levels], rule.geometry)
    except (spantree.ConstructionError, rulecomplex.ComplexError, lift.LiftError,
            render.GeometryError) as exc:
        print(f"render failed: {exc}")
        return EXIT_FAIL
    out = config.out or Path(".")
    for state in tower.levels[1:]:
        n = state.cx.level
        svg = render.render_svg(
            state.cx, state.circuit, frames[n], rule.geometry,
            stroke=config.stroke, dots=config.dots,
        )
        _write(out / f"curve_level{n}.svg", svg)
    print(f"wrote {config.level} SVG files to {out}")
    return EXIT_OK


def cmd_search(config: RunConfig) -> int:
    rule = _load(config)
    cx = rulecomplex.level1(rule)
    try:
        result = spantree.search_connections(cx, mode="all", budget=config.budget)
    except spantree.BudgetExhausted as exc:
        print(f"budget exhausted after {exc.explored} nodes; "
              f"{len(exc.found)} passing connections so far")
        return EXIT_BUDGET
    print(
        f"explored {result.explored} nodes: {result.c1_connections} spanning-tree "
        f"connections, {len(result.plans)} passing the homotopy-class test"
    )
    if config.out is not None and result.plans:
        chosen = result.plans if config.all else result.plans[:1]
        for i, plan in enumerate(chosen):
            doc = spantree.plan_to_doc(plan)
            _write(config.out / f"plan_{i:03d}.json",
                   json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"wrote {len(chosen)} plan files to {config.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tilecurve",
        description="subdivision-rule complexes, tree connections and curve approximations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_level in (
        ("validate", False), ("subdivide", True), ("tree", False),
        ("lengths", False), ("curve", True), ("render", True), ("search", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--rule", type=Path, required=True)
        p.add_argument("--p0", type=str, default=None)
        p.add_argument("--out", type=Path, default=None)
        if needs_level or name in ("tree",):
            p.add_argument("--level", type=int, default=3)
        if name == "search":
            p.add_argument("--budget", type=int, default=200000)
            p.add_argument("--all", action="store_true")
        if name == "render":
            p.add_argument("--stroke", type=float, default=0.004)
            p.add_argument("--no-dots", dest="dots", action="store_false")
    args = parser.parse_args(argv)
    config = RunConfig(
        rule=args.rule,
        level=getattr(args, "level", 3),
        p0=args.p0,
        out=args.out,
        budget=getattr(args, "budget", 200000),
        all=getattr(args, "all", False),
        stroke=getattr(args, "stroke", 0.004),
        dots=getattr(args, "dots", True),
    )
    handler = {
        "validate": cmd_validate,
        "subdivide": cmd_subdivide,
        "tree": cmd_tree,
        "lengths": cmd_lengths,
        "curve": cmd_curve,
        "render": cmd_render,
        "search": cmd_search,
    }[args.command]
    try:
        return handler(config)
    except SystemExit2 as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
