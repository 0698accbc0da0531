"""Command-line entry point: ``hypeca <command> [options]``.

Exit codes: 0 success, 1 a check failed, 2 usage or infrastructure error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import HypecaError

log = logging.getLogger("hypeca")

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _cmd_tiling(args) -> int:
    from .tiling import build_ball

    ball = build_ball(args.levels)
    counts = ball.level_counts()
    print("per-sector level sizes: " + " ".join(str(c) for c in counts))
    print(f"{ball.size} cells in a ball of {args.levels} levels")
    if args.out:
        Path(args.out).write_text(ball.adjacency_text(), encoding="utf-8")
        print(f"adjacency written to {args.out}")
    return EXIT_OK


def _cmd_rules_check(args) -> int:
    from .rules import check_coherence, load_rules, to_text

    table = load_rules(args.rules)
    rep = check_coherence(table)
    print(f"{len(table)} rules, {len(rep.conflicts)} conflicts")
    for a, b in rep.conflicts:
        print(f"conflict: rule {a.id} and rule {b.id} share {'WB'[a.current]} {to_text(a.context)} "
              f"but go to {'WB'[a.next]} / {'WB'[b.next]}")
    for a, b in rep.exact_duplicates:
        print(f"duplicate: rule {b.id} repeats rule {a.id}")
    ids = sorted(r.id for r in table)
    gaps = sorted(set(range(1, ids[-1] + 1)) - set(ids)) if ids else []
    if gaps:
        print("missing ids: " + " ".join(map(str, gaps)))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _watch_for(structure: str, scenario: str, table_name: str | None):
    from .golden import load_goldens

    goldens = load_goldens()
    if table_name:
        g = goldens[table_name]
        if (g.structure, g.scenario) != (structure, scenario):
            raise HypecaError(f"table {table_name} belongs to {g.structure} {g.scenario}")
        return g.watch
    for g in goldens.values():
        if (g.structure, g.scenario) == (structure, scenario):
            return g.watch
    return None


def _cmd_run(args) -> int:
    from .engine import run
    from .golden import format_table
    from .rules import load_rules
    from .structures import build_structure, inject
    from .tiling import parse_label

    table = load_rules(args.rules)
    inst = build_structure(args.structure)
    sc = inst.scenario(args.scenario)
    steps = sc.steps if args.steps is None else args.steps
    _, flog = run(inject(inst, sc), inst.orientation, table, steps + 1, keep_states=True)
    ball = inst.ball
    idle = inst.config.states
    for t, st in enumerate(flog.states[: steps + 1]):
        moving = [str(ball.cells[i]) for i in (st != idle).nonzero()[0]]
        print(f"t={t}: " + (" ".join(moving) if moving else "idle"))
    if args.trace_out:
        if args.watch:
            watch = [parse_label(x) for x in args.watch.split(",")]
        else:
            watch = _watch_for(args.structure, args.scenario, args.table)
        if watch is None:
            watch = [c for p in inst.paths.values() for c in p]
            watch = list(dict.fromkeys(watch))
        times = list(range(1, steps + 1))
        rows = flog.table(watch, times)
        red = [[table[r].changes for r in row] for row in rows]
        Path(args.trace_out).write_text(
            format_table(args.structure, args.scenario, watch, times, rows, red), encoding="utf-8")
        print(f"trace written to {args.trace_out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .golden import load_goldens
    from .rules import load_rules
    from .verify import verify_all, verify_table

    table = load_rules(args.rules)
    if args.all:
        report = verify_all(table, golden_dir=args.golden_dir)
        sys.stdout.write(report.text())
        return _verdict(report.results)
    goldens = load_goldens(args.golden_dir)
    if args.table not in goldens:
        print(f"unknown table {args.table}; known: {' '.join(sorted(goldens))}", file=sys.stderr)
        return EXIT_ERROR
    res = verify_table(goldens[args.table], table)
    print(res.line())
    for m in res.mismatches[1:]:
        print(f"  also {m}")
    return _verdict([res])


def _verdict(results) -> int:
    # a missing asset is an installation problem, not a reproduction failure
    if any(r.detail.startswith("UnresolvedLayout") for r in results):
        return EXIT_ERROR
    return EXIT_OK if results and all(r.ok for r in results) else EXIT_FAIL


def _cmd_render(args) -> int:
    from .render import crop, layout_ball, render_frame, structure_highlights
    from .rules import load_rules
    from .structures import build_structure, simulate
    from .tiling import build_ball

    layout = layout_ball(build_ball(args.levels))
    ball = layout.ball
    if args.layout_out:
        Path(args.layout_out).write_text(layout.dump(), encoding="utf-8")
    if not args.structure:
        Path(args.out).write_text(render_frame(layout, labels=args.labels), encoding="utf-8")
        print(f"wrote {args.out}")
        return EXIT_OK

    inst = build_structure(args.structure)
    hl = structure_highlights(inst)
    if args.scenario is None:
        frames = [crop(inst.ball, inst.config.states, ball)]
    else:
        _, flog = simulate(inst, args.scenario, load_rules(args.rules))
        frames = [crop(inst.ball, s, ball) for s in flog.states]
    if args.time is not None:
        if not 0 <= args.time < len(frames):
            print(f"--time must be in 0..{len(frames) - 1}", file=sys.stderr)
            return EXIT_ERROR
        Path(args.out).write_text(render_frame(layout, frames[args.time], hl, args.labels, f"t={args.time}"),
                                  encoding="utf-8")
        print(f"wrote {args.out}")
        return EXIT_OK
    out = Path(args.out)
    if len(frames) == 1:
        out.write_text(render_frame(layout, frames[0], hl, args.labels), encoding="utf-8")
        print(f"wrote {out}")
        return EXIT_OK
    out.mkdir(parents=True, exist_ok=True)
    for t, cfg in enumerate(frames):
        (out / f"frame{t:03d}.svg").write_text(render_frame(layout, cfg, hl, args.labels, f"t={t}"),
                                               encoding="utf-8")
    print(f"wrote {len(frames)} frames to {out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    from .fitkit import FAMILIES, fit_all
    from .rules import load_rules

    fams = args.family or list(FAMILIES)
    unknown = [f for f in fams if f not in FAMILIES]
    if unknown:
        print(f"unknown family {unknown[0]}; known: {' '.join(FAMILIES)}", file=sys.stderr)
        return EXIT_ERROR
    sols = fit_all(load_rules(args.rules), args.asset_out, args.golden_dir, fams,
                   check_unconstrained=not args.skip_unconstrained)
    for fam, sol in sols.items():
        print(f"{fam}: solved {', '.join(sorted(sol.idle))}")
    print(f"assets written to {args.asset_out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypeca", description="Rule-table automaton on the {8,3} tiling.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("tiling", help="build a ball and report level sizes")
    s.add_argument("--levels", type=int, default=4)
    s.add_argument("--out", help="write the adjacency list here")
    s.set_defaults(func=_cmd_tiling)

    s = sub.add_parser("rules-check", help="parse a rule file and report conflicts")
    s.add_argument("--rules", help="rule file (default: shipped table)")
    s.set_defaults(func=_cmd_rules_check)

    s = sub.add_parser("run", help="simulate a structure scenario")
    s.add_argument("--structure", required=True)
    s.add_argument("--scenario", required=True)
    s.add_argument("--steps", type=int, help="default: the scenario's own horizon")
    s.add_argument("--trace-out", help="write fired rules for rows 1..steps as a golden-format table")
    s.add_argument("--table", help="golden table whose watch cells the trace uses")
    s.add_argument("--watch", help="comma-separated watch cells for the trace")
    s.add_argument("--rules")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("verify", help="reproduce golden tables")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--table")
    g.add_argument("--all", action="store_true")
    s.add_argument("--golden-dir")
    s.add_argument("--rules")
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("render", help="write SVG frames on the Poincare disk")
    s.add_argument("--structure")
    s.add_argument("--scenario")
    s.add_argument("--time", type=int, help="single frame; otherwise --out is a directory of frames")
    s.add_argument("--out", required=True)
    s.add_argument("--levels", type=int, default=4, help="levels drawn (default 4)")
    s.add_argument("--labels", action="store_true", help="label the tiles of levels 0..2")
    s.add_argument("--layout-out", help="also dump tile centres and vertices")
    s.add_argument("--rules")
    s.set_defaults(func=_cmd_render)

    s = sub.add_parser("fit", help="solve structure layouts from the golden traces")
    s.add_argument("--golden-dir")
    s.add_argument("--asset-out", required=True)
    s.add_argument("--family", action="append", help="restrict to one family (repeatable)")
    s.add_argument("--skip-unconstrained", action="store_true", help="skip the slow free-cell scan")
    s.add_argument("--rules")
    s.set_defaults(func=_cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "render" and not 0 <= args.levels <= 6:
        print("error: --levels must be in 0..6 for rendering", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (HypecaError, OSError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
