"""Acceptance criteria 1-9, one PASS/FAIL line each."""

import time
from collections import deque

import numpy as np
import pytest

from hypeca.golden import chain_breaks, load_goldens, load_witnesses
from hypeca.render import layout_ball, render_frame, render_frames
from hypeca.rules import check_coherence, load_rules, parse_rule
from hypeca.structures import STRUCTURES, build_structure
from hypeca.tiling import TilingBall, build_ball
from hypeca.verify import (_Context, check_idle, check_scenario, check_witness, compare_table, fired_rules,
                           load_waivers, verify_all)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def test_criterion_1_rule_integrity(report):
    t0 = time.perf_counter()
    table = load_rules()
    rep = check_coherence(table)
    injected = check_coherence(table.with_rules(parse_rule("192 B WBBBBWWW W")))
    dt = time.perf_counter() - t0
    ids = sorted(r.id for r in table)
    pair = {r.id for r in injected.conflicts[0]} if len(injected.conflicts) == 1 else set()
    ok = (len(table) == 191 and ids == list(range(1, 192)) and not rep.conflicts
          and pair == {131, 192} and dt < 0.1)
    report(1, ok, f"{len(table)} rules, {len(rep.conflicts)} conflicts; injected rule conflicts with "
                  f"{sorted(pair - {192})}; {dt * 1e3:.1f} ms")


def _bfs_level_sizes(ball):
    dist = np.full(ball.size, -1)
    dist[0] = 0
    q = deque([0])
    while q:
        i = q.popleft()
        for j in ball.nbr[i]:
            if j >= 0 and dist[j] < 0:
                dist[j] = dist[i] + 1
                q.append(j)
    return [int((dist == d).sum()) // 8 for d in range(1, ball.levels + 2)]


def test_criterion_2_tiling(report):
    t0 = time.perf_counter()
    ok = True
    for levels in range(0, 7):
        ball = TilingBall(levels)
        rec = [1, 4]
        while len(rec) < levels + 1:
            rec.append(4 * rec[-1] - rec[-2])
        ok &= ball.level_counts() == rec[: levels + 1] == _bfs_level_sizes(ball)
        nbr = ball.nbr
        i, k = np.nonzero(nbr >= 0)
        j = nbr[i, k]
        ok &= bool((nbr[j] == i[:, None]).any(axis=1).all())
        inner = np.flatnonzero(~ball.outer)
        for k in range(8):
            a, b = nbr[inner, k], nbr[inner, (k + 1) % 8]
            ok &= bool((a >= 0).all() and (b >= 0).all() and (nbr[a] == b[:, None]).any(axis=1).all())
    dt = time.perf_counter() - t0
    report(2, ok and dt < 1.0, f"level sizes {ball.level_counts()[:5]}..., symmetry and 3 tiles per vertex "
                               f"for levels 0..6; {dt:.2f} s")


def test_criterion_3_golden_traces(report):
    t0 = time.perf_counter()
    table = load_rules()
    goldens = load_goldens()
    ctx = _Context(table, None, build_ball(5))
    res = [compare_table(g, ctx) for g in goldens.values()]
    res += [check_witness(w, ctx) for w in load_witnesses()]
    dt = time.perf_counter() - t0
    bad = [r.line() for r in res if not r.ok]
    report(3, not bad and dt < 5.0, f"{len(goldens)} tables and {len(res) - len(goldens)} witness columns "
                                    f"reproduced exactly; {dt:.2f} s" + (f"; {bad[0]}" if bad else ""))


def test_criterion_4_idle_fixed_points(report):
    ctx = _Context(load_rules(), None, build_ball(5))
    res = [check_idle(name, ctx, 20) for name in STRUCTURES]
    bad = [r.name for r in res if not r.ok]
    report(4, not bad, f"{len(res) - len(bad)}/{len(res)} structures unchanged over 20 steps")


def test_criterion_5_behaviour(report):
    ctx = _Context(load_rules(), None, build_ball(5))
    res = []
    for name in STRUCTURES:
        for sc in ctx.instance(name).asset.scenarios:
            res.append(check_scenario(name, sc.name, ctx))
    bad = [f"{r.name}: {r.detail}" for r in res if not r.ok]
    needed = {"doubler/simple", "selector/simple", "selector/double", "controller-black/simple",
              "controller-white/simple", "sensor-white/simple", "sensor-black/simple",
              "controller-black/signal-b2w", "controller-white/signal-w2b", "sensor-black/signal-b2w"}
    missing = needed - {r.name for r in res}
    report(5, not bad and not missing, f"{len(res) - len(bad)}/{len(res)} scenario oracles hold"
                                       + (f"; {bad[0]}" if bad else "") + (f"; missing {missing}" if missing else ""))


def test_criterion_6_chaining(report):
    table = load_rules()
    goldens = load_goldens()
    breaks = {n: chain_breaks(g, table) for n, g in goldens.items()}
    bad = [n for n, b in breaks.items() if b]
    report(6, not bad, f"{len(goldens) - len(bad)}/{len(goldens)} tables chain")


def test_criterion_7_coverage(report):
    table = load_rules()
    fired = fired_rules(table)
    waived = load_waivers()
    uncovered = sorted({r.id for r in table} - fired - set(waived))
    needless = sorted(set(waived) & fired)
    report(7, not uncovered and not needless,
           f"{len(fired)} rules fire, {len(waived)} waived ({' '.join(map(str, sorted(waived)))})"
           + (f"; uncovered {uncovered}" if uncovered else "") + (f"; waived but fired {needless}" if needless else ""))


def test_criterion_8_falsification(report):
    table = load_rules()
    rep = verify_all(table.without(84))
    failed = sorted(r.name for r in rep.failures if r.kind == "table")
    goldens = load_goldens()
    g = goldens["efxsg"]
    cell, t = g.watch[4], g.times[2]
    old = g.rows[2][4]
    ctx = _Context(table, None, build_ball(5))
    res = compare_table(g.perturbed(cell, t, 190), ctx)
    m = res.first_divergence
    single = not res.ok and len(res.mismatches) == 1 and (m.cell, m.t, m.got) == (str(cell), t, old)
    report(8, len(failed) >= 3 and single,
           f"without rule 84: {len(failed)} tables fail ({' '.join(failed)}); perturbed entry reported at "
           f"{m.cell if m else None} t={m.t if m else None}")


def test_criterion_9_render(report):
    ok = True
    for levels in range(0, 6):
        ok &= len(layout_ball(build_ball(levels))) == build_ball(levels).size
    lay = layout_ball(build_ball(3))
    table = load_rules()
    a = render_frames(build_structure("fixed-switch"), "simple-left", table, lay)
    b = render_frames(build_structure("fixed-switch"), "simple-left", table, layout_ball(build_ball(3)))
    same = a == b and render_frame(lay) == render_frame(layout_ball(build_ball(3)))
    report(9, ok and same, f"tile counts match for levels 0..5; {len(a)} frames byte-identical on re-render")
