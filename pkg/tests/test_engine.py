import os
import subprocess
import sys
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypeca import kernels
from hypeca.engine import Configuration, Orientation, is_fixed_point, oriented_context, run, step
from hypeca.errors import BoundaryActivity, MissingOrientation, MissingRule
from hypeca.rules import B, W, parse_rules, to_text
from hypeca.structures import STRUCTURES, build_structure, inject, simulate
from hypeca.tiling import CENTER, build_ball, parse_label


def ctx_text(cfg, orient, cell):
    cur, ctx = oriented_context(cfg, orient, cell)
    return "WB"[cur] + " " + to_text(ctx)


def test_idle_fixed_switch_centre_reads_rule_71(table, ball5):
    inst = build_structure("fixed-switch", ball5)
    assert ctx_text(inst.config, inst.orientation, CENTER) == "W BBWBWBBW"
    _, fired = step(inst.config, inst.orientation, table, watch=[CENTER])
    assert fired[CENTER] == 71
    assert sorted(str(c) for c in inst.config.support() if ball5.adjacent(c, CENTER)) == \
        ["1(2)", "1(3)", "1(5)", "1(6)", "1(8)"]


def test_all_white_is_quiescent(table):
    ball = build_ball(3)
    cfg = Configuration(ball)
    orient = Orientation(ball, np.zeros(ball.size, dtype=np.int8))
    assert ctx_text(cfg, orient, "3(5)") == "W WWWWWWWW"
    new, fired = step(cfg, Orientation(ball), table, watch=["0(0)", "2(4)"])
    assert new == cfg
    assert set(fired.values()) == {1}
    assert is_fixed_point(cfg, Orientation(ball), table)


def test_run_zero_steps(table):
    ball = build_ball(2)
    cfg = Configuration.from_support(ball, [CENTER])
    out, log = run(cfg, Orientation(ball), table, 0)
    assert out == cfg and len(log) == 0


def test_locomotive_leaves_and_successor_lights(table, ball5):
    inst = build_structure("tracks-cw", ball5)
    _, log = simulate(inst, "simple-right", table)
    st1 = Configuration(ball5, log.states[1])
    assert ctx_text(st1, inst.orientation, "3(8)") == "B WBWWWBWB"
    assert log.rule_at(1, "3(8)") == 24 and log.rule_at(1, "2(8)") == 18
    st2 = Configuration(ball5, log.states[2])
    assert st2["3(8)"] == W and st2["2(8)"] == B


def test_fixed_switch_log_equals_table(table, ball5, goldens):
    g = goldens["efxsg"]
    inst = build_structure("fixed-switch", ball5)
    _, log = run(inject(inst, "simple-left"), inst.orientation, table, max(g.times) + 1, watch=g.watch)
    assert log.table(g.watch, g.times) == g.rows


def test_isolated_milestone_persists(table):
    ball = build_ball(3)
    orient = Orientation(ball)
    for i in range(1, 9):
        orient[f"1({i})"] = ball.side_of(f"1({i})", CENTER) - 1
    cfg = Configuration.from_support(ball, [CENTER])
    new, fired = step(cfg, orient, table)
    assert new == cfg
    assert fired[CENTER] == 2
    assert {fired[parse_label(f"1({i})")] for i in range(1, 9)} == {7}


def test_unoriented_non_uniform_cell_raises(table):
    ball = build_ball(3)
    with pytest.raises(MissingOrientation):
        step(Configuration.from_support(ball, [CENTER]), Orientation(ball), table)


def test_missing_rule_reports_cell_and_context(table):
    ball = build_ball(3)
    cfg = Configuration.from_support(ball, [f"1({i})" for i in range(1, 9)])
    with pytest.raises(MissingRule) as exc:
        step(cfg, Orientation(ball, np.zeros(ball.size, dtype=np.int8)), table)
    assert exc.value.cell == CENTER
    assert (exc.value.current, exc.value.context) == ("W", "BBBBBBBB")


def _dying_table():
    lines = ["1 W WWWWWWWW W", "2 B WWWWWWWW W"]
    for k in range(8):
        ctx = "".join("B" if j == k else "W" for j in range(8))
        lines.append(f"{3 + k} W {ctx} W")
    return parse_rules("\n".join(lines))


def test_boundary_activity():
    ball = build_ball(3)
    orient = Orientation(ball, np.zeros(ball.size, dtype=np.int8))
    inner = Configuration.from_support(ball, [CENTER])
    assert step(inner, orient, _dying_table())[0] == Configuration(ball)
    edge = [c for c in ball.cells if ball.outer[ball.index(c)]][0]
    with pytest.raises(BoundaryActivity):
        step(Configuration.from_support(ball, [edge]), orient, _dying_table())


def test_outside_neighbours_read_white():
    ball = build_ball(2)
    orient = Orientation(ball, np.zeros(ball.size, dtype=np.int8))
    edge = [c for c in ball.cells if (ball.nbr[ball.index(c)] < 0).any()][0]
    cfg = Configuration.from_support(ball, [edge])
    # the lone black cell sees a white neighbourhood, including the missing cells
    rules = parse_rules("1 W WWWWWWWW W\n2 B WWWWWWWW B\n" + "\n".join(
        f"{3 + k} W {''.join('B' if j == k else 'W' for j in range(8))} W" for k in range(8)))
    new, fired = step(cfg, orient, rules)
    assert new == cfg and fired[edge] == 2


@pytest.mark.parametrize("name", STRUCTURES)
def test_idle_structures_are_fixed_points(name, table, ball5):
    inst = build_structure(name, ball5)
    assert is_fixed_point(inst.config, inst.orientation, table)
    final, _ = run(inst.config, inst.orientation, table, 20)
    assert final == inst.config


def test_locomotive_breaks_fixed_point(table, ball5):
    inst = build_structure("selector", ball5)
    assert not is_fixed_point(inject(inst, "simple"), inst.orientation, table)


def test_runs_are_deterministic(table, ball5):
    inst = build_structure("doubler", ball5)
    a = simulate(inst, "simple", table)[1]
    b = simulate(inst, "simple", table)[1]
    assert a.entries == b.entries
    assert all(np.array_equal(x, y) for x, y in zip(a.states, b.states))


def _distances(ball, sources):
    dist = {s: 0 for s in sources}
    q = deque(sources)
    while q:
        i = q.popleft()
        for j in ball.nbr[i]:
            if j >= 0 and int(j) not in dist:
                dist[int(j)] = dist[i] + 1
                q.append(int(j))
    return dist


@pytest.mark.parametrize("name", ["tracks-cw", "fixed-switch", "doubler", "selector"])
def test_locality(name, table, ball5):
    inst = build_structure(name, ball5)
    for sc in inst.asset.scenarios:
        start = inject(inst, sc)
        moved = np.flatnonzero(start.states != inst.config.states)
        dist = _distances(ball5, [int(i) for i in moved] + [int(i) for i in np.flatnonzero(start.states)])
        _, log = simulate(inst, sc, table)
        for n, s in enumerate(log.states):
            changed = np.flatnonzero(s != start.states)
            assert all(dist.get(int(c), 10**9) <= n + 1 for c in changed)


@pytest.mark.parametrize("name", STRUCTURES)
def test_logs_chain(name, table, ball5):
    inst = build_structure(name, ball5)
    for sc in inst.asset.scenarios:
        _, log = simulate(inst, sc, table)
        for t in range(len(log) - 1):
            for c, rid in log.entries[t].items():
                nxt = log.entries[t + 1].get(c)
                if nxt is not None:
                    assert table[rid].next == table[nxt].current


@pytest.mark.skipif(kernels.active_cells_numba is None, reason="numba disabled")
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 0.5))
def test_numba_and_numpy_kernels_agree(seed, density):
    ball = build_ball(3)
    rng = np.random.default_rng(seed)
    states = (rng.random(ball.size) < density).astype(np.uint8)
    orient = rng.integers(-1, 8, ball.size).astype(np.int8)
    watch = (rng.random(ball.size) < 0.05).astype(np.uint8)
    from hypeca.rules import load_rules
    t = load_rules()
    a1 = kernels._active_numpy(states, ball.nbr, watch)
    a2 = kernels.active_cells_numba(states, ball.nbr, watch)
    assert np.array_equal(a1, a2)
    r1 = kernels._evaluate_numpy(states, ball.nbr, orient, a1, t.lut_id, t.lut_next)
    r2 = kernels.evaluate_numba(states, ball.nbr, orient, a2, t.lut_id, t.lut_next)
    for x, y in zip(r1, r2):
        assert np.array_equal(x, y)


def test_numpy_fallback_selected_by_env():
    env = dict(os.environ, HYPECA_DISABLE_NUMBA="1")
    code = ("from hypeca import kernels; from hypeca.verify import verify_table; "
            "print(kernels.BACKEND, verify_table('evsh').ok)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
