import shutil

import numpy as np
import pytest

from hypeca.errors import InconsistentTrace, InfeasibleOrientation, StaticConflict
from hypeca.fitkit import (FAMILIES, Timeline, assemble_solved_asset, cover_rules, family_of, feasible_offsets,
                           fit_orientations, infer_static_neighborhood, orientation_group, reconstruct_timeline,
                           samples_from_asset, solve_family)
from hypeca.golden import parse_table
from hypeca.rules import B, W
from hypeca.structures import assets_dir, build_structure
from hypeca.tiling import build_ball, parse_label
from hypeca.verify import verify_all


@pytest.fixture(scope="module")
def ball6():
    return build_ball(6)


_SOLVED = {}


def solved(family, table, goldens):
    if family not in _SOLVED:
        _SOLVED[family] = solve_family(family, table, goldens, check_unconstrained=False)
    return _SOLVED[family]


def test_track_timeline(goldens, table):
    tl = reconstruct_timeline(goldens["evsh"], table)
    assert [tl.fired[parse_label("2(8)")][t] for t in (1, 2, 3, 4)] == [18, 24, 30, 16]
    assert tl.state_sequence("2(8)")[:4] == [W, B, W, W]


def test_fork_timeline(goldens, table):
    tl = reconstruct_timeline(goldens["efork"], table)
    assert [tl.fired[parse_label("1(1)")][t] for t in (1, 2, 3, 4)] == [104, 106, 84, 100]
    assert tl.state_sequence("1(1)")[:4] == [W, B, W, W]


def test_inconsistent_timeline(table):
    g = parse_table("x", "# scenario: tracks-cw simple-right\nt\t2(8)\n1\t18*\n2\t16\n")
    with pytest.raises(InconsistentTrace) as exc:
        reconstruct_timeline(g, table)
    assert str(exc.value.cell) == "2(8)"


def test_families():
    assert family_of("controller-white") == "controller"
    assert orientation_group("tracks-ccw") == "tracks-ccw"
    assert orientation_group("sensor-black") == "sensor"
    assert sum(len(v) for v in FAMILIES.values()) == 10


def _oriented(ball, inst, cell, sides):
    i = ball.index(cell)
    o = inst.orientation[cell]
    return {ball.cells[ball.nbr[i, (o + k - 1) % 8]] for k in sides}


def test_static_neighbourhood_recovers_milestones(goldens, table, ball5):
    inst = build_structure("tracks-cw", ball5)
    tl = reconstruct_timeline(goldens["evsh"], table)
    static = infer_static_neighborhood([tl], ball5, table, inst.orientation)
    for cell, rid, sides in (("2(8)", 16, (2, 6, 8)), ("4(8)", 4, (2, 5, 7, 8))):
        assert rid in tl.fired[parse_label(cell)].values()
        for nb in _oriented(ball5, inst, cell, sides):
            assert static[nb] == B
            assert inst.config[nb] == B
    far = parse_label("30(5)")
    assert far not in static


def test_static_conflict(table, ball5):
    orient = {parse_label("2(8)"): 0}
    a = Timeline("x", "a", fired={parse_label("2(8)"): {1: 16}})
    b = Timeline("x", "b", fired={parse_label("2(8)"): {1: 12}})
    assert table[16].context != table[12].context
    with pytest.raises(StaticConflict):
        infer_static_neighborhood([a, b], ball5, table, orient)


def test_fork_entry_orientation(table, ball6):
    samples = samples_from_asset("fork", table, ball6)
    i = ball6.index("1(1)")
    feas = feasible_offsets(ball6, table, samples, i)
    assert [ball6.cells[ball6.nbr[i, o]] for o in feas] == [parse_label("1(8)")]


def test_track_cells_face_successor(table, ball6):
    inst = build_structure("tracks-cw", ball6)
    path = inst.paths["right"]
    for a, b in zip(path[1:-1], path[2:]):
        assert inst.orientation.side1(a) == b


def test_corrupted_field_is_infeasible(table, ball6):
    samples = samples_from_asset("fork", table, ball6)
    i = ball6.index("5(1)")
    smp = samples[1]
    smp.states = smp.states.copy()
    smp.states[2, i] ^= 1
    with pytest.raises(InfeasibleOrientation) as exc:
        fit_orientations(samples, ball6, table, cells=[i])
    assert str(exc.value.cell) == "5(1)"


def test_chosen_offsets_are_feasible(table, ball6):
    sol = fit_orientations(samples_from_asset("doubler", table, ball6), ball6, table)
    for cell, o in sol.chosen.items():
        assert o in sol.feasible[cell]
        assert (len(sol.feasible[cell]) > 1) == (cell in sol.ambiguous)


@pytest.mark.parametrize("family", ["fork", "fixed-switch"])
def test_solved_family_closes_the_loop(family, table, goldens, tmp_path):
    first = assemble_solved_asset(solved(family, table, goldens))
    sol = solve_family(family, table, goldens, check_unconstrained=False)
    assert first == assemble_solved_asset(sol)
    cover_rules({family: sol}, table)
    for p in assets_dir().glob("*.txt"):
        shutil.copy(p, tmp_path)
    for name, text in assemble_solved_asset(sol).items():
        (tmp_path / f"{name}.txt").write_text(text)
    rep = verify_all(table, asset_dir=tmp_path)
    mine = [r for r in rep.results if family in r.name or r.name in
            {g.name for g in goldens.values() if g.structure in FAMILIES[family]}]
    assert mine and all(r.ok for r in mine), [r.line() for r in mine if not r.ok]


def test_fixed_switch_centre_forced_by_rule_71(table, goldens):
    sol = solved("fixed-switch", table, goldens)
    st = sol.idle["fixed-switch"]
    ball = sol.ball
    black = sorted(str(c) for c in ball.neighbors("0(0)") if st[ball.index(c)])
    assert black == ["1(2)", "1(3)", "1(5)", "1(6)", "1(8)"]
    ori = sol.orientation["fixed-switch"]
    assert ball.cells[ball.nbr[0, ori.chosen[parse_label("0(0)")]]] == parse_label("1(5)")
    assert np.count_nonzero(st) > 5


def test_shipped_assets_are_solver_output(table, tmp_path):
    from hypeca.fitkit import fit_all

    fit_all(table, tmp_path)
    shipped = sorted(p.name for p in assets_dir().glob("*.txt"))
    assert sorted(p.name for p in tmp_path.glob("*.txt")) == shipped
    for name in shipped:
        assert (tmp_path / name).read_text() == (assets_dir() / name).read_text(), name
