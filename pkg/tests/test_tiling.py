from collections import deque

import numpy as np
import pytest

from hypeca.errors import BoundaryCell, MalformedLabel
from hypeca.tiling import CENTER, CellId, build_ball, format_label, level_sizes, parse_label


def recurrence(n):
    sizes = [1, 4]
    while len(sizes) < n:
        sizes.append(4 * sizes[-1] - sizes[-2])
    return sizes[:n]


def bfs_layers(ball):
    """Graph-distance layers from the central cell, found by plain BFS."""
    dist = {0: 0}
    q = deque([0])
    while q:
        i = q.popleft()
        for j in ball.nbr[i]:
            if j >= 0 and j not in dist:
                dist[int(j)] = dist[i] + 1
                q.append(int(j))
    return dist


@pytest.mark.parametrize("levels", range(0, 7))
def test_level_sizes_follow_recurrence(levels):
    ball = build_ball(levels)
    assert ball.level_counts() == recurrence(levels + 1)
    assert level_sizes(levels) == recurrence(levels + 1)
    assert ball.size == 1 + 8 * sum(recurrence(levels + 1))


@pytest.mark.parametrize("levels", [2, 3, 4, 5])
def test_bfs_layers_match_levels(levels):
    ball = build_ball(levels)
    dist = bfs_layers(ball)
    assert len(dist) == ball.size
    for i, d in dist.items():
        if i:
            assert d == ball.level[i] + 1


def test_known_totals():
    assert build_ball(0).size == 9
    assert build_ball(2).size == 161
    assert build_ball(3).size == 609


@pytest.mark.parametrize("levels", range(0, 7))
def test_adjacency_symmetric_and_three_per_vertex(levels):
    ball = build_ball(levels)
    nbr = ball.nbr
    for i in range(ball.size):
        for k in range(8):
            j = nbr[i, k]
            if j < 0:
                continue
            assert i in nbr[j]
            if ball.outer[i]:
                continue
            j2 = nbr[i, (k + 1) % 8]
            assert j2 >= 0
            assert j2 in nbr[j], (ball.cells[i], k)


def test_interior_cells_have_eight_neighbours():
    ball = build_ball(4)
    for i in range(ball.size):
        if not ball.outer[i]:
            assert (ball.nbr[i] >= 0).all()
            assert len(set(ball.nbr[i].tolist())) == 8


def test_canonical_anchors():
    ball = build_ball(3)
    assert ball.neighbors(CENTER) == [CellId(i, 1) for i in range(1, 9)]
    for s in range(1, 9):
        nb = ball.neighbors(CellId(s, 1))
        assert nb[6] == CENTER
        assert nb[:4] == [CellId(s, j) for j in range(2, 6)]
    assert ball.neighbors("2(1)")[0:3] == [parse_label(x) for x in ("6(1)", "7(1)", "8(1)")]


def test_tree_son_kinds():
    ball = build_ball(4)
    for i in range(1, ball.size):
        if ball.level[i] >= 3:
            continue
        sons = [j for j in range(ball.size) if ball.parent[j] == i]
        kinds = [int(ball.kind[j]) for j in sorted(sons, key=lambda j: ball.cells[j].index)]
        assert kinds == ([1, 0, 0, 0] if ball.kind[i] == 0 else [1, 0, 0])


def test_numbering_is_contiguous_per_sector():
    ball = build_ball(4)
    for s in range(1, 9):
        idx = sorted(c.index for c in ball.cells if c.sector == s)
        assert idx == list(range(1, len(idx) + 1))


def test_labels():
    assert parse_label("9(3)") == CellId(3, 9)
    assert parse_label("0(0)") == CENTER
    assert format_label(CellId(3, 9)) == "9(3)"
    for bad in ("9(9)", "0(3)", "3(0)", "x", "1(1"):
        with pytest.raises(MalformedLabel):
            parse_label(bad)


def test_boundary_cell_has_no_full_neighbourhood():
    ball = build_ball(2)
    outer = ball.boundary
    assert outer
    edge = [c for c in outer if (ball.nbr[ball.index(c)] < 0).any()][0]
    with pytest.raises(BoundaryCell):
        ball.neighbors(edge)


def test_neighbour_array_is_read_only():
    ball = build_ball(2)
    with pytest.raises(ValueError):
        ball.nbr[0, 0] = 3
    assert isinstance(ball.nbr, np.ndarray)
