"""Finite balls of the {8,3} tessellation with sector-tree numbering.

Cells are addressed as ``index(sector)``.  The central tile is ``0(0)``; the
eight tiles around it are the roots ``1(1)`` .. ``1(8)``.  Inside each sector
the tiles form a tree generated by ``W -> BWWW`` and ``B -> BWW`` and are
numbered level by level, left to right, starting from 1 at the root.

Neighbours are stored in a canonical counterclockwise order.  Canonical
side 1 of a non-central cell is its first son, so for a W-node the order is::

    s1 s2 s3 s4 fs(R) R F L

and for a B-node::

    s1 s2 s3 fs(R) R F L(F) L

where F is the father, L/R the left/right neighbours on the same level and
fs(R) the first son of R.  For the roots this gives the usual anchors:
0(0) on side 7, 1(i-1) on side 8, sons 2(i)..5(i) on sides 1..4.
Sides missing at the outer level are stored as -1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BoundaryCell, MalformedLabel

W_NODE = 0
B_NODE = 1

_LABEL = re.compile(r"^(\d+)\(([0-8])\)$")


@dataclass(frozen=True, order=True)
class CellId:
    sector: int
    index: int

    def __post_init__(self):
        if self.sector == 0 or self.index == 0:
            if (self.sector, self.index) != (0, 0):
                raise MalformedLabel(f"bad cell address {self.index}({self.sector})")
        elif not (1 <= self.sector <= 8 and self.index >= 1):
            raise MalformedLabel(f"bad cell address {self.index}({self.sector})")

    def __str__(self):
        return f"{self.index}({self.sector})"

    @property
    def label(self) -> str:
        return str(self)


CENTER = CellId(0, 0)


def parse_label(text: str) -> CellId:
    m = _LABEL.match(text.strip()) if isinstance(text, str) else None
    if not m:
        raise MalformedLabel(f"not a cell label: {text!r}")
    index, sector = int(m.group(1)), int(m.group(2))
    if str(index) != m.group(1):
        raise MalformedLabel(f"leading zeros in {text!r}")
    return CellId(sector, index)


def format_label(cell: CellId) -> str:
    return str(cell)


def level_sizes(levels: int) -> list[int]:
    """Per-sector level sizes from the recurrence L(n+1) = 4 L(n) - L(n-1)."""
    sizes = [1, 4]
    while len(sizes) < levels + 1:
        sizes.append(4 * sizes[-1] - sizes[-2])
    return sizes[: levels + 1]


def _sector_tree(levels: int):
    """Kinds, fathers and sons of one sector tree (local indices from 1)."""
    kind = [None, W_NODE]
    father = [None, 0]
    level = [None, 0]
    sons: list[list[int]] = [[], []]
    rows = [[1]]
    for n in range(levels):
        nxt = []
        for node in rows[n]:
            pattern = (B_NODE, W_NODE, W_NODE, W_NODE) if kind[node] == W_NODE else (B_NODE, W_NODE, W_NODE)
            for k in pattern:
                kind.append(k)
                father.append(node)
                level.append(n + 1)
                sons.append([])
                child = len(kind) - 1
                sons[node].append(child)
                nxt.append(child)
        rows.append(nxt)
    return kind, father, level, sons, rows


class TilingBall:
    """The central tile plus eight sector trees truncated at ``levels``.

    Attributes are plain numpy arrays indexed by a dense cell number:
    ``nbr[i, k]`` is the dense number of canonical neighbour ``k+1`` of cell
    ``i`` (or -1), ``level[i]`` the tree level (-1 for the centre) and
    ``kind[i]`` the node kind.
    """

    def __init__(self, levels: int):
        if not 0 <= levels <= 12:
            raise ValueError("levels must lie in 0..12")
        self.levels = levels
        kind, father, lvl, sons, rows = _sector_tree(levels)
        self.per_sector = len(kind) - 1
        P = self.per_sector
        n = 1 + 8 * P
        self.size = n

        def g(sector, local):
            return 1 + (sector - 1) * P + (local - 1)

        self.kind = np.full(n, W_NODE, dtype=np.int8)
        self.level = np.full(n, -1, dtype=np.int16)
        self.parent = np.full(n, -1, dtype=np.int32)
        for s in range(1, 9):
            base = g(s, 1)
            self.kind[base:base + P] = kind[1:]
            self.level[base:base + P] = lvl[1:]
            for local in range(1, P + 1):
                self.parent[g(s, local)] = 0 if local == 1 else g(s, father[local])

        left = np.full(n, -1, dtype=np.int32)
        right = np.full(n, -1, dtype=np.int32)
        for row in rows:
            ring = [g(s, local) for s in range(1, 9) for local in row]
            m = len(ring)
            for j, c in enumerate(ring):
                left[c] = ring[j - 1]
                right[c] = ring[(j + 1) % m]

        def first_son(c):
            if c < 0:
                return -1
            s, local = (c - 1) // P + 1, (c - 1) % P + 1
            return g(s, sons[local][0]) if sons[local] else -1

        nbr = np.full((n, 8), -1, dtype=np.int32)
        nbr[0] = [g(s, 1) for s in range(1, 9)]
        for c in range(1, n):
            s, local = (c - 1) // P + 1, (c - 1) % P + 1
            ss = [g(s, x) for x in sons[local]]
            fsr = first_son(right[c])
            f = self.parent[c]
            if self.kind[c] == W_NODE:
                ss += [-1] * (4 - len(ss))
                row = ss + [fsr, right[c], f, left[c]]
            else:
                ss += [-1] * (3 - len(ss))
                row = ss + [fsr, right[c], f, left[f], left[c]]
            nbr[c] = row
        self.nbr = nbr
        self.nbr.setflags(write=False)
        self.cells = [CENTER] + [CellId(s, local) for s in range(1, 9) for local in range(1, P + 1)]
        # cells in the two outermost levels may not change state during a run
        self.outer = self.level >= max(levels - 1, 0)
        self.outer[0] = levels <= 1

    # -- addressing -------------------------------------------------------
    def index(self, cell: CellId | str) -> int:
        if isinstance(cell, str):
            cell = parse_label(cell)
        if cell.sector == 0:
            return 0
        if cell.index > self.per_sector:
            raise KeyError(f"{cell} lies outside a ball of {self.levels} levels")
        return 1 + (cell.sector - 1) * self.per_sector + (cell.index - 1)

    def cell(self, i: int) -> CellId:
        return self.cells[i]

    def __contains__(self, cell) -> bool:
        try:
            self.index(cell)
        except (KeyError, MalformedLabel):
            return False
        return True

    def __len__(self):
        return self.size

    # -- neighbourhoods ---------------------------------------------------
    def is_interior(self, cell) -> bool:
        return bool((self.nbr[self.index(cell)] >= 0).all())

    @property
    def boundary(self) -> list[CellId]:
        return [self.cells[i] for i in np.flatnonzero(self.level == self.levels)] if self.levels else [
            self.cells[i] for i in range(1, 9)]

    def neighbors(self, cell) -> list[CellId]:
        """The 8 canonical neighbours, counterclockwise from canonical side 1."""
        row = self.nbr[self.index(cell)]
        if (row < 0).any():
            raise BoundaryCell(f"{cell} has no full neighbourhood in a ball of {self.levels} levels")
        return [self.cells[j] for j in row]

    def neighbor_indices(self, i: int) -> np.ndarray:
        return self.nbr[i]

    def side_of(self, cell, other) -> int:
        """Canonical side (1..8) of ``cell`` shared with ``other``."""
        i, j = self.index(cell), self.index(other)
        hits = np.flatnonzero(self.nbr[i] == j)
        if not len(hits):
            raise KeyError(f"{other} is not adjacent to {cell}")
        return int(hits[0]) + 1

    def adjacent(self, a, b) -> bool:
        return bool((self.nbr[self.index(a)] == self.index(b)).any())

    def level_counts(self) -> list[int]:
        """Number of tiles on each level of one sector."""
        lv = self.level[1:1 + self.per_sector]
        return np.bincount(lv, minlength=self.levels + 1).tolist()

    def adjacency_text(self) -> str:
        out = []
        for i, c in enumerate(self.cells):
            names = [str(self.cells[j]) if j >= 0 else "-" for j in self.nbr[i]]
            out.append(f"{c}: " + " ".join(names))
        return "\n".join(out) + "\n"


@lru_cache(maxsize=8)
def build_ball(levels: int) -> TilingBall:
    return TilingBall(levels)
