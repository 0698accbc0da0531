"""Configurations, orientations and synchronous updates.

A configuration stores one byte per cell of a ball; only the support (black
cells), its 1-ring and any watched cells are evaluated in a step.  Every
other cell is white with a white neighbourhood and implicitly keeps rule 1.

An orientation gives each cell an offset ``o`` in 0..7: oriented side ``k``
is canonical side ``((o + k - 1) mod 8) + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import BoundaryActivity, BoundaryCell, MissingOrientation, MissingRule
from .rules import B, W, RuleTable, to_text
from .tiling import CellId, TilingBall, parse_label


def _idx(ball: TilingBall, cell) -> int:
    if isinstance(cell, (int, np.integer)):
        return int(cell)
    return ball.index(cell)


class Orientation:
    def __init__(self, ball: TilingBall, offsets: np.ndarray | None = None):
        self.ball = ball
        if offsets is None:
            offsets = np.full(ball.size, -1, dtype=np.int8)
        self.offsets = np.asarray(offsets, dtype=np.int8)

    @classmethod
    def from_mapping(cls, ball, mapping: Mapping) -> "Orientation":
        o = cls(ball)
        for cell, off in mapping.items():
            o.offsets[_idx(ball, cell)] = off
        return o

    def __getitem__(self, cell) -> int | None:
        v = int(self.offsets[_idx(self.ball, cell)])
        return None if v < 0 else v

    def __setitem__(self, cell, offset):
        self.offsets[_idx(self.ball, cell)] = -1 if offset is None else offset

    def side1(self, cell) -> CellId | None:
        """The neighbour sitting on oriented side 1 of ``cell``."""
        i = _idx(self.ball, cell)
        o = self.offsets[i]
        if o < 0:
            return None
        j = self.ball.nbr[i, o]
        return self.ball.cells[j] if j >= 0 else None

    def defined(self) -> list[CellId]:
        return [self.ball.cells[i] for i in np.flatnonzero(self.offsets >= 0)]

    def copy(self) -> "Orientation":
        return Orientation(self.ball, self.offsets.copy())


class Configuration:
    """Total assignment cell -> state over a ball (white by default)."""

    def __init__(self, ball: TilingBall, states: np.ndarray | None = None):
        self.ball = ball
        if states is None:
            states = np.zeros(ball.size, dtype=np.uint8)
        self.states = np.asarray(states, dtype=np.uint8)

    @classmethod
    def from_support(cls, ball, cells: Iterable) -> "Configuration":
        cfg = cls(ball)
        for c in cells:
            cfg.states[_idx(ball, c)] = B
        return cfg

    def __getitem__(self, cell) -> int:
        return int(self.states[_idx(self.ball, cell)])

    def set(self, cell, state) -> "Configuration":
        """Copy with one cell changed."""
        out = self.copy()
        out.states[_idx(self.ball, cell)] = state
        return out

    def support(self) -> list[CellId]:
        return [self.ball.cells[i] for i in np.flatnonzero(self.states)]

    def copy(self) -> "Configuration":
        return Configuration(self.ball, self.states.copy())

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.states, other.states)

    def __hash__(self):
        return hash(self.states.tobytes())


@dataclass
class FiringLog:
    """Per step, a mapping dense cell index -> fired rule id.

    Entry ``t`` holds the rules fired on configuration ``t`` of the run.
    """

    ball: TilingBall
    entries: list[dict[int, int]] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def rule_at(self, t: int, cell) -> int | None:
        i = _idx(self.ball, cell)
        return self.entries[t].get(i)

    def column(self, cell) -> list[int | None]:
        i = _idx(self.ball, cell)
        return [e.get(i) for e in self.entries]

    def table(self, watch: list, times: Iterable[int]) -> list[list[int | None]]:
        idx = [_idx(self.ball, c) for c in watch]
        return [[self.entries[t].get(i) for i in idx] for t in times]


def oriented_context(config: Configuration, orientation: Orientation, cell) -> tuple[int, tuple[int, ...]]:
    ball = config.ball
    i = _idx(ball, cell)
    row = ball.nbr[i]
    if (row < 0).any():
        raise BoundaryCell(f"{ball.cells[i]} has no full neighbourhood")
    o = int(orientation.offsets[i])
    if o < 0:
        raise MissingOrientation(f"no orientation at {ball.cells[i]}")
    st = config.states
    return int(st[i]), tuple(int(st[row[(o + k) % 8]]) for k in range(8))


def _watch_mask(ball, watch) -> np.ndarray:
    mask = np.zeros(ball.size, dtype=np.uint8)
    if watch:
        for c in watch:
            mask[_idx(ball, c)] = 1
    return mask


def _raw_step(config, orientation, table, watch_mask, t=None):
    ball = config.ball
    st = config.states
    active = kernels.active_cells(st, ball.nbr, watch_mask)
    codes, ids, nxt = kernels.evaluate(st, ball.nbr, orientation.offsets, active, table.lut_id, table.lut_next)
    unoriented = orientation.offsets[active] < 0
    if unoriented.any():
        # an unoriented cell is fine only when its neighbourhood is uniform
        ctx = codes[unoriented] & 0xFF
        bad = (ctx != 0) & (ctx != 0xFF)
        if bad.any():
            c = ball.cells[active[unoriented][bad][0]]
            raise MissingOrientation(f"no orientation at {c}" + (f" (t={t})" if t is not None else ""))
    miss = ids <= 0
    if miss.any():
        j = int(np.flatnonzero(miss)[0])
        code = int(codes[j])
        raise MissingRule(ball.cells[active[j]], "WB"[code >> 8], to_text((code >> (7 - k)) & 1 for k in range(8)), t)
    new = st.copy()
    new[active] = nxt
    changed = active[nxt != st[active]]
    if len(changed) and ball.outer[changed].any():
        c = ball.cells[changed[ball.outer[changed]][0]]
        raise BoundaryActivity(f"{c} changes state near the edge of the ball" + (f" (t={t})" if t is not None else ""))
    return Configuration(ball, new), active, ids


def step(config: Configuration, orientation: Orientation, table: RuleTable, watch=None):
    """One synchronous update; returns the new configuration and {cell: rule id}."""
    mask = _watch_mask(config.ball, watch)
    new, active, ids = _raw_step(config, orientation, table, mask)
    cells = config.ball.cells
    return new, {cells[a]: int(r) for a, r in zip(active.tolist(), ids.tolist())}


def run(config: Configuration, orientation: Orientation, table: RuleTable, n_steps: int,
        watch=None, keep_states: bool = False):
    """Apply ``n_steps`` synchronous updates.

    The log gets one entry per evaluated configuration (t = 0 .. n_steps-1),
    restricted to ``watch`` when it is given.
    """
    ball = config.ball
    mask = _watch_mask(ball, watch)
    keep = np.flatnonzero(mask) if watch else None
    log = FiringLog(ball)
    cur = config
    for t in range(n_steps):
        if keep_states:
            log.states.append(cur.states)
        nxt, active, ids = _raw_step(cur, orientation, table, mask, t)
        if keep is None:
            log.entries.append(dict(zip(active.tolist(), ids.tolist())))
        else:
            pos = np.searchsorted(active, keep)
            log.entries.append(dict(zip(keep.tolist(), ids[pos].tolist())))
        cur = nxt
    if keep_states:
        log.states.append(cur.states)
    return cur, log


def is_fixed_point(config: Configuration, orientation: Orientation, table: RuleTable) -> bool:
    new, _, _ = _raw_step(config, orientation, table, _watch_mask(config.ball, None))
    return new == config
