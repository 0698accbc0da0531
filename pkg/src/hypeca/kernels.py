"""Hot loops of the engine.

Each kernel has a numba version (compiled from a plain loop) and a
vectorised numpy version with the same signature.  ``active_cells`` and
``evaluate`` are bound to whichever backend ``_accel`` selects.
"""

from __future__ import annotations

import numpy as np

from . import _accel

_WEIGHTS = (1 << np.arange(7, -1, -1)).astype(np.int32)
_RANGE8 = np.arange(8)


def _active_loop(states, nbr, watch):
    n = states.shape[0]
    mark = np.zeros(n, dtype=np.uint8)
    for c in range(n):
        if watch[c]:
            mark[c] = 1
        if states[c]:
            mark[c] = 1
            for k in range(8):
                j = nbr[c, k]
                if j >= 0:
                    mark[j] = 1
    count = 0
    for c in range(n):
        count += mark[c]
    out = np.empty(count, dtype=np.int32)
    m = 0
    for c in range(n):
        if mark[c]:
            out[m] = c
            m += 1
    return out


def _evaluate_loop(states, nbr, orient, active, lut_id, lut_next):
    m = active.shape[0]
    codes = np.empty(m, dtype=np.int32)
    ids = np.empty(m, dtype=np.int32)
    nxt = np.empty(m, dtype=np.uint8)
    for j in range(m):
        c = active[j]
        o = orient[c]
        if o < 0:
            o = 0
        code = np.int32(states[c])
        for k in range(8):
            q = nbr[c, (o + k) % 8]
            s = states[q] if q >= 0 else 0
            code = (code << 1) | s
        codes[j] = code
        ids[j] = lut_id[code]
        nxt[j] = lut_next[code]
    return codes, ids, nxt


def _active_numpy(states, nbr, watch):
    support = np.flatnonzero(states)
    ring = nbr[support].ravel()
    parts = [support, ring[ring >= 0], np.flatnonzero(watch)]
    return np.unique(np.concatenate(parts)).astype(np.int32)


def _evaluate_numpy(states, nbr, orient, active, lut_id, lut_next):
    o = orient[active].astype(np.int64)
    o[o < 0] = 0
    cols = (o[:, None] + _RANGE8) % 8
    nb = nbr[active[:, None], cols]
    ns = np.where(nb >= 0, states[np.maximum(nb, 0)], 0).astype(np.int32)
    codes = (states[active].astype(np.int32) << 8) | (ns @ _WEIGHTS)
    return codes.astype(np.int32), lut_id[codes].astype(np.int32), lut_next[codes]


active_cells_numba = _accel.njit(_active_loop) if _accel.USE_NUMBA else None
evaluate_numba = _accel.njit(_evaluate_loop) if _accel.USE_NUMBA else None

if _accel.USE_NUMBA:
    active_cells = active_cells_numba
    evaluate = evaluate_numba
else:
    active_cells = _active_numpy
    evaluate = _evaluate_numpy

BACKEND = "numba" if _accel.USE_NUMBA else "numpy"
