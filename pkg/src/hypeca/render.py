"""Poincaré-disk layout of a tiling ball and SVG frames of configurations.

The central octagon is centred at the origin with side 1 facing angle 0, so
its vertices sit at +-22.5 degrees plus multiples of 45.  Every other tile is
the mirror image of its parent across their shared edge.  Vertex ``k`` of a
tile (0-based) is the start of canonical side ``k + 1``; sides run
counterclockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import Configuration
from .tiling import TilingBall

TOLERANCE = 1e-9
SIZE = 800
BLACK_FILL = "#1f2f8f"
HIGHLIGHT_FILLS = {"yellow": "#ffe95c", "pink": "#f7a8c8", "green": "#8fd694"}
_STRAIGHT = 1e-12


def central_radius() -> float:
    """Euclidean distance from the origin to a vertex of the central octagon."""
    cosh_r = 1.0 / (math.tan(math.pi / 8) * math.tan(math.pi / 3))
    return math.tanh(math.acosh(cosh_r) / 2)


def reflect(z: np.ndarray | complex, a: complex, b: complex):
    """Hyperbolic reflection of ``z`` across the geodesic through ``a`` and ``b``."""
    ca = a.conjugate()
    bb = (b - a) / (1 - ca * b)
    rot = (bb / abs(bb)) ** 2
    w = (z - a) / (1 - ca * z)
    w = rot * np.conj(w)
    return (w + a) / (1 + ca * w)


@dataclass
class DiskLayout:
    ball: TilingBall
    centers: np.ndarray   # (N,) complex
    vertices: np.ndarray  # (N, 8) complex, vertex k starts side k+1
    tolerance: float = TOLERANCE

    def __len__(self):
        return len(self.centers)

    def edge(self, i: int, side: int) -> tuple[complex, complex]:
        """Endpoints of 0-based canonical side ``side`` of tile ``i``."""
        v = self.vertices[i]
        return v[side], v[(side + 1) % 8]

    def max_edge_gap(self) -> float:
        """Largest endpoint mismatch over all shared edges."""
        nbr = self.ball.nbr
        worst = 0.0
        for i in range(len(self)):
            for k in range(8):
                j = nbr[i, k]
                if j < 0 or j < i:
                    continue
                a, b = self.edge(i, k)
                c, d = self.edge(j, int(np.flatnonzero(nbr[j] == i)[0]))
                worst = max(worst, abs(a - d), abs(b - c))
        return worst

    def dump(self) -> str:
        out = [f"# tolerance {self.tolerance:g}", "# label cx cy v1x v1y ... v8x v8y"]
        for i, cell in enumerate(self.ball.cells):
            nums = [self.centers[i]] + list(self.vertices[i])
            out.append(str(cell) + " " + " ".join(f"{z.real:.12f} {z.imag:.12f}" for z in nums))
        return "\n".join(out) + "\n"


def layout_ball(ball: TilingBall) -> DiskLayout:
    n = ball.size
    centers = np.zeros(n, dtype=complex)
    verts = np.zeros((n, 8), dtype=complex)
    rho = central_radius()
    verts[0] = rho * np.exp(1j * (np.pi / 8) * (2 * np.arange(8) - 1))
    done = np.zeros(n, dtype=bool)
    done[0] = True
    # cells are stored level by level, so a parent always precedes its children
    for j in range(1, n):
        p = int(ball.parent[j])
        k = int(np.flatnonzero(ball.nbr[p] == j)[0])
        a, b = verts[p, k], verts[p, (k + 1) % 8]
        img = reflect(verts[p], a, b)[::-1]  # reflection reverses the winding
        # after reversal the shared edge runs b -> a; put it on the child's side s
        start = int(np.argmin(np.abs(img - b)))
        s = int(np.flatnonzero(ball.nbr[j] == p)[0])
        verts[j] = np.roll(img, s - start)
        centers[j] = reflect(centers[p], a, b)
        done[j] = True
    assert done.all()
    return DiskLayout(ball, centers, verts)


def _pt(z: complex) -> str:
    h = SIZE / 2
    return f"{h * (1 + z.real):.4f},{h * (1 - z.imag):.4f}"


def _arc(a: complex, b: complex) -> str:
    """SVG path segment for the geodesic from ``a`` to ``b``."""
    # circle orthogonal to the unit circle through a and b: |c|^2 = r^2 + 1
    det = 2 * (a.real * b.imag - a.imag * b.real)
    if abs(det) < _STRAIGHT:
        return "L" + _pt(b)
    pa, pb = abs(a) ** 2 + 1, abs(b) ** 2 + 1
    c = complex((pa * b.imag - pb * a.imag) / det, (a.real * pb - b.real * pa) / det)
    r = math.sqrt(max(abs(c) ** 2 - 1, 0.0)) * SIZE / 2
    cross = (a - c).real * (b - c).imag - (a - c).imag * (b - c).real
    sweep = 0 if cross > 0 else 1  # the y axis flips on screen
    return f"A{r:.4f},{r:.4f} 0 0 {sweep} {_pt(b)}"


def tile_path(layout: DiskLayout, i: int) -> str:
    v = layout.vertices[i]
    return "M" + _pt(v[0]) + "".join(_arc(v[k], v[(k + 1) % 8]) for k in range(8)) + "Z"


def render_frame(layout: DiskLayout, config: Configuration | None = None,
                 highlights: dict | None = None, labels: bool = False, title: str | None = None) -> str:
    """SVG text for one configuration; identical inputs give identical bytes.

    ``highlights`` maps cells (or labels) to a role colour name
    (yellow, pink or green) used for white cells.
    """
    ball = layout.ball
    states = config.states if config is not None else np.zeros(ball.size, dtype=np.uint8)
    fill_of = {}
    for cell, role in (highlights or {}).items():
        fill_of[ball.index(cell)] = HIGHLIGHT_FILLS.get(role, role)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    h = SIZE / 2
    out.append(f'<circle cx="{h:.4f}" cy="{h:.4f}" r="{h:.4f}" fill="#ffffff" stroke="#000000" stroke-width="1"/>')
    out.append('<g stroke="#404040" stroke-width="0.6">')
    for i in range(ball.size):
        fill = BLACK_FILL if states[i] else fill_of.get(i, "#ffffff")
        out.append(f'<path id="c{ball.cells[i].sector}_{ball.cells[i].index}" fill="{fill}" d="{tile_path(layout, i)}"/>')
    out.append("</g>")
    if labels:
        out.append('<g font-family="sans-serif" font-size="9" text-anchor="middle">')
        for i in range(ball.size):
            if ball.level[i] > 2:
                continue
            colour = "#ffffff" if states[i] else "#000000"
            x, y = _pt(layout.centers[i]).split(",")
            out.append(f'<text x="{x}" y="{y}" fill="{colour}">{ball.cells[i]}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def structure_highlights(instance) -> dict:
    """Yellow / pink / green role colours for the named paths of a structure."""
    roles = {"pink": ("pink", "left", "upper"), "green": ("green", "right", "lower", "exit")}
    out = {}
    for name, cells in instance.paths.items():
        role = next((r for r, names in roles.items() if name in names), "yellow")
        for c in cells:
            out.setdefault(str(c), role)
    return out


def render_frames(instance, scenario, table, layout: DiskLayout | None = None,
                  labels: bool = False, times=None) -> list[str]:
    """SVG frames of a scenario run, by default one per trace row (t = 1 .. steps)."""
    from .structures import simulate

    layout = layout or layout_ball(instance.ball)
    sc = instance.scenario(scenario) if isinstance(scenario, str) else scenario
    _, log = simulate(instance, sc, table)
    times = range(1, sc.steps + 1) if times is None else times
    hl = structure_highlights(instance)
    return [render_frame(layout, crop(instance.ball, log.states[t], layout.ball), hl, labels, f"t={t}")
            for t in times]


def crop(src: TilingBall, states: np.ndarray, dst: TilingBall) -> Configuration:
    """Restrict a configuration to a (smaller) ball by cell label."""
    if src is dst:
        return Configuration(dst, states)
    return Configuration.from_support(dst, [src.cells[i] for i in np.flatnonzero(states) if src.cells[i] in dst])


def write_svg(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
