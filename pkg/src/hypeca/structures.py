"""Circuit structures: layouts, scenarios and the solved-asset file format.

Each structure is described by two kinds of data:

* hard-coded cell lists (paths, colour cells, cells whose state is stated
  outright), kept in :data:`LAYOUTS`;
* everything else (milestone placement, per-cell orientation), read from a
  solved asset produced by :mod:`hypeca.fitkit`.

Asset files are line oriented::

    structure <name>
    colour-cell <label>
    cell <label> <W|B>
    orient <label> <label of the neighbour on side 1>
    path <name> <label> <label> ...
    scenario <name> <steps>
    inject <simple|double|signal> <path>[:<offset>] @<t>
    expect <assertion>
    ambiguous <label> <alternative side-1 labels...>
    unconstrained <label> ...

``inject`` and ``expect`` lines belong to the last ``scenario`` line.  A
path reference ``name:k`` starts the injection at the k-th cell (0-based).
A double locomotive occupies two consecutive path cells, rear first.
Expectations:

* ``loco <path> <none|simple|double> @t`` -- cells of the path that differ
  from the idle configuration at time t form nothing / one cell / two
  consecutive cells;
* ``moving <n> @t`` -- exactly n cells differ from the idle configuration;
* ``cell <label> <W|B> @t``;
* ``quiet <path>`` -- the path never differs from idle during the run;
* ``idle <structure> @t`` -- the configuration equals that structure's idle
  configuration.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .engine import Configuration, Orientation, run
from .errors import HypecaError, PathBlocked, UnresolvedLayout
from .rules import B, W, RuleTable
from .tiling import CellId, TilingBall, build_ball, parse_label

KINDS = ("tracks", "fixed-switch", "fork", "doubler", "selector", "controller", "sensor")
COLOUR_NAMES = {"black": B, "white": W}


@dataclass(frozen=True)
class StructureKind:
    kind: str
    colour: int | None = None
    direction: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown structure kind {self.kind!r}")
        if (self.colour is not None) != (self.kind in ("controller", "sensor")):
            raise ValueError(f"colour is required exactly for controller and sensor, got {self}")
        if (self.direction is not None) != (self.kind == "tracks"):
            raise ValueError(f"direction is required exactly for tracks, got {self}")

    @property
    def name(self) -> str:
        if self.colour is not None:
            return f"{self.kind}-{'black' if self.colour == B else 'white'}"
        if self.direction is not None:
            return f"{self.kind}-{self.direction}"
        return self.kind

    @classmethod
    def parse(cls, name: str) -> "StructureKind":
        for col, val in COLOUR_NAMES.items():
            if name.endswith("-" + col):
                return cls(name[: -len(col) - 1], colour=val)
        if name in ("tracks-cw", "tracks-ccw"):
            return cls("tracks", direction=name.split("-")[1])
        return cls(name)


STRUCTURES = ("tracks-cw", "tracks-ccw", "fixed-switch", "fork", "doubler", "selector",
              "controller-black", "controller-white", "sensor-black", "sensor-white")


@dataclass
class Injection:
    kind: str
    path: str
    offset: int = 0
    t: int = 0

    def __str__(self):
        ref = self.path if not self.offset else f"{self.path}:{self.offset}"
        return f"inject {self.kind} {ref} @{self.t}"


@dataclass
class Scenario:
    name: str
    steps: int
    injections: list[Injection] = field(default_factory=list)
    expects: list[str] = field(default_factory=list)


@dataclass
class Layout:
    """Cell lists known without fitting."""

    paths: dict[str, list[str]]
    scenarios: list[Scenario]
    colour_cell: str | None = None
    known: dict[str, int] = field(default_factory=dict)


def _sc(name, steps, inject, *expects):
    kind, ref = inject.split()
    path, _, off = ref.partition(":")
    return Scenario(name, steps, [Injection(kind, path, int(off or 0), 0)], list(expects))


_TRACK_SCENARIOS = {
    "cw": [
        _sc("simple-right", 9, "simple right", "loco right simple @9", "moving 1 @9"),
        _sc("simple-left", 4, "simple left", "loco left simple @4", "moving 1 @4"),
        _sc("double-right", 8, "double right", "loco right double @8", "moving 2 @8"),
        _sc("double-left", 3, "double left", "loco left double @3", "moving 2 @3"),
    ],
    "ccw": [
        _sc("simple-right", 9, "simple right", "loco right simple @9", "moving 1 @9"),
        _sc("simple-left", 4, "simple left", "loco left simple @4", "moving 1 @4"),
        _sc("double-right", 8, "double right", "loco right double @8", "moving 2 @8"),
        _sc("double-left", 3, "double left", "loco left double @3", "moving 2 @3"),
    ],
}

_TRACK_PATHS = {
    "cw": {
        "right": "4(8) 3(8) 2(8) 1(7) 1(6) 1(5) 1(4) 2(4) 5(3) 4(3)",
        "left": "9(3) 2(3) 1(2) 1(1) 2(1) 6(1)",
    },
    "ccw": {
        "right": "4(3) 5(3) 2(4) 1(4) 1(5) 1(6) 1(7) 2(8) 3(8) 4(8)",
        "left": "6(1) 2(1) 1(1) 1(2) 2(3) 9(3)",
    },
}

_CONTROL_TRACK = "20(6) 6(7) 2(7) 1(6) 0(0) 1(4) 2(5) 3(5) 10(5)"


def _split(paths):
    return {k: v.split() for k, v in paths.items()}


LAYOUTS: dict[str, Layout] = {
    "tracks-cw": Layout(_split(_TRACK_PATHS["cw"]), _TRACK_SCENARIOS["cw"], known={"0(0)": B}),
    "tracks-ccw": Layout(_split(_TRACK_PATHS["ccw"]), _TRACK_SCENARIOS["ccw"], known={"0(0)": B}),
    "fixed-switch": Layout(
        _split({
            "left": "13(8) 4(8) 5(8) 2(1) 1(1) 0(0) 1(4) 2(4) 5(3) 4(3)",
            "right": "16(6) 4(6) 5(6) 2(7) 1(7) 0(0) 1(4) 2(4) 5(3) 4(3)",
            "exit": "1(4) 2(4) 5(3) 4(3)",
        }),
        [
            _sc("simple-left", 7, "simple left:1", "loco exit simple @7", "moving 1 @7"),
            _sc("simple-right", 7, "simple right:1", "loco exit simple @7", "moving 1 @7"),
            _sc("double-left", 6, "double left:1", "loco exit double @6", "moving 2 @6"),
            _sc("double-right", 6, "double right:1", "loco exit double @6", "moving 2 @6"),
        ],
        known={"0(0)": W, "1(1)": W, "1(4)": W, "1(7)": W,
               "1(2)": B, "1(3)": B, "1(5)": B, "1(6)": B, "1(8)": B},
    ),
    "fork": Layout(
        _split({
            "entry": "6(2) 5(1) 1(1)",
            "upper": "1(2) 1(3) 3(3) 9(3)",
            "lower": "1(8) 1(7) 5(7) 6(8)",
        }),
        [_sc("simple", 5, "simple entry", "loco upper simple @5", "loco lower simple @5", "moving 2 @5")],
        known={"0(0)": B},
    ),
    "doubler": Layout(
        _split({
            "entry": "6(2) 5(1) 1(1)",
            "upper": "1(2) 2(3) 3(3) 4(3) 5(3) 2(4) 3(4)",
            "lower": "1(8) 1(7) 1(6) 1(5) 2(5) 5(4)",
            "exit": "4(4) 15(4)",
        }),
        [_sc("simple", 11, "simple entry", "loco exit double @10", "moving 2 @10")],
    ),
    "selector": Layout(
        _split({
            "entry": "6(7) 5(6) 1(6) 0(0)",
            "pink": "1(8) 2(8) 9(8)",
            "green": "1(4) 2(5) 6(5)",
        }),
        [
            _sc("simple", 6, "simple entry", "loco pink simple @6", "loco green none @6", "moving 1 @6"),
            _sc("double", 5, "double entry", "loco green simple @5", "loco pink none @5", "moving 1 @5"),
        ],
    ),
}

for _col, _val in COLOUR_NAMES.items():
    _other = "white" if _col == "black" else "black"
    _ctrl_loco = (_sc("simple", 6, "simple track:1", "loco track simple @6", "moving 1 @6", "cell 1(3) B @6")
                  if _val == B else
                  _sc("simple", 3, "simple track:1", "idle controller-white @3"))
    _ctrl_sig = _sc("signal-b2w" if _val == B else "signal-w2b", 2, "signal signal:1",
                    f"cell 1(3) {'W' if _val == B else 'B'} @2", f"idle controller-{_other} @3")
    LAYOUTS[f"controller-{_col}"] = Layout(
        _split({"track": _CONTROL_TRACK, "signal": "24(4) 6(4) 2(4)"}),
        [_ctrl_loco, _ctrl_sig], colour_cell="1(3)", known={"1(3)": _val})
    if _val == W:
        _sens = [_sc("simple", 5, "simple track:1", "loco track simple @5", "cell 1(1) B @5")]
    else:
        _sens = [_sc("simple", 3, "simple track:1", "idle sensor-black @3"),
                 _sc("signal-b2w", 2, "signal signal:1", "cell 1(1) W @2", "idle sensor-white @3")]
    LAYOUTS[f"sensor-{_col}"] = Layout(
        _split({"track": _CONTROL_TRACK, "signal": "24(2) 6(2) 2(2)"}),
        _sens, colour_cell="1(1)", known={"1(1)": _val})


# -- solved assets -----------------------------------------------------------

@dataclass
class Asset:
    """Parsed structure asset; labels are kept as text."""

    name: str
    cells: dict[str, int] = field(default_factory=dict)
    orient: dict[str, str] = field(default_factory=dict)
    paths: dict[str, list[str]] = field(default_factory=dict)
    scenarios: list[Scenario] = field(default_factory=list)
    colour_cell: str | None = None
    ambiguous: dict[str, list[str]] = field(default_factory=dict)
    unconstrained: list[str] = field(default_factory=list)

    def scenario(self, name: str) -> Scenario:
        for s in self.scenarios:
            if s.name == name:
                return s
        raise KeyError(f"{self.name} has no scenario {name!r}")


class AssetFormatError(HypecaError, ValueError):
    pass


def parse_asset(text: str) -> Asset:
    asset = Asset(name="")
    current: Scenario | None = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "structure":
                (asset.name,) = rest
            elif head == "colour-cell":
                (asset.colour_cell,) = rest
            elif head == "cell":
                label, st = rest
                parse_label(label)
                asset.cells[label] = {"W": W, "B": B}[st]
            elif head == "orient":
                label, side1 = rest
                parse_label(label), parse_label(side1)
                asset.orient[label] = side1
            elif head == "path":
                name, *cells = rest
                for c in cells:
                    parse_label(c)
                asset.paths[name] = cells
            elif head == "scenario":
                name, steps = rest
                current = Scenario(name, int(steps))
                asset.scenarios.append(current)
            elif head == "inject":
                kind, ref, at = rest
                if kind not in ("simple", "double", "signal") or not at.startswith("@"):
                    raise ValueError
                path, _, off = ref.partition(":")
                current.injections.append(Injection(kind, path, int(off or 0), int(at[1:])))
            elif head == "expect":
                current.expects.append(" ".join(rest))
            elif head == "ambiguous":
                label, *alts = rest
                asset.ambiguous[label] = alts
            elif head == "unconstrained":
                asset.unconstrained.extend(rest)
            else:
                raise ValueError
        except (ValueError, KeyError, AttributeError, HypecaError):
            raise AssetFormatError(f"line {n}: cannot read {raw!r}") from None
    if not asset.name:
        raise AssetFormatError("asset has no 'structure' line")
    return asset


def format_asset(asset: Asset) -> str:
    out = [f"structure {asset.name}"]
    if asset.colour_cell:
        out.append(f"colour-cell {asset.colour_cell}")
    order = lambda lab: parse_label(lab)  # noqa: E731
    for lab in sorted(asset.cells, key=order):
        out.append(f"cell {lab} {'WB'[asset.cells[lab]]}")
    for lab in sorted(asset.orient, key=order):
        out.append(f"orient {lab} {asset.orient[lab]}")
    for lab in sorted(asset.ambiguous, key=order):
        out.append(f"ambiguous {lab} " + " ".join(asset.ambiguous[lab]))
    if asset.unconstrained:
        out.append("unconstrained " + " ".join(sorted(asset.unconstrained, key=order)))
    for name, cells in asset.paths.items():
        out.append(f"path {name} " + " ".join(cells))
    for sc in asset.scenarios:
        out.append(f"scenario {sc.name} {sc.steps}")
        out.extend(str(i) for i in sc.injections)
        out.extend(f"expect {e}" for e in sc.expects)
    return "\n".join(out) + "\n"


def assets_dir() -> Path:
    env = os.environ.get("HYPECA_ASSETS")
    if env:
        return Path(env)
    return Path(str(resources.files("hypeca") / "data" / "assets"))


def load_asset(name: str, directory: str | Path | None = None) -> Asset:
    d = Path(directory) if directory else assets_dir()
    p = d / f"{name}.txt"
    if not p.exists():
        raise UnresolvedLayout(f"no solved asset for {name} in {d}")
    return parse_asset(p.read_text(encoding="utf-8"))


# -- instances ---------------------------------------------------------------

@dataclass
class StructureInstance:
    kind: StructureKind
    config: Configuration
    orientation: Orientation
    named: dict[str, CellId]
    paths: dict[str, list[CellId]]
    asset: Asset

    @property
    def ball(self) -> TilingBall:
        return self.config.ball

    def scenario(self, name: str) -> Scenario:
        return self.asset.scenario(name)


def build_structure(kind: StructureKind | str, ball: TilingBall | None = None,
                    asset_dir: str | Path | None = None) -> StructureInstance:
    if isinstance(kind, str):
        kind = StructureKind.parse(kind)
    ball = ball or build_ball(5)
    if ball.levels < 5:
        raise ValueError("structures need a ball of at least 5 levels")
    name = kind.name
    layout = LAYOUTS[name]
    asset = load_asset(name, asset_dir)
    if asset.name != name:
        raise UnresolvedLayout(f"asset for {name} declares structure {asset.name}")

    cells = dict(asset.cells)
    for lab, st in layout.known.items():
        if cells.get(lab, W) != st:
            raise UnresolvedLayout(f"asset for {name} contradicts the layout at {lab}")
    for pname, plist in layout.paths.items():
        if asset.paths.get(pname) != plist:
            raise UnresolvedLayout(f"asset for {name} lacks path {pname}")
    config = Configuration.from_support(ball, [lab for lab, st in cells.items() if st == B])

    orientation = Orientation(ball)
    for lab, side1 in asset.orient.items():
        orientation[lab] = ball.side_of(lab, side1) - 1

    named = {}
    if layout.colour_cell:
        named["colour-cell"] = parse_label(layout.colour_cell)
    if kind.kind == "selector":
        named["sensor-left"] = parse_label("1(5)")
        named["sensor-right"] = parse_label("1(7)")
    paths = {k: [parse_label(c) for c in v] for k, v in asset.paths.items()}
    return StructureInstance(kind, config, orientation, named, paths, asset)


def inject(instance: StructureInstance, scenario: Scenario | str) -> Configuration:
    if isinstance(scenario, str):
        scenario = instance.scenario(scenario)
    cfg = instance.config.copy()
    for inj in scenario.injections:
        path = instance.paths[inj.path]
        width = 2 if inj.kind == "double" else 1
        cells = path[inj.offset: inj.offset + width]
        if len(cells) != width:
            raise PathBlocked(f"path {inj.path} is too short for a {inj.kind} locomotive")
        for c in cells:
            if instance.config[c] == B:
                raise PathBlocked(f"{c} is black in the idle configuration")
            cfg.states[instance.ball.index(c)] = B
    return cfg


@dataclass
class ExpectationResult:
    text: str
    ok: bool
    detail: str = ""


def simulate(instance: StructureInstance, scenario: Scenario | str, table: RuleTable, watch=None):
    """Run a scenario; the log covers configurations 0..steps."""
    if isinstance(scenario, str):
        scenario = instance.scenario(scenario)
    start = inject(instance, scenario)
    return run(start, instance.orientation, table, scenario.steps + 1, watch=watch, keep_states=True)


def _differing(instance, states: np.ndarray) -> set[int]:
    return set(np.flatnonzero(states != instance.config.states).tolist())


def check_expectations(instance: StructureInstance, scenario: Scenario | str, final, log,
                       asset_dir=None) -> list[ExpectationResult]:
    if isinstance(scenario, str):
        scenario = instance.scenario(scenario)
    ball = instance.ball
    out = []
    for text in scenario.expects:
        words = text.split()
        at = int(words[-1][1:]) if words[-1].startswith("@") else None
        try:
            if at is not None and at >= len(log.states):
                raise IndexError(f"time {at} is outside the run")
            kind = words[0]
            if kind == "loco":
                path = [ball.index(c) for c in instance.paths[words[1]]]
                diff = _differing(instance, log.states[at])
                on = sorted(path.index(c) for c in diff if c in path)
                want = words[2]
                if want == "none":
                    ok = not on
                elif want == "simple":
                    ok = len(on) == 1
                else:
                    ok = len(on) == 2 and on[1] == on[0] + 1
                out.append(ExpectationResult(text, ok, f"path cells off idle: {[str(instance.paths[words[1]][i]) for i in on]}"))
            elif kind == "moving":
                diff = _differing(instance, log.states[at])
                out.append(ExpectationResult(text, len(diff) == int(words[1]),
                                             f"{len(diff)} cells off idle: {[str(ball.cells[i]) for i in sorted(diff)]}"))
            elif kind == "cell":
                st = int(log.states[at][ball.index(words[1])])
                out.append(ExpectationResult(text, "WB"[st] == words[2], f"state {'WB'[st]}"))
            elif kind == "quiet":
                path = [ball.index(c) for c in instance.paths[words[1]]]
                hits = [t for t, s in enumerate(log.states) if (s[path] != instance.config.states[path]).any()]
                out.append(ExpectationResult(text, not hits, f"disturbed at {hits}"))
            elif kind == "idle":
                other = build_structure(words[1], ball, asset_dir)
                same = bool(np.array_equal(log.states[at], other.config.states))
                out.append(ExpectationResult(text, same, "" if same else "configuration differs"))
            else:
                out.append(ExpectationResult(text, False, "unknown expectation"))
        except (KeyError, IndexError, HypecaError) as exc:
            out.append(ExpectationResult(text, False, str(exc)))
    return out
