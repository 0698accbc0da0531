"""Closed-loop reproduction of the execution tables.

Each golden table is bound to a structure and scenario.  Verification
builds the structure from its solved asset, injects the locomotive, runs
the engine and compares the fired rule ids cell by cell and step by step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import run
from .errors import HypecaError, MissingGolden
from .golden import (GoldenTable, chain_breaks, collapse, load_goldens, load_witnesses,
                     red_mismatches)
from .rules import RuleTable, load_rules, to_text
from .structures import STRUCTURES, build_structure, check_expectations, inject, simulate
from .tiling import build_ball

IDLE_STEPS = 20


@dataclass
class Mismatch:
    cell: str
    t: int
    expected: int
    got: int | None
    context: str = ""

    def __str__(self):
        return f"{self.cell} t={self.t}: expected {self.expected}, got {self.got}" + (
            f" [{self.context}]" if self.context else "")


@dataclass
class CheckResult:
    kind: str
    name: str
    ok: bool
    detail: str = ""
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def first_divergence(self) -> Mismatch | None:
        return self.mismatches[0] if self.mismatches else None

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}\t{self.kind}\t{self.name}{extra}"


@dataclass
class SuiteReport:
    results: list[CheckResult]

    @property
    def ok(self) -> bool:
        return bool(self.results) and all(r.ok for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.ok]

    def text(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"{sum(r.ok for r in self.results)}/{len(self.results)} checks passed")
        return "\n".join(lines) + "\n"


class _Context:
    """Caches structures across checks of one suite run."""

    def __init__(self, table, asset_dir, ball):
        self.table = table or load_rules()
        self.asset_dir = asset_dir
        self.ball = ball or build_ball(5)
        self._inst = {}
        self._runs = {}

    def instance(self, name):
        if name not in self._inst:
            self._inst[name] = build_structure(name, self.ball, self.asset_dir)
        return self._inst[name]

    def run(self, structure, scenario):
        key = (structure, scenario)
        if key not in self._runs:
            inst = self.instance(structure)
            self._runs[key] = simulate(inst, scenario, self.table)
        return self._runs[key]


def _context_text(log, ball, inst, cell, t) -> str:
    states = log.states[t]
    i = ball.index(cell)
    o = inst.orientation.offsets[i]
    if o < 0:
        return "unoriented"
    nb = [ball.nbr[i, (o + k) % 8] for k in range(8)]
    return "WB"[states[i]] + " " + to_text(states[q] if q >= 0 else 0 for q in nb)


def compare_table(golden: GoldenTable, ctx: _Context) -> CheckResult:
    try:
        inst = ctx.instance(golden.structure)
        sc = inst.scenario(golden.scenario)
        if max(golden.times) > sc.steps:
            raise HypecaError(f"table runs to t={max(golden.times)} beyond the scenario's {sc.steps} steps")
        _, log = ctx.run(golden.structure, golden.scenario)
    except HypecaError as exc:
        return CheckResult("table", golden.name, False, f"{type(exc).__name__}: {exc}")
    bad = []
    for i, t in enumerate(golden.times):
        for j, c in enumerate(golden.watch):
            got = log.rule_at(t, c)
            want = golden.rows[i][j]
            if got != want:
                bad.append(Mismatch(str(c), t, want, got, _context_text(log, ctx.ball, inst, c, t)))
    if not golden.times or not golden.watch:
        return CheckResult("table", golden.name, False, "empty table")
    detail = f"first divergence {bad[0]}" if bad else f"{len(golden.times)} steps x {len(golden.watch)} cells"
    return CheckResult("table", golden.name, not bad, detail, bad)


def verify_table(name: str | GoldenTable, table: RuleTable | None = None, asset_dir=None,
                 golden_dir=None, ball=None) -> CheckResult:
    """Pass/fail for one golden table with first-divergence diagnostics."""
    golden = name if isinstance(name, GoldenTable) else load_goldens(golden_dir)[name]
    return compare_table(golden, _Context(table, asset_dir, ball))


def check_witness(w, ctx: _Context) -> CheckResult:
    label = f"{w.tag}:{w.structure}/{w.scenario}/{w.cell}"
    try:
        _, log = ctx.run(w.structure, w.scenario)
    except HypecaError as exc:
        return CheckResult("witness", label, False, f"{type(exc).__name__}: {exc}")
    seq = collapse(log.column(w.cell))
    ok = seq == w.rules
    return CheckResult("witness", label, ok, "" if ok else f"got {seq}")


def check_idle(name: str, ctx: _Context, steps: int = IDLE_STEPS) -> CheckResult:
    try:
        inst = ctx.instance(name)
        final, log = run(inst.config, inst.orientation, ctx.table, steps, keep_states=True)
    except HypecaError as exc:
        return CheckResult("idle", name, False, f"{type(exc).__name__}: {exc}")
    moved = [t for t, s in enumerate(log.states) if not np.array_equal(s, inst.config.states)]
    return CheckResult("idle", name, not moved, f"{steps} steps" if not moved else f"changed at t={moved[0]}")


def check_scenario(structure: str, scenario: str, ctx: _Context) -> CheckResult:
    label = f"{structure}/{scenario}"
    try:
        inst = ctx.instance(structure)
        final, log = ctx.run(structure, scenario)
        results = check_expectations(inst, scenario, final, log, ctx.asset_dir)
    except HypecaError as exc:
        return CheckResult("behaviour", label, False, f"{type(exc).__name__}: {exc}")
    bad = [r for r in results if not r.ok]
    detail = "; ".join(f"{r.text}: {r.detail}" for r in bad) if bad else f"{len(results)} expectations"
    return CheckResult("behaviour", label, bool(results) and not bad, detail)


def check_transcription(golden: GoldenTable, table: RuleTable) -> CheckResult:
    missing = sorted({r for row in golden.rows for r in row if r not in table})
    if missing:
        return CheckResult("chain", golden.name, False, f"unknown rules {missing}")
    breaks = chain_breaks(golden, table)
    reds = red_mismatches(golden, table)
    detail = []
    if breaks:
        detail.append("chain breaks at " + ", ".join(f"{c} t={t}" for c, t in breaks))
    if reds:
        detail.append("state-change markers disagree at " + ", ".join(f"{c} t={t}" for c, t in reds))
    return CheckResult("chain", golden.name, not detail, "; ".join(detail))


def verify_all(table: RuleTable | None = None, asset_dir=None, golden_dir=None, ball=None,
               goldens=None) -> SuiteReport:
    ctx = _Context(table, asset_dir, ball)
    try:
        goldens = goldens if goldens is not None else load_goldens(golden_dir)
    except MissingGolden as exc:
        return SuiteReport([CheckResult("golden", "load", False, f"MissingGolden: {exc}")])
    if not goldens:
        return SuiteReport([CheckResult("golden", "load", False, "MissingGolden: no tables")])
    results = [check_transcription(g, ctx.table) for g in goldens.values()]
    results += [compare_table(g, ctx) for g in goldens.values()]
    results += [check_witness(w, ctx) for w in load_witnesses()]
    for name in STRUCTURES:
        results.append(check_idle(name, ctx))
    for name in STRUCTURES:
        try:
            scen = ctx.instance(name).asset.scenarios
        except HypecaError as exc:
            results.append(CheckResult("behaviour", name, False, str(exc)))
            continue
        results += [check_scenario(name, sc.name, ctx) for sc in scen]
    return SuiteReport(results)


def fired_rules(table: RuleTable | None = None, asset_dir=None, ball=None) -> set[int]:
    """Rule ids fired anywhere in the acceptance scenarios and idle runs."""
    ctx = _Context(table, asset_dir, ball)
    seen: set[int] = set()
    for name in STRUCTURES:
        inst = ctx.instance(name)
        interior = [c for i, c in enumerate(inst.ball.cells) if not inst.ball.outer[i]]
        _, log = run(inst.config, inst.orientation, ctx.table, 1, watch=interior)
        for e in log.entries:
            seen.update(e.values())
        for sc in inst.asset.scenarios:
            _, log = ctx.run(name, sc.name)
            for e in log.entries:
                seen.update(e.values())
    return seen


def load_waivers(path: str | Path | None = None) -> dict[int, str]:
    from importlib import resources
    p = Path(path) if path else Path(str(resources.files("hypeca") / "data" / "coverage_waivers.txt"))
    out = {}
    if p.exists():
        for ln in p.read_text(encoding="utf-8").splitlines():
            ln = ln.strip()
            if ln and not ln.startswith("#"):
                rid, _, why = ln.partition(" ")
                out[int(rid)] = why.strip()
    return out
