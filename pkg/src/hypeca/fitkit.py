"""Recover milestones and orientations from rule-id execution traces.

The traces name the rule fired at a few cells per step.  Each rule pins the
current and next state of its cell and, once the cell's orientation is
known, the states of its eight neighbours.  Milestones and orientations are
recovered jointly for every family of structures sharing an idle
configuration:

* unknowns are the idle state of every cell near the tracked region, the
  state of every dynamic cell (paths, tracked and witness cells) at every
  step, and a one-hot orientation per cell;
* every evaluated cell at every step must match a rule whose next state is
  the state it has one step later; tracked cells must match exactly the
  rule of the table; witness cells must walk through their rule sequence;
* the idle configurations must be fixed points.

The constraints go to a MaxSAT solver that minimises the number of
milestones.  Orientations are then refitted cell by cell against the solved
space-time field, which is exact since the field fixes every neighbour.
Among feasible offsets a path cell takes the one facing the next path cell;
other ties go to the offset that lets an otherwise unused rule fire, then
to the smallest.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InconsistentTrace, InfeasibleOrientation, StaticConflict
from .golden import GoldenTable, Witness, collapse, load_goldens, load_witnesses
from .rules import B, W, RuleTable, encode
from .structures import LAYOUTS, Asset, Scenario, format_asset
from .tiling import CellId, TilingBall, build_ball, parse_label

log = logging.getLogger(__name__)

FAMILIES = {
    "tracks": ("tracks-cw", "tracks-ccw"),
    "fixed-switch": ("fixed-switch",),
    "fork": ("fork",),
    "doubler": ("doubler",),
    "selector": ("selector",),
    "controller": ("controller-black", "controller-white"),
    "sensor": ("sensor-black", "sensor-white"),
}


def family_of(structure: str) -> str:
    for fam, members in FAMILIES.items():
        if structure in members:
            return fam
    raise KeyError(structure)


def orientation_group(structure: str) -> str:
    """Structures of a family share orientations, except the two track directions."""
    return structure if structure.startswith("tracks") else family_of(structure)


# -- timelines ---------------------------------------------------------------

@dataclass
class Timeline:
    structure: str
    scenario: str
    states: dict[CellId, dict[int, int]] = field(default_factory=dict)
    fired: dict[CellId, dict[int, int]] = field(default_factory=dict)

    def state_sequence(self, cell) -> list[int]:
        cell = parse_label(str(cell))
        seq = self.states[cell]
        return [seq[t] for t in sorted(seq)]


def reconstruct_timeline(golden: GoldenTable, table: RuleTable, into: Timeline | None = None) -> Timeline:
    tl = into or Timeline(golden.structure, golden.scenario)
    for c, t, rid, _ in golden.entries():
        if rid not in table:
            raise InconsistentTrace(c, t, f"rule {rid} is not in the table")
        r = table[rid]
        st = tl.states.setdefault(c, {})
        for when, val in ((t, r.current), (t + 1, r.next)):
            if st.get(when, val) != val:
                raise InconsistentTrace(c, when, f"rule {rid} disagrees with the neighbouring rows")
            st[when] = val
        prev = tl.fired.setdefault(c, {}).get(t)
        if prev is not None and prev != rid:
            raise InconsistentTrace(c, t, f"two tables give rules {prev} and {rid}")
        tl.fired[c][t] = rid
    return tl


def timelines_for(goldens: dict[str, GoldenTable], table: RuleTable) -> dict[tuple[str, str], Timeline]:
    out: dict[tuple[str, str], Timeline] = {}
    for g in goldens.values():
        key = (g.structure, g.scenario)
        out[key] = reconstruct_timeline(g, table, out.get(key))
    return out


# -- field samples and per-cell orientation fitting --------------------------

@dataclass
class Sample:
    """A solved space-time field: ``states[t]`` is the configuration at t."""

    label: str
    states: np.ndarray
    tracked: dict[tuple[int, int], int] = field(default_factory=dict)
    witness: dict[int, list[int]] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 2


@dataclass
class OrientationSolution:
    feasible: dict[CellId, list[int]]
    chosen: dict[CellId, int]
    ambiguous: dict[CellId, list[int]]
    static: dict[CellId, int] = field(default_factory=dict)
    unconstrained: set[CellId] = field(default_factory=set)
    locked: set[CellId] = field(default_factory=set)


def _codes(ball: TilingBall, states: np.ndarray, c: int, o: int, times) -> np.ndarray:
    nb = [ball.nbr[c, (o + k) % 8] for k in range(8)]
    code = states[times, c].astype(np.int32)
    for q in nb:
        code = (code << 1) | (states[times, q] if q >= 0 else 0)
    return code


def _uniform(ball, states, c, times) -> bool:
    nb = [q for q in ball.nbr[c] if q >= 0]
    block = states[np.ix_(times, nb)]
    full = len(nb) == 8
    return bool(((block == 0).all(axis=1) | ((block == 1).all(axis=1) & full)).all())


def feasible_offsets(ball: TilingBall, table: RuleTable, samples: list[Sample], c: int) -> list[int]:
    ok = []
    for o in range(8):
        good = True
        for s in samples:
            times = np.arange(s.horizon + 1)
            codes = _codes(ball, s.states, c, o, times)
            ids = table.lut_id[codes]
            nxt = table.lut_next[codes]
            if (ids == 0).any() or (nxt != s.states[times + 1, c]).any():
                good = False
                break
            for t in times:
                want = s.tracked.get((c, int(t)))
                if want is not None and ids[t] != want:
                    good = False
                    break
            if not good:
                break
            seq = s.witness.get(c)
            if seq is not None and collapse(ids.tolist()) != seq:
                good = False
                break
        if good:
            ok.append(o)
    return ok


def fit_orientations(samples: list[Sample], ball: TilingBall, table: RuleTable,
                     cells=None, prefer=None) -> OrientationSolution:
    """Per-cell feasible offsets given full space-time fields.

    Only cells that ever see a non-uniform neighbourhood need an offset; the
    others are skipped.  The chosen offset is the first feasible entry of
    ``prefer[c]`` (side 1 toward the next path cell), else the smallest.
    Raises InfeasibleOrientation when a cell has none.
    """
    prefer = prefer or {}
    if cells is None:
        active = np.zeros(ball.size, dtype=bool)
        for s in samples:
            sup = np.flatnonzero(s.states.any(axis=0))
            active[sup] = True
            ring = ball.nbr[sup].ravel()
            active[ring[ring >= 0]] = True
        cells = np.flatnonzero(active).tolist()
    sol = OrientationSolution({}, {}, {})
    for c in cells:
        observed = any((c, t) in s.tracked for s in samples for t in range(s.horizon + 1))
        observed = observed or any(c in s.witness for s in samples)
        if not observed and all(_uniform(ball, s.states, c, np.arange(s.horizon + 1)) for s in samples):
            continue
        feas = feasible_offsets(ball, table, samples, c)
        cell = ball.cells[c]
        if not feas:
            raise InfeasibleOrientation(cell)
        sol.feasible[cell] = feas
        chosen = next((o for o in prefer.get(c, ()) if o in feas), None)
        if chosen is not None:
            sol.locked.add(cell)
        else:
            chosen = feas[0]
        sol.chosen[cell] = chosen
        if len(feas) > 1:
            sol.ambiguous[cell] = [o for o in feas if o != chosen]
    return sol


def infer_static_neighborhood(timelines: list[Timeline], ball: TilingBall, table: RuleTable,
                              orientation, dynamic=()) -> dict[CellId, int]:
    """States forced on non-dynamic cells by the fired rules of tracked cells.

    ``orientation`` maps a cell to its offset.  Cells listed in ``dynamic``
    (or tracked in any timeline) are skipped since their state may vary.
    """
    skip = {parse_label(str(c)) for c in dynamic}
    for tl in timelines:
        skip.update(tl.fired)
    out: dict[CellId, int] = {}
    for tl in timelines:
        for c, fires in tl.fired.items():
            o = orientation[c]
            if o is None:
                continue
            i = ball.index(c)
            for t, rid in fires.items():
                rule = table[rid]
                for k in range(8):
                    q = ball.nbr[i, (o + k) % 8]
                    if q < 0:
                        continue
                    nb = ball.cells[q]
                    if nb in skip:
                        continue
                    if out.get(nb, rule.context[k]) != rule.context[k]:
                        raise StaticConflict(nb, f"rule {rid} at {c}, t={t}")
                    out[nb] = rule.context[k]
    return out


# -- CNF encoding ------------------------------------------------------------

def _neg(lit):
    return (not lit) if isinstance(lit, bool) else -lit


class _Encoder:
    def __init__(self, table: RuleTable):
        self.nv = 0
        self.clauses: list[list[int]] = []
        self.table = table
        self.patterns = [(r.current, *r.context, r.next) for r in table]
        self._templates: dict[tuple, list] = {}
        self._seen: set = set()

    def new(self) -> int:
        self.nv += 1
        return self.nv

    def add(self, clause):
        self.clauses.append(clause)

    def exactly_one(self, lits):
        self.add(list(lits))
        for a, b in itertools.combinations(lits, 2):
            self.add([-a, -b])

    def _template(self, key):
        tpl = self._templates.get(key)
        if tpl is not None:
            return tpl
        k = max((s for s in key if s >= 0), default=-1) + 1
        allowed = set()
        for p in self.patterns:
            a = [-1] * k
            good = True
            for pos, s in enumerate(key):
                if s < 0:
                    if p[pos] != s + 2:  # -2 -> W, -1 -> B
                        good = False
                        break
                elif a[s] < 0:
                    a[s] = p[pos]
                elif a[s] != p[pos]:
                    good = False
                    break
            if good:
                allowed.add(tuple(a))
        clauses = []

        def rec(prefix, cand, depth):
            if not cand:
                clauses.append([(i, v) for i, v in enumerate(prefix)])
                return
            if len(cand) == 1 << (k - depth):
                return
            for v in (0, 1):
                rec(prefix + [v], [c for c in cand if c[depth] == v], depth + 1)

        rec([], sorted(allowed), 0)
        self._templates[key] = clauses
        return clauses

    def allowed(self, guard: int, lits):
        """Clauses forcing ``lits`` (cur, ctx1..8, next) onto some rule when ``guard`` holds."""
        sig = (guard, tuple(lits))
        if sig in self._seen:
            return
        self._seen.add(sig)
        slots: dict[int, int] = {}
        key = []
        for lit in lits:
            if isinstance(lit, bool):
                key.append(-1 if lit else -2)
            else:
                key.append(slots.setdefault(lit, len(slots)))
        vars_ = list(slots)
        for cl in self._template(tuple(key)):
            # a forbidden cube: at least one slot must differ from it
            self.add([-guard] + [(-vars_[i] if v else vars_[i]) for i, v in cl])

    def exact(self, guards, lits, rule_bits):
        """Clauses forcing ``lits`` to equal ``rule_bits`` when all guards hold."""
        base = [-g for g in guards]
        for lit, bit in zip(lits, rule_bits):
            if isinstance(lit, bool):
                if lit != bool(bit):
                    self.add(list(base))
                    return
            else:
                self.add(base + [lit if bit else -lit])


# -- family fit ---------------------------------------------------------------

@dataclass
class FamilyProblem:
    family: str
    structures: tuple[str, ...]
    scenarios: dict[str, list[Scenario]]
    timelines: dict[tuple[str, str], Timeline]
    witnesses: dict[tuple[str, str], list[Witness]]


@dataclass
class FamilySolution:
    family: str
    ball: TilingBall
    idle: dict[str, np.ndarray]
    samples: dict[str, list[Sample]]
    orientation: dict[str, OrientationSolution]
    unconstrained: dict[str, set[CellId]]
    stats: dict[str, int]


def _problem(family, table, goldens, witnesses) -> FamilyProblem:
    structures = FAMILIES[family]
    tls = timelines_for({k: g for k, g in goldens.items() if g.structure in structures}, table)
    wits: dict[tuple[str, str], list[Witness]] = {}
    for w in witnesses:
        if w.structure in structures:
            wits.setdefault((w.structure, w.scenario), []).append(w)
    scen = {s: LAYOUTS[s].scenarios for s in structures}
    return FamilyProblem(family, structures, scen, tls, wits)


def solve_family(family: str, table: RuleTable, goldens=None, witnesses=None, ball=None,
                 check_unconstrained: bool = True) -> FamilySolution:
    from pysat.examples.rc2 import RC2
    from pysat.formula import WCNF
    from pysat.solvers import Solver

    goldens = goldens if goldens is not None else load_goldens()
    witnesses = witnesses if witnesses is not None else load_witnesses()
    ball = ball or build_ball(6)
    prob = _problem(family, table, goldens, witnesses)
    nbr = ball.nbr
    idx = ball.index

    # regions
    core: set[int] = set()
    for s in prob.structures:
        lay = LAYOUTS[s]
        for plist in lay.paths.values():
            core.update(idx(c) for c in plist)
            core.update(int(q) for q in nbr[idx(plist[-1])] if q >= 0)
        if lay.colour_cell:
            core.add(idx(lay.colour_cell))
    for tl in prob.timelines.values():
        core.update(idx(c) for c in tl.fired)
    for ws in prob.witnesses.values():
        core.update(idx(w.cell) for w in ws)

    def ring(cells):
        out = set(cells)
        for c in cells:
            out.update(int(q) for q in nbr[c] if q >= 0)
        return out

    bable = ring(core)
    check = sorted(ring(bable))
    if ball.outer[list(bable)].any():
        raise ValueError("ball too small for this family")

    enc = _Encoder(table)
    path_cells = {idx(c) for s in prob.structures for p in LAYOUTS[s].paths.values() for c in p}

    # idle variables (shared across the family)
    xvar: dict[int, int] = {}
    for c in sorted(bable):
        fixed = [LAYOUTS[s].known.get(str(ball.cells[c])) for s in prob.structures]
        colour = any(LAYOUTS[s].colour_cell == str(ball.cells[c]) for s in prob.structures)
        if c in path_cells or colour or any(f is not None for f in fixed):
            continue
        xvar[c] = enc.new()

    def idle_lit(s, c):
        lay = LAYOUTS[s]
        lab = str(ball.cells[c])
        if lab in lay.known:
            return bool(lay.known[lab])
        if c in xvar:
            return xvar[c]
        return False

    # orientations
    groups = sorted({orientation_group(s) for s in prob.structures})
    yvar = {g: {} for g in groups}
    for g in groups:
        for c in check:
            lits = [enc.new() for _ in range(8)]
            yvar[g][c] = lits
            enc.exactly_one(lits)

    def ctx(c, val):
        return [val(int(q)) if q >= 0 else False for q in nbr[c]]

    def oriented(row, o):
        return [row[(o + k) % 8] for k in range(8)]

    # idle fixed points
    for s in prob.structures:
        ys = yvar[orientation_group(s)]
        val = lambda q, s=s: idle_lit(s, q) if q in bable else False  # noqa: E731
        for c in check:
            cur = val(c)
            row = ctx(c, val)
            for o in range(8):
                enc.allowed(ys[c][o], [cur, *oriented(row, o), cur])

    # scenarios
    state_lits: dict[tuple[str, str], dict[tuple[int, int], object]] = {}
    zvars = []
    for s in prob.structures:
        ys = yvar[orientation_group(s)]
        lay = LAYOUTS[s]
        for sc in prob.scenarios[s]:
            H = sc.steps
            tl = prob.timelines.get((s, sc.name), Timeline(s, sc.name))
            known = {(idx(c), t): v for c, seq in tl.states.items() for t, v in seq.items()}
            fired = {(idx(c), t): r for c, seq in tl.fired.items() for t, r in seq.items()}
            if any(t > H for (_, t) in fired):
                raise ValueError(f"{s}/{sc.name}: table rows exceed the scenario horizon")
            inj = set()
            for i in sc.injections:
                width = 2 if i.kind == "double" else 1
                inj.update(idx(c) for c in lay.paths[i.path][i.offset:i.offset + width])
            S: dict[tuple[int, int], object] = {}
            for c in bable:
                for t in range(H + 2):
                    if c not in core:
                        S[c, t] = idle_lit(s, c)
                    elif t == 0:
                        S[c, t] = True if c in inj else idle_lit(s, c)
                    elif (c, t) in known:
                        S[c, t] = bool(known[c, t])
                    else:
                        S[c, t] = enc.new()
            state_lits[s, sc.name] = S
            val = lambda q, t: S.get((q, t), False)  # noqa: E731
            for t in range(H + 1):
                for c in check:
                    cur, nxt = val(c, t), val(c, t + 1)
                    row = ctx(c, lambda q: val(q, t))
                    rid = fired.get((c, t))
                    for o in range(8):
                        lits = [cur, *oriented(row, o), nxt]
                        if rid is not None:
                            r = table[rid]
                            enc.exact([ys[c][o]], lits, (r.current, *r.context, r.next))
                        else:
                            enc.allowed(ys[c][o], lits)
            for w in prob.witnesses.get((s, sc.name), []):
                c = idx(w.cell)
                m = len(w.rules)
                z = [[enc.new() for _ in range(m)] for _ in range(H + 1)]
                zvars.append(z)
                for t in range(H + 1):
                    enc.exactly_one(z[t])
                enc.add([z[0][0]])
                enc.add([z[H][m - 1]])
                for t in range(H):
                    for p in range(m):
                        nxt_ok = [z[t + 1][p]] + ([z[t + 1][p + 1]] if p + 1 < m else [])
                        enc.add([-z[t][p]] + nxt_ok)
                for t in range(H + 1):
                    row = ctx(c, lambda q: val(q, t))
                    for p, rid in enumerate(w.rules):
                        r = table[rid]
                        for o in range(8):
                            enc.exact([z[t][p], ys[c][o]], [val(c, t), *oriented(row, o), val(c, t + 1)],
                                      (r.current, *r.context, r.next))

    stats = {"vars": enc.nv, "clauses": len(enc.clauses), "core": len(core),
             "bable": len(bable), "check": len(check)}
    log.info("%s: %s", family, stats)

    wcnf = WCNF()
    wcnf.extend(enc.clauses)
    for c, v in sorted(xvar.items()):
        wcnf.append([-v], weight=1)
    with RC2(wcnf, solver="cd15") as rc2:
        model = rc2.compute()
    if model is None:
        raise InfeasibleOrientation(family, "no layout reproduces the traces")
    truth = np.zeros(enc.nv + 1, dtype=bool)
    for lit in model:
        if abs(lit) <= enc.nv:
            truth[abs(lit)] = lit > 0

    def value(lit):
        return lit if isinstance(lit, bool) else bool(truth[lit])

    idle = {}
    for s in prob.structures:
        st = np.zeros(ball.size, dtype=np.uint8)
        for c in bable:
            st[c] = value(idle_lit(s, c))
        idle[s] = st

    samples: dict[str, list[Sample]] = {}
    for s in prob.structures:
        out = [Sample(f"{s} idle", np.stack([idle[s], idle[s]]))]
        for sc in prob.scenarios[s]:
            S = state_lits[s, sc.name]
            arr = np.zeros((sc.steps + 2, ball.size), dtype=np.uint8)
            for (c, t), lit in S.items():
                arr[t, c] = value(lit)
            tl = prob.timelines.get((s, sc.name), Timeline(s, sc.name))
            tracked = {(idx(c), t): r for c, seq in tl.fired.items() for t, r in seq.items()}
            wit = {idx(w.cell): w.rules for w in prob.witnesses.get((s, sc.name), [])}
            out.append(Sample(f"{s} {sc.name}", arr, tracked, wit))
        samples[s] = out

    orientation = {}
    for g in groups:
        members = [s for s in prob.structures if orientation_group(s) == g]
        pool = [smp for s in members for smp in samples[s]]
        prefer: dict[int, list[int]] = {}
        for s in members:
            for plist in LAYOUTS[s].paths.values():
                for a, b in zip(plist, plist[1:]):
                    i = idx(a)
                    o = int(np.flatnonzero(nbr[i] == idx(b))[0])
                    if o not in prefer.setdefault(i, []):
                        prefer[i].append(o)
        orientation[g] = fit_orientations(pool, ball, table, cells=check, prefer=prefer)

    unconstrained: dict[str, set[CellId]] = {s: set() for s in prob.structures}
    if check_unconstrained:
        with Solver(name="cd15", bootstrap_with=enc.clauses) as solver:
            for c, v in sorted(xvar.items()):
                lit = v if not truth[v] else -v
                if solver.solve(assumptions=[lit]):
                    for s in prob.structures:
                        unconstrained[s].add(ball.cells[c])
    return FamilySolution(family, ball, idle, samples, orientation, unconstrained, stats)


def assemble_solved_asset(sol: FamilySolution) -> dict[str, str]:
    """Asset text per structure of a solved family."""
    out = {}
    ball = sol.ball
    for s in FAMILIES[sol.family]:
        lay = LAYOUTS[s]
        ori = sol.orientation[orientation_group(s)]
        asset = Asset(name=s, colour_cell=lay.colour_cell)
        for c in np.flatnonzero(sol.idle[s]):
            asset.cells[str(ball.cells[c])] = B
        for cell, o in ori.chosen.items():
            side1 = ball.cells[ball.nbr[ball.index(cell), o]]
            asset.orient[str(cell)] = str(side1)
        for cell, feas in ori.ambiguous.items():
            i = ball.index(cell)
            asset.ambiguous[str(cell)] = [str(ball.cells[ball.nbr[i, o]]) for o in feas]
        asset.unconstrained = [str(c) for c in sol.unconstrained[s]]
        asset.paths = {k: list(v) for k, v in lay.paths.items()}
        asset.scenarios = lay.scenarios
        out[s] = format_asset(asset)
    return out


def _fired_by(ball, table, pool, c, o) -> set[int]:
    out: set[int] = set()
    for smp in pool:
        ids = table.lut_id[_codes(ball, smp.states, c, o, np.arange(smp.horizon + 1))]
        out.update(int(r) for r in ids if r)
    return out


def cover_rules(sols: dict[str, FamilySolution], table: RuleTable) -> set[int]:
    """Re-pick free offsets so that as many rules as possible fire somewhere.

    Only ambiguous cells not pinned to a path successor are touched, and every
    candidate offset is already feasible, so reproduction is unaffected.
    Returns the ids still unfired.
    """
    slots = []  # (ball, pool, solution, cell index)
    for sol in sols.values():
        for g, ori in sol.orientation.items():
            pool = [smp for s in FAMILIES[sol.family] if orientation_group(s) == g
                    for smp in sol.samples[s]]
            for cell in ori.chosen:
                slots.append((sol.ball, pool, ori, sol.ball.index(cell)))
    fires = {}
    for k, (ball, pool, ori, c) in enumerate(slots):
        cell = ball.cells[c]
        fires[k] = {o: _fired_by(ball, table, pool, c, o) for o in ori.feasible[cell]}

    def counts():
        n: dict[int, int] = {}
        for k, (ball, _, ori, c) in enumerate(slots):
            for r in fires[k][ori.chosen[ball.cells[c]]]:
                n[r] = n.get(r, 0) + 1
        return n

    n = counts()
    for rid in sorted(r.id for r in table):
        if n.get(rid):
            continue
        for k, (ball, _, ori, c) in enumerate(slots):
            cell = ball.cells[c]
            if cell in ori.locked or len(fires[k]) < 2:
                continue
            cur = fires[k][ori.chosen[cell]]
            for o, got in fires[k].items():
                # never drop a rule whose only firing is this cell
                if rid in got and all(n.get(r, 0) > 1 or r in got for r in cur):
                    ori.chosen[cell] = o
                    ori.ambiguous[cell] = [x for x in ori.feasible[cell] if x != o]
                    n = counts()
                    break
            if n.get(rid):
                break
    return {r.id for r in table} - set(n)


def fit_all(table: RuleTable, out_dir: str | Path, golden_dir=None, families=None,
            check_unconstrained: bool = True) -> dict[str, FamilySolution]:
    goldens = load_goldens(golden_dir)
    witnesses = load_witnesses()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sols = {}
    for fam in families or FAMILIES:
        sols[fam] = solve_family(fam, table, goldens, witnesses, check_unconstrained=check_unconstrained)
    left = cover_rules(sols, table)
    log.info("rules not fired by any solved layout: %s", sorted(left))
    for sol in sols.values():
        for name, text in assemble_solved_asset(sol).items():
            (out_dir / f"{name}.txt").write_text(text, encoding="utf-8")
    return sols


def samples_from_asset(structure: str, table: RuleTable, ball=None, asset_dir=None,
                       goldens=None, witnesses=None) -> list[Sample]:
    """Space-time fields of a structure's idle state and scenarios, by simulation."""
    from .engine import run
    from .structures import build_structure, simulate

    ball = ball or build_ball(6)
    inst = build_structure(structure, ball, asset_dir)
    goldens = goldens if goldens is not None else load_goldens()
    witnesses = witnesses if witnesses is not None else load_witnesses()
    tls = timelines_for({k: g for k, g in goldens.items() if g.structure == structure}, table)
    out = [Sample(f"{structure} idle", np.stack([inst.config.states, inst.config.states]))]
    for sc in inst.asset.scenarios:
        _, log = simulate(inst, sc, table)
        tl = tls.get((structure, sc.name), Timeline(structure, sc.name))
        tracked = {(ball.index(c), t): r for c, seq in tl.fired.items() for t, r in seq.items()}
        wit = {ball.index(w.cell): w.rules for w in witnesses
               if w.structure == structure and w.scenario == sc.name}
        out.append(Sample(f"{structure} {sc.name}", np.stack(log.states), tracked, wit))
    return out
