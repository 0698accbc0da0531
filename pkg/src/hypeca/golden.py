"""Golden execution tables and witness sequences shipped as text assets.

Golden table files (``data/golden/<tag>.tsv``)::

    # scenario: <structure> <scenario>
    t<TAB><label><TAB><label>...
    <t><TAB><rule id>[*]<TAB>...

A ``*`` marks a rule that changes the state of its cell.  Witness files
(``data/witness/<tag>.tsv``) hold one line per cell and scenario with the
rules fired at that cell, consecutive repeats collapsed.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import InconsistentTrace, MissingGolden
from .rules import RuleTable
from .tiling import CellId, parse_label


@dataclass
class GoldenTable:
    name: str
    structure: str
    scenario: str
    watch: list[CellId]
    times: list[int]
    rows: list[list[int]]
    red: list[list[bool]]

    def entries(self):
        """Yield (cell, t, rule id, red marker) for every table entry."""
        for t, row, marks in zip(self.times, self.rows, self.red):
            for c, rid, m in zip(self.watch, row, marks):
                yield c, t, rid, m

    def to_tsv(self) -> str:
        return format_table(self.structure, self.scenario, self.watch, self.times, self.rows, self.red)

    def perturbed(self, cell, t: int, rule_id: int) -> "GoldenTable":
        """Copy with one entry replaced (used by falsification checks)."""
        rows = [list(r) for r in self.rows]
        rows[self.times.index(t)][self.watch.index(parse_label(str(cell)))] = rule_id
        return GoldenTable(self.name, self.structure, self.scenario, self.watch, self.times, rows, self.red)


def format_table(structure, scenario, watch, times, rows, red=None) -> str:
    out = [f"# scenario: {structure} {scenario}", "\t".join(["t"] + [str(c) for c in watch])]
    for i, (t, row) in enumerate(zip(times, rows)):
        marks = red[i] if red is not None else [False] * len(row)
        out.append("\t".join([str(t)] + [f"{r}*" if m else str(r) for r, m in zip(row, marks)]))
    return "\n".join(out) + "\n"


def parse_table(name: str, text: str) -> GoldenTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# scenario:"):
        raise ValueError(f"{name}: missing '# scenario:' header")
    structure, scenario = lines[0].split(":", 1)[1].split()
    head = lines[1].split("\t")
    if head[0] != "t":
        raise ValueError(f"{name}: header must start with 't'")
    watch = [parse_label(x) for x in head[1:]]
    times, rows, red = [], [], []
    for ln in lines[2:]:
        parts = ln.split("\t")
        if len(parts) != len(head):
            raise ValueError(f"{name}: row width differs from header: {ln!r}")
        times.append(int(parts[0]))
        rows.append([int(p.rstrip("*")) for p in parts[1:]])
        red.append([p.endswith("*") for p in parts[1:]])
    return GoldenTable(name, structure, scenario, watch, times, rows, red)


def _data_dir(sub: str) -> Path:
    return Path(str(resources.files("hypeca") / "data" / sub))


def golden_dir() -> Path:
    return _data_dir("golden")


def load_goldens(directory: str | Path | None = None) -> dict[str, GoldenTable]:
    d = Path(directory) if directory else golden_dir()
    files = sorted(d.glob("*.tsv")) if d.is_dir() else []
    if not files:
        raise MissingGolden(f"no golden tables in {d}")
    return {p.stem: parse_table(p.stem, p.read_text(encoding="utf-8")) for p in files}


@dataclass
class Witness:
    tag: str
    structure: str
    scenario: str
    cell: CellId
    rules: list[int]


def load_witnesses(directory: str | Path | None = None) -> list[Witness]:
    d = Path(directory) if directory else _data_dir("witness")
    out = []
    for p in sorted(d.glob("*.tsv")):
        for ln in p.read_text(encoding="utf-8").splitlines():
            if not ln.strip() or ln.startswith("#"):
                continue
            structure, scenario, cell, seq = ln.split("\t")
            out.append(Witness(p.stem, structure, scenario, parse_label(cell), [int(x) for x in seq.split()]))
    return out


def collapse(seq) -> list:
    out = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return out


def chain_breaks(table: GoldenTable, rules: RuleTable) -> list[tuple[CellId, int]]:
    """(cell, t) pairs where the rule at t+1 does not start from the state left at t."""
    bad = []
    for j, c in enumerate(table.watch):
        for i in range(len(table.times) - 1):
            if table.times[i + 1] != table.times[i] + 1:
                continue
            a, b = rules[table.rows[i][j]], rules[table.rows[i + 1][j]]
            if a.next != b.current:
                bad.append((c, table.times[i]))
    return bad


def red_mismatches(table: GoldenTable, rules: RuleTable) -> list[tuple[CellId, int]]:
    return [(c, t) for c, t, rid, red in table.entries() if rules[rid].changes != red]


def check_chain(table: GoldenTable, rules: RuleTable):
    for rid in {r for row in table.rows for r in row}:
        if rid not in rules:
            raise InconsistentTrace(table.watch[0], table.times[0], f"rule {rid} is not in the table")
    bad = chain_breaks(table, rules)
    if bad:
        c, t = bad[0]
        raise InconsistentTrace(c, t, f"{table.name}: next state at t={t} differs from current state at t={t + 1}")
