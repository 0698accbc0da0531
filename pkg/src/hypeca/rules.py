"""Rule tables: parsing, lookup and coherence checks.

A rule reads ``ID CUR CTX8 NEXT`` where CUR and NEXT are ``W`` or ``B`` and
CTX8 lists the states of neighbours 1..8 in oriented (counterclockwise)
order.  Matching is purely positional; no rotated copies are ever derived.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DuplicateId, MalformedRule

W, B = 0, 1
STATE_CHARS = "WB"
_STATE = {"W": W, "B": B}


def encode(current: int, context) -> int:
    """Pack a neighbourhood into a 9-bit code, current state as the top bit."""
    code = current
    for s in context:
        code = (code << 1) | s
    return code


def to_states(text: str) -> tuple[int, ...]:
    try:
        return tuple(_STATE[ch] for ch in text)
    except KeyError:
        raise MalformedRule(f"bad state symbol in {text!r}") from None


def to_text(states) -> str:
    return "".join(STATE_CHARS[s] for s in states)


@dataclass(frozen=True)
class Rule:
    id: int
    current: int
    context: tuple[int, ...]
    next: int

    @property
    def changes(self) -> bool:
        return self.current != self.next

    @property
    def code(self) -> int:
        return encode(self.current, self.context)

    def __str__(self):
        return f"{self.id} {STATE_CHARS[self.current]} {to_text(self.context)} {STATE_CHARS[self.next]}"


@dataclass
class CoherenceReport:
    conflicts: list[tuple[Rule, Rule]] = field(default_factory=list)
    exact_duplicates: list[tuple[Rule, Rule]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.conflicts


class RuleTable:
    """Ordered rules plus an O(1) lookup keyed by the 9-bit neighbourhood code."""

    def __init__(self, rules):
        self.rules: list[Rule] = list(rules)
        self.by_id = {}
        for r in self.rules:
            if r.id in self.by_id:
                raise DuplicateId(f"rule id {r.id} defined twice")
            self.by_id[r.id] = r
        # first rule wins on a clash; check_coherence reports clashes
        self.lut_id = np.zeros(512, dtype=np.int16)
        self.lut_next = np.zeros(512, dtype=np.uint8)
        for r in reversed(self.rules):
            self.lut_id[r.code] = r.id
            self.lut_next[r.code] = r.next
        self.lut_id.setflags(write=False)
        self.lut_next.setflags(write=False)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, rule_id: int) -> Rule:
        return self.by_id[rule_id]

    def __contains__(self, rule_id) -> bool:
        return rule_id in self.by_id

    def match(self, current: int, context) -> Rule | None:
        rid = int(self.lut_id[encode(current, context)])
        return self.by_id[rid] if rid else None

    def without(self, *ids: int) -> "RuleTable":
        drop = set(ids)
        return RuleTable(r for r in self.rules if r.id not in drop)

    def with_rules(self, *extra: Rule) -> "RuleTable":
        return RuleTable([*self.rules, *extra])

    def serialize(self) -> str:
        return "".join(f"{r}\n" for r in self.rules)


def parse_rule(line: str, lineno: int | None = None) -> Rule:
    parts = line.split()
    where = f" (line {lineno})" if lineno is not None else ""
    if len(parts) != 4:
        raise MalformedRule(f"expected 4 fields{where}: {line!r}")
    rid, cur, ctx, nxt = parts
    if not rid.isdigit() or int(rid) < 1:
        raise MalformedRule(f"bad rule id{where}: {rid!r}")
    if len(cur) != 1 or len(nxt) != 1 or len(ctx) != 8:
        raise MalformedRule(f"bad arity{where}: {line!r}")
    return Rule(int(rid), to_states(cur)[0], to_states(ctx), to_states(nxt)[0])


def parse_rules(text: str) -> RuleTable:
    rules = []
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        rules.append(parse_rule(s, n))
    return RuleTable(rules)


def check_coherence(table: RuleTable) -> CoherenceReport:
    rep = CoherenceReport()
    seen: dict[int, Rule] = {}
    for r in table.rules:
        prev = seen.get(r.code)
        if prev is None:
            seen[r.code] = r
        elif prev.next != r.next:
            rep.conflicts.append((prev, r))
        else:
            rep.exact_duplicates.append((prev, r))
    return rep


def default_rules_path() -> Path:
    return Path(str(resources.files("hypeca") / "data" / "rules.txt"))


def load_rules(path: str | Path | None = None) -> RuleTable:
    p = Path(path) if path else default_rules_path()
    return parse_rules(p.read_text(encoding="utf-8"))
