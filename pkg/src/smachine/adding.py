"""The adding machine: construction, canonical runs, and the g-table.

The machine is a binary counter.  Sector 1 holds the digit word (0-copy
and 1-copy letters), sector 2 is the working area the scanning head
shuffles digits through.  A canonical run starts at ``L u p(1) R`` with
u positive over the 0-copies and ends at the first word containing
``p(3) R``; its length g(|u|) always lands in [2^|u|, 6*2^|u|].

The deterministic driver applies the highest-priority rule whose
application does not grow the word.  Priority order alone does not
terminate (the leftward-scan rules apply to every p(1)-word and inflate
it forever), while the no-growth gate pins exactly the constant-length
counting computation; see the canonical-run tests.
"""

from __future__ import annotations

import csv
import string
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from . import machine as M
from . import words as W
from .analysis import BoundReport
from .errors import BoundViolation, GTableMiss, InvalidAlphabet
from .fastcount import count_canonical_steps
from .machine import AdmissibleWord, Computation, Deterministic, Machine, SearchTarget
from .words import GroupWord, Letter

MAX_BASE_LETTERS = 26


@dataclass(frozen=True)
class AddingMachineSpec:
    """Base alphabet, its two copies, and the generated machine."""

    base: tuple[str, ...]
    zeros: tuple[Letter, ...]
    ones: tuple[Letter, ...]
    machine: Machine


def normalize_base(A) -> tuple[str, ...]:
    if isinstance(A, W.Alphabet):
        names = tuple(sorted(l.name for l in A.letters))
    elif isinstance(A, str):
        names = tuple(A)
    else:
        names = tuple(A)
    if not names or len(names) > MAX_BASE_LETTERS:
        raise InvalidAlphabet(f"base alphabet must have 1..{MAX_BASE_LETTERS} letters")
    if len(set(names)) != len(names):
        raise InvalidAlphabet("base alphabet letters must be distinct")
    for n in names:
        if not n or not all(ch in string.ascii_letters for ch in n):
            raise InvalidAlphabet(f"base letter {n!r} must be alphabetic")
    return names


@lru_cache(maxsize=None)
def adding_spec(base: tuple[str, ...]) -> AddingMachineSpec:
    zeros = tuple(Letter(f"{a}0", W.TAPE) for a in base)
    ones = tuple(Letter(f"{a}1", W.TAPE) for a in base)
    L = Letter("L", W.STATE)
    R = Letter("R", W.STATE)
    p1, p2, p3 = (Letter(f"p({i})", W.STATE) for i in (1, 2, 3))
    hw = M.hardware([zeros + ones, zeros], [[L], [p1, p2, p3], [R]])
    y1 = list(zeros + ones)
    y2 = list(zeros)
    rules = []
    for a, a0, a1 in zip(base, zeros, ones):
        rules.append(
            M.make_rule(
                hw,
                f"r1({a})",
                [("L", "L"), ("p(1)", f"{a1.token}^-1 p(1) {a0.token}"), ("R", "R")],
                {1: y1, 2: y2},
            )
        )
    for a, a0, a1 in zip(base, zeros, ones):
        rules.append(
            M.make_rule(
                hw,
                f"r12({a})",
                [("L", "L"), ("p(1)", f"{a0.token}^-1 {a1.token} p(2)"), ("R", "R")],
                {1: y1, 2: y2},
            )
        )
    for a, a0, _ in zip(base, zeros, ones):
        rules.append(
            M.make_rule(
                hw,
                f"r2({a})",
                [("L", "L"), ("p(2)", f"{a0.token} p(2) {a0.token}^-1"), ("R", "R")],
                {1: y1, 2: y2},
            )
        )
    rules.append(M.make_rule(hw, "r21", [("L", "L"), ("p(2)", "p(1)"), ("R", "R")], {1: y1, 2: []}))
    rules.append(M.make_rule(hw, "r13", [("L", "L"), ("p(1)", "p(3)"), ("R", "R")], {1: [], 2: y2}))
    for a, a0, _ in zip(base, zeros, ones):
        rules.append(
            M.make_rule(
                hw,
                f"r3({a})",
                [("L", "L"), ("p(3)", f"{a0.token} p(3) {a0.token}^-1"), ("R", "R")],
                {1: list(zeros), 2: y2},
            )
        )
    machine = Machine(hw, tuple(rules), name=f"adding({''.join(base)})")
    return AddingMachineSpec(base, zeros, ones, machine)


def build_adding(A) -> Machine:
    """The adding machine over base alphabet A: 4|A|+2 positive rules."""
    return adding_spec(normalize_base(A)).machine


def deterministic_priority(base: tuple[str, ...]) -> tuple[str, ...]:
    """Counting-phase priority: leftward scan, flip, rightward return,
    phase switches, final sweep."""
    return (
        *(f"r1({a})" for a in base),
        *(f"r12({a})" for a in base),
        *(f"r2({a})" for a in base),
        "r21",
        "r13",
        *(f"r3({a})" for a in base),
    )


def _coerce_u(spec: AddingMachineSpec, u) -> GroupWord:
    if isinstance(u, str):
        return spec.machine.hardware.parse(u)
    return u


def start_word(spec: AddingMachineSpec, u: GroupWord) -> AdmissibleWord:
    L = spec.machine.hardware.state_alphabets[0].sorted_letters()[0]
    R = spec.machine.hardware.state_alphabets[2].sorted_letters()[0]
    p1 = spec.machine.hardware.token_map["p(1)"]
    return AdmissibleWord(spec.machine.hardware, (L, p1, R), (W.reduce(u), W.EPSILON))


def default_budget(n: int) -> int:
    return 8 * 2**n


def canonical_run(A, u, budget: int | None = None) -> Computation:
    """Deterministic counting run from ``L u p(1) R`` to the first word
    containing ``p(3) R``; falls back to breadth-first search when the
    deterministic driver stalls (the fallback is recorded on the trace)."""
    spec = adding_spec(normalize_base(A))
    u = _coerce_u(spec, u)
    if not W.is_positive(u):
        raise InvalidAlphabet("counting input must be a positive word")
    zeros = set(spec.zeros)
    if any(sl.letter not in zeros for sl in u):
        raise InvalidAlphabet("counting input must use the 0-copy letters")
    n = len(u)
    if budget is None:
        budget = default_budget(n)
    start = start_word(spec, u)
    target = M.contains_flat(spec.machine.hardware, "p(3) R")
    comp = M.run(
        spec.machine,
        start,
        Deterministic(priority=deterministic_priority(spec.base), forbid_growth=True),
        budget=budget,
        target=target,
    )
    if comp.halt_reason == "target":
        comp.strategy_used = "det"
        return comp
    # canonical computations keep the start word's length, so the search
    # space can be pruned at that length
    comp = M.run(spec.machine, start, SearchTarget(target, max_length=start.length), budget=budget)
    comp.strategy_used = "bfs-fallback"
    return comp


# ---------------------------------------------------------------------------
# the g-table


@dataclass(frozen=True)
class GEntry:
    n: int
    g: int
    strategy: str
    source: str
    wall_ms: float

    @property
    def lower(self) -> int:
        return 2**self.n

    @property
    def upper(self) -> int:
        return 6 * 2**self.n


@dataclass
class GTable:
    """Measured map n -> g(n); inserts assert equality on collision so
    merges commute."""

    entries: dict[int, GEntry] = field(default_factory=dict)

    def insert(self, entry: GEntry) -> None:
        old = self.entries.get(entry.n)
        if old is not None and old.g != entry.g:
            raise BoundViolation(f"conflicting g({entry.n}): {old.g} vs {entry.g}")
        if old is None:
            self.entries[entry.n] = entry

    def merge(self, other: "GTable") -> "GTable":
        for e in other.entries.values():
            self.insert(e)
        return self

    def g(self, n: int) -> int:
        try:
            return self.entries[n].g
        except KeyError:
            raise GTableMiss(n) from None

    def as_mapping(self) -> dict[int, int]:
        return {n: e.g for n, e in self.entries.items()}

    def __contains__(self, n: int) -> bool:
        return n in self.entries

    def rows(self) -> list[GEntry]:
        return [self.entries[n] for n in sorted(self.entries)]


def measure_g(A, n: int, table: GTable | None = None, use_fast: bool = True) -> int:
    """Measure g(n) on u = a0^n and assert the 2^n <= g(n) <= 6*2^n window."""
    if n < 0:
        raise InvalidAlphabet("n must be >= 0")
    base = normalize_base(A)
    t0 = time.perf_counter()
    if use_fast:
        g = count_canonical_steps(n)
        strategy = "fast"
    else:
        spec = adding_spec(base)
        a0 = spec.zeros[0]
        u = W.from_codes([W.intern_letter(a0)] * n)
        comp = canonical_run(base, u)
        g = comp.t
        strategy = comp.strategy_used
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if not (2**n <= g <= 6 * 2**n):
        raise BoundViolation(f"g({n}) = {g} outside [{2**n}, {6 * 2**n}]")
    if table is not None:
        table.insert(GEntry(n, g, strategy, f"a0^{n}", wall_ms))
    return g


def measure_g_range(A, ns: Iterable[int], table: GTable | None = None, use_fast: bool = True) -> GTable:
    table = table if table is not None else GTable()
    for n in ns:
        measure_g(A, n, table, use_fast=use_fast)
    return table


def g_table_for_gg(A, r: int, table: GTable | None = None) -> GTable:
    """Measure everything check_gg_inequality(r) needs: g at r-1, r,
    g(r-1), g(r)."""
    table = table if table is not None else GTable()
    for k in (r - 1, r):
        if k not in table:
            measure_g(A, k, table)
    for k in (table.g(r - 1), table.g(r)):
        if k not in table:
            measure_g(A, k, table)
    return table


def save_g_table(table: GTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "g", "lower", "upper", "strategy", "wall_time_ms"])
        for e in table.rows():
            writer.writerow([e.n, e.g, e.lower, e.upper, e.strategy, f"{e.wall_ms:.3f}"])


def load_g_table(path) -> GTable:
    table = GTable()
    with open(path, newline="") as fh:
        for row in csv.DictReader(r for r in fh if not r.startswith("#")):
            table.insert(
                GEntry(int(row["n"]), int(row["g"]), row["strategy"], "file", float(row["wall_time_ms"]))
            )
    return table


# ---------------------------------------------------------------------------
# lemma checks


def lemma1_report(comp: Computation, n: int) -> BoundReport:
    """The three per-run checks: length ceiling, length window, constant
    word length."""
    report = BoundReport()
    lengths = [w.length for w in comp.words]
    ceiling = max(lengths[0], lengths[-1])
    report.add(
        "per-word length ceiling",
        all(l <= ceiling for l in lengths),
        measured=max(lengths),
        expected=f"<= {ceiling}",
    )
    lo, hi = 2**n, 6 * 2**n
    report.add("length window", lo <= comp.t <= hi, measured=comp.t, expected=f"[{lo}, {hi}]")
    report.add(
        "constant word length",
        len(set(lengths)) == 1,
        measured=sorted(set(lengths)),
        expected=[lengths[0]],
    )
    return report


def verify_lemma1(u, A=None) -> BoundReport:
    """Canonical-run report for input u (letters decide the base alphabet
    when A is omitted)."""
    if A is None:
        if isinstance(u, str):
            raise InvalidAlphabet("pass the base alphabet when u is a string")
        names = sorted({sl.letter.name.rstrip("01") for sl in u}) or ["a"]
        A = tuple(names)
    spec = adding_spec(normalize_base(A))
    u = _coerce_u(spec, u)
    comp = canonical_run(spec.base, u)
    report = lemma1_report(comp, len(u))
    endpoint_zeros = all(
        sl.letter in set(spec.zeros) for w in (comp.words[0], comp.words[-1]) for s in w.sectors for sl in s
    )
    report.add("endpoints over 0-copies", endpoint_zeros, note=comp.strategy_used)
    return report
