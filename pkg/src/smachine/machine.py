"""S-machine hardware, admissible words, rules, and computation runners.

Rule semantics
--------------
A rule is a bank of components applied simultaneously.  Each component
rewrites a block of consecutive state letters: the inner tape words of
the pattern must equal the enclosed sectors exactly, while outer tape
context multiplies into the neighbouring sector (the sector word is
multiplied by ``context_u^-1 * context_v`` and freely reduced).  The
multiplicative treatment of outer context makes every rule application
exactly invertible by the inverse rule.  Per-sector domain alphabets
gate applicability: a restricted sector may only hold letters of the
permitted alphabet, and an empty alphabet forces an empty sector.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from . import words as W
from .errors import (
    BudgetExceeded,
    IndexOutOfRange,
    InvalidAlphabet,
    NotAdmissible,
    NotApplicable,
    NotFound,
)
from .words import Alphabet, GroupWord, Letter

DEFAULT_VISITED_CAP = 10_000_000


# ---------------------------------------------------------------------------
# hardware


@dataclass(frozen=True)
class Hardware:
    """Tape alphabets Y_1..Y_n and disjoint state alphabets Q_1..Q_{n+1}."""

    tape_alphabets: tuple[Alphabet, ...]
    state_alphabets: tuple[Alphabet, ...]

    def __post_init__(self):
        if len(self.state_alphabets) != len(self.tape_alphabets) + 1:
            raise InvalidAlphabet("need exactly one more state alphabet than tape alphabets")
        seen: set[Letter] = set()
        for q in self.state_alphabets:
            if seen.intersection(q.letters):
                raise InvalidAlphabet("state alphabets must be pairwise disjoint")
            seen.update(q.letters)
        tape_all = set().union(*(y.letters for y in self.tape_alphabets)) if self.tape_alphabets else set()
        if tape_all.intersection(seen):
            raise InvalidAlphabet("tape and state alphabets must be disjoint")
        self.token_map  # tokens must be unambiguous; fails fast on clashes

    @property
    def n(self) -> int:
        """Number of tape sectors."""
        return len(self.tape_alphabets)

    @property
    def n_parts(self) -> int:
        return len(self.state_alphabets)

    @cached_property
    def part_of_state(self) -> dict[Letter, int]:
        """State letter -> 1-based part index."""
        out = {}
        for i, q in enumerate(self.state_alphabets, start=1):
            for l in q.letters:
                out[l] = i
        return out

    @cached_property
    def token_map(self) -> dict[str, Letter]:
        out: dict[str, Letter] = {}
        for alph in (*self.state_alphabets, *self.tape_alphabets):
            for l in alph.letters:
                prev = out.get(l.token)
                if prev is not None and prev != l:
                    raise InvalidAlphabet(f"ambiguous letter token {l.token!r}")
                out[l.token] = l
        return out

    def sector_letters(self, i: int) -> frozenset[Letter]:
        """Letters allowed in sector i (1-based)."""
        return self.tape_alphabets[i - 1].letters

    def state_part(self, i: int) -> frozenset[Letter]:
        return self.state_alphabets[i - 1].letters

    def parse(self, text: str) -> GroupWord:
        return W.parse_word(text, self.token_map)


def hardware(tapes: Sequence[Iterable[Letter]], states: Sequence[Iterable[Letter]]) -> Hardware:
    return Hardware(
        tuple(W.tape_alphabet(t, i) for i, t in enumerate(tapes, start=1)),
        tuple(W.state_alphabet(s, i) for i, s in enumerate(states, start=1)),
    )


# ---------------------------------------------------------------------------
# admissible words


@dataclass(frozen=True)
class AdmissibleWord:
    """Alternating state letters and reduced sector words.

    ``first_part`` is 1 for full words; (Q_i,Q_j)-subwords keep the part
    offset so sector membership still checks out.
    """

    hardware: Hardware
    states: tuple[Letter, ...]
    sectors: tuple[GroupWord, ...]
    first_part: int = 1

    def __post_init__(self):
        if len(self.sectors) != len(self.states) - 1:
            raise NotAdmissible(0, "state/sector alternation broken")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def part_index(self, k: int) -> int:
        """1-based hardware part of the k-th state letter (k 0-based)."""
        return self.first_part + k

    def sector_index(self, k: int) -> int:
        """1-based hardware sector right of the k-th state letter."""
        return self.first_part + k

    def flatten(self) -> GroupWord:
        codes: list[int] = []
        for k, s in enumerate(self.states):
            codes.append(W.intern_letter(s))
            if k < len(self.sectors):
                codes.extend(self.sectors[k].codes)
        return GroupWord(tuple(codes), True)

    @property
    def length(self) -> int:
        """Total symbol count |W| (state letters plus tape letters)."""
        return len(self.states) + sum(len(s) for s in self.sectors)

    @property
    def a_length(self) -> int:
        """Tape-letter count |W|_a."""
        return sum(len(s) for s in self.sectors)

    def validate(self) -> None:
        hw = self.hardware
        pos = 0
        for k, q in enumerate(self.states):
            part = self.part_index(k)
            if part < 1 or part > hw.n_parts:
                raise NotAdmissible(pos, f"part {part} outside hardware")
            if q not in hw.state_part(part):
                raise NotAdmissible(pos, f"expected Q_{part}-letter, got {q.token}")
            pos += 1
            if k < len(self.sectors):
                sec = self.sectors[k]
                if not W.reduce(sec).codes == sec.codes:
                    raise NotAdmissible(pos, f"sector {self.sector_index(k)} not freely reduced")
                allowed = hw.sector_letters(self.sector_index(k))
                for sl in sec:
                    if sl.letter not in allowed:
                        raise NotAdmissible(pos, f"letter {sl.letter.token} outside sector {self.sector_index(k)}")
                    pos += 1

    def __repr__(self):
        return f"AdmissibleWord({W.format_word(self.flatten())!r})"


def parse_admissible(hw: Hardware, w: GroupWord | str) -> AdmissibleWord:
    """Decompose a flat word into parts; raises NotAdmissible outside L(S)."""
    if isinstance(w, str):
        w = hw.parse(w)
    symbols = list(w)
    states: list[Letter] = []
    sectors: list[GroupWord] = []
    expected_part = 1
    pos = 0
    i = 0
    while i < len(symbols):
        sl = symbols[i]
        part = hw.part_of_state.get(sl.letter)
        if part is None or sl.exponent != 1:
            raise NotAdmissible(pos, f"expected Q_{expected_part}-letter")
        if part != expected_part:
            raise NotAdmissible(pos, f"expected Q_{expected_part}-letter, got Q_{part}")
        states.append(sl.letter)
        pos += 1
        i += 1
        if expected_part <= hw.n:
            allowed = hw.sector_letters(expected_part)
            sec: list[int] = []
            while i < len(symbols) and symbols[i].letter.kind != W.STATE:
                if symbols[i].letter not in allowed:
                    raise NotAdmissible(pos, f"letter {symbols[i].letter.token} outside sector {expected_part}")
                sec.append(w.codes[i])
                pos += 1
                i += 1
            sec_word = GroupWord(tuple(sec), False)
            if W.reduce(sec_word).codes != sec_word.codes:
                raise NotAdmissible(pos, f"sector {expected_part} not freely reduced")
            sectors.append(GroupWord(tuple(sec), True))
        expected_part += 1
    if len(states) != hw.n_parts:
        raise NotAdmissible(pos, f"expected {hw.n_parts} state letters, found {len(states)}")
    word = AdmissibleWord(hw, tuple(states), tuple(sectors))
    word.validate()
    return word


def subword_QiQj(w: AdmissibleWord, i: int, j: int) -> AdmissibleWord:
    """The (Q_i,Q_j)-subword q_i u_i ... q_j of a full admissible word."""
    if not (w.first_part <= i < j <= w.first_part + w.n_states - 1):
        raise IndexOutOfRange(f"need {w.first_part} <= i < j <= {w.first_part + w.n_states - 1}")
    a = i - w.first_part
    b = j - w.first_part
    return AdmissibleWord(w.hardware, w.states[a : b + 1], w.sectors[a:b], first_part=i)


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class Pattern:
    """One side of a component: outer tape context around a state core."""

    left: GroupWord
    states: tuple[Letter, ...]
    inners: tuple[GroupWord, ...]
    right: GroupWord

    def __post_init__(self):
        if not self.states:
            raise ValueError("pattern needs at least one state letter")
        if len(self.inners) != len(self.states) - 1:
            raise ValueError("pattern inner-word count mismatch")

    def flat(self) -> GroupWord:
        parts = [self.left]
        for k, s in enumerate(self.states):
            parts.append(W.single(s))
            if k < len(self.inners):
                parts.append(self.inners[k])
        parts.append(self.right)
        return W.concat_all(parts, reduce_after=False)


@dataclass(frozen=True)
class RuleComponent:
    u: Pattern
    v: Pattern


@dataclass(frozen=True)
class SRule:
    """An S-rule: simultaneous component substitutions plus domain alphabets.

    ``domains`` maps 1-based sector indices to the permitted alphabet;
    unmapped sectors are unrestricted.
    """

    name: str
    components: tuple[RuleComponent, ...]
    domains: tuple[tuple[int, frozenset[Letter]], ...] = ()
    polarity: int = 1

    @cached_property
    def domain_map(self) -> dict[int, frozenset[Letter]]:
        return dict(self.domains)

    def spans(self, hw: Hardware) -> list[tuple[int, int]]:
        """(l, r) part spans of the components, validated left-to-right."""
        out = []
        prev_r = 0
        for comp in self.components:
            parts_u = [hw.part_of_state[s] for s in comp.u.states]
            parts_v = [hw.part_of_state[s] for s in comp.v.states]
            l, r = parts_u[0], parts_u[-1]
            if parts_u != list(range(l, r + 1)) or parts_v != parts_u:
                raise InvalidAlphabet(f"rule {self.name}: component states not consecutive parts {parts_u}->{parts_v}")
            if l <= prev_r:
                raise InvalidAlphabet(f"rule {self.name}: components overlap or out of order")
            prev_r = r
            out.append((l, r))
        return out

    def typecheck(self, hw: Hardware) -> None:
        spans = self.spans(hw)
        for comp, (l, r) in zip(self.components, spans):
            for pat in (comp.u, comp.v):
                if l > 1:
                    for sl in pat.left:
                        if sl.letter not in hw.sector_letters(l - 1):
                            raise InvalidAlphabet(f"rule {self.name}: context letter {sl.letter.token} outside sector {l-1}")
                elif len(pat.left):
                    raise InvalidAlphabet(f"rule {self.name}: left context before part 1")
                if r <= hw.n:
                    for sl in pat.right:
                        if sl.letter not in hw.sector_letters(r):
                            raise InvalidAlphabet(f"rule {self.name}: context letter {sl.letter.token} outside sector {r}")
                elif len(pat.right):
                    raise InvalidAlphabet(f"rule {self.name}: right context after last part")
                for k, inner in enumerate(pat.inners):
                    for sl in inner:
                        if sl.letter not in hw.sector_letters(l + k):
                            raise InvalidAlphabet(f"rule {self.name}: inner letter {sl.letter.token} outside sector {l+k}")
        for j, allowed in self.domains:
            if not (1 <= j <= hw.n):
                raise InvalidAlphabet(f"rule {self.name}: domain for nonexistent sector {j}")
            for l in allowed:
                if l not in hw.sector_letters(j):
                    raise InvalidAlphabet(f"rule {self.name}: domain letter {l.token} outside sector {j}")

def invert_rule(r: SRule) -> SRule:
    """Swap every U_i with V_i and flip the polarity; an involution."""
    name = r.name[:-3] if r.name.endswith("^-1") else r.name + "^-1"
    comps = tuple(RuleComponent(c.v, c.u) for c in r.components)
    return SRule(name, comps, r.domains, -r.polarity)


def make_rule(
    hw: Hardware,
    name: str,
    subs: Sequence[tuple[str | GroupWord, str | GroupWord]],
    domains: Mapping[int, Iterable[Letter]] | None = None,
    polarity: int = 1,
) -> SRule:
    """Build a rule from flat pattern/replacement words.

    Each pattern is split into (left context, state core, right context)
    by the positions of its state letters.
    """

    def to_pattern(w: str | GroupWord) -> Pattern:
        if isinstance(w, str):
            w = hw.parse(w)
        symbols = list(w)
        state_pos = [k for k, sl in enumerate(symbols) if sl.letter.kind == W.STATE]
        if not state_pos:
            raise InvalidAlphabet(f"rule {name}: pattern {W.format_word(w)!r} has no state letter")
        for k in state_pos:
            if symbols[k].exponent != 1:
                raise InvalidAlphabet(f"rule {name}: inverted state letter in pattern")
        first, last = state_pos[0], state_pos[-1]
        left = GroupWord(w.codes[:first], True)
        right = GroupWord(w.codes[last + 1 :], True)
        states = tuple(symbols[k].letter for k in state_pos)
        inners = tuple(
            GroupWord(w.codes[state_pos[k] + 1 : state_pos[k + 1]], True) for k in range(len(state_pos) - 1)
        )
        return Pattern(left, states, inners, right)

    comps = tuple(RuleComponent(to_pattern(u), to_pattern(v)) for u, v in subs)
    dom = tuple(sorted((j, frozenset(a)) for j, a in (domains or {}).items()))
    rule = SRule(name, comps, dom, polarity)
    rule.typecheck(hw)
    return rule


# ---------------------------------------------------------------------------
# machine


@dataclass(frozen=True)
class Machine:
    """Hardware plus positive rules; inverses are generated on demand."""

    hardware: Hardware
    positive_rules: tuple[SRule, ...]
    name: str = ""

    def __post_init__(self):
        for r in self.positive_rules:
            if r.polarity != 1:
                raise InvalidAlphabet(f"rule {r.name} declared with negative polarity")
            r.typecheck(self.hardware)

    @cached_property
    def rules(self) -> tuple[SRule, ...]:
        """All rules: the positive rules followed by their inverses."""
        return self.positive_rules + tuple(invert_rule(r) for r in self.positive_rules)

    @cached_property
    def rule_by_name(self) -> dict[str, SRule]:
        return {r.name: r for r in self.rules}

    def rule(self, name: str) -> SRule:
        try:
            return self.rule_by_name[name]
        except KeyError:
            raise IndexOutOfRange(f"no rule named {name!r}") from None


# ---------------------------------------------------------------------------
# rule application


def _match_component(w: AdmissibleWord, comp: RuleComponent, span: tuple[int, int]) -> bool:
    l, r = span
    if l < w.first_part or r > w.first_part + w.n_states - 1:
        return False
    base = l - w.first_part
    for k, s in enumerate(comp.u.states):
        if w.states[base + k] != s:
            return False
    for k, inner in enumerate(comp.u.inners):
        if w.sectors[base + k].codes != inner.codes:
            return False
    return True


def applicable(r: SRule, w: AdmissibleWord) -> bool:
    """True iff every component matches at its parts and the domain
    alphabets admit every restricted sector."""
    try:
        spans = r.spans(w.hardware)
    except InvalidAlphabet:
        return False
    for comp, span in zip(r.components, spans):
        if not _match_component(w, comp, span):
            return False
    for j, allowed in r.domains:
        k = j - w.first_part
        if 0 <= k < len(w.sectors):
            for sl in w.sectors[k]:
                if sl.letter not in allowed:
                    return False
    return True


def apply_rule(r: SRule, w: AdmissibleWord) -> AdmissibleWord:
    """Apply all substitutions simultaneously and re-reduce the sectors."""
    if not applicable(r, w):
        raise NotApplicable(f"rule {r.name} not applicable to {W.format_word(w.flatten())}")
    spans = r.spans(w.hardware)
    states = list(w.states)
    # per sector, collect multiplicative edits: (right-edge word, left-edge word)
    right_edit: dict[int, GroupWord] = {}
    left_edit: dict[int, GroupWord] = {}
    inner_set: dict[int, GroupWord] = {}
    for comp, (l, r_) in reversed(list(zip(r.components, spans))):
        base = l - w.first_part
        for k, s in enumerate(comp.v.states):
            states[base + k] = s
        for k, inner in enumerate(comp.v.inners):
            inner_set[base + k] = W.reduce(inner)
        if l > w.first_part:
            right_edit[base - 1] = W.concat(W.invert(comp.u.left), comp.v.left)
        if r_ < w.first_part + w.n_states - 1:
            left_edit[base + len(comp.u.states) - 1] = W.concat(comp.v.right, W.invert(comp.u.right))
    sectors = []
    for k, sec in enumerate(w.sectors):
        if k in inner_set:
            sectors.append(inner_set[k])
            continue
        if k in right_edit:
            sec = W.concat(sec, right_edit[k])
        if k in left_edit:
            sec = W.concat(left_edit[k], sec)
        sectors.append(W.reduce(sec))
    out = AdmissibleWord(w.hardware, tuple(states), tuple(sectors), w.first_part)
    out.validate()
    return out


# ---------------------------------------------------------------------------
# computations and runners


@dataclass
class Computation:
    """A trace W_0 -> W_1 -> ... -> W_t with the applied rules."""

    machine: Machine
    words: list[AdmissibleWord]
    rules: list[SRule]
    halt_reason: str = "target"
    strategy_used: str = "det"
    sector_steps: list[int] = field(default_factory=list)

    @property
    def t(self) -> int:
        return len(self.rules)

    @property
    def start(self) -> AdmissibleWord:
        return self.words[0]

    @property
    def end(self) -> AdmissibleWord:
        return self.words[-1]

    def validate(self) -> None:
        if len(self.words) != len(self.rules) + 1:
            raise ValueError("trace length mismatch")
        for i, r in enumerate(self.rules):
            got = apply_rule(r, self.words[i])
            if got.flatten().codes != self.words[i + 1].flatten().codes:
                raise ValueError(f"step {i} does not re-apply")

    def reversed(self) -> "Computation":
        return Computation(
            self.machine,
            list(reversed(self.words)),
            [invert_rule(r) for r in reversed(self.rules)],
            halt_reason=self.halt_reason,
            strategy_used=self.strategy_used,
        )


@dataclass
class Deterministic:
    """Apply the first applicable rule in priority order, skipping
    applications that grow the word when ``forbid_growth`` is set.
    A dead end is a normal halt.
    """

    priority: tuple[str, ...] | None = None
    forbid_growth: bool = False


@dataclass
class SearchTarget:
    """Breadth-first search for a shortest computation to a target word.

    ``max_length`` prunes words longer than the cap; constant-length
    computations survive a cap at the start word's length.
    """

    predicate: Callable[[AdmissibleWord], bool]
    visited_cap: int = DEFAULT_VISITED_CAP
    max_length: int | None = None


Strategy = Deterministic | SearchTarget


def contains_flat(hw: Hardware, text: str) -> Callable[[AdmissibleWord], bool]:
    """Predicate: the flat word contains the given signed-letter subword."""
    needle = hw.parse(text).codes
    if not needle:
        return lambda w: True

    def pred(w: AdmissibleWord) -> bool:
        hay = w.flatten().codes
        n = len(needle)
        return any(hay[i : i + n] == needle for i in range(len(hay) - n + 1))

    return pred


def run(
    m: Machine,
    start: AdmissibleWord,
    strategy: Strategy,
    budget: int | None = None,
    target: Callable[[AdmissibleWord], bool] | None = None,
) -> Computation:
    """Run the machine from ``start``.

    Deterministic runs return a computation with ``halt_reason`` one of
    ``target`` / ``no_rule`` / ``budget``.  Search runs either return a
    shortest computation to the target or raise NotFound / BudgetExceeded.
    """
    start.validate()
    if isinstance(strategy, Deterministic):
        return _run_det(m, start, strategy, budget, target)
    return _run_bfs(m, start, strategy, budget)


def _run_det(m, start, strategy, budget, target):
    if strategy.priority is None:
        rules = list(m.positive_rules)
    else:
        rules = [m.rule(n) for n in strategy.priority]
    words_ = [start]
    applied: list[SRule] = []
    cur = start
    while True:
        if target is not None and target(cur):
            return Computation(m, words_, applied, "target")
        chosen = None
        nxt = None
        for r in rules:
            if applicable(r, cur):
                cand = apply_rule(r, cur)
                if strategy.forbid_growth and cand.length > cur.length:
                    continue
                chosen, nxt = r, cand
                break
        if chosen is None:
            return Computation(m, words_, applied, "no_rule")
        if budget is not None and len(applied) >= budget:
            return Computation(m, words_, applied, "budget")
        applied.append(chosen)
        words_.append(nxt)
        cur = nxt


def _run_bfs(m, start, strategy, budget):
    key0 = start.flatten().codes
    if strategy.predicate(start):
        return Computation(m, [start], [], "target", strategy_used="bfs")
    parents: dict[tuple, tuple[tuple, SRule]] = {}
    seen = {key0}
    frontier = deque([(start, key0)])
    store = {key0: start}
    expansions = 0
    while frontier:
        cur, key = frontier.popleft()
        for r in m.rules:
            if not applicable(r, cur):
                continue
            expansions += 1
            if budget is not None and expansions > budget:
                raise BudgetExceeded(f"search budget {budget} exhausted")
            nxt = apply_rule(r, cur)
            if strategy.max_length is not None and nxt.length > strategy.max_length:
                continue
            nkey = nxt.flatten().codes
            if nkey in seen:
                continue
            if len(seen) >= strategy.visited_cap:
                raise BudgetExceeded(f"visited cap {strategy.visited_cap} reached")
            seen.add(nkey)
            parents[nkey] = (key, r)
            store[nkey] = nxt
            if strategy.predicate(nxt):
                return _reconstruct(m, store, parents, nkey)
            frontier.append((nxt, nkey))
    raise NotFound("search space exhausted without reaching the target")


def _reconstruct(m, store, parents, key):
    rules: list[SRule] = []
    keys = [key]
    while key in parents:
        key, r = parents[key]
        rules.append(r)
        keys.append(key)
    rules.reverse()
    keys.reverse()
    return Computation(m, [store[k] for k in keys], rules, "target", strategy_used="bfs")


# ---------------------------------------------------------------------------
# serialization


def machine_to_dict(m: Machine) -> dict:
    def fmt_rule(r: SRule) -> dict:
        return {
            "name": r.name,
            "subs": [
                {"pattern": W.format_word(c.u.flat()), "replacement": W.format_word(c.v.flat())}
                for c in r.components
            ],
            "domains": {str(j): sorted(l.token for l in allowed) for j, allowed in r.domains},
            "polarity": "positive" if r.polarity == 1 else "negative",
        }

    return {
        "name": m.name,
        "tape_alphabets": [[l.token for l in y.sorted_letters()] for y in m.hardware.tape_alphabets],
        "state_alphabets": [[l.token for l in q.sorted_letters()] for q in m.hardware.state_alphabets],
        "rules": [fmt_rule(r) for r in m.positive_rules],
    }


def _letter_from_token(token: str, kind: str) -> Letter:
    sector_tag = None
    if "@" in token:
        token, sect = token.split("@", 1)
        sector_tag = int(sect)
    copy_tag = None
    if "." in token:
        token, copy_tag = token.split(".", 1)
    return Letter(token, kind, sector_tag, copy_tag)


def machine_from_dict(d: dict) -> Machine:
    tape_tokens = d["tape_alphabets"]
    state_tokens = d["state_alphabets"]
    cache: dict[str, Letter] = {}

    def get(token: str, kind: str) -> Letter:
        if token not in cache:
            cache[token] = _letter_from_token(token, kind)
        if cache[token].kind != kind:
            raise InvalidAlphabet(f"letter {token!r} used with two kinds")
        return cache[token]

    tapes = [[get(t, W.TAPE) for t in sect] for sect in tape_tokens]
    states = [[get(t, W.STATE) for t in part] for part in state_tokens]
    hw = hardware(tapes, states)
    rules = []
    for rd in d.get("rules", []):
        if rd.get("polarity", "positive") != "positive":
            raise InvalidAlphabet(
                f"rule {rd.get('name')!r}: machine files list positive rules only; inverses are generated"
            )
        domains = {int(j): [hw.token_map[t] for t in toks] for j, toks in rd.get("domains", {}).items()}
        rules.append(
            make_rule(hw, rd["name"], [(s["pattern"], s["replacement"]) for s in rd["subs"]], domains)
        )
    return Machine(hw, tuple(rules), name=d.get("name", ""))


def save_machine(m: Machine, path) -> None:
    with open(path, "w") as fh:
        json.dump(machine_to_dict(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_machine(path) -> Machine:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidAlphabet(f"malformed machine file {path}: {exc}") from exc
    return machine_from_dict(d)


def write_trace(comp: Computation, path, header: dict | None = None) -> None:
    """Trace file: JSON Lines, one record per step {index, rule, word}."""
    with open(path, "w") as fh:
        if header:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(
            json.dumps({"index": 0, "rule": None, "word": W.format_word(comp.words[0].flatten())}) + "\n"
        )
        for i, (r, w) in enumerate(zip(comp.rules, comp.words[1:]), start=1):
            fh.write(json.dumps({"index": i, "rule": r.name, "word": W.format_word(w.flatten())}) + "\n")


def read_trace(path, m: Machine) -> Computation:
    words_: list[AdmissibleWord] = []
    rules: list[SRule] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "word" not in rec:
                continue  # header line
            words_.append(parse_admissible(m.hardware, rec["word"]))
            if rec.get("rule"):
                rules.append(m.rule(rec["rule"]))
    return Computation(m, words_, rules, halt_reason="loaded")
