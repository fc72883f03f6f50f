"""Group presentations read off an S-machine, relator-trace certificates,
and a brute-force minimal-area oracle for tiny presentations.

A machine step W ->(tau) W' corresponds in the group to the identity
tau^-1 W tau = W'.  The certificate for one step is therefore built on
the conjugated start word tau^-1 W tau: pushing tau through W consumes
one transition (or fixing) relator per state part and one commutation
relator per tape letter crossed, right to left.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from . import machine as M
from . import words as W
from .errors import (
    AlphabetMismatch,
    DomainError,
    IndexOutOfRange,
    KappaCollision,
    NotAdmissible,
    UnrecognizedShape,
)
from .machine import AdmissibleWord, Machine, SRule
from .words import EPSILON, GroupWord, Letter

TAG_TRANSITION = "transition"
TAG_FIXING = "fixing"
TAG_AUXILIARY = "auxiliary"
TAG_HUB = "hub"

TAG_ORDER = (TAG_TRANSITION, TAG_FIXING, TAG_AUXILIARY, TAG_HUB)


@lru_cache(maxsize=None)
def kappa_letter(j: int) -> Letter:
    return Letter(f"kappa{j}", W.KAPPA)


@lru_cache(maxsize=None)
def rule_letter(name: str) -> Letter:
    return Letter(name, W.RULE)


@lru_cache(maxsize=None)
def special_letter(name: str) -> Letter:
    return Letter(name, W.SPECIAL)


# ---------------------------------------------------------------------------
# hub word


def hub_word_raw(u: GroupWord, N: int) -> GroupWord:
    """The unreduced hub word; its length is exactly 4N(|u|+1)."""
    if N < 1:
        raise DomainError("need at least one kappa pair")
    if any(sl.letter.kind == W.KAPPA for sl in u):
        raise KappaCollision("hub input already contains kappa letters")
    u = W.reduce(u)
    ui = W.invert(u)
    first: list[GroupWord] = []
    for j in range(1, N + 1):
        first += [ui, W.single(kappa_letter(2 * j - 1)), u, W.single(kappa_letter(2 * j))]
    second: list[GroupWord] = []
    for j in range(1, N + 1):
        second += [ui, W.single(kappa_letter(2 * j - 1), -1), u, W.single(kappa_letter(2 * j), -1)]
    return W.concat_all(first + second, reduce_after=False)


def hub_word(u: GroupWord, N: int) -> GroupWord:
    """K(u), freely reduced."""
    return W.reduce(hub_word_raw(u, N))


@dataclass(frozen=True)
class HubParams:
    N: int
    W0: AdmissibleWord

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("need at least one kappa pair")


# ---------------------------------------------------------------------------
# presentation


def _rotation_key(code: int) -> tuple:
    return (W.letter_of(code).token, 0 if code > 0 else 1)


def cyclic_reduce(w: GroupWord) -> GroupWord:
    codes = list(W.reduce(w).codes)
    while len(codes) >= 2 and codes[0] == -codes[-1]:
        codes = codes[1:-1]
    return GroupWord(tuple(codes), True)


def canonical_rotation(w: GroupWord) -> GroupWord:
    """Lexicographically least cyclic rotation of the cyclic reduction."""
    w = cyclic_reduce(w)
    if len(w) <= 1:
        return w
    codes = w.codes
    best = min(
        (codes[k:] + codes[:k] for k in range(len(codes))),
        key=lambda cs: [_rotation_key(c) for c in cs],
    )
    return GroupWord(best, True)


@dataclass(frozen=True)
class Relator:
    word: GroupWord
    tag: str
    source: tuple


@dataclass
class GroupPresentation:
    generators: tuple[Letter, ...]
    relators: tuple[Relator, ...]
    source_index: dict[tuple, int]

    def relator(self, i: int) -> Relator:
        if not (0 <= i < len(self.relators)):
            raise IndexOutOfRange(f"relator index {i} out of range")
        return self.relators[i]

    def index_of(self, source: tuple) -> int:
        try:
            return self.source_index[source]
        except KeyError:
            raise IndexOutOfRange(f"no relator generated from {source!r}") from None

    def by_tag(self, tag: str) -> list[Relator]:
        return [r for r in self.relators if r.tag == tag]


def generate_presentation(
    m: Machine,
    hub: HubParams,
    specials: Iterable[Letter] = (),
) -> GroupPresentation:
    """Transition, fixing, and auxiliary relators for every positive rule,
    plus the hub relator K(W0)."""
    hub.W0.validate()
    if hub.W0.hardware != m.hardware:
        raise NotAdmissible(0, "accepting word uses a different hardware")
    specials = tuple(specials)
    hw = m.hardware

    tape_letters = sorted(
        set().union(*(y.letters for y in hw.tape_alphabets)) if hw.tape_alphabets else set(),
        key=lambda l: l.token,
    )
    state_letters = [l for q in hw.state_alphabets for l in q.sorted_letters()]
    kappas = [kappa_letter(j) for j in range(1, 2 * hub.N + 1)]
    rule_letters = [rule_letter(r.name) for r in m.positive_rules]
    generators = tuple(state_letters + tape_letters + list(specials) + kappas + rule_letters)

    relators: list[Relator] = []
    source_index: dict[tuple, int] = {}
    seen: dict[tuple, int] = {}

    def add(word: GroupWord, tag: str, source: tuple) -> None:
        canon = canonical_rotation(word)
        idx = seen.get(canon.codes)
        if idx is None:
            idx = len(relators)
            relators.append(Relator(canon, tag, source))
            seen[canon.codes] = idx
        source_index[source] = idx

    for rule in m.positive_rules:
        tau = W.single(rule_letter(rule.name))
        taui = W.invert(tau)
        spans = rule.spans(hw)
        for ci, comp in enumerate(rule.components):
            rel = W.concat_all([taui, comp.u.flat(), tau, W.invert(comp.v.flat())])
            add(rel, TAG_TRANSITION, (TAG_TRANSITION, rule.name, ci))
        touched = set()
        for l, r in spans:
            touched.update(range(l, r + 1))
        for part in range(1, hw.n_parts + 1):
            if part in touched:
                continue
            for q in hw.state_alphabets[part - 1].sorted_letters():
                rel = W.concat_all([taui, W.single(q), tau, W.single(q, -1)])
                add(rel, TAG_FIXING, (TAG_FIXING, rule.name, q))
        for x in list(tape_letters) + list(specials):
            rel = W.concat_all([tau, W.single(x), taui, W.single(x, -1)])
            add(rel, TAG_AUXILIARY, (TAG_AUXILIARY, rule.name, x))

    add(hub_word(hub.W0.flatten(), hub.N), TAG_HUB, (TAG_HUB,))

    order = {t: i for i, t in enumerate(TAG_ORDER)}
    perm = sorted(range(len(relators)), key=lambda i: (order[relators[i].tag], i))
    remap = {old: new for new, old in enumerate(perm)}
    relators = [relators[old] for old in perm]
    source_index = {k: remap[v] for k, v in source_index.items()}
    return GroupPresentation(generators, tuple(relators), source_index)


def format_presentation(p: GroupPresentation) -> str:
    lines = [
        "! generators: " + " ".join(l.token for l in p.generators),
        "! tags: " + " ".join(r.tag for r in p.relators),
    ]
    lines += [W.format_word(r.word) for r in p.relators]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# relator traces


@dataclass(frozen=True)
class TraceStep:
    relator_index: int
    exponent: int
    conjugator: GroupWord


@dataclass
class RelatorTrace:
    start: GroupWord
    steps: tuple[TraceStep, ...]
    end: GroupWord

    @property
    def length(self) -> int:
        return len(self.steps)


def verify_trace(p: GroupPresentation, t: RelatorTrace) -> bool:
    """start times the product of conjugates freely equals end."""
    prod = W.reduce(t.start)
    for step in t.steps:
        if step.exponent not in (1, -1):
            raise IndexOutOfRange(f"exponent must be +-1, got {step.exponent}")
        rel = p.relator(step.relator_index).word
        if step.exponent == -1:
            rel = W.invert(rel)
        cell = W.concat_all([W.invert(step.conjugator), rel, step.conjugator])
        prod = W.concat(prod, cell)
    return prod.codes == W.reduce(t.end).codes


def find_conjugation(orig: GroupWord, stored: GroupWord):
    """(exp, y) with orig = y^-1 stored^exp y, scanning cyclic rotations."""
    orig = W.reduce(orig)
    for exp, base in ((1, stored), (-1, W.invert(stored))):
        codes = base.codes
        if len(codes) != len(orig.codes):
            continue
        for k in range(max(1, len(codes))):
            if codes[k:] + codes[:k] == orig.codes:
                return exp, GroupWord(codes[:k], True)
    return None


def rule_application_trace(
    p: GroupPresentation,
    m: Machine,
    rule: SRule,
    before: AdmissibleWord,
    after: AdmissibleWord | None = None,
) -> RelatorTrace:
    """Certificate that one rule application holds in the group.

    Returns a trace from the conjugated word tau^-1 W tau to W', with one
    cell per state part and one per tape letter crossed (plus cancelling
    insertions where a context did not match literally).
    """
    if after is None:
        after = M.apply_rule(rule, before)
    base_name = rule.name[:-3] if rule.name.endswith("^-1") else rule.name
    tau = W.single(rule_letter(base_name), rule.polarity)
    taui = W.invert(tau)

    spans = rule.spans(m.hardware)
    comp_start = {l: (ci, comp, l, r) for ci, (comp, (l, r)) in enumerate(zip(rule.components, spans))}

    # contexts that are literally present get consumed into the transition
    # cell; the rest need a cancelling insertion
    n_sec = len(before.sectors)
    pre_used = [0] * n_sec
    suf_used = [0] * n_sec
    for ci, comp, l, r in sorted(comp_start.values(), key=lambda e: e[2]):
        ctx = comp.u.left.codes
        if ctx and l >= 2:
            sec = before.sectors[l - 2].codes
            if len(ctx) + pre_used[l - 2] <= len(sec) and sec[len(sec) - len(ctx) :] == ctx:
                suf_used[l - 2] = len(ctx)
        ctx = comp.u.right.codes
        if ctx and r - 1 < n_sec:
            sec = before.sectors[r - 1].codes
            if len(ctx) <= len(sec) and sec[: len(ctx)] == ctx:
                pre_used[r - 1] = len(ctx)

    items: list[tuple[GroupWord, GroupWord, tuple]] = []

    def tape_item(code: int) -> None:
        sl = GroupWord((code,), True)
        items.append((sl, sl, (TAG_AUXILIARY, base_name, W.letter_of(code))))

    k = 0
    while k < before.n_states:
        part = k + 1
        if part in comp_start:
            ci, comp, l, r = comp_start[part]
            if comp.u.left.codes and not (l >= 2 and suf_used[l - 2]):
                for code in W.invert(comp.u.left).codes:
                    tape_item(code)
            items.append((comp.u.flat(), comp.v.flat(), (TAG_TRANSITION, base_name, ci)))
            if comp.u.right.codes and not (r - 1 < n_sec and pre_used[r - 1]):
                for code in W.invert(comp.u.right).codes:
                    tape_item(code)
            nxt = r
        else:
            q = W.single(before.states[k])
            items.append((q, q, (TAG_FIXING, base_name, before.states[k])))
            nxt = k + 1
        if nxt - 1 < n_sec:
            sec = before.sectors[nxt - 1].codes
            for code in sec[pre_used[nxt - 1] : len(sec) - suf_used[nxt - 1]]:
                tape_item(code)
        k = nxt

    # suffix products of the replacements
    suffixes: list[GroupWord] = [EPSILON] * (len(items) + 1)
    for j in range(len(items) - 1, -1, -1):
        suffixes[j] = W.concat(items[j][1], suffixes[j + 1])

    steps: list[TraceStep] = []
    for j in range(len(items) - 1, -1, -1):
        sigma, zeta, key = items[j]
        idx = p.index_of(key)
        rho = W.concat_all([taui, sigma, tau, W.invert(zeta)])
        found = find_conjugation(rho, p.relator(idx).word)
        if found is None:
            raise RuntimeError(f"cell for {key} is not a conjugate of its stored relator")
        e, y = found
        steps.append(TraceStep(idx, -e, W.concat(y, suffixes[j])))

    start = W.concat_all([taui, before.flatten(), tau])
    return RelatorTrace(start, tuple(steps), after.flatten())


# ---------------------------------------------------------------------------
# brute-force area oracle


def brute_force_area(
    p: GroupPresentation,
    w: GroupWord,
    max_len: int = 12,
    max_area: int | None = None,
) -> int | None:
    """Minimal relator-application count taking w to the empty word while
    every intermediate stays within max_len; None when the caps cut off
    every path.  Relators longer than max_len are unusable under the cap
    and are skipped."""
    if max_len > 12:
        raise DomainError("the exhaustive oracle is capped at max_len 12")
    w = W.reduce(w)
    if len(w) > max_len:
        raise DomainError(f"start word longer than max_len {max_len}")
    moves: set[tuple[int, ...]] = set()
    for rel in p.relators:
        codes = rel.word.codes
        if not codes or len(codes) > max_len:
            continue
        for base in (codes, W.invert(rel.word).codes):
            for k in range(len(base)):
                moves.add(base[k:] + base[:k])
    if not w.codes:
        return 0
    from collections import deque

    dist: dict[tuple[int, ...], int] = {w.codes: 0}
    queue = deque([w.codes])
    while queue:
        cur = queue.popleft()
        d = dist[cur]
        if max_area is not None and d >= max_area:
            continue
        for rot in moves:
            for pos in range(len(cur) + 1):
                new = W.GroupWord(cur[:pos] + rot + cur[pos:], False)
                new = W.reduce(new).codes
                if len(new) > max_len or new in dist:
                    continue
                if not new:
                    return d + 1
                dist[new] = d + 1
                queue.append(new)
    return None


# ---------------------------------------------------------------------------
# Turing command forms


@dataclass(frozen=True)
class TMPiece:
    """One tape's piece of a normalized command."""

    kind: str  # plain | consume | marker
    q: str
    q2: str
    a: str | None = None


TMCommand = tuple[TMPiece, ...]


@dataclass(frozen=True)
class TMCommandForm:
    form: int
    tape_index: int


def classify_tm_command(cmd: Sequence[TMPiece]) -> TMCommandForm:
    """Form 1: exactly one piece consumes a tape letter; form 2: exactly
    one piece rewrites at the left marker.  Everything else is refused."""
    consumes = [i for i, p in enumerate(cmd) if p.kind == "consume"]
    markers = [i for i, p in enumerate(cmd) if p.kind == "marker"]
    plain_ok = all(p.kind in ("plain", "consume", "marker") for p in cmd)
    if not cmd or not plain_ok:
        raise UnrecognizedShape("empty or malformed command")
    if len(consumes) == 1 and not markers:
        return TMCommandForm(1, consumes[0])
    if len(markers) == 1 and not consumes:
        return TMCommandForm(2, markers[0])
    raise UnrecognizedShape("command matches neither normalized form")


# ---------------------------------------------------------------------------
# sigma encoding


def _sigma_letters(k: int, tapes) -> tuple[list[list[Letter]], list[list[Letter]]]:
    alpha, omega, delta = special_letter("alpha"), special_letter("omega"), special_letter("delta")

    def st(name: str) -> Letter:
        return Letter(name, W.STATE)

    parts: list[list[Letter]] = [[st("E(0)")], [st("x(0)")], [st("F(0)")]]
    sectors: list[list[Letter]] = [[alpha], [alpha]]
    for i in range(1, k + 1):
        v_i, q_i = tapes[i - 1]
        y_i = sorted(W.letters_used(v_i), key=lambda l: l.token)
        for l in y_i:
            if l.kind != W.TAPE:
                raise AlphabetMismatch(f"tape content letter {l.token} must be a tape letter")
        sectors.append([])  # F(i-1 block end) .. E(i)
        parts.append([st(f"E({i})")])
        sectors.append(y_i)
        parts.append([st(f"x({i})")])
        sectors.append(y_i)
        parts.append([st(f"F({i})"), st(f"F_{q_i}({i})")])
        sectors.append([])
        parts.append([st(f"E'({i})")])
        sectors.append([])
        standard = ["p", "q", "r", "s", "t", "u", "pb", "qb", "rb", "sb", "tb", "ub"]
        for nm in standard:
            parts.append([st(f"{nm}({i})")])
            sectors.append([delta])
        parts.append([st(f"F'({i})"), st(f"F'_{q_i}({i})")])
    sectors.append([])
    parts.append([st(f"E'({k+1})")])
    sectors.append([omega])
    parts.append([st(f"x'({k+1})")])
    sectors.append([omega])
    parts.append([st(f"F'({k+1})")])
    return parts, sectors


def sigma_encode(tapes: Sequence[tuple[GroupWord, str]], n: int) -> AdmissibleWord:
    """Encode a machine configuration (one (content, state) pair per tape)
    as the standard admissible word, with delta-block exponents given by
    the algebraic letter-degree sum of each content word."""
    k = len(tapes)
    if k < 1:
        raise AlphabetMismatch("need at least one tape")
    parts, sectors = _sigma_letters(k, tapes)
    hw = M.hardware(sectors, parts)
    alpha, omega, delta = special_letter("alpha"), special_letter("omega"), special_letter("delta")

    def power(l: Letter, e: int) -> GroupWord:
        sign = 1 if e >= 0 else -1
        return GroupWord(tuple(W.intern_letter(l) * sign for _ in range(abs(e))), True)

    states: list[Letter] = [hw.token_map["E(0)"], hw.token_map["x(0)"], hw.token_map["F(0)"]]
    secs: list[GroupWord] = [power(alpha, n), EPSILON]
    for i in range(1, k + 1):
        v_i, q_i = tapes[i - 1]
        secs.append(EPSILON)
        states.append(hw.token_map[f"E({i})"])
        secs.append(W.reduce(v_i))
        states.append(hw.token_map[f"x({i})"])
        secs.append(EPSILON)
        states.append(hw.token_map[f"F_{q_i}({i})"])
        secs.append(EPSILON)
        states.append(hw.token_map[f"E'({i})"])
        secs.append(EPSILON)
        states.append(hw.token_map[f"p({i})"])
        secs.append(power(delta, W.algebraic_degree_sum(v_i)))
        states.append(hw.token_map[f"q({i})"])
        for nm in ("r", "s", "t", "u", "pb", "qb", "rb", "sb", "tb", "ub"):
            secs.append(EPSILON)
            states.append(hw.token_map[f"{nm}({i})"])
        secs.append(EPSILON)
        states.append(hw.token_map[f"F'_{q_i}({i})"])
    secs.append(EPSILON)
    states.append(hw.token_map[f"E'({k+1})"])
    secs.append(EPSILON)
    states.append(hw.token_map[f"x'({k+1})"])
    secs.append(power(omega, n))
    states.append(hw.token_map[f"F'({k+1})"])
    out = AdmissibleWord(hw, tuple(states), tuple(secs))
    out.validate()
    return out
