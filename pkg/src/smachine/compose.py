"""Composition of an S-machine with the adding machine.

Between every two consecutive k-letters a p-letter is inserted, and the
block around each p-letter doubles as an adding-machine tape: sector i
of the source machine becomes an odd sector holding both digit copies
plus an even working sector.  Every source rule theta becomes a modified
rule that flips the p-letters into their (theta,1) phase, one full set
of counter rules per block drives each p-letter to phase (theta,3), and
a transition rule returns all p-letters to their plain form.  One source
step therefore costs a full exponential counting run per nonempty
sector, which is the slowdown the construction exists for.

The phase-2 p-letters p_i(theta,2) are part of the composed hardware:
the counter copies need all three phases to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import machine as M
from . import words as W
from .errors import (
    BudgetExceeded,
    CopyLeak,
    MidSimulation,
    NotApplicable,
    NotFound,
    ShapeError,
)
from .machine import AdmissibleWord, Computation, Deterministic, Machine, SRule
from .words import GroupWord, Letter


@dataclass
class ComposedMachine:
    """The composed machine plus the builder's letter and rule maps."""

    source: Machine
    machine: Machine
    N: int
    p_plain: tuple[Letter, ...]
    p_decor: dict[tuple[int, str, int], Letter]
    zeros: dict[tuple[int, Letter], Letter]
    ones: dict[tuple[int, Letter], Letter]
    theta_bar: dict[str, str]
    copies: dict[tuple[str, int], tuple[str, ...]]
    transition: dict[str, str]

    @property
    def positive_rule_count(self) -> int:
        return len(self.machine.positive_rules)

    def zero_word(self, i: int, w: GroupWord) -> GroupWord:
        codes = []
        for sl in w:
            codes.append(W.intern_letter(self.zeros[(i, sl.letter)]) * sl.exponent)
        return GroupWord(tuple(codes), w.reduced_flag)

    def unzero_word(self, i: int, w: GroupWord) -> GroupWord:
        back = {v: k[1] for k, v in self.zeros.items() if k[0] == i}
        ones = {v for k, v in self.ones.items() if k[0] == i}
        codes = []
        for sl in w:
            if sl.letter in ones:
                raise CopyLeak(f"letter {sl.letter.token} from the working copy alphabet")
            src = back.get(sl.letter)
            if src is None:
                raise CopyLeak(f"letter {sl.letter.token} is not a 0-copy for sector {i}")
            codes.append(W.intern_letter(src) * sl.exponent)
        return GroupWord(tuple(codes), w.reduced_flag)


def _single_state_components(S: Machine, rule: SRule) -> dict[int, M.RuleComponent]:
    by_part: dict[int, M.RuleComponent] = {}
    for comp, (l, r) in zip(rule.components, rule.spans(S.hardware)):
        if l != r:
            raise ShapeError(f"rule {rule.name}: component spans parts {l}..{r}; expected single k-letter cores")
        by_part[l] = comp
    return by_part


def _derive_copies(S: Machine) -> tuple[dict, dict]:
    """0- and 1-copy letters for every (sector, source letter) pair."""
    zeros: dict[tuple[int, Letter], Letter] = {}
    ones: dict[tuple[int, Letter], Letter] = {}
    names_seen: dict[str, list[tuple[int, Letter]]] = {}
    for i, alph in enumerate(S.hardware.tape_alphabets, start=1):
        for l in alph.letters:
            names_seen.setdefault(l.name, []).append((i, l))
    for name, users in names_seen.items():
        per_sector: dict[int, Letter] = {}
        for i, l in users:
            if per_sector.get(i, l) != l:
                raise ShapeError(f"two distinct tape letters named {name!r} share a sector")
            per_sector[i] = l
    for name, users in sorted(names_seen.items()):
        tag_needed = len(users) > 1
        for i, l in users:
            sector_tag = i if tag_needed else None
            zeros[(i, l)] = Letter(f"{name}0", W.TAPE, sector_tag)
            ones[(i, l)] = Letter(f"{name}1", W.TAPE, sector_tag)
    return zeros, ones


@lru_cache(maxsize=None)
def compose_detail(S: Machine) -> ComposedMachine:
    """Build the composed machine; cached per source machine."""
    N = S.hardware.n_parts
    if N < 2:
        raise ShapeError("source machine needs at least two state parts")
    if S.hardware.n != N - 1:
        raise ShapeError("source machine must have one tape sector between consecutive parts")
    thetas = S.positive_rules
    per_theta_parts = {t.name: _single_state_components(S, t) for t in thetas}

    zeros, ones = _derive_copies(S)
    p_plain = tuple(Letter(f"p{i}", W.STATE) for i in range(1, N))
    p_decor: dict[tuple[int, str, int], Letter] = {}
    for i in range(1, N):
        for t in thetas:
            for j in (1, 2, 3):
                p_decor[(i, t.name, j)] = Letter(f"p{i}", W.STATE, copy_tag=f"{t.name}.{j}")

    # hardware: K_1 P_1 K_2 ... P_{N-1} K_N
    state_parts: list[list[Letter]] = []
    tape_sectors: list[list[Letter]] = []
    for i in range(1, N + 1):
        state_parts.append(sorted(S.hardware.state_part(i), key=lambda l: l.token))
        if i < N:
            p_part = [p_plain[i - 1]] + [p_decor[(i, t.name, j)] for t in thetas for j in (1, 2, 3)]
            state_parts.append(p_part)
            sector = sorted(S.hardware.sector_letters(i), key=lambda l: l.token)
            odd = [zeros[(i, l)] for l in sector] + [ones[(i, l)] for l in sector]
            even = [zeros[(i, l)] for l in sector]
            tape_sectors.append(odd)
            tape_sectors.append(even)
    hw = M.hardware(tape_sectors, state_parts)

    def z0(i: int, w: GroupWord) -> str:
        if not w.codes:
            return ""
        return W.format_word(
            GroupWord(tuple(W.intern_letter(zeros[(i, sl.letter)]) * sl.exponent for sl in w), True)
        )

    def zeros_list(i: int) -> list[Letter]:
        return [zeros[(i, l)] for l in S.hardware.sector_letters(i)]

    def ones_list(i: int) -> list[Letter]:
        return [ones[(i, l)] for l in S.hardware.sector_letters(i)]

    base_domains = {}
    for i in range(1, N):
        base_domains[2 * i - 1] = zeros_list(i)
        base_domains[2 * i] = []

    rules: list[SRule] = []
    theta_bar: dict[str, str] = {}
    copies: dict[tuple[str, int], tuple[str, ...]] = {}
    transition: dict[str, str] = {}

    for t in thetas:
        parts = per_theta_parts[t.name]
        # modified rule
        subs: list[tuple[str, str]] = []
        for j in range(1, N + 1):
            comp = parts.get(j)
            if comp is not None:
                u = f"{comp.u.states[0].token} {z0(j, comp.u.right)}".strip() if j < N else comp.u.states[0].token
                v = f"{comp.v.states[0].token} {z0(j, comp.v.right)}".strip() if j < N else comp.v.states[0].token
                subs.append((u, v))
            if j < N:
                nxt = parts.get(j + 1)
                left_u = z0(j, nxt.u.left) if nxt is not None else ""
                left_v = z0(j, nxt.v.left) if nxt is not None else ""
                pu = f"{left_u} {p_plain[j - 1].token}".strip()
                pv = f"{left_v} {p_decor[(j, t.name, 1)].token}".strip()
                subs.append((pu, pv))
        bar_name = f"{t.name}|bar"
        rules.append(M.make_rule(hw, bar_name, subs, dict(base_domains)))
        theta_bar[t.name] = bar_name

        # one full counter per block
        kprime: dict[int, Letter] = {}
        for j, comp in parts.items():
            kprime[j] = comp.v.states[0]
        for i in range(1, N):
            sector = sorted(S.hardware.sector_letters(i), key=lambda l: l.token)
            names: list[str] = []

            def copy_rule(name: str, p_from: int, p_to: int, left: str, right: str, dom1, dom2) -> str:
                full = f"{name}|Z{i}|{t.name}"
                subs_i: list[tuple[str, str]] = []
                for jj in range(1, N + 1):
                    if jj in kprime:
                        subs_i.append((kprime[jj].token, kprime[jj].token))
                    if jj < N:
                        if jj == i:
                            pu = p_decor[(i, t.name, p_from)].token
                            pv = p_decor[(i, t.name, p_to)].token
                            subs_i.append((pu, f"{left} {pv} {right}".strip()))
                        else:
                            tok = p_decor[(jj, t.name, 3 if jj < i else 1)].token
                            subs_i.append((tok, tok))
                dom = dict(base_domains)
                dom[2 * i - 1] = dom1
                dom[2 * i] = dom2
                for ss in range(1, N):
                    if ss != i:
                        dom[2 * ss - 1] = zeros_list(ss)
                        dom[2 * ss] = zeros_list(ss)
                rules.append(M.make_rule(hw, full, subs_i, dom))
                return full

            y1 = zeros_list(i) + ones_list(i)
            y2 = zeros_list(i)
            for l in sector:
                a0, a1 = zeros[(i, l)].token, ones[(i, l)].token
                names.append(copy_rule(f"r1({l.name})", 1, 1, f"{a1}^-1", a0, y1, y2))
            for l in sector:
                a0, a1 = zeros[(i, l)].token, ones[(i, l)].token
                names.append(copy_rule(f"r12({l.name})", 1, 2, f"{a0}^-1 {a1}", "", y1, y2))
            for l in sector:
                a0 = zeros[(i, l)].token
                names.append(copy_rule(f"r2({l.name})", 2, 2, a0, f"{a0}^-1", y1, y2))
            names.append(copy_rule("r21", 2, 1, "", "", y1, []))
            names.append(copy_rule("r13", 1, 3, "", "", [], y2))
            for l in sector:
                a0 = zeros[(i, l)].token
                names.append(copy_rule(f"r3({l.name})", 3, 3, a0, f"{a0}^-1", zeros_list(i), y2))
            copies[(t.name, i)] = tuple(names)

        # transition rule: p_j(theta,3) back to plain p_j
        subs_t: list[tuple[str, str]] = []
        for jj in range(1, N + 1):
            if jj in kprime:
                subs_t.append((kprime[jj].token, kprime[jj].token))
            if jj < N:
                subs_t.append((p_decor[(jj, t.name, 3)].token, p_plain[jj - 1].token))
        trans_name = f"trans|{t.name}"
        rules.append(M.make_rule(hw, trans_name, subs_t, dict(base_domains)))
        transition[t.name] = trans_name

    machine = Machine(hw, tuple(rules), name=f"{S.name or 'S'}∘Z")
    return ComposedMachine(S, machine, N, p_plain, p_decor, zeros, ones, theta_bar, copies, transition)


def compose(S: Machine) -> Machine:
    return compose_detail(S).machine


def lift_word(S: Machine, w: AdmissibleWord) -> AdmissibleWord:
    """Insert p_i at the right end of sector i and map the content to its
    0-copies; the working sectors start empty."""
    cm = compose_detail(S)
    w.validate()
    states: list[Letter] = []
    sectors: list[GroupWord] = []
    for k, q in enumerate(w.states):
        states.append(q)
        if k < len(w.sectors):
            states.append(cm.p_plain[k])
            sectors.append(cm.zero_word(k + 1, w.sectors[k]))
            sectors.append(W.EPSILON)
    out = AdmissibleWord(cm.machine.hardware, tuple(states), tuple(sectors))
    out.validate()
    return out


def project(S: Machine, w: AdmissibleWord) -> AdmissibleWord:
    """Erase the p-letters and map 0-copies back; refuses words that are
    mid-simulation (decorated p-letters) or carry 1-copy letters."""
    cm = compose_detail(S)
    N = cm.N
    states: list[Letter] = []
    sectors: list[GroupWord] = []
    for i in range(1, N + 1):
        states.append(w.states[2 * (i - 1)])
        if i < N:
            p = w.states[2 * i - 1]
            if p != cm.p_plain[i - 1]:
                raise MidSimulation(f"decorated p-letter {p.token} present")
            joined = W.concat(w.sectors[2 * i - 2], w.sectors[2 * i - 1])
            sectors.append(cm.unzero_word(i, joined))
    out = AdmissibleWord(S.hardware, tuple(states), tuple(sectors))
    out.validate()
    return out


def simulate_step(S: Machine, theta: SRule | str, w_lifted: AdmissibleWord, budget: int | None = None) -> Computation:
    """One source step through the composed machine: the modified rule,
    one full counter run per block, then the transition rule."""
    cm = compose_detail(S)
    t = theta if isinstance(theta, SRule) else S.rule(theta)
    if t.polarity != 1:
        raise NotApplicable("simulate_step drives positive source rules only")
    base = project(S, w_lifted)
    if not M.applicable(t, base):
        raise NotApplicable(f"rule {t.name} not applicable to the projected word")

    comp_machine = cm.machine
    words_ = [w_lifted]
    applied: list[SRule] = []
    sector_steps: list[int] = []

    bar = comp_machine.rule(cm.theta_bar[t.name])
    cur = M.apply_rule(bar, w_lifted)
    applied.append(bar)
    words_.append(cur)

    for i in range(1, cm.N):
        n_i = len(cur.sectors[2 * i - 2])
        sector_budget = budget if budget is not None else 8 * 2**n_i + 4
        p3 = cm.p_decor[(i, t.name, 3)]

        def at_rest(word: AdmissibleWord, i=i, p3=p3) -> bool:
            return word.states[2 * i - 1] == p3 and len(word.sectors[2 * i - 1]) == 0

        sub = M.run(
            comp_machine,
            cur,
            Deterministic(priority=cm.copies[(t.name, i)], forbid_growth=True),
            budget=sector_budget,
            target=at_rest,
        )
        if sub.halt_reason == "budget":
            raise BudgetExceeded(f"block {i} exhausted its budget of {sector_budget}", partial=sub)
        if sub.halt_reason != "target":
            raise NotFound(f"block {i} counter stalled before phase 3")
        sector_steps.append(sub.t)
        applied.extend(sub.rules)
        words_.extend(sub.words[1:])
        cur = sub.words[-1]

    trans = comp_machine.rule(cm.transition[t.name])
    cur = M.apply_rule(trans, cur)
    applied.append(trans)
    words_.append(cur)

    out = Computation(comp_machine, words_, applied, "target", strategy_used="composed")
    out.sector_steps = sector_steps
    return out


def simulate_chain(S: Machine, thetas, w_lifted: AdmissibleWord, budget: int | None = None):
    """Chain simulate_step over a rule sequence; returns the per-step
    computations."""
    out: list[Computation] = []
    cur = w_lifted
    for t in thetas:
        step = simulate_step(S, t, cur, budget=budget)
        out.append(step)
        cur = step.words[-1]
    return out
