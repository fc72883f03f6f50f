"""Shared builders for toy machines and random words."""

from __future__ import annotations

import itertools
import random

import pytest

from smachine import machine as M, words as W
from smachine.words import Letter


def letters(*names, kind=W.TAPE):
    return [Letter(n, kind) for n in names]


@pytest.fixture
def two_part_machine():
    """Q1={q}, Y1={a,b}, Q2={q'}, with a plain rule, a domain-restricted
    rule, and a context rule."""
    q, qq = letters("q", "q'", kind=W.STATE)
    a, b = letters("a", "b")
    hw = M.hardware([[a, b]], [[q], [qq]])
    plain = M.make_rule(hw, "plain", [("q", "q a"), ("q'", "q'")])
    gated = M.make_rule(hw, "gated", [("q", "q"), ("q'", "b q'")], {1: [a]})
    ctx = M.make_rule(hw, "ctx", [("q", "q"), ("a q'", "b q'")])
    return M.Machine(hw, (plain, gated, ctx), name="twopart")


def reduced_words(alphabet, max_len):
    """All freely reduced words over alphabet (as GroupWords), length <= max_len."""
    out = [W.EPSILON]
    frontier = [()]
    signed = [W.intern_letter(l) * s for l in alphabet for s in (1, -1)]
    for _ in range(max_len):
        nxt = []
        for codes in frontier:
            for c in signed:
                if codes and codes[-1] == -c:
                    continue
                new = codes + (c,)
                nxt.append(new)
                out.append(W.GroupWord(new, True))
        frontier = nxt
    return out


def random_reduced_word(rng: random.Random, alphabet, max_len):
    n = rng.randint(0, max_len)
    codes = []
    signed = [W.intern_letter(l) * s for l in alphabet for s in (1, -1)]
    while len(codes) < n:
        c = rng.choice(signed)
        if codes and codes[-1] == -c:
            continue
        codes.append(c)
    return W.GroupWord(tuple(codes), True)


def all_admissible_words(m: M.Machine, max_total_len: int):
    """Every admissible word of the machine with |W| <= max_total_len."""
    hw = m.hardware
    per_sector = []
    budget = max_total_len - hw.n_parts
    for i in range(1, hw.n + 1):
        per_sector.append(reduced_words(sorted(hw.sector_letters(i), key=lambda l: l.token), budget))
    out = []
    for states in itertools.product(*(q.sorted_letters() for q in hw.state_alphabets)):
        for sectors in itertools.product(*per_sector):
            if sum(len(s) for s in sectors) + hw.n_parts > max_total_len:
                continue
            out.append(M.AdmissibleWord(hw, tuple(states), tuple(sectors)))
    return out
