import random

import pytest

from smachine import adding, machine as M, presentation as P, words as W
from smachine.errors import (
    AlphabetMismatch,
    DomainError,
    IndexOutOfRange,
    KappaCollision,
    NotAdmissible,
    UnrecognizedShape,
)
from smachine.words import Letter

from conftest import all_admissible_words


def commutator_presentation():
    a, b = Letter("a", W.TAPE), Letter("b", W.TAPE)
    rel = W.concat_all([W.single(a), W.single(b), W.single(a, -1), W.single(b, -1)])
    relator = P.Relator(P.canonical_rotation(rel), P.TAG_TRANSITION, ("manual",))
    return a, b, P.GroupPresentation((a, b), (relator,), {("manual",): 0})


# -- hub word ---------------------------------------------------------------


def test_hub_word_n1_empty():
    assert W.format_word(P.hub_word(W.EPSILON, 1)) == "kappa1 kappa2 kappa1^-1 kappa2^-1"


def test_hub_word_n1_single_letter():
    a = Letter("a", W.TAPE)
    w = P.hub_word(W.single(a), 1)
    assert W.format_word(w) == "a^-1 kappa1 a kappa2 a^-1 kappa1^-1 a kappa2^-1"
    assert len(P.hub_word_raw(W.single(a), 1)) == 8 == 4 * 1 * (1 + 1)


def test_hub_word_raw_length_formula():
    rng = random.Random(1)
    a, b = Letter("a", W.TAPE), Letter("b", W.TAPE)
    for _ in range(60):
        n = rng.randint(1, 3)
        k = rng.randint(0, 6)
        codes = []
        signed = [W.intern_letter(l) * s for l in (a, b) for s in (1, -1)]
        while len(codes) < k:
            c = rng.choice(signed)
            if codes and codes[-1] == -c:
                continue
            codes.append(c)
        u = W.GroupWord(tuple(codes), True)
        assert len(P.hub_word_raw(u, n)) == 4 * n * (len(u) + 1)
        assert P.hub_word(u, n).codes == W.reduce(P.hub_word_raw(u, n)).codes
        # no cancellation across kappa boundaries: already reduced
        assert len(P.hub_word(u, n)) == 4 * n * (len(u) + 1)


def test_hub_word_reduced_already():
    a = Letter("a", W.TAPE)
    u = W.concat(W.single(a), W.single(a))
    k = P.hub_word(u, 2)
    assert len(k) == 4 * 2 * (2 + 1)


def test_hub_word_kappa_collision():
    with pytest.raises(KappaCollision):
        P.hub_word(W.single(P.kappa_letter(1)), 1)
    with pytest.raises(DomainError):
        P.hub_word(W.EPSILON, 0)


# -- presentation generation --------------------------------------------------


def test_counts_minimal_machine():
    # one rule touching all parts, one tape letter, no specials, N=1
    q1, q2 = Letter("q1", W.STATE), Letter("q2", W.STATE)
    a = Letter("a", W.TAPE)
    hw = M.hardware([[a]], [[q1], [q2]])
    rule = M.make_rule(hw, "t", [("q1", "q1 a"), ("q2", "q2")])
    m = M.Machine(hw, (rule,))
    w0 = M.parse_admissible(hw, "q1 q2")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    assert len(pres.by_tag(P.TAG_AUXILIARY)) == 1
    assert len(pres.by_tag(P.TAG_HUB)) == 1
    assert len(pres.by_tag(P.TAG_TRANSITION)) == 2
    assert len(pres.by_tag(P.TAG_FIXING)) == 0


def test_fixing_relator_count():
    # rule not touching part 2; |Q_2| = 2 -> two fixing relators per rule
    q1 = Letter("q1", W.STATE)
    q2a, q2b = Letter("q2a", W.STATE), Letter("q2b", W.STATE)
    a = Letter("a", W.TAPE)
    hw = M.hardware([[a]], [[q1], [q2a, q2b]])
    rule = M.make_rule(hw, "t", [("q1", "q1")])
    m = M.Machine(hw, (rule,))
    pres = P.generate_presentation(m, P.HubParams(1, M.parse_admissible(hw, "q1 q2a")))
    assert len(pres.by_tag(P.TAG_FIXING)) == 2


def test_relators_reduced_and_tagged():
    m = adding.build_adding("a")
    w0 = M.parse_admissible(m.hardware, "L p(3) R")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    for r in pres.relators:
        assert W.reduce(r.word).codes == r.word.codes
        assert len(r.word) > 0
        assert r.tag in P.TAG_ORDER
    tags = [r.tag for r in pres.relators]
    assert tags == sorted(tags, key=P.TAG_ORDER.index)


def test_presentation_deterministic_text():
    m = adding.build_adding("a")
    w0 = M.parse_admissible(m.hardware, "L p(3) R")
    t1 = P.format_presentation(P.generate_presentation(m, P.HubParams(1, w0)))
    t2 = P.format_presentation(P.generate_presentation(m, P.HubParams(1, w0)))
    assert t1 == t2
    assert t1.startswith("! generators: ")
    assert t1.splitlines()[1].startswith("! tags: ")


def test_presentation_rejects_foreign_w0():
    m = adding.build_adding("a")
    other = adding.build_adding("ab")
    w0 = M.parse_admissible(other.hardware, "L p(3) R")
    with pytest.raises(NotAdmissible):
        P.generate_presentation(m, P.HubParams(1, w0))


# -- traces -------------------------------------------------------------------


def test_verify_trace_commutator():
    # one commutator application carries ab to ba
    a, b, pres = commutator_presentation()
    start = W.concat(W.single(a), W.single(b))
    end = W.concat(W.single(b), W.single(a))
    candidates = [
        P.RelatorTrace(start, (P.TraceStep(0, exp, cw),), end)
        for exp in (1, -1)
        for cw in (W.EPSILON, W.single(a), W.single(b), W.concat(W.single(b), W.single(a)))
    ]
    assert any(P.verify_trace(pres, t) for t in candidates)
    bad = P.RelatorTrace(start, (P.TraceStep(0, 1, W.EPSILON),), W.concat(W.single(a), W.single(a)))
    assert not P.verify_trace(pres, bad)


def test_verify_empty_trace():
    a, b, pres = commutator_presentation()
    w = W.concat(W.single(a), W.single(b))
    assert P.verify_trace(pres, P.RelatorTrace(w, (), w))
    other = W.concat(W.single(b), W.single(a))
    assert not P.verify_trace(pres, P.RelatorTrace(w, (), other))


def test_verify_trace_index_errors():
    a, b, pres = commutator_presentation()
    w = W.single(a)
    with pytest.raises(IndexOutOfRange):
        P.verify_trace(pres, P.RelatorTrace(w, (P.TraceStep(5, 1, W.EPSILON),), w))
    with pytest.raises(IndexOutOfRange):
        P.verify_trace(pres, P.RelatorTrace(w, (P.TraceStep(0, 2, W.EPSILON),), w))


def test_forward_constructed_traces_verify_and_corruptions_fail():
    m = adding.build_adding("a")
    w0 = M.parse_admissible(m.hardware, "L p(3) R")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    rng = random.Random(99)
    gens = [l for l in pres.generators]
    for _ in range(40):
        start = W.from_codes(
            [W.intern_letter(rng.choice(gens)) * rng.choice([1, -1]) for _ in range(rng.randint(0, 6))]
        )
        steps = []
        prod = start
        for _ in range(rng.randint(1, 4)):
            idx = rng.randrange(len(pres.relators))
            exp = rng.choice([1, -1])
            conj = W.from_codes(
                [W.intern_letter(rng.choice(gens)) * rng.choice([1, -1]) for _ in range(rng.randint(0, 3))]
            )
            steps.append(P.TraceStep(idx, exp, conj))
            rel = pres.relators[idx].word
            if exp == -1:
                rel = W.invert(rel)
            prod = W.concat(prod, W.concat_all([W.invert(conj), rel, conj]))
        trace = P.RelatorTrace(start, tuple(steps), prod)
        assert P.verify_trace(pres, trace)
        # corrupt one step's exponent
        bad = list(steps)
        s0 = bad[0]
        bad[0] = P.TraceStep(s0.relator_index, -s0.exponent, s0.conjugator)
        assert not P.verify_trace(pres, P.RelatorTrace(start, tuple(bad), prod))


def test_rule_application_traces_exhaustive_small():
    m = adding.build_adding("a")
    w0 = M.parse_admissible(m.hardware, "L p(3) R")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    checked = 0
    for w in all_admissible_words(m, 5):
        for rule in m.rules:
            if M.applicable(rule, w):
                after = M.apply_rule(rule, w)
                tr = P.rule_application_trace(pres, m, rule, w, after)
                assert P.verify_trace(pres, tr)
                if rule.polarity == 1:
                    # context-free patterns: one cell per part, one per tape letter
                    assert tr.length == w.n_states + w.a_length
                checked += 1
    assert checked > 200


def test_rule_trace_with_context_and_fixing(two_part_machine):
    m = two_part_machine
    w0 = M.parse_admissible(m.hardware, "q q'")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    for text in ("q q'", "q a q'", "q b a q'", "q a^-1 q'"):
        w = M.parse_admissible(m.hardware, text)
        for rule in m.rules:
            if M.applicable(rule, w):
                tr = P.rule_application_trace(pres, m, rule, w)
                assert P.verify_trace(pres, tr)


# -- area oracle --------------------------------------------------------------


def test_area_examples():
    a, b, pres = commutator_presentation()
    comm = W.concat_all([W.single(a), W.single(b), W.single(a, -1), W.single(b, -1)])
    assert P.brute_force_area(pres, comm) == 1
    w2 = W.concat_all(
        [W.single(a), W.single(a), W.single(b), W.single(a, -1), W.single(a, -1), W.single(b, -1)]
    )
    assert P.brute_force_area(pres, w2) == 2
    assert P.brute_force_area(pres, W.EPSILON) == 0


def test_area_caps():
    a, b, pres = commutator_presentation()
    w = W.concat(W.single(a), W.single(b))
    assert P.brute_force_area(pres, w, max_len=4, max_area=3) is None
    with pytest.raises(DomainError):
        P.brute_force_area(pres, w, max_len=20)


def test_area_subadditive():
    a, b, pres = commutator_presentation()
    comm = W.concat_all([W.single(a), W.single(b), W.single(a, -1), W.single(b, -1)])
    w1 = comm
    w2 = W.concat_all([W.single(b), W.single(a), W.single(b, -1), W.single(a, -1)])
    both = W.concat(w1, w2)
    a1, a2, a12 = (P.brute_force_area(pres, w) for w in (w1, w2, both))
    assert a12 <= a1 + a2


def test_hub_relator_area_one():
    # two-part machine keeps |K(W0)| = 4(|W0|+1) = 12 within the oracle cap
    q1, q2 = Letter("hq1", W.STATE), Letter("hq2", W.STATE)
    hw = M.hardware([[]], [[q1], [q2]])
    rule = M.make_rule(hw, "t", [("hq1", "hq1"), ("hq2", "hq2")])
    m = M.Machine(hw, (rule,))
    w0 = M.parse_admissible(hw, "hq1 hq2")
    pres = P.generate_presentation(m, P.HubParams(1, w0))
    hub = P.hub_word(w0.flatten(), 1)
    assert len(hub) == 12
    assert P.brute_force_area(pres, hub, max_len=12) == 1


# -- sigma encoding -----------------------------------------------------------


def test_sigma_delta_exponents():
    x = Letter("x", W.TAPE)
    sig = P.sigma_encode([(W.single(x), "q1")], n=0)
    deltas = [sl for sl in sig.flatten() if sl.letter.name == "delta"]
    assert len(deltas) == 1 and deltas[0].exponent == 1
    v = W.reduce(W.concat(W.single(x), W.single(x, -1), reduce_after=False))
    sig0 = P.sigma_encode([(v, "q1")], n=0)
    assert not [sl for sl in sig0.flatten() if sl.letter.name == "delta"]


def test_sigma_state_slot_count():
    x = Letter("x", W.TAPE)
    sig = P.sigma_encode([(W.single(x), "q1")], n=3)
    assert sig.n_states == 23  # 3 + 17 + 3
    sig2 = P.sigma_encode([(W.single(x), "q1"), (W.EPSILON, "q2")], n=1)
    assert sig2.n_states == 3 + 17 * 2 + 3


def test_sigma_round_trips_admissible():
    x, y = Letter("x", W.TAPE), Letter("y", W.TAPE)
    v = W.concat(W.single(x), W.single(y, -1))
    sig = P.sigma_encode([(v, "qq")], n=2)
    again = M.parse_admissible(sig.hardware, sig.flatten())
    assert again.flatten().codes == sig.flatten().codes


def test_sigma_rejects_state_content():
    q = Letter("qbad", W.STATE)
    with pytest.raises(AlphabetMismatch):
        P.sigma_encode([(W.single(q), "q1")], n=0)


# -- TM command forms ----------------------------------------------------------


def test_classify_forms():
    plain = P.TMPiece("plain", "q1", "q1'")
    consume = P.TMPiece("consume", "q2", "q2'", a="a")
    marker = P.TMPiece("marker", "q2", "q2'")
    assert P.classify_tm_command((plain, consume)) == P.TMCommandForm(1, 1)
    assert P.classify_tm_command((plain, marker, plain)) == P.TMCommandForm(2, 1)
    with pytest.raises(UnrecognizedShape):
        P.classify_tm_command((plain, consume, marker))
    with pytest.raises(UnrecognizedShape):
        P.classify_tm_command((plain, plain))
    with pytest.raises(UnrecognizedShape):
        P.classify_tm_command(())
