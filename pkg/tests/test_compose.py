import itertools
import math
import random

import pytest

from smachine import adding, compose as C, machine as M, words as W
from smachine.errors import CopyLeak, MidSimulation, NotApplicable, ShapeError
from smachine.words import Letter


def toy_source(n_parts=2, n_thetas=1, n_letters=1, with_context=False):
    """A composable machine: k-parts k1..kN, one sector between each,
    identity-shaped rules (optionally with tape context on the p-side)."""
    states = [[Letter(f"k{i}", W.STATE)] for i in range(1, n_parts + 1)]
    tape_names = "xyzw"[:n_letters]
    tapes = [
        [Letter(f"{t}{i}", W.TAPE) for t in tape_names] for i in range(1, n_parts)
    ]
    hw = M.hardware(tapes, states)
    rules = []
    for j in range(n_thetas):
        subs = []
        for i in range(1, n_parts + 1):
            tok = f"k{i}"
            if with_context and i == 1:
                subs.append((tok, f"{tok} {tape_names[0]}1"))
            else:
                subs.append((tok, tok))
        rules.append(M.make_rule(hw, f"th{j}", subs))
    return M.Machine(hw, tuple(rules), name=f"toy{n_parts}")


def test_p_part_letters():
    S = toy_source(2, 1, 1)
    cm = C.compose_detail(S)
    p_part = sorted(l.token for l in cm.machine.hardware.state_part(2))
    # all three phases of the counter are present alongside the plain letter
    assert p_part == ["p1", "p1.th0.1", "p1.th0.2", "p1.th0.3"]


def test_rule_count_formula():
    for n_parts, n_thetas, n_letters in itertools.product((2, 3, 4), (1, 2), (1, 2)):
        S = toy_source(n_parts, n_thetas, n_letters)
        cm = C.compose_detail(S)
        expected = n_thetas + sum(n_thetas * (4 * n_letters + 2) for _ in range(n_parts - 1)) + n_thetas
        assert cm.positive_rule_count == expected


def test_composed_rules_typecheck():
    S = toy_source(3, 2, 2)
    cm = C.compose_detail(S)
    for r in cm.machine.positive_rules:
        r.typecheck(cm.machine.hardware)


def test_compose_rejects_single_part():
    q = Letter("q@solo", W.STATE) if False else Letter("qsolo", W.STATE)
    hw = M.hardware([], [[q]])
    S = M.Machine(hw, (M.make_rule(hw, "t", [("qsolo", "qsolo")]),))
    with pytest.raises(ShapeError):
        C.compose_detail(S)


def test_compose_rejects_multi_state_core():
    k1, k2 = Letter("k1", W.STATE), Letter("k2", W.STATE)
    a = Letter("x1", W.TAPE)
    hw = M.hardware([[a]], [[k1], [k2]])
    wide = M.make_rule(hw, "wide", [("k1 k2", "k1 k2")])
    S = M.Machine(hw, (wide,))
    with pytest.raises(ShapeError):
        C.compose_detail(S)


def test_lift_examples():
    S = toy_source(2, 1, 1)
    w = M.parse_admissible(S.hardware, "k1 x1 k2")
    lifted = C.lift_word(S, w)
    assert W.format_word(lifted.flatten()) == "k1 x10 p1 k2"
    empty = C.lift_word(S, M.parse_admissible(S.hardware, "k1 k2"))
    assert W.format_word(empty.flatten()) == "k1 p1 k2"


def test_project_round_trip_random():
    S = toy_source(3, 1, 2)
    rng = random.Random(3)
    toks = ["x1", "y1"], ["x2", "y2"]
    for _ in range(50):
        secs = []
        for i in (0, 1):
            n = rng.randint(0, 4)
            word = " ".join(rng.choice(toks[i]) for _ in range(n)) or "1"
            secs.append(word)
        flat = f"k1 {secs[0]} k2 {secs[1]} k3".replace(" 1 ", " ")
        w = M.parse_admissible(S.hardware, flat)
        assert C.project(S, C.lift_word(S, w)).flatten().codes == w.flatten().codes


def test_project_errors():
    S = toy_source(2, 1, 1)
    cm = C.compose_detail(S)
    hw = cm.machine.hardware
    k1, k2 = hw.token_map["k1"], hw.token_map["k2"]
    decorated = M.AdmissibleWord(
        hw, (k1, cm.p_decor[(1, "th0", 1)], k2), (W.EPSILON, W.EPSILON)
    )
    with pytest.raises(MidSimulation):
        C.project(S, decorated)
    one = cm.ones[(1, S.hardware.token_map["x1"])]
    leaked = M.AdmissibleWord(hw, (k1, cm.p_plain[0], k2), (W.single(one), W.EPSILON))
    with pytest.raises(CopyLeak):
        C.project(S, leaked)


def test_simulate_step_empty_sectors():
    for n_parts in (2, 3, 4):
        S = toy_source(n_parts, 1, 1)
        start = C.lift_word(S, M.parse_admissible(S.hardware, " ".join(f"k{i}" for i in range(1, n_parts + 1))))
        step = C.simulate_step(S, "th0", start)
        # modified rule + one counter run per block + transition
        assert step.t == 2 + sum(step.sector_steps)
        assert step.sector_steps == [1] * (n_parts - 1)
        for s in step.sector_steps:
            assert 1 <= s <= 6
        final = step.end
        assert all(l.copy_tag is None for l in final.states)
        assert final.flatten().codes == C.lift_word(S, M.apply_rule(S.rule("th0"), C.project(S, start))).flatten().codes


def test_simulate_step_matches_source_step():
    S = toy_source(2, 1, 1, with_context=True)
    w = M.parse_admissible(S.hardware, "k1 x1 k2")
    step = C.simulate_step(S, "th0", C.lift_word(S, w))
    expected = C.lift_word(S, M.apply_rule(S.rule("th0"), w))
    assert step.end.flatten().codes == expected.flatten().codes
    step.validate()


def test_simulate_step_not_applicable():
    S = toy_source(2, 2, 1)
    # th1 exists; build a lifted word, then restrict to a machine without it
    k1, k2 = (Letter(f"k{i}", W.STATE) for i in (1, 2))
    x = Letter("x1", W.TAPE)
    hw = M.hardware([[x]], [[k1], [k2]])
    other = M.make_rule(hw, "gated", [("k1", "k1"), ("k2", "k2")], {1: []})
    S2 = M.Machine(hw, (other,))
    w = C.lift_word(S2, M.parse_admissible(hw, "k1 x1 k2"))
    with pytest.raises(NotApplicable):
        C.simulate_step(S2, "gated", w)


def test_sector_counts_in_window():
    S = toy_source(2, 1, 1)
    for n in range(0, 7):
        content = " ".join(["x1"] * n) if n else "1"
        w = M.parse_admissible(S.hardware, f"k1 {content} k2".replace("  ", " ") if n else "k1 k2")
        step = C.simulate_step(S, "th0", C.lift_word(S, w))
        assert len(step.sector_steps) == 1
        assert 2**n <= step.sector_steps[0] <= 6 * 2**n
        assert step.t == 2 + step.sector_steps[0]


def test_chain_growth_is_exponential():
    S = toy_source(2, 1, 1)
    per_n = []
    for n in range(1, 7):
        w = M.parse_admissible(S.hardware, "k1 " + " ".join(["x1"] * n) + " k2")
        steps = C.simulate_chain(S, ["th0", "th0", "th0"], C.lift_word(S, w))
        counts = [s.t for s in steps]
        assert all(c == counts[0] for c in counts)  # content restored each time
        assert counts[0] >= 2**n
        per_n.append(counts[0])
    ratios = [b / a for a, b in zip(per_n, per_n[1:])]
    assert all(1.8 <= r <= 2.2 for r in ratios)


def test_rule_count_with_varying_sector_sizes():
    k1, k2, k3 = (Letter(f"k{i}", W.STATE) for i in (1, 2, 3))
    x = Letter("x1", W.TAPE)
    y1, y2 = Letter("y2", W.TAPE), Letter("z2", W.TAPE)
    hw = M.hardware([[x], [y1, y2]], [[k1], [k2], [k3]])
    th = M.make_rule(hw, "th", [("k1", "k1"), ("k2", "k2"), ("k3", "k3")])
    cm = C.compose_detail(M.Machine(hw, (th,)))
    assert cm.positive_rule_count == 1 + (4 * 1 + 2) + (4 * 2 + 2) + 1


def test_shared_source_letters_get_sector_tags(tmp_path):
    # the source machine may reuse a tape letter across sectors; the
    # copies must stay distinct and survive serialization
    k1, k2, k3 = (Letter(f"k{i}", W.STATE) for i in (1, 2, 3))
    a = Letter("a", W.TAPE)
    hw = M.hardware([[a], [a]], [[k1], [k2], [k3]])
    th = M.make_rule(hw, "th", [("k1", "k1"), ("k2", "k2"), ("k3", "k3")])
    S = M.Machine(hw, (th,))
    cm = C.compose_detail(S)
    tokens = M.machine_to_dict(cm.machine)["tape_alphabets"]
    assert tokens[0] == ["a0@1", "a1@1"]
    assert tokens[2] == ["a0@2", "a1@2"]
    path = tmp_path / "tagged.json"
    M.save_machine(cm.machine, path)
    assert M.machine_to_dict(M.load_machine(path)) == M.machine_to_dict(cm.machine)
    w = M.parse_admissible(hw, "k1 a k2 a a k3")
    step = C.simulate_step(S, "th", C.lift_word(S, w))
    assert step.sector_steps == [5, 13]
    assert C.project(S, step.end).flatten().codes == w.flatten().codes


def test_composed_machine_serializes(tmp_path):
    S = toy_source(2, 1, 1)
    cm = C.compose_detail(S)
    path = tmp_path / "composed.json"
    M.save_machine(cm.machine, path)
    again = M.load_machine(path)
    assert M.machine_to_dict(again) == M.machine_to_dict(cm.machine)
