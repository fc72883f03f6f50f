import pytest

from smachine import adding, machine as M, words as W
from smachine.errors import BoundViolation, GTableMiss, InvalidAlphabet


def test_rule_counts():
    assert len(adding.build_adding("a").positive_rules) == 6
    assert len(adding.build_adding("ab").positive_rules) == 10
    assert len(adding.build_adding("abc").positive_rules) == 14


def test_machine_self_checks():
    m = adding.build_adding("ab")
    for r in m.positive_rules:
        r.typecheck(m.hardware)
    assert m.hardware.n == 2
    assert m.hardware.n_parts == 3


def test_invalid_alphabets():
    with pytest.raises(InvalidAlphabet):
        adding.build_adding("")
    with pytest.raises(InvalidAlphabet):
        adding.build_adding("abcdefghijklmnopqrstuvwxyzA")
    with pytest.raises(InvalidAlphabet):
        adding.build_adding(["a", "a"])


def test_printed_domains():
    m = adding.build_adding("a")
    assert m.rule("r21").domain_map[2] == frozenset()
    assert m.rule("r13").domain_map[1] == frozenset()
    a0 = m.hardware.token_map["a0"]
    assert m.rule("r13").domain_map[2] == frozenset({a0})
    assert m.rule("r3(a)").domain_map[1] == frozenset({a0})


def test_canonical_run_empty_input():
    comp = adding.canonical_run(("a",), "1")
    assert comp.t == 1
    assert 1 <= comp.t <= 6
    assert W.format_word(comp.end.flatten()) == "L p(3) R"


def test_canonical_run_single_letter():
    comp = adding.canonical_run(("a",), "a0")
    assert 2 <= comp.t <= 12
    assert comp.t == 5


def test_canonical_run_constant_length():
    comp = adding.canonical_run(("a",), "a0 a0 a0")
    lengths = {w.length for w in comp.words}
    assert len(lengths) == 1


def test_canonical_run_rejects_bad_input():
    with pytest.raises(InvalidAlphabet):
        adding.canonical_run(("a",), "a0^-1")
    spec = adding.adding_spec(("a",))
    a1 = spec.ones[0]
    with pytest.raises(InvalidAlphabet):
        adding.canonical_run(("a",), W.single(a1))


def test_g_letter_independent():
    # two different positive words of the same length give the same g
    g_aa = adding.canonical_run(("a", "b"), "a0 a0").t
    g_ab = adding.canonical_run(("a", "b"), "a0 b0").t
    g_ba = adding.canonical_run(("a", "b"), "b0 a0").t
    assert g_aa == g_ab == g_ba


def test_content_restored():
    comp = adding.canonical_run(("a", "b"), "b0 a0")
    assert W.format_word(comp.end.flatten()) == "L b0 a0 p(3) R"


def test_measure_g_window_and_monotone():
    table = adding.GTable()
    values = [adding.measure_g(("a",), n, table) for n in range(11)]
    for n, g in enumerate(values):
        assert 2**n <= g <= 6 * 2**n
    assert all(a < b for a, b in zip(values, values[1:]))
    # ratio window: arithmetic consequence of the bounds
    for a, b in zip(values, values[1:]):
        assert 2 / 6 <= b / a <= 2 * 6


def test_measure_g_slow_path_agrees():
    table = adding.GTable()
    for n in range(6):
        fast = adding.measure_g(("a",), n)
        slow = adding.measure_g(("a",), n, table, use_fast=False)
        assert fast == slow


def test_gtable_collision_and_merge():
    t1 = adding.GTable()
    t1.insert(adding.GEntry(3, 29, "fast", "a0^3", 0.1))
    t1.insert(adding.GEntry(3, 29, "det", "again", 0.2))  # same value fine
    with pytest.raises(BoundViolation):
        t1.insert(adding.GEntry(3, 28, "det", "bad", 0.2))
    t2 = adding.GTable()
    t2.insert(adding.GEntry(4, 61, "fast", "a0^4", 0.1))
    t1.merge(t2)
    assert t1.g(4) == 61
    with pytest.raises(GTableMiss):
        t1.g(9)


def test_gtable_csv_round_trip(tmp_path):
    table = adding.measure_g_range(("a",), range(5))
    path = tmp_path / "g-table.csv"
    adding.save_g_table(table, path)
    again = adding.load_g_table(path)
    assert again.as_mapping() == table.as_mapping()


def test_g_table_for_gg():
    table = adding.g_table_for_gg(("a",), 1)
    assert 0 in table and 1 in table
    assert table.g(table.g(0)) and table.g(table.g(1))


def test_verify_lemma1_passes():
    for u in ("1", "a0 a0 a0"):
        report = adding.verify_lemma1(u, ("a",))
        assert report.passed, [c for c in report if not c.passed]


def test_verify_lemma1_window_bounds():
    report = adding.verify_lemma1("a0 a0 a0", ("a",))
    window = next(c for c in report if c.name == "length window")
    assert window.expected == "[8, 48]"


def test_lemma1_report_on_truncated_trace():
    comp = adding.canonical_run(("a",), "a0 a0")
    comp.words = comp.words[:3]
    comp.rules = comp.rules[:2]
    report = adding.lemma1_report(comp, 2)
    by_name = {c.name: c for c in report}
    assert by_name["constant word length"].passed
    assert not by_name["length window"].passed
