"""Batch driver: every capability as a subcommand with machine-readable output.

Exit codes: 0 success, 1 input error, 2 resource/budget, 3 verification
failure.  Every output file starts with a header recording the tool
version, a hash of the resolved configuration, and the seed, so that a
given configuration reproduces its outputs byte for byte (the g-table's
wall_time_ms column is the one measured, run-dependent field).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import tempfile

from . import __version__
from . import adding, analysis, compose, machine as M, presentation as P, words as W
from .errors import (
    BudgetExceeded,
    GTableMiss,
    NotFound,
    WorkbenchError,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RESOURCE = 2
EXIT_VERIFY = 3


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def header_line(cfg: dict, seed: int) -> str:
    return f"# smachine {__version__} config={config_hash(cfg)} seed={seed}"


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_machine(spec: str) -> M.Machine:
    """A path to a machine file, or ``adding:<letters>`` for the built-in
    adding machine."""
    if spec.startswith("adding:"):
        return adding.build_adding(spec.split(":", 1)[1])
    return M.load_machine(spec)


def load_constants(path: str | None) -> dict:
    out = dict(analysis.DEFAULT_CONSTANTS)
    if path:
        with open(path) as fh:
            out.update(json.load(fh))
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = {
        "cmd": "simulate",
        "machine": args.machine,
        "start": args.start,
        "target": args.target,
        "strategy": args.strategy,
        "budget": args.budget,
    }
    m = resolve_machine(args.machine)
    start = M.parse_admissible(m.hardware, args.start)
    target = M.contains_flat(m.hardware, args.target) if args.target else None
    if args.strategy == "bfs":
        if target is None:
            raise WorkbenchError("bfs strategy needs --target")
        comp = M.run(m, start, M.SearchTarget(target, visited_cap=args.visited_cap), budget=args.budget)
    else:
        priority = None
        if m.name.startswith("adding("):
            priority = adding.deterministic_priority(tuple(m.name[len("adding(") : -1]))
        comp = M.run(
            m,
            start,
            M.Deterministic(priority=priority, forbid_growth=not args.allow_growth),
            budget=args.budget,
            target=target,
        )
    out = os.path.join(args.out, "trace.jsonl")
    buf = io.StringIO()
    buf.write(json.dumps({"header": header_line(cfg, args.seed)[2:]}) + "\n")
    buf.write(json.dumps({"index": 0, "rule": None, "word": W.format_word(comp.words[0].flatten())}) + "\n")
    for i, (r, w) in enumerate(zip(comp.rules, comp.words[1:]), start=1):
        buf.write(json.dumps({"index": i, "rule": r.name, "word": W.format_word(w.flatten())}) + "\n")
    atomic_write(out, buf.getvalue())
    print(f"wrote {out}: {comp.t} steps, halt={comp.halt_reason}")
    return EXIT_RESOURCE if comp.halt_reason == "budget" else EXIT_OK


def cmd_adding_verify(args) -> int:
    cfg = {"cmd": "adding-verify", "n_max": args.n_max, "deep": args.deep, "alphabet": args.alphabet}
    base = tuple(args.alphabet)
    table = adding.GTable()
    failures = []
    lines = []
    for n in range(args.n_max + 1):
        spec = adding.adding_spec(adding.normalize_base(base))
        a0 = spec.zeros[0]
        u = W.from_codes([W.intern_letter(a0)] * n)
        report = adding.verify_lemma1(u, base)
        adding.measure_g(base, n, table)
        ok = report.passed
        lines.append(f"n={n} g={table.g(n)} window=[{2**n},{6 * 2**n}] {'PASS' if ok else 'FAIL'}")
        if not ok:
            failures.append(n)
    gg_rs = [1, 2] if args.deep else [1]
    for r in gg_rs:
        adding.g_table_for_gg(base, r, table)
        rep = analysis.check_gg_inequality(table.as_mapping(), r)
        lines.append(f"gg r={r} lhs={rep.lhs} rhs={rep.rhs} {'PASS' if rep.holds else 'FAIL'}")
        if not rep.holds:
            failures.append(f"gg{r}")

    gt_path = os.path.join(args.out, "g-table.csv")
    buf = io.StringIO()
    buf.write(header_line(cfg, args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["n", "g", "lower", "upper", "strategy", "wall_time_ms"])
    for e in table.rows():
        writer.writerow([e.n, e.g, e.lower, e.upper, e.strategy, f"{e.wall_ms:.3f}"])
    atomic_write(gt_path, buf.getvalue())

    summary = os.path.join(args.out, "adding-verify.txt")
    atomic_write(summary, header_line(cfg, args.seed) + "\n" + "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_compose(args) -> int:
    cfg = {"cmd": "compose", "machine": args.machine}
    S = resolve_machine(args.machine)
    cm = compose.compose_detail(S)
    out_machine = os.path.join(args.out, "composed-machine.json")
    atomic_write(out_machine, json.dumps(M.machine_to_dict(cm.machine), indent=2, sort_keys=True) + "\n")

    n_thetas = len(S.positive_rules)
    expected = n_thetas + sum(
        n_thetas * (4 * len(S.hardware.sector_letters(i)) + 2) for i in range(1, cm.N)
    ) + n_thetas
    buf = io.StringIO()
    buf.write(header_line(cfg, args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["quantity", "value"])
    writer.writerow(["source_parts", cm.N])
    writer.writerow(["source_positive_rules", n_thetas])
    writer.writerow(["composed_positive_rules", cm.positive_rule_count])
    writer.writerow(["composed_expected", expected])
    writer.writerow(["match", int(cm.positive_rule_count == expected)])
    atomic_write(os.path.join(args.out, "compose-report.csv"), buf.getvalue())
    print(f"composed {cm.positive_rule_count} positive rules (expected {expected})")
    return EXIT_OK if cm.positive_rule_count == expected else EXIT_VERIFY


def cmd_present(args) -> int:
    cfg = {"cmd": "present", "machine": args.machine, "w0": args.w0, "hub_n": args.hub_n, "specials": args.specials}
    m = resolve_machine(args.machine)
    if not args.w0:
        raise WorkbenchError("--w0 is required: the accepting admissible word")
    w0 = M.parse_admissible(m.hardware, args.w0)
    specials = [P.special_letter(s) for s in args.specials.split(",") if s] if args.specials else []
    pres = P.generate_presentation(m, P.HubParams(args.hub_n, w0), specials)
    text = header_line(cfg, args.seed) + "\n" + P.format_presentation(pres)
    out = os.path.join(args.out, "presentation.txt")
    atomic_write(out, text)
    print(f"wrote {out}: {len(pres.relators)} relators")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = {
        "cmd": "analyze",
        "trace": args.trace,
        "machine": args.machine,
        "g_table": args.g_table,
        "epsilon": args.epsilon,
        "deep": args.deep,
    }
    consts = load_constants(args.constants)
    rng = random.Random(args.seed)
    rows = []
    failures = []

    # predicate self-check sweep against the definition-scan oracles
    alphabet = ["Q1", "Q2", "Q3"]
    Bs = [
        analysis.BaseSet.of(("Q1", "Q2", "Q1")),
        analysis.BaseSet.of(("Q1", "Q2"), ("Q2", "Q1")),
        analysis.BaseSet.of(("Q1",), ("Q2", "Q3", "Q2")),
    ]
    words = analysis.all_base_words(alphabet, 4)
    sample = rng.sample(words, 40)
    pred_ok = True
    for B in Bs:
        for w in sample:
            if analysis.is_covered(B, w) != analysis.oracle_is_covered(B, w):
                pred_ok = False
            if analysis.is_narrow(B, w) != analysis.oracle_is_narrow(B, w):
                pred_ok = False
            if analysis.is_tight(B, w) != analysis.oracle_is_tight(B, w):
                pred_ok = False
    rows.append(["predicates", f"{len(Bs)}x{len(sample)}", "oracle", "agree", int(pred_ok)])
    if not pred_ok:
        failures.append("predicates")

    # arithmetic spot checks
    spot = abs(analysis.bound_area_lemma5(1.0, 4.0, 0.0) - 32.0) <= 1e-12 * 32.0
    rows.append(["lemma5", "M=1 n=4 E=0", 32.0, analysis.bound_area_lemma5(1.0, 4.0, 0.0), int(spot)])
    if not spot:
        failures.append("lemma5")

    # per-trace metrics and bounds
    if args.trace:
        if not args.machine:
            raise WorkbenchError("--machine is required with --trace")
        m = resolve_machine(args.machine)
        comp = M.read_trace(args.trace, m)
        comp.validate()
        n_parts = m.hardware.n_parts
        met = analysis.Metrics.of_computation(comp, n_parts)
        rows.append(["width", f"t={comp.t}", "", met.width, 1])
        rows.append(["area_model", f"t={comp.t}", "", met.area_estimate, 1])
        if comp.t >= 1:
            bound3 = analysis.bound_area_lemma3(
                consts["C"], comp.t, comp.words[0].a_length, comp.words[-1].a_length
            )
            ok3 = met.area_estimate <= bound3 if (comp.words[0].a_length + comp.words[-1].a_length) else True
            rows.append(["lemma3", f"C={consts['C']}", bound3, met.area_estimate, int(ok3)])
            if not ok3:
                failures.append("lemma3")
        if comp.t >= 4:
            bound2 = analysis.bound_width_lemma2(
                consts["C"], comp.words[0].length, comp.words[-1].length, comp.t
            )
            ok2 = met.width <= bound2
            rows.append(["lemma2", f"C={consts['C']}", bound2, met.width, int(ok2)])
            if not ok2:
                failures.append("lemma2")

    # interval construction and lemma 6 need measured g values
    interval_rows = []
    if args.deep or args.g_table:
        if not args.g_table:
            raise GTableMiss(1)
        table = adding.load_g_table(args.g_table)
        g = table.as_mapping()
        rep = analysis.check_gg_inequality(g, 1)
        rows.append(["gg", "r=1", rep.rhs, rep.lhs, int(rep.holds)])
        if not rep.holds:
            failures.append("gg")
        interval_rows = analysis.lemcool_intervals(g, 1, args.epsilon)
        v6 = analysis.bound_area_lemma6(consts["M"], 4.0, 1, consts["R"], 0.0, g)
        rows.append(["lemma6", "n=4 r=1 E=0", "", v6, 1])

    buf = io.StringIO()
    buf.write(header_line(cfg, args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["lemma", "inputs", "formula_value", "measured_value", "pass"])
    writer.writerows(rows)
    atomic_write(os.path.join(args.out, "bounds-report.csv"), buf.getvalue())

    buf = io.StringIO()
    buf.write(header_line(cfg, args.seed) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["i", "n_i", "d_i", "lambda_i", "lo", "hi", "e_cap"])
    for r in interval_rows:
        writer.writerow([r.i, r.n_i, f"{r.d_i:.6f}", f"{r.lambda_i:.6f}", f"{r.lo:.6f}", f"{r.hi:.6f}", f"{r.e_cap:.1f}"])
    atomic_write(os.path.join(args.out, "intervals.csv"), buf.getvalue())
    print(f"analyze: {len(rows)} checks, {len(failures)} failures")
    return EXIT_VERIFY if failures else EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smachine", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
        p.add_argument("--constants", default=None, help="JSON file of frozen constants")

    p = sub.add_parser("simulate", help="run a machine and write the trace")
    common(p)
    p.add_argument("--machine", required=True, help="machine file or adding:<letters>")
    p.add_argument("--start", required=True, help="start word, e.g. 'L p(1) R'")
    p.add_argument("--target", default=None, help="halt when the word contains this subword")
    p.add_argument("--strategy", choices=["det", "bfs"], default="det")
    p.add_argument("--budget", type=int, default=None, help="step budget")
    p.add_argument("--allow-growth", action="store_true", help="deterministic runs may grow the word")
    p.add_argument("--visited-cap", type=int, default=M.DEFAULT_VISITED_CAP)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adding-verify", help="Lemma-1 window sweep and the g-table")
    common(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--alphabet", default="a")
    p.add_argument("--deep", action="store_true", help="also check the r=2 inequality")
    p.set_defaults(func=cmd_adding_verify)

    p = sub.add_parser("compose", help="emit the composed machine and count report")
    common(p)
    p.add_argument("--machine", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("present", help="emit the group presentation")
    common(p)
    p.add_argument("--machine", required=True)
    p.add_argument("--w0", default=None, help="accepting admissible word")
    p.add_argument("--hub-n", type=int, default=1)
    p.add_argument("--specials", default=None, help="comma-separated special letters")
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("analyze", help="metrics, predicates, bounds, intervals")
    common(p)
    p.add_argument("--trace", default=None, help="trace JSONL from simulate")
    p.add_argument("--machine", default=None)
    p.add_argument("--g-table", default=None, help="g-table.csv from adding-verify")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--deep", action="store_true")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceeded, NotFound, GTableMiss) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (WorkbenchError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
