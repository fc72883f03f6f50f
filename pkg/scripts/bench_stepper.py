#!/usr/bin/env python3
"""Benchmark the counter-sweep kernels against the generic rule engine.

Three routes to the same canonical-run step counts:
  - compiled extension (when the build produced it)
  - pure-Python fallback loop
  - generic rule engine (applicability scan + substitution per step)

The two kernels are exercised at depths the generic engine cannot reach;
agreement between all three is asserted on the small cases.
"""

import argparse
import time

from smachine import adding
from smachine.fastcount import BACKEND, count_canonical_steps, count_canonical_steps_py


def time_once(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def generic_steps(n: int) -> int:
    u = "1" if n == 0 else " ".join(["a0"] * n)
    return adding.canonical_run(("a",), u).t


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-small", type=int, default=10, help="depth for the generic engine")
    ap.add_argument("--n-large", type=int, default=24, help="depth for the kernels")
    args = ap.parse_args()

    print(f"active kernel backend: {BACKEND}")
    print(f"{'n':>4} {'steps':>12} {'generic s':>10} {'python s':>10} {'compiled s':>11}")

    n = args.n_small
    g_gen, t_gen = time_once(generic_steps, n)
    g_py, t_py = time_once(count_canonical_steps_py, n)
    g_cy, t_cy = time_once(count_canonical_steps, n)
    assert g_gen == g_py == g_cy
    print(f"{n:>4} {g_gen:>12} {t_gen:>10.4f} {t_py:>10.4f} {t_cy:>11.4f}")

    n = args.n_large
    g_py, t_py = time_once(count_canonical_steps_py, n)
    g_cy, t_cy = time_once(count_canonical_steps, n)
    assert g_py == g_cy
    print(f"{n:>4} {g_py:>12} {'-':>10} {t_py:>10.4f} {t_cy:>11.4f}")
    if t_cy > 0:
        print(f"kernel speedup python/compiled at n={n}: {t_py / t_cy:.1f}x")
    print(f"steps/second compiled at n={n}: {g_cy / t_cy:,.0f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
