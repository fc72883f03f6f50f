"""Pure-Python fallback for the counter-sweep kernel.

Mirrors ``_fastcount.pyx`` exactly; selected at import time when the
compiled extension is unavailable.
"""

from __future__ import annotations


def count_canonical_steps(n: int, budget: int = 0) -> int:
    """Number of rule applications in the canonical run on n all-zero digits.

    State is (phase, split s); digits live left of the split in phase-1
    scanning order.  budget 0 means unlimited; a positive budget raises
    RuntimeError when exceeded.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    d = bytearray(n)
    s = n
    phase = 1
    steps = 0
    while not (phase == 3 and s == n):
        if budget and steps >= budget:
            raise RuntimeError(f"step budget {budget} exhausted")
        if phase == 1:
            if s and d[s - 1]:
                d[s - 1] = 0
                s -= 1
            elif s:
                d[s - 1] = 1
                phase = 2
            else:
                phase = 3
        elif phase == 2:
            if s < n:
                s += 1
            else:
                phase = 1
        else:
            s += 1
        steps += 1
    assert not any(d), "digits must be restored to all zeros"
    return steps
