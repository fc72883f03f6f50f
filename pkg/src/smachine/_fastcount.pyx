# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counter-sweep kernel for canonical adding-machine runs.

Keep in lockstep with ``_fastcount_py.py``; the test suite cross-checks
both against the generic rule engine.
"""

from libc.stdlib cimport calloc, free


def count_canonical_steps(long n, unsigned long long budget=0):
    """Number of rule applications in the canonical run on n all-zero digits."""
    if n < 0:
        raise ValueError("n must be >= 0")
    cdef unsigned char *d = <unsigned char *> calloc(n if n > 0 else 1, 1)
    if d == NULL:
        raise MemoryError()
    cdef long s = n
    cdef int phase = 1
    cdef unsigned long long steps = 0
    cdef long i
    try:
        with nogil:
            while not (phase == 3 and s == n):
                if budget and steps >= budget:
                    break
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
        if budget and steps >= budget and not (phase == 3 and s == n):
            raise RuntimeError(f"step budget {budget} exhausted")
        for i in range(n):
            if d[i]:
                raise AssertionError("digits must be restored to all zeros")
        return steps
    finally:
        free(d)
