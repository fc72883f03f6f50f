"""Counter-sweep stepper with compiled core and pure-Python fallback.

The compiled extension is preferred at import time; ``BACKEND`` records
which implementation is active.  ``scripts/bench_stepper.py`` compares
the two against the generic rule engine.
"""

from __future__ import annotations

try:
    from ._fastcount import count_canonical_steps

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from ._fastcount_py import count_canonical_steps

    BACKEND = "python"

from ._fastcount_py import count_canonical_steps as count_canonical_steps_py

__all__ = ["count_canonical_steps", "count_canonical_steps_py", "BACKEND"]
