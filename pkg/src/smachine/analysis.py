"""Base-word predicates, computation metrics, and bound-formula evaluators.

The base-word predicates come in two flavours: the production versions
used by the CLI, and deliberately naive definition-scan oracles that the
test suite compares against exhaustively.

Modelling notes (recorded here because the definitions are not pinned
down elsewhere): the width of a computation is taken to be the maximum
tape-letter count over its words, and the cell-count area model charges
one cell per state part plus one per tape letter for every step.  The
dispersion value E is always a caller-supplied number, capped by n^2 in
reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, EpsilonTooLarge, GTableMiss, NonPositive
from .machine import AdmissibleWord, Computation

BaseWord = tuple[str, ...]


def base_word(symbols: Iterable[str] | str) -> BaseWord:
    out = tuple(symbols.split()) if isinstance(symbols, str) else tuple(symbols)
    if not out:
        raise ValueError("base words are nonempty")
    return out


@dataclass(frozen=True)
class BaseSet:
    """A finite set of base words over the part-name alphabet."""

    bases: frozenset[BaseWord]

    def __post_init__(self):
        if any(not b for b in self.bases):
            raise ValueError("base words are nonempty")

    @classmethod
    def of(cls, *bases: Sequence[str]) -> "BaseSet":
        return cls(frozenset(tuple(b) for b in bases))


def _occurrences(b: BaseWord, w: BaseWord) -> list[int]:
    k = len(b)
    return [i for i in range(len(w) - k + 1) if w[i : i + k] == b]


def is_covered(B: BaseSet, w: Sequence[str]) -> bool:
    """Every position lies inside an occurrence of a base, and the word
    starts and ends with the same letter."""
    w = tuple(w)
    if not w or w[0] != w[-1]:
        return False
    covered = [False] * len(w)
    for b in B.bases:
        for i in _occurrences(b, w):
            for j in range(i, i + len(b)):
                covered[j] = True
    return all(covered)


def is_narrow(B: BaseSet, w: Sequence[str]) -> bool:
    """No subword of w is B-covered."""
    w = tuple(w)
    for i in range(len(w)):
        for j in range(i + 1, len(w) + 1):
            if is_covered(B, w[i:j]):
                return False
    return True


def is_tight(B: BaseSet, w: Sequence[str], reading: str = "prefix") -> bool:
    """w = u x v x with the suffix x v x B-covered.

    Under the default ``prefix`` reading the leading u must contain no
    B-covered subword; ``whole`` demands the entire word contain no
    covered subword other than the chosen suffix.
    """
    w = tuple(w)
    for s in range(len(w) - 1):
        suffix = w[s:]
        if len(suffix) < 2 or suffix[0] != suffix[-1]:
            continue
        if not is_covered(B, suffix):
            continue
        if reading == "prefix":
            if is_narrow(B, w[:s]):
                return True
        elif reading == "whole":
            ok = True
            for i in range(len(w)):
                for j in range(i + 1, len(w) + 1):
                    if (i, j) == (s, len(w)):
                        continue
                    if is_covered(B, w[i:j]):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
        else:
            raise ValueError(f"unknown tight reading {reading!r}")
    return False


# definition-scan oracles: one literal pass over the definition each call


def oracle_is_covered(B: BaseSet, w: Sequence[str]) -> bool:
    w = tuple(w)
    if not w:
        return False
    for pos in range(len(w)):
        inside = False
        for b in B.bases:
            k = len(b)
            for i in range(len(w) - k + 1):
                if i <= pos < i + k and w[i : i + k] == b:
                    inside = True
        if not inside:
            return False
    return w[0] == w[-1]


def oracle_is_narrow(B: BaseSet, w: Sequence[str]) -> bool:
    w = tuple(w)
    for i in range(len(w)):
        for j in range(i + 1, len(w) + 1):
            if oracle_is_covered(B, w[i:j]):
                return False
    return True


def oracle_is_tight(B: BaseSet, w: Sequence[str]) -> bool:
    w = tuple(w)
    for s in range(len(w) - 1):
        if w[s] == w[-1] and oracle_is_covered(B, w[s:]) and oracle_is_narrow(B, w[:s]):
            return True
    return False


def all_base_words(alphabet: Sequence[str], max_len: int) -> list[BaseWord]:
    out: list[BaseWord] = []
    level: list[BaseWord] = [()]
    for _ in range(max_len):
        level = [w + (a,) for w in level for a in alphabet]
        out.extend(level)
    return out


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class Metrics:
    length: int
    a_length: int
    width: int | None = None
    area_estimate: int | None = None

    @classmethod
    def of_word(cls, w: AdmissibleWord) -> "Metrics":
        return cls(w.length, w.a_length)

    @classmethod
    def of_computation(cls, c: Computation, n_parts: int | None = None) -> "Metrics":
        parts = n_parts if n_parts is not None else c.words[0].n_states
        return cls(
            c.words[0].length,
            c.words[0].a_length,
            width(c),
            area_estimate(c, parts),
        )


def a_length(w: AdmissibleWord) -> int:
    return w.a_length


def width(c: Computation) -> int:
    """Max tape-letter count over the trace; invariant under reversal."""
    return max(w.a_length for w in c.words)


def area_estimate(c: Computation, n_parts: int) -> int:
    """Cell-count model: each step costs one cell per state part plus one
    per tape letter of the word it rewrites.  A model, not a measured
    diagram area."""
    return sum(n_parts + w.a_length for w in c.words[:-1])


# ---------------------------------------------------------------------------
# bound formulas


def log_prime(x: float) -> float:
    """max(log2(x), 1); total for every positive argument."""
    if x <= 0:
        raise NonPositive(f"log' needs a positive argument, got {x}")
    return max(math.log2(x), 1.0)


def bound_width_lemma2(C: float, w_len: int | Metrics, wt_len: int | Metrics, t: int) -> float:
    """C * (|W| + |W_t| + log2 t / log2 log2 t); defined for t >= 4."""
    if t < 4:
        raise DomainError(f"width bound needs t >= 4, got {t}")
    a = w_len.length if isinstance(w_len, Metrics) else w_len
    b = wt_len.length if isinstance(wt_len, Metrics) else wt_len
    return C * (a + b + math.log2(t) / math.log2(math.log2(t)))


def bound_area_lemma3(C: float, t: int, w0_a: int, wt_a: int) -> float:
    """C * t * (|W_0|_a + |W_t|_a)."""
    if t < 0 or w0_a < 0 or wt_a < 0:
        raise DomainError("arguments must be nonnegative")
    return C * t * (w0_a + wt_a)


def bound_area_lemma4(C: float, h: int, w_a: int, wp_a: int, n: float) -> float:
    """C * h * (|W|_a + |W'|_a + log'n / log'log'n + 1)."""
    if h < 1:
        raise DomainError("height must be >= 1")
    return C * h * (w_a + wp_a + log_prime(n) / log_prime(log_prime(n)) + 1.0)


def bound_area_lemma5(M: float, n: float, E: float) -> float:
    """M n^2 log'n/log'log'n plus the dispersion term M log'n/log'log'n * E."""
    if n <= 0:
        raise DomainError("perimeter must be positive")
    ratio = log_prime(n) / log_prime(log_prime(n))
    return M * n * n * ratio + M * ratio * E


def bound_area_lemma6(M: float, n: float, r: int, R: float, E: float, g: Mapping[int, int]) -> float:
    """M (n^2 + m^2 log'm) + M E with m = R * g(g(r-1)) * log'n."""
    if n <= 0 or r < 1:
        raise DomainError("need positive perimeter and r >= 1")
    m = R * g_lookup(g, g_lookup(g, r - 1)) * log_prime(n)
    return M * (n * n + m * m * log_prime(m)) + M * E


def g_lookup(g: Mapping[int, int], n: int) -> int:
    try:
        return g[n]
    except KeyError:
        raise GTableMiss(n) from None


@dataclass(frozen=True)
class GGReport:
    r: int
    lhs: int
    rhs: int
    holds: bool
    window_ok: bool


def check_gg_inequality(g: Mapping[int, int], r: int) -> GGReport:
    """g(g(r-1))^2 <= g(g(r)), with a window sanity check
    (2^g(r-1))^2 <= 6 * 2^g(r) on the measured values."""
    g_rm1 = g_lookup(g, r - 1)
    g_r = g_lookup(g, r)
    lhs = g_lookup(g, g_rm1) ** 2
    rhs = g_lookup(g, g_r)
    window_ok = (2 ** g_rm1) ** 2 <= 6 * 2 ** g_r
    return GGReport(r, lhs, rhs, lhs <= rhs, window_ok)


@dataclass(frozen=True)
class IntervalRow:
    i: int
    n_i: int
    d_i: float
    lambda_i: float
    lo: float
    hi: float
    e_cap: float


def lemcool_intervals(g: Mapping[int, int], i_max: int, eps: float) -> list[IntervalRow]:
    """n_i = g(g(i)), d_i = n_i^(3/4), lambda_i = n_i^eps, interval
    [d_i/lambda_i, lambda_i d_i]; e_cap records the dispersion ceiling n_i^2."""
    if not eps < 0.25:
        raise EpsilonTooLarge(f"interval exponent must be < 1/4, got {eps}")
    rows = []
    for i in range(1, i_max + 1):
        n_i = g_lookup(g, g_lookup(g, i))
        d_i = n_i ** 0.75
        lam = n_i ** eps
        rows.append(IntervalRow(i, n_i, d_i, lam, d_i / lam, lam * d_i, float(n_i) ** 2))
    return rows


def check_p1(samples: Mapping[int, float], c: float, intervals: Sequence[IntervalRow]) -> bool:
    """area(n) <= c n^2 for every sampled n inside the interval union."""
    for n, area in samples.items():
        if any(row.lo <= n <= row.hi for row in intervals):
            if area > c * n * n:
                return False
    return True


def fit_constant(pairs: Iterable[tuple[float, float]]) -> float:
    """Least constant C with measured <= C * base over the calibration
    pairs (measured, base)."""
    best = 0.0
    for measured, base in pairs:
        if base <= 0:
            raise DomainError("calibration base values must be positive")
        best = max(best, measured / base)
    return best


# constants frozen from the calibration sweeps in the test suite
DEFAULT_CONSTANTS = {
    "C": 2.0,
    "M": 1.0,
    "R": 1.0,
    "c": 1.0,
    "epsilon": 0.2,
    "E": 0.0,
}


@dataclass(frozen=True)
class BoundParams:
    C: float = 2.0
    M: float = 1.0
    K0: float = 16.0
    R: float = 1.0
    c: float = 1.0
    epsilon: float = 0.2
    E: float = 0.0

    def __post_init__(self):
        for name in ("C", "M", "K0", "R", "c"):
            if getattr(self, name) <= 0:
                raise DomainError(f"constant {name} must be positive")
        if self.E < 0:
            raise DomainError("dispersion value must be nonnegative")


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: object = None
    expected: object = None
    note: str = ""


@dataclass
class BoundReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name, passed, measured=None, expected=None, note="") -> None:
        self.checks.append(CheckResult(name, bool(passed), measured, expected, note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __iter__(self):
        return iter(self.checks)
