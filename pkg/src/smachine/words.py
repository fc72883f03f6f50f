"""Letters, alphabets, and free-group words with reduction.

Every other module rewrites these values.  Letters are interned to small
integer codes so the hot rewriting loops compare symbols with a single
int comparison; a GroupWord is a tuple of signed codes plus a cached
reduced flag.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import InvalidAlphabet

TAPE = "tape"
STATE = "state"
RULE = "rule"
KAPPA = "kappa"
SPECIAL = "special"

KINDS = frozenset({TAPE, STATE, RULE, KAPPA, SPECIAL})

_RESERVED = set(" \t\n^@")


@dataclass(frozen=True)
class Letter:
    """A typed alphabet symbol.

    ``sector_tag`` records which tape sector family the letter belongs to
    when identically named letters must be told apart; ``copy_tag`` holds
    decorations such as the (rule, phase) pair on composed p-letters.
    """

    name: str
    kind: str
    sector_tag: int | None = None
    copy_tag: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown letter kind {self.kind!r}")
        if not self.name or _RESERVED.intersection(self.name) or "." in self.name:
            raise ValueError(f"invalid letter name {self.name!r}")

    @property
    def token(self) -> str:
        """Serialized form: name[.copy_tag][@sector]."""
        out = self.name
        if self.copy_tag is not None:
            out += "." + self.copy_tag
        if self.sector_tag is not None:
            out += "@" + str(self.sector_tag)
        return out

    def __repr__(self):
        return f"Letter({self.token}:{self.kind})"


class _Registry:
    """Session-wide intern table mapping letters to small integer codes."""

    def __init__(self):
        self._lock = threading.Lock()
        self._codes: dict[Letter, int] = {}
        self._letters: list[Letter] = []

    def code(self, letter: Letter) -> int:
        got = self._codes.get(letter)
        if got is not None:
            return got
        with self._lock:
            got = self._codes.get(letter)
            if got is None:
                got = len(self._letters) + 1
                self._letters.append(letter)
                self._codes[letter] = got
            return got

    def letter(self, code: int) -> Letter:
        return self._letters[code - 1]


_REGISTRY = _Registry()


def intern_letter(letter: Letter) -> int:
    return _REGISTRY.code(letter)


def letter_of(code: int) -> Letter:
    return _REGISTRY.letter(abs(code))


class SignedLetter(NamedTuple):
    letter: Letter
    exponent: int


def _signed_code(letter: Letter, exponent: int) -> int:
    if exponent not in (1, -1):
        raise ValueError(f"exponent must be +1 or -1, got {exponent}")
    return intern_letter(letter) * exponent


def _reduce_codes(codes: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for c in codes:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class GroupWord:
    """A word over signed letters; ``reduced_flag`` caches free reducedness."""

    codes: tuple[int, ...]
    reduced_flag: bool = False

    def __len__(self):
        return len(self.codes)

    def __iter__(self) -> Iterator[SignedLetter]:
        for c in self.codes:
            yield SignedLetter(letter_of(c), 1 if c > 0 else -1)

    def __bool__(self):
        return bool(self.codes)

    @property
    def symbols(self) -> tuple[SignedLetter, ...]:
        return tuple(self)

    def __repr__(self):
        return f"GroupWord({format_word(self)!r})"


EPSILON = GroupWord((), True)


def word(symbols: Iterable[SignedLetter | tuple[Letter, int]], reduce_after: bool = True) -> GroupWord:
    codes = tuple(_signed_code(l, e) for l, e in symbols)
    if reduce_after:
        return GroupWord(_reduce_codes(codes), True)
    return GroupWord(codes, False)


def single(letter: Letter, exponent: int = 1) -> GroupWord:
    return GroupWord((_signed_code(letter, exponent),), True)


def from_codes(codes: Iterable[int], reduced: bool = False) -> GroupWord:
    codes = tuple(codes)
    if not reduced:
        codes = _reduce_codes(codes)
    return GroupWord(codes, True)


def reduce(w: GroupWord) -> GroupWord:
    """Freely reduce ``w``; idempotent and length-nonincreasing."""
    if w.reduced_flag:
        return w
    return GroupWord(_reduce_codes(w.codes), True)


def invert(w: GroupWord) -> GroupWord:
    """Reverse the word and flip every exponent."""
    return GroupWord(tuple(-c for c in reversed(w.codes)), w.reduced_flag)


def concat(w1: GroupWord, w2: GroupWord, reduce_after: bool = True) -> GroupWord:
    raw = w1.codes + w2.codes
    if reduce_after:
        return GroupWord(_reduce_codes(raw), True)
    return GroupWord(raw, False)


def concat_all(ws: Iterable[GroupWord], reduce_after: bool = True) -> GroupWord:
    raw: list[int] = []
    for w in ws:
        raw.extend(w.codes)
    if reduce_after:
        return GroupWord(_reduce_codes(raw), True)
    return GroupWord(tuple(raw), False)


def is_positive(w: GroupWord) -> bool:
    """True iff every exponent is +1 (vacuously true for the empty word)."""
    return all(c > 0 for c in w.codes)


def algebraic_degree_sum(w: GroupWord) -> int:
    """Sum of the exponents; invariant under free reduction."""
    return sum(1 if c > 0 else -1 for c in w.codes)


def letters_used(w: GroupWord) -> set[Letter]:
    return {letter_of(c) for c in w.codes}


def format_word(w: GroupWord) -> str:
    """Textual word syntax: whitespace-separated signed tokens, epsilon as ``1``."""
    if not w.codes:
        return "1"
    parts = []
    for c in w.codes:
        tok = letter_of(c).token
        parts.append(tok if c > 0 else tok + "^-1")
    return " ".join(parts)


def parse_word(text: str, lookup: Mapping[str, Letter]) -> GroupWord:
    """Parse the textual word syntax against a token -> Letter map."""
    text = text.strip()
    if text in ("", "1"):
        return EPSILON
    codes = []
    for tok in text.split():
        if tok.endswith("^-1"):
            base, exp = tok[:-3], -1
        elif tok.endswith("^1"):
            base, exp = tok[:-2], 1
        else:
            base, exp = tok, 1
        letter = lookup.get(base)
        if letter is None:
            raise KeyError(f"unknown letter token {base!r}")
        codes.append(_signed_code(letter, exp))
    return GroupWord(_reduce_codes(codes), True)


@dataclass(frozen=True)
class Alphabet:
    """A tape or state alphabet with its declared role ``(kind, index)``."""

    letters: frozenset[Letter]
    role: tuple[str, int]

    def __post_init__(self):
        kind, idx = self.role
        if kind == STATE:
            bad = [l for l in self.letters if l.kind != STATE]
        elif kind == TAPE:
            # sector alphabets may also carry the special letters
            # (delta blocks, alpha/omega padding) which live in sectors
            bad = [l for l in self.letters if l.kind not in (TAPE, SPECIAL)]
        else:
            raise InvalidAlphabet(f"alphabet role must be tape or state, got {kind!r}")
        if bad:
            raise InvalidAlphabet(f"letters {bad} do not fit {kind}({idx}) alphabet")

    def __contains__(self, letter: Letter) -> bool:
        return letter in self.letters

    def __len__(self):
        return len(self.letters)

    def sorted_letters(self) -> list[Letter]:
        return sorted(self.letters, key=lambda l: l.token)


def tape_alphabet(letters: Iterable[Letter], index: int) -> Alphabet:
    return Alphabet(frozenset(letters), (TAPE, index))


def state_alphabet(letters: Iterable[Letter], index: int) -> Alphabet:
    return Alphabet(frozenset(letters), (STATE, index))
