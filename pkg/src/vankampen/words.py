"""Free-group words over a named alphabet.

Letters are signed integers: ``+i`` is the i-th generator (1-based) and
``-i`` its inverse.  Words are immutable and hashable so they can be used
directly as search states.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class IncompatibleAlphabetError(ValueError):
    """Raised when words over different alphabets are combined."""


@dataclass(frozen=True)
class Generator:
    index: int
    name: str


@dataclass(frozen=True)
class Alphabet:
    """An ordered list of generator names; position ``i`` is index ``i + 1``."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        for name in names:
            if not name or not isinstance(name, str):
                raise ValueError(f"invalid generator name {name!r}")

    @classmethod
    def of(cls, *names: str) -> "Alphabet":
        return cls(tuple(names))

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.generators)

    @property
    def generators(self) -> tuple[Generator, ...]:
        return tuple(Generator(i + 1, name) for i, name in enumerate(self.names))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise KeyError(f"generator {name!r} not in alphabet {self.names}") from None

    def name(self, letter: int) -> str:
        return self.names[abs(letter) - 1]

    def letter(self, name: str, sign: int = 1) -> int:
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return sign * self.index(name)

    def word(self, letters: Iterable[int] = ()) -> "Word":
        return Word(tuple(letters), self)

    def gen(self, name: str) -> "Word":
        return Word((self.index(name),), self)

    def parse(self, text: str) -> "Word":
        """Parse ``"x2 x1 x2^-1"`` or ``"x2*x1^3"`` style text (no free reduction)."""
        letters: list[int] = []
        for token in re.split(r"[\s*·.]+", text.strip()):
            if not token or token in ("e", "1"):
                continue
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?", token)
            if m is None:
                raise ValueError(f"cannot parse word token {token!r}")
            idx = self.index(m.group(1))
            power = int(m.group(2)) if m.group(2) is not None else 1
            letters.extend([idx if power > 0 else -idx] * abs(power))
        return Word(tuple(letters), self)

    def embed_into(self, other: "Alphabet") -> dict[int, int]:
        """Index map sending each generator of ``self`` to the same-named one in ``other``."""
        return {i + 1: other.index(n) for i, n in enumerate(self.names)}


def _reduce_letters(letters: Iterable[int]) -> list[int]:
    out: list[int] = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return out


def _is_reduced(letters: Sequence[int]) -> bool:
    return all(letters[i] != -letters[i + 1] for i in range(len(letters) - 1))


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...]
    alphabet: Alphabet
    reduced: bool = field(init=False, compare=False)

    def __post_init__(self):
        letters = tuple(int(a) for a in self.letters)
        n = len(self.alphabet)
        for a in letters:
            if a == 0 or abs(a) > n:
                raise ValueError(f"letter {a} outside alphabet of size {n}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "reduced", _is_reduced(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item], self.alphabet)
        return self.letters[item]

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return inverse(self) ** (-k)
        return free_reduce(Word(self.letters * k, self.alphabet))

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        parts = []
        i = 0
        while i < len(self.letters):
            j = i
            while j < len(self.letters) and self.letters[j] == self.letters[i]:
                j += 1
            name = self.alphabet.name(self.letters[i])
            power = (j - i) * (1 if self.letters[i] > 0 else -1)
            parts.append(name if power == 1 else f"{name}^{power}")
            i = j
        return " ".join(parts)

    def is_empty(self) -> bool:
        return not self.letters

    def inverse(self) -> "Word":
        return inverse(self)

    def to_json(self) -> list[int]:
        return list(self.letters)

    def over(self, alphabet: Alphabet) -> "Word":
        """Reinterpret this word over a (super-)alphabet by generator name."""
        if alphabet == self.alphabet:
            return self
        index_map = self.alphabet.embed_into(alphabet)
        return Word(tuple(index_map[abs(a)] * (1 if a > 0 else -1) for a in self.letters), alphabet)


def _check(a: Word, b: Word) -> None:
    if a.alphabet != b.alphabet:
        raise IncompatibleAlphabetError(
            f"incompatible alphabets {a.alphabet.names} and {b.alphabet.names}")


def free_reduce(w: Word) -> Word:
    if w.reduced:
        return w
    return Word(tuple(_reduce_letters(w.letters)), w.alphabet)


def inverse(w: Word) -> Word:
    return free_reduce(Word(tuple(-a for a in reversed(w.letters)), w.alphabet))


def concat(a: Word, b: Word) -> Word:
    _check(a, b)
    return Word(tuple(_reduce_letters(a.letters + b.letters)), a.alphabet)


def conjugate(w: Word, u: Word) -> Word:
    """``u w u^-1``, freely reduced; written ``w^u`` in exponent notation."""
    _check(w, u)
    return concat(concat(u, w), inverse(u))


def commutator(a: Word, b: Word) -> Word:
    """``a b a^-1 b^-1``, freely reduced."""
    _check(a, b)
    return concat(concat(a, b), concat(inverse(a), inverse(b)))


def exponent_sum(w: Word, g: Generator | int | str) -> int:
    if isinstance(g, Generator):
        idx = g.index
    elif isinstance(g, str):
        idx = w.alphabet.index(g)
    else:
        idx = int(g)
    return sum(1 if a > 0 else -1 for a in w.letters if abs(a) == idx)


def cyclically_reduce(w: Word) -> tuple[Word, Word]:
    """Split ``w`` as ``conjugator * core * conjugator^-1`` with ``core`` cyclically reduced."""
    letters = _reduce_letters(w.letters)
    k = 0
    while 2 * k + 1 < len(letters) and letters[k] == -letters[len(letters) - 1 - k]:
        k += 1
    core = tuple(letters[k:len(letters) - k])
    return Word(core, w.alphabet), Word(tuple(letters[:k]), w.alphabet)


def cyclic_rotations(w: Word) -> list[Word]:
    """All rotations of a cyclically reduced word (each is again reduced)."""
    n = len(w)
    if n == 0:
        return [w]
    return [Word(w.letters[i:] + w.letters[:i], w.alphabet) for i in range(n)]


def is_cyclic_conjugate(a: Word, b: Word) -> bool:
    """True iff ``a`` and ``b`` are conjugate in the free group."""
    _check(a, b)
    ca, _ = cyclically_reduce(a)
    cb, _ = cyclically_reduce(b)
    if len(ca) != len(cb):
        return False
    if not ca.letters:
        return True
    doubled = ca.letters + ca.letters
    n = len(cb)
    return any(doubled[i:i + n] == cb.letters for i in range(n))


def word_from_json(data, alphabet: Alphabet) -> Word:
    if not isinstance(data, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in data):
        raise ValueError("word must be a JSON array of nonzero integers")
    return Word(tuple(data), alphabet)
