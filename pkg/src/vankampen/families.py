"""Presentation families G_n, P_n, Q_n, T_n, witness words, and relator moves.

Relations ``x_i^{x_{i+1}} = x_i^2`` are stored as the relator
``x_{i+1} x_i x_{i+1}^-1 x_i^-2``.  The stable letter of P_n/Q_n is ``t``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .words import (
    Alphabet, Word, commutator, concat, conjugate, cyclically_reduce,
    free_reduce, inverse, word_from_json,
)


class ParameterError(ValueError):
    """Family parameter out of range."""


class OperationError(ValueError):
    """An elementary operation does not apply to the given presentation."""


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    relators: tuple[Word, ...]
    family: Optional[tuple[str, int]] = field(default=None, compare=False)

    def __post_init__(self):
        rels = tuple(self.relators)
        for r in rels:
            if r.alphabet != self.alphabet:
                raise ValueError("relator alphabet differs from presentation alphabet")
            if not r.reduced:
                raise ValueError(f"relator {r} is not freely reduced")
        object.__setattr__(self, "relators", rels)

    @property
    def generators(self):
        return self.alphabet.generators

    def is_balanced(self) -> bool:
        return len(self.alphabet) == len(self.relators)

    def total_length(self) -> int:
        return sum(len(r) for r in self.relators)

    def with_relators(self, relators: Iterable[Word]) -> "Presentation":
        return Presentation(self.alphabet, tuple(relators), self.family)

    def __str__(self) -> str:
        gens = ", ".join(self.alphabet.names)
        rels = ", ".join(str(r) for r in self.relators)
        return f"< {gens} | {rels} >"

    def to_json(self) -> dict:
        out = {
            "generators": list(self.alphabet.names),
            "relators": [r.to_json() for r in self.relators],
        }
        if self.family is not None:
            out["family"] = {"tag": self.family[0], "n": self.family[1]}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Presentation":
        alphabet = Alphabet(tuple(data["generators"]))
        rels = tuple(free_reduce(word_from_json(r, alphabet)) for r in data["relators"])
        fam = data.get("family")
        family = (fam["tag"], int(fam["n"])) if fam else None
        return cls(alphabet, rels, family)


def presentations_equal(p: Presentation, q: Presentation) -> bool:
    """Same ordered alphabet and the same multiset of freely reduced relators."""
    if p.alphabet.names != q.alphabet.names:
        return False
    return Counter(free_reduce(r).letters for r in p.relators) == \
        Counter(free_reduce(r).letters for r in q.relators)


def _require(n: int, low: int = 2) -> None:
    if not isinstance(n, int) or n < low:
        raise ParameterError(f"family parameter n must be an integer >= {low}, got {n!r}")


def g_alphabet(n: int) -> Alphabet:
    return Alphabet(tuple(f"x{i}" for i in range(1, n + 1)))


def p_alphabet(n: int) -> Alphabet:
    return Alphabet(tuple(f"x{i}" for i in range(1, n + 1)) + ("t",))


def _power(alphabet: Alphabet, index: int, k: int) -> Word:
    return Word((index if k > 0 else -index,) * abs(k), alphabet)


def bs_relator(alphabet: Alphabet, i: int) -> Word:
    """``x_{i+1} x_i x_{i+1}^-1 x_i^-2`` over ``alphabet``."""
    return Word((i + 1, i, -(i + 1), -i, -i), alphabet)


def G(n: int) -> Presentation:
    _require(n)
    a = g_alphabet(n)
    return Presentation(a, tuple(bs_relator(a, i) for i in range(1, n)), ("G", n))


def w_word(m: int, alphabet: Optional[Alphabet] = None) -> Word:
    """``[x1^{x2^m}, x1]`` freely reduced."""
    if not isinstance(m, int) or m < 0:
        raise ParameterError(f"m must be a non-negative integer, got {m!r}")
    a = alphabet or g_alphabet(2)
    x1 = Word((a.index("x1"),), a)
    return commutator(conjugate(x1, _power(a, a.index("x2"), m)), x1)


def g_word(n: int, k: int, alphabet: Optional[Alphabet] = None) -> Word:
    """``x1^{x2^{...^{x_n^k}}}``: u_n = x_n^k, u_i = u_{i+1} x_i u_{i+1}^-1."""
    _require(n)
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    a = alphabet or g_alphabet(n)
    u = _power(a, a.index(f"x{n}"), k)
    for i in range(n - 1, 0, -1):
        u = conjugate(Word((a.index(f"x{i}"),), a), u)
    return u


def v_word(n: int, alphabet: Optional[Alphabet] = None) -> Word:
    """``[g_n, x1]`` with ``g_n = g_word(n, n)``."""
    a = alphabet or g_alphabet(n)
    return commutator(g_word(n, n, a), Word((a.index("x1"),), a))


def p_relator(n: int, alphabet: Optional[Alphabet] = None) -> Word:
    """``t v_n t^-1 x_n^-1 v_n^-1`` (the relation ``t v_n t^-1 = v_n x_n``)."""
    a = alphabet or p_alphabet(n)
    v = v_word(n, a)
    t = a.gen("t")
    xn = a.gen(f"x{n}")
    return concat(concat(conjugate(v, t), inverse(xn)), inverse(v))


def P(n: int) -> Presentation:
    _require(n)
    a = p_alphabet(n)
    rels = tuple(bs_relator(a, i) for i in range(1, n)) + (p_relator(n, a),)
    return Presentation(a, rels, ("P", n))


def Q(n: int) -> Presentation:
    _require(n)
    p = P(n)
    return Presentation(p.alphabet, p.relators + (p.alphabet.gen("t"),), ("Q", n))


def T(n: int) -> Presentation:
    _require(n)
    a = p_alphabet(n)
    return Presentation(a, tuple(Word((i,), a) for i in range(1, len(a) + 1)), ("T", n))


# -- elementary operations --------------------------------------------------

@dataclass(frozen=True)
class Invert:
    i: int


@dataclass(frozen=True)
class MultiplyRight:
    i: int
    j: int


@dataclass(frozen=True)
class Conjugate:
    """Replace relator ``r_i`` by ``g r_i g^-1`` (sign +1) or ``g^-1 r_i g`` (sign -1).

    ``g`` is a 1-based generator index.
    """
    i: int
    g: int
    sign: int = 1


ElementaryOp = Union[Invert, MultiplyRight, Conjugate]


def _check_index(p: Presentation, i: int) -> None:
    if not isinstance(i, int) or not 0 <= i < len(p.relators):
        raise OperationError(f"relator index {i!r} out of range for {len(p.relators)} relators")


def apply_op(p: Presentation, op: ElementaryOp) -> Presentation:
    rels = list(p.relators)
    if isinstance(op, Invert):
        _check_index(p, op.i)
        rels[op.i] = inverse(rels[op.i])
    elif isinstance(op, MultiplyRight):
        _check_index(p, op.i)
        _check_index(p, op.j)
        if op.i == op.j:
            raise OperationError("MultiplyRight needs two distinct relator indices")
        rels[op.i] = concat(rels[op.i], rels[op.j])
    elif isinstance(op, Conjugate):
        _check_index(p, op.i)
        if op.sign not in (1, -1):
            raise OperationError("conjugation sign must be +1 or -1")
        if not isinstance(op.g, int) or not 1 <= op.g <= len(p.alphabet):
            raise OperationError(f"generator index {op.g!r} out of range")
        g = Word((op.g * op.sign,), p.alphabet)
        rels[op.i] = conjugate(rels[op.i], g)
    else:
        raise OperationError(f"unknown operation {op!r}")
    return p.with_relators(rels)


def apply_sequence(p: Presentation, ops: Iterable[ElementaryOp]) -> Presentation:
    for op in ops:
        p = apply_op(p, op)
    return p


def replay_prefixes(p: Presentation, ops: Iterable[ElementaryOp]):
    """Yield the presentation after every prefix of ``ops`` (starting with ``p`` itself)."""
    yield p
    for op in ops:
        p = apply_op(p, op)
        yield p


def inverse_ops(op: ElementaryOp) -> list[ElementaryOp]:
    """A sequence of elementary operations undoing ``op``.

    Product moves only multiply by a relator, never by its inverse, so
    undoing ``MultiplyRight(i, j)`` conjugates it by inversions of ``r_j``.
    """
    if isinstance(op, Invert):
        return [op]
    if isinstance(op, Conjugate):
        return [Conjugate(op.i, op.g, -op.sign)]
    if isinstance(op, MultiplyRight):
        return [Invert(op.j), op, Invert(op.j)]
    raise OperationError(f"unknown operation {op!r}")


def op_to_json(op: ElementaryOp) -> dict:
    if isinstance(op, Invert):
        return {"op": "invert", "i": op.i}
    if isinstance(op, MultiplyRight):
        return {"op": "mul", "i": op.i, "j": op.j}
    if isinstance(op, Conjugate):
        return {"op": "conj", "i": op.i, "g": op.g, "sign": op.sign}
    raise OperationError(f"unknown operation {op!r}")


def op_from_json(data: dict) -> ElementaryOp:
    kind = data.get("op")
    if kind == "invert":
        return Invert(int(data["i"]))
    if kind == "mul":
        return MultiplyRight(int(data["i"]), int(data["j"]))
    if kind == "conj":
        return Conjugate(int(data["i"]), int(data["g"]), int(data["sign"]))
    raise OperationError(f"unknown op kind {kind!r}")


def _rotate_left(i: int, word: Word) -> tuple[list[ElementaryOp], Word]:
    """Move the first letter of relator ``i`` to its end: ``g u -> g^-1 (g u) g``."""
    a = word.letters[0]
    op = Conjugate(i, abs(a), -1 if a > 0 else 1)
    new = conjugate(word, Word((-a,), word.alphabet))
    return [op], new


def standard_trivialization_sequence(n: int) -> list[ElementaryOp]:
    """Elementary operations taking Q(n) to T(n) (relators ``[x1, ..., xn, t]``).

    First the relator ``t v t^-1 x_n^-1 v^-1`` is rotated and cancelled
    against ``t`` until it is ``x_n``; then, from ``i = n-1`` down to 1,
    ``x_{i+1} x_i x_{i+1}^-1 x_i^-2`` is reduced to ``x_i`` using the relator
    ``x_{i+1}``.  Every step is replayed as it is generated.
    """
    _require(n)
    q = Q(n)
    a = q.alphabet
    ops: list[ElementaryOp] = []
    ip = n - 1          # index of the P relator
    it = n              # index of the relator t
    rels = list(q.relators)

    def emit(new_ops):
        nonlocal rels
        for op in new_ops:
            ops.append(op)
            rels = list(apply_op(q.with_relators(rels), op).relators)

    def rotate(i):
        new_ops, _ = _rotate_left(i, rels[i])
        emit(new_ops)

    def strip_last_with(i, j):
        # r_i ends in r_j^{+-1}; flip r_j if needed so the product cancels that letter
        last = rels[i].letters[-1]
        (target,) = rels[j].letters
        if target == -last:
            emit([MultiplyRight(i, j)])
        else:
            emit([Invert(j), MultiplyRight(i, j), Invert(j)])

    # t v t^-1 x_n^-1 v^-1 -> v t^-1 x_n^-1 v^-1 t -> v t^-1 x_n^-1 v^-1
    rotate(ip)
    strip_last_with(ip, it)
    # rotating through v cancels v^-1 letter by letter: -> t^-1 x_n^-1
    xn = a.index(f"x{n}")
    tt = a.index("t")
    while rels[ip].letters != (-tt, -xn):
        rotate(ip)
    rotate(ip)                       # x_n^-1 t^-1
    strip_last_with(ip, it)          # x_n^-1
    emit([Invert(ip)])               # x_n

    for i in range(n - 1, 0, -1):
        ri, rj = i - 1, i            # r_ri = x_{i+1} x_i x_{i+1}^-1 x_i^-2, r_rj = x_{i+1}
        rotate(ri)                   # x_i x_{i+1}^-1 x_i^-2 x_{i+1}
        strip_last_with(ri, rj)      # x_i x_{i+1}^-1 x_i^-2
        rotate(ri)                   # x_{i+1}^-1 x_i^-1
        rotate(ri)                   # x_i^-1 x_{i+1}^-1
        strip_last_with(ri, rj)      # x_i^-1
        emit([Invert(ri)])           # x_i

    assert presentations_equal(q.with_relators(rels), T(n))
    return ops


def is_cyclically_reduced(w: Word) -> bool:
    core, conj = cyclically_reduce(w)
    return not conj.letters and core.letters == free_reduce(w).letters
