"""Word problems in BS(1,2), G_n and P_n.

G_n is an iterated HNN extension: ``x_j`` is a stable letter over
``G_{j-1}`` conjugating ``<x_{j-1}>`` onto ``<x_{j-1}^2>`` via
``x_j a x_j^-1 = a^2``.  Words are handled as syllables ``(generator,
exponent)`` with :mod:`vankampen.tower` exponents so that towers such as
``x1^(2^(2^16))`` never have to be spelled out.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from . import tower as ti
from .families import P, g_alphabet, p_alphabet, v_word
from .tower import DEFAULT_BIT_CAP, Exact, TowerInt, UndecidedAtCap
from .words import Alphabet, Word, exponent_sum, free_reduce, inverse


@dataclass(frozen=True)
class WpVerdict:
    kind: str                   # "trivial" | "nontrivial" | "undecided"
    reason: Optional[str] = None

    def __str__(self):
        return f"undecided({self.reason})" if self.kind == "undecided" else self.kind

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    @classmethod
    def parse(cls, text: str) -> "WpVerdict":
        if text in ("trivial", "nontrivial"):
            return cls(text)
        if text.startswith("undecided(") and text.endswith(")"):
            return cls("undecided", text[len("undecided("):-1])
        raise ValueError(f"not a verdict: {text!r}")


TRIVIAL = WpVerdict("trivial")
NONTRIVIAL = WpVerdict("nontrivial")


def undecided(reason: str) -> WpVerdict:
    return WpVerdict("undecided", reason)


# -- BS(1,2) via its affine representation ----------------------------------

def normal_form_bs(w: Word, cap: int = DEFAULT_BIT_CAP) -> tuple[int, TowerInt, int]:
    """Britton normal form ``x2^-p x1^m x2^q`` of a word over ``{x1, x2}``.

    Uses the faithful action ``x1: z -> z + 1``, ``x2: z -> 2 z`` on the
    dyadic rationals; ``m`` is odd whenever ``p > 0`` and ``q > 0``.
    """
    a = w.alphabet
    i1, i2 = a.index("x1"), a.index("x2")
    scale, shift = 0, Fraction(0)       # z -> 2^scale * z + shift
    for letter in reversed(w.letters):
        # left-multiply the composed map by the letter's map
        g = abs(letter)
        if g == i1:
            shift += 1 if letter > 0 else -1
        elif g == i2:
            if letter > 0:
                scale, shift = scale + 1, shift * 2
            else:
                scale, shift = scale - 1, shift / 2
        else:
            raise ValueError(f"letter {a.name(letter)} is not in BS(1,2)")
    p_min = 0
    if shift:
        den = shift.denominator
        p_min = den.bit_length() - 1
    p = max(p_min, -scale)
    q = scale + p
    m = shift * (1 << p)
    assert m.denominator == 1
    m_int = int(m)
    if m_int.bit_length() > cap:
        raise UndecidedAtCap(f"BS exponent needs {m_int.bit_length()} bits > cap {cap}")
    return p, Exact(m_int), q


# -- iterated Britton reduction for G_n ---------------------------------------

Syllables = tuple  # tuple[tuple[int, TowerInt], ...]


def to_syllables(w: Word, cap: int = DEFAULT_BIT_CAP) -> Syllables:
    out: list[tuple[int, TowerInt]] = []
    for a in w.letters:
        g, e = abs(a), (1 if a > 0 else -1)
        if out and out[-1][0] == g:
            merged = ti.add(out[-1][1], Exact(e), cap)
            if ti.is_zero(merged):
                out.pop()
            else:
                out[-1] = (g, merged)
        else:
            out.append((g, Exact(e)))
    return tuple(out)


def _append(out: list, g: int, e: TowerInt, cap: int) -> None:
    if ti.is_zero(e):
        return
    if out and out[-1][0] == g:
        merged = ti.add(out[-1][1], e, cap)
        if ti.is_zero(merged):
            out.pop()
        else:
            out[-1] = (g, merged)
    else:
        out.append((g, e))


def _inverse_syl(syl: Syllables) -> Syllables:
    return tuple((g, ti.neg(e)) for g, e in reversed(syl))


def _small(e: TowerInt) -> int:
    if isinstance(e, ti.Saturated):
        raise UndecidedAtCap("saturated stable-letter exponent")
    return e.value


class GnSolver:
    """Word problem for G_n with per-instance memo tables."""

    def __init__(self, n: int, cap: int = DEFAULT_BIT_CAP, max_steps: int = 10_000_000):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.cap = cap
        self.max_steps = max_steps
        self.steps = 0
        self._power_memo: dict = {}
        self._reduce_memo: dict = {}

    def _tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise UndecidedAtCap("step budget exhausted")

    def _join(self, *parts) -> Syllables:
        out: list = []
        for part in parts:
            for g, e in part:
                _append(out, g, e, self.cap)
        return tuple(out)

    def britton_reduce(self, j: int, syl: Syllables) -> Syllables:
        """Remove every ``x_j``-pinch from a word over ``x_1..x_j``.

        Scans left to right for consecutive ``x_j`` syllables of opposite
        sign whose middle is a power of ``x_{j-1}``, rewrites, and restarts.
        """
        key = (j, syl)
        if key in self._reduce_memo:
            return self._reduce_memo[key]
        cur = syl
        while True:
            self._tick()
            rewritten = self._first_pinch(j, cur)
            if rewritten is None:
                break
            cur = rewritten
        self._reduce_memo[key] = cur
        return cur

    def _first_pinch(self, j: int, syl: Syllables) -> Optional[Syllables]:
        stable = [i for i, (g, _) in enumerate(syl) if g == j]
        for a, b in zip(stable, stable[1:]):
            ea, eb = syl[a][1], syl[b][1]
            sa, sb = ti.sign(ea), ti.sign(eb)
            if sa == sb:
                continue
            middle = syl[a + 1:b]
            e = self.power_of(j - 1, middle)
            if e is None:
                continue
            na, nb = abs(_small(ea)), abs(_small(eb))
            if sa > 0:
                # x_j^k x_{j-1}^e x_j^-k = x_{j-1}^(e 2^k)
                k = min(na, nb)
                new_mid = ti.shift(e, k, self.cap)
            else:
                # x_j^-k x_{j-1}^e x_j^k = x_{j-1}^(e / 2^k), needs 2^k | e
                k = min(na, nb)
                if not ti.is_zero(e):
                    k = min(k, ti.two_adic_valuation(e))
                if k == 0:
                    continue
                new_mid = ti.halve(e, k)
            left = syl[:a] + ((j, Exact(sa * (na - k))),)
            right = ((j, Exact(sb * (nb - k))),) + syl[b + 1:]
            return self._join(left, ((j - 1, new_mid),), right)
        return None

    def power_of(self, j: int, syl: Syllables) -> Optional[TowerInt]:
        """``e`` with ``syl = x_j^e`` in ``G_j``, or None."""
        key = (j, syl)
        if key in self._power_memo:
            return self._power_memo[key]
        result = self._power_of(j, syl)
        self._power_memo[key] = result
        return result

    def _power_of(self, j: int, syl: Syllables) -> Optional[TowerInt]:
        self._tick()
        if not syl:
            return ti.ZERO
        if j == 1:
            # G_1 is infinite cyclic on x1
            total = ti.ZERO
            for g, e in syl:
                if g != 1:
                    raise ValueError("word leaves G_1")
                total = ti.add(total, e, self.cap)
            return total
        reduced = self.britton_reduce(j, syl)
        stable = [e for g, e in reduced if g == j]
        if not stable:
            return ti.ZERO if self.is_trivial_at(j - 1, reduced) else None
        signs = {ti.sign(e) for e in stable}
        if len(signs) != 1:
            return None
        count = sum(abs(_small(e)) for e in stable)
        candidate = Exact(signs.pop() * count)
        # reduced forms of x_j^e carry exactly |e| stable letters of one sign
        probe = self._join(reduced, ((j, ti.neg(candidate)),))
        return candidate if self.is_trivial_at(j, probe) else None

    def is_trivial_at(self, j: int, syl: Syllables) -> bool:
        if j == 1:
            return ti.is_zero(self.power_of(1, syl))
        reduced = self.britton_reduce(j, syl)
        if any(g == j for g, _ in reduced):
            return False
        return self.is_trivial_at(j - 1, reduced)

    def reduced_form(self, syl: Syllables) -> Syllables:
        """Britton-reduce at every level from ``n`` down, keeping leftover stable letters."""
        cur = syl
        for j in range(self.n, 1, -1):
            cur = self.britton_reduce(j, cur)
        return cur


def _syllables_for(n: int, w: Word, cap: int) -> Syllables:
    names = w.alphabet.names
    expected = g_alphabet(n).names
    if names != expected:
        for name in names:
            if name not in expected:
                raise ValueError(f"word uses {name}, which is not a generator of G_{n}")
        w = w.over(g_alphabet(n))
    return to_syllables(w, cap)


def is_trivial_G(n: int, w: Word, cap: int = DEFAULT_BIT_CAP,
                 max_steps: int = 10_000_000) -> WpVerdict:
    """Decide ``w = e`` in G_n."""
    try:
        solver = GnSolver(n, cap, max_steps)
        syl = _syllables_for(n, w, cap)
        return TRIVIAL if solver.is_trivial_at(n, syl) else NONTRIVIAL
    except UndecidedAtCap as exc:
        return undecided(str(exc))


def is_power_of_x1(n: int, w: Word, cap: int = DEFAULT_BIT_CAP) -> Optional[TowerInt]:
    """``e`` with ``w = x1^e`` in G_n, or None.  Raises UndecidedAtCap."""
    solver = GnSolver(n, cap)
    cur = _syllables_for(n, w, cap)
    for j in range(n, 1, -1):
        cur = solver.britton_reduce(j, cur)
        if any(g == j for g, _ in cur):
            return None
    return solver.power_of(1, cur)


# -- P_n ----------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateStep:
    claim: str
    justification: str
    inputs: dict

    def to_json(self) -> dict:
        return {"claim": self.claim, "justification": self.justification, "inputs": self.inputs}


@dataclass(frozen=True)
class ZCertificate:
    """Deduction that every ``x_i`` is trivial in P_n, so P_n presents ``Z = <t>``."""
    n: int
    steps: tuple[CertificateStep, ...]
    conclusion: str

    def to_json(self) -> dict:
        return {"n": self.n, "steps": [s.to_json() for s in self.steps],
                "conclusion": self.conclusion}

    @classmethod
    def from_json(cls, data: dict) -> "ZCertificate":
        steps = tuple(CertificateStep(s["claim"], s["justification"], s["inputs"])
                      for s in data["steps"])
        return cls(int(data["n"]), steps, data["conclusion"])


class CertificateError(ValueError):
    pass


def z_certificate(n: int, cap: int = DEFAULT_BIT_CAP) -> ZCertificate:
    """Build the certificate; raises UndecidedAtCap if the G_n solver saturates."""
    pres = P(n)
    a = pres.alphabet
    v = v_word(n, a)
    verdict = is_trivial_G(n, v_word(n), cap)
    if verdict.kind == "undecided":
        raise UndecidedAtCap(f"v_{n} check: {verdict.reason}")
    if not verdict.is_trivial:
        raise CertificateError(f"v_{n} is not trivial in G_{n}")
    t = a.index("t")
    xn = a.index(f"x{n}")
    steps = [CertificateStep(
        f"v_{n} = e", "G-solver",
        {"word": v.to_json(), "bit_cap": cap})]
    # t v t^-1 x_n^-1 v^-1 with v = e leaves x_n^-1
    steps.append(CertificateStep(
        f"x{n} = e", "relator-quotient",
        {"relator": n - 1,
         "pieces": [{"letters": [t]}, {"step": 0, "power": 1},
                    {"letters": [-t, -xn]}, {"step": 0, "power": -1}],
         "generator": xn}))
    for i in range(n - 1, 0, -1):
        prev = len(steps) - 1
        steps.append(CertificateStep(
            f"x{i} = e", "relator-quotient",
            {"relator": i - 1,
             "pieces": [{"step": prev, "power": 1}, {"letters": [i]},
                        {"step": prev, "power": -1}, {"letters": [-i, -i]}],
             "generator": i}))
    return ZCertificate(n, tuple(steps), f"every x_i = e in P_{n}; P_{n} presents Z = <t>")


def replay_certificate(cert: ZCertificate, cap: int = DEFAULT_BIT_CAP) -> bool:
    """Check every step mechanically; raises CertificateError on the first bad step."""
    pres = P(cert.n)
    a = pres.alphabet
    established: list[Word] = []
    proved = set()
    for k, step in enumerate(cert.steps):
        inp = step.inputs
        if step.justification == "G-solver":
            w = Word(tuple(inp["word"]), a)
            if any(abs(x) == a.index("t") for x in w.letters):
                raise CertificateError(f"step {k}: G-solver word contains t")
            verdict = is_trivial_G(cert.n, Word(tuple(inp["word"]), g_alphabet(cert.n)),
                                   max(cap, int(inp.get("bit_cap", cap))))
            if not verdict.is_trivial:
                raise CertificateError(f"step {k}: G-solver says {verdict}")
        elif step.justification == "relator-quotient":
            rel = pres.relators[int(inp["relator"])]
            spelled: list[int] = []
            leftover: list[int] = []
            for piece in inp["pieces"]:
                if "letters" in piece:
                    spelled.extend(piece["letters"])
                    leftover.extend(piece["letters"])
                else:
                    ref = int(piece["step"])
                    if not 0 <= ref < k:
                        raise CertificateError(f"step {k}: bad back-reference {ref}")
                    base = established[ref]
                    seg = base if int(piece["power"]) == 1 else inverse(base)
                    spelled.extend(seg.letters)
            if tuple(free_reduce(Word(tuple(spelled), a)).letters) != rel.letters:
                raise CertificateError(f"step {k}: pieces do not spell relator {inp['relator']}")
            rest = free_reduce(Word(tuple(leftover), a)).letters
            gen = int(inp["generator"])
            if rest not in ((gen,), (-gen,)):
                raise CertificateError(f"step {k}: quotient leaves {rest}, not a generator")
            w = Word((gen,), a)
            proved.add(gen)
            established.append(w)
            continue
        else:
            raise CertificateError(f"step {k}: unknown justification {step.justification!r}")
        established.append(Word(tuple(inp["word"]), a))
    if proved != set(range(1, cert.n + 1)):
        raise CertificateError("certificate does not kill every x_i")
    return True


@lru_cache(maxsize=None)
def _certified(n: int, cap: int) -> bool:
    return replay_certificate(z_certificate(n, cap), cap)


def is_trivial_P(n: int, w: Word, cap: int = DEFAULT_BIT_CAP) -> bool:
    """``w = e`` in P_n iff its t-exponent sum vanishes (P_n presents Z = <t>).

    The Z-certificate for ``n`` is built and replayed first; it raises
    UndecidedAtCap if the G_n solver saturates at ``cap``.
    """
    _certified(n, cap)
    a = w.alphabet
    if a != p_alphabet(n):
        w = w.over(p_alphabet(n))
    return exponent_sum(w, "t") == 0
