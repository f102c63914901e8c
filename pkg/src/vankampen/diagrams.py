"""Van Kampen diagrams as combinatorial maps.

A diagram is a set of darts (half-edges) with an involution ``twin`` and a
rotation ``next`` (the following dart around the same origin vertex).  The
face permutation is ``phi(d) = next[twin[d]]``; its orbits are the faces.
Inner faces are traversed clockwise and each reads a relator (or its
inverse) from a recorded offset.  The boundary word is read clockwise around
the disk: starting at ``base_dart`` (an outer-face dart) it is the label
sequence of ``twin(base), twin(phi^-1(base)), twin(phi^-2(base)), ...``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .families import Presentation
from .words import Word, free_reduce, inverse

DEFAULT_CELL_BUDGET = 1 << 16


class InvalidDiagramError(ValueError):
    pass


class CellBudgetError(ValueError):
    pass


class AnnulusError(ValueError):
    pass


@dataclass(frozen=True)
class Dart:
    id: int
    twin: int
    next: int
    label: int


@dataclass(frozen=True)
class Face:
    darts: tuple[int, ...]      # a phi-orbit, starting at its smallest dart id
    relator: int
    sign: int
    offset: int                 # reading starts at darts[offset]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def first_failure(self) -> Optional[Check]:
        return next((c for c in self.checks if not c.ok), None)

    def __str__(self):
        return "\n".join(f"{'PASS' if c.ok else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "")
                         for c in self.checks)

    def to_json(self):
        return {"valid": self.ok,
                "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks]}


@dataclass(frozen=True, eq=False)
class VanKampenDiagram:
    darts: tuple[Dart, ...]
    faces: tuple[Face, ...]
    outer_face_dart: Optional[int]
    base_dart: Optional[int]
    presentation: Presentation
    boundary: Optional[Word] = None

    @cached_property
    def report(self) -> ValidationReport:
        return validate(self)

    def to_json(self) -> dict:
        return {
            "darts": [{"id": d.id, "twin": d.twin, "next": d.next, "label": d.label}
                      for d in sorted(self.darts, key=lambda d: d.id)],
            "outer_face_dart": self.outer_face_dart,
            "base_dart": self.base_dart,
            "faces": [{"darts": list(f.darts), "relator": f.relator, "sign": f.sign,
                       "offset": f.offset} for f in self.faces],
            "presentation": self.presentation.to_json(),
            "boundary": self.boundary.to_json() if self.boundary is not None else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "VanKampenDiagram":
        pres = Presentation.from_json(data["presentation"])
        darts = tuple(Dart(int(d["id"]), int(d["twin"]), int(d["next"]), int(d["label"]))
                      for d in data["darts"])
        faces = tuple(Face(tuple(int(x) for x in f["darts"]), int(f["relator"]), int(f["sign"]),
                           int(f["offset"])) for f in data["faces"])
        bnd = data.get("boundary")
        boundary = Word(tuple(bnd), pres.alphabet) if bnd is not None else None
        return cls(darts, faces, data.get("outer_face_dart"), data.get("base_dart"), pres, boundary)


# -- validation ---------------------------------------------------------------

def _orbits(perm: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        orbit = []
        d = s
        while not seen[d]:
            seen[d] = True
            orbit.append(d)
            d = perm[d]
        out.append(orbit)
    return out


def _read(labels, darts) -> tuple[int, ...]:
    return tuple(labels[d] for d in darts)


def validate(d: VanKampenDiagram, word: Optional[Word] = None) -> ValidationReport:
    """Check every diagram invariant; failures are report entries, never exceptions.

    ``word``, if given, must be the boundary (after free reduction); otherwise
    the diagram's declared boundary (if any) is checked.
    """
    checks: list[Check] = []
    pres = d.presentation
    N = len(d.darts)
    nletters = len(pres.alphabet)

    def add(name, ok, detail=""):
        checks.append(Check(name, bool(ok), detail))

    def skip(*names):
        for name in names:
            add(name, False, "skipped: earlier structural check failed")

    later = ("connected", "faces", "face_labels", "euler", "base_dart", "boundary")

    # dart ids, labels
    bad = next((i for i, x in enumerate(d.darts) if x.id != i), None)
    if bad is not None:
        add("dart_ids", False, f"dart at position {bad} has id {d.darts[bad].id}")
        skip("twin", "rotation", *later)
        return ValidationReport(tuple(checks))
    add("dart_ids", True)
    twin = [x.twin for x in d.darts]
    nxt = [x.next for x in d.darts]
    labels = [x.label for x in d.darts]

    problem = None
    for i in range(N):
        t = twin[i]
        if labels[i] == 0 or abs(labels[i]) > nletters:
            problem = f"dart {i} has label {labels[i]} outside the alphabet"
        elif not 0 <= t < N:
            problem = f"dart {i} has twin {t} out of range"
        elif t == i:
            problem = f"dart {i} is its own twin"
        elif twin[t] != i:
            problem = f"twin of twin of dart {i} is {twin[t]}"
        elif labels[t] != -labels[i]:
            problem = f"dart {i} and its twin {t} carry labels {labels[i]}, {labels[t]}"
        if problem:
            break
    add("twin", problem is None, problem or "")

    seen = set()
    problem_r = None
    for i in range(N):
        if not 0 <= nxt[i] < N:
            problem_r = f"dart {i} has next {nxt[i]} out of range"
            break
        if nxt[i] in seen:
            problem_r = f"dart {nxt[i]} is next of two darts (second: {i})"
            break
        seen.add(nxt[i])
    add("rotation", problem_r is None, problem_r or "")
    if problem or problem_r:
        skip(*later)
        return ValidationReport(tuple(checks))

    if N == 0:
        add("connected", True)
        add("faces", not d.faces, "" if not d.faces else "inner face in a dartless diagram")
        add("face_labels", not d.faces)
        add("euler", True, "single vertex: V - E + F = 1 - 0 + 1 = 2")
        add("base_dart", d.base_dart is None, "" if d.base_dart is None else "base dart in empty diagram")
        bnd = word if word is not None else d.boundary
        add("boundary", bnd is None or not free_reduce(bnd).letters,
            "" if bnd is None or not free_reduce(bnd).letters else "empty diagram has empty boundary")
        return ValidationReport(tuple(checks))

    # connectivity through twin and next
    comp = [-1] * N
    stack = [0]
    comp[0] = 0
    while stack:
        x = stack.pop()
        for y in (twin[x], nxt[x]):
            if comp[y] < 0:
                comp[y] = 0
                stack.append(y)
    disconnected = next((i for i in range(N) if comp[i] < 0), None)
    add("connected", disconnected is None,
        "" if disconnected is None else f"dart {disconnected} unreachable from dart 0")

    phi = [nxt[twin[i]] for i in range(N)]
    face_orbits = _orbits(phi)
    face_of = [0] * N
    for k, orb in enumerate(face_orbits):
        for x in orb:
            face_of[x] = k

    # declared faces are exactly the inner phi-orbits
    problem_f = None
    claimed = {}
    outer = d.outer_face_dart
    if outer is None or not 0 <= outer < N:
        problem_f = f"outer face dart {outer} invalid"
    for fi, f in enumerate(d.faces):
        if problem_f:
            break
        if not f.darts:
            problem_f = f"face {fi} has no darts"
            break
        if any(not 0 <= x < N for x in f.darts):
            problem_f = f"face {fi} lists a dart out of range"
            break
        orbit = face_orbits[face_of[f.darts[0]]]
        if len(orbit) != len(f.darts) or any(phi[f.darts[i]] != f.darts[(i + 1) % len(f.darts)]
                                             for i in range(len(f.darts))):
            problem_f = f"face {fi} darts are not a face orbit (first dart {f.darts[0]})"
            break
        k = face_of[f.darts[0]]
        if k in claimed:
            problem_f = f"faces {claimed[k]} and {fi} are the same orbit"
            break
        if face_of[outer] == k:
            problem_f = f"face {fi} is the outer face"
            break
        claimed[k] = fi
    if problem_f is None:
        unclaimed = [k for k in range(len(face_orbits)) if k not in claimed and k != face_of[outer]]
        if unclaimed:
            problem_f = f"face orbit through dart {face_orbits[unclaimed[0]][0]} has no relator label"
    add("faces", problem_f is None, problem_f or "")

    problem_l = None
    for fi, f in enumerate(d.faces):
        if not 0 <= f.relator < len(pres.relators) or f.sign not in (1, -1):
            problem_l = f"face {fi} names relator {f.relator} sign {f.sign}"
            break
        if not 0 <= f.offset < max(len(f.darts), 1):
            problem_l = f"face {fi} offset {f.offset} out of range"
            break
        rel = pres.relators[f.relator]
        expected = rel.letters if f.sign == 1 else inverse(rel).letters
        darts = f.darts[f.offset:] + f.darts[:f.offset]
        got = _read(labels, [x for x in darts if 0 <= x < N])
        if got != expected:
            problem_l = f"face {fi} (dart {darts[0]}) reads {list(got)}, expected {list(expected)}"
            break
    add("face_labels", problem_l is None, problem_l or "")

    V = len(_orbits(nxt))
    E = N // 2
    F = len(face_orbits)
    chi = V - E + F
    add("euler", chi == 2, f"V - E + F = {V} - {E} + {F} = {chi}")

    base = d.base_dart
    base_ok = base is not None and 0 <= base < N and outer is not None and 0 <= outer < N \
        and face_of[base] == face_of[outer]
    add("base_dart", base_ok, "" if base_ok else f"base dart {base} not on the outer face")

    expected_b = word if word is not None else d.boundary
    if expected_b is None:
        add("boundary", True, "no boundary declared")
    elif not base_ok:
        add("boundary", False, "skipped: no valid base dart")
    else:
        got = free_reduce(Word(_boundary_letters(phi, twin, labels, base), pres.alphabet))
        want = free_reduce(expected_b.over(pres.alphabet))
        add("boundary", got.letters == want.letters,
            "" if got.letters == want.letters else f"boundary reads {got}, expected {want}")
    return ValidationReport(tuple(checks))


def _boundary_letters(phi, twin, labels, base) -> tuple[int, ...]:
    inv = {phi[i]: i for i in range(len(phi))}
    out = []
    d = base
    while True:
        out.append(labels[twin[d]])
        d = inv[d]
        if d == base:
            break
    return tuple(out)


def _require_valid(d: VanKampenDiagram) -> None:
    rep = d.report
    if not rep.ok:
        raise InvalidDiagramError(f"invalid diagram: {rep.first_failure()}")


def area(d: VanKampenDiagram) -> int:
    _require_valid(d)
    return len(d.faces)


def boundary_word(d: VanKampenDiagram) -> Word:
    _require_valid(d)
    if not d.darts:
        return Word((), d.presentation.alphabet)
    phi = [d.darts[d.darts[i].twin].next for i in range(len(d.darts))]
    twin = [x.twin for x in d.darts]
    labels = [x.label for x in d.darts]
    return free_reduce(Word(_boundary_letters(phi, twin, labels, d.base_dart), d.presentation.alphabet))


def euler_characteristic(d: VanKampenDiagram) -> int:
    _require_valid(d)
    if not d.darts:
        return 2
    nxt = [x.next for x in d.darts]
    phi = [d.darts[d.darts[i].twin].next for i in range(len(d.darts))]
    return len(_orbits(nxt)) - len(d.darts) // 2 + len(_orbits(phi))


# -- construction -------------------------------------------------------------

class DiagramBuilder:
    """Planar disk diagrams assembled from cells by gluing, folding and mirroring.

    State: dart labels and twins, inner faces as clockwise dart cycles, and
    the boundary as the clockwise sequence of darts whose twins lie on the
    outer face.  Each operation keeps the complex a (possibly singular) disk.
    """

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self.label: list[int] = []
        self.twin: list[int] = []
        self.alive: list[bool] = []
        self.faces: list[list] = []         # [cycle, relator, sign]
        self.boundary: list[int] = []

    def _new(self, label: int) -> int:
        self.label.append(label)
        self.twin.append(-1)
        self.alive.append(True)
        return len(self.label) - 1

    @classmethod
    def cell(cls, presentation: Presentation, relator: int, sign: int = 1) -> "DiagramBuilder":
        b = cls(presentation)
        r = presentation.relators[relator]
        letters = r.letters if sign == 1 else inverse(r).letters
        inner = [b._new(a) for a in letters]
        for x in inner:
            o = b._new(-b.label[x])
            b.twin[x], b.twin[o] = o, x
        b.faces.append([inner, relator, sign])
        b.boundary = list(inner)
        return b

    def copy(self) -> "DiagramBuilder":
        c = DiagramBuilder(self.presentation)
        c.label, c.twin, c.alive = list(self.label), list(self.twin), list(self.alive)
        c.faces = [[list(f[0]), f[1], f[2]] for f in self.faces]
        c.boundary = list(self.boundary)
        return c

    @property
    def area(self) -> int:
        return len(self.faces)

    def boundary_word(self) -> Word:
        return Word(tuple(self.label[x] for x in self.boundary), self.presentation.alphabet)

    def rotate(self, k: int) -> "DiagramBuilder":
        """Start the boundary sequence at position ``k``."""
        if self.boundary:
            k %= len(self.boundary)
            self.boundary = self.boundary[k:] + self.boundary[:k]
        return self

    def _absorb(self, other: "DiagramBuilder") -> int:
        off = len(self.label)
        self.label += other.label
        self.twin += [t + off if t >= 0 else t for t in other.twin]
        self.alive += other.alive
        self.faces += [[[x + off for x in f[0]], f[1], f[2]] for f in other.faces]
        return off

    def _outer_twin(self, x: int) -> int:
        o = self.twin[x]
        if o in self._boundary_set():
            raise ValueError(f"dart {x} lies on a spur; gluing along spurs is not supported")
        return o

    def _boundary_set(self):
        return set(self.boundary)

    def glue(self, i: int, other: "DiagramBuilder", j: int, length: int) -> "DiagramBuilder":
        """Glue ``other`` onto this disk along boundary arcs.

        The arc ``self.boundary[i : i+length]`` is identified with
        ``other.boundary[j : j+length]`` traversed backwards; the latter must
        spell the inverse of the former.  The arc may be a whole boundary of
        one disk (capping a closed loop on the other) but not of both.
        """
        nb, mb = len(self.boundary), len(other.boundary)
        if not 0 < length <= min(nb, mb):
            raise ValueError(f"arc length {length} must be in 1..{min(nb, mb)}")
        if length == nb == mb:
            raise ValueError("cannot glue two disks along their whole boundaries")
        other = other.copy()
        off = self._absorb(other)
        ob = [x + off for x in other.boundary]
        arc_a = [self.boundary[(i + s) % nb] for s in range(length)]
        arc_b = [ob[(j + s) % mb] for s in range(length)]
        for s in range(length):
            x, y = arc_a[s], arc_b[length - 1 - s]
            if self.label[y] != -self.label[x]:
                raise ValueError(f"arc labels do not match at offset {s}")
        outer_a = [self._outer_twin(x) for x in arc_a]
        bset = set(ob)
        outer_b = []
        for y in arc_b:
            if self.twin[y] in bset:
                raise ValueError("gluing along spurs is not supported")
            outer_b.append(self.twin[y])
        for s in range(length):
            x, y = arc_a[s], arc_b[length - 1 - s]
            self.twin[x], self.twin[y] = y, x
        for o in outer_a + outer_b:
            self.alive[o] = False
        rest_a = [self.boundary[(i + length + s) % nb] for s in range(nb - length)]
        rest_b = [ob[(j + length + s) % mb] for s in range(mb - length)]
        self.boundary = rest_a + rest_b
        return self

    def fold(self, k: int) -> "DiagramBuilder":
        """Identify boundary darts ``k`` and ``k+1`` (cyclically), which must be mutually inverse."""
        nb = len(self.boundary)
        x, y = self.boundary[k % nb], self.boundary[(k + 1) % nb]
        if self.label[y] != -self.label[x]:
            raise ValueError("fold needs inverse labels")
        ox, oy = self._outer_twin(x), self._outer_twin(y)
        self.twin[x], self.twin[y] = y, x
        self.alive[ox] = self.alive[oy] = False
        drop = {k % nb, (k + 1) % nb}
        start = (k + 2) % nb
        self.boundary = [self.boundary[(start + s) % nb] for s in range(nb)
                         if (start + s) % nb not in drop]
        return self

    def mirror(self) -> "DiagramBuilder":
        """Reflect the disk: every face reads the inverse word, the boundary too."""
        self.faces = [[[self.twin[x] for x in reversed(f[0])], f[1], -f[2]] for f in self.faces]
        self.boundary = [self.twin[x] for x in reversed(self.boundary)]
        return self

    def build(self, boundary: Optional[Word] = None) -> VanKampenDiagram:
        """Freeze into a diagram with compact dart ids (creation order)."""
        ids = {}
        for x, live in enumerate(self.alive):
            if live:
                ids[x] = len(ids)
        n = len(ids)
        inner_phi = {}
        for cyc, _, _ in self.faces:
            for s, x in enumerate(cyc):
                inner_phi[x] = cyc[(s + 1) % len(cyc)]
        phi = dict(inner_phi)
        nb = len(self.boundary)
        for s, x in enumerate(self.boundary):
            o = self.twin[x]
            phi[o] = self.twin[self.boundary[(s - 1) % nb]]
        darts = []
        for x, new in ids.items():
            t = self.twin[x]
            darts.append(Dart(new, ids[t], ids[phi[t]], self.label[x]))
        faces = []
        for cyc, rel, sign in self.faces:
            mapped = [ids[x] for x in cyc]
            lo = mapped.index(min(mapped))
            faces.append(Face(tuple(mapped[lo:] + mapped[:lo]), rel, sign, (-lo) % len(mapped)))
        if nb:
            base = ids[self.twin[self.boundary[0]]]
            outer = base
        else:
            base = outer = None
        if n and base is None:
            raise ValueError("closed surface: no boundary left")
        bnd = boundary if boundary is not None else free_reduce(self.boundary_word())
        return VanKampenDiagram(tuple(darts), tuple(faces), outer, base, self.presentation, bnd)


def empty_diagram(presentation: Presentation) -> VanKampenDiagram:
    return VanKampenDiagram((), (), None, None, presentation, Word((), presentation.alphabet))


def single_cell_diagram(presentation: Presentation, relator: int = 0, sign: int = 1) -> VanKampenDiagram:
    return DiagramBuilder.cell(presentation, relator, sign).build()


def _budget(cells: int, budget: int) -> None:
    if cells > budget:
        raise CellBudgetError(f"diagram needs {cells} cells, budget is {budget}")


def _power_builder(m: int, presentation: Presentation) -> DiagramBuilder:
    """Boundary ``x2^m x1 x2^-m x1^-(2^m)``, starting at the bottom-left corner.

    Level ``k`` adds a corridor of ``2^(k-1)`` cells under the previous
    diagram, turning its ``x1^(2^(k-1))`` bottom into ``x1^(2^k)``.
    """
    top = DiagramBuilder.cell(presentation, 0, 1)     # x2 x1 x2^-1 x1^-1 x1^-1
    for k in range(2, m + 1):
        width = 1 << (k - 1)
        corridor = DiagramBuilder.cell(presentation, 0, 1)
        first_left = corridor.boundary[0]
        for _ in range(width - 1):
            # corridor boundary: x2, x1^c, x2^-1, x1^-2c; glue its x2^-1 side to a new cell's x2 side
            c = corridor.boundary.index(first_left)
            corridor.rotate(c)
            right = 1 + (len(corridor.boundary) - 2) // 3
            corridor.glue(right, DiagramBuilder.cell(presentation, 0, 1), 0, 1)
            corridor.rotate(corridor.boundary.index(first_left))
        # corridor: x2, x1^width (positions 1..width), x2^-1, x1^-2width
        # top: x2^(k-1) x1 x2^-(k-1) (positions 0..2k-2), then x1^-width
        top.glue(2 * (k - 1) + 1, corridor, 1, width)
        top.rotate(-1)      # the corridor's left x2 edge closes the boundary
    return top


def build_power_diagram(m: int, presentation: Optional[Presentation] = None,
                        cell_budget: int = DEFAULT_CELL_BUDGET) -> VanKampenDiagram:
    """Diagram over G(2) for ``x2^m x1 x2^-m x1^-(2^m)`` with ``2^m - 1`` cells."""
    from .families import G
    if m < 1:
        raise ValueError("m must be >= 1")
    _budget((1 << m) - 1, cell_budget)
    pres = presentation or G(2)
    return _power_builder(m, pres).build()


def _w_builder(m: int, presentation: Presentation) -> DiagramBuilder:
    """Two power diagrams, the second mirrored, glued along ``x1^(2^m - 1)``."""
    N = 1 << m
    upper = _power_builder(m, presentation)     # A x1^-N, A = x2^m x1 x2^-m
    lower = _power_builder(m, presentation).mirror()   # x1^N A^-1
    a_len = 2 * m + 1
    upper.glue(a_len, lower, 0, N - 1)
    # boundary now: x1^-1, A, x1, A^-1
    return upper.rotate(1)


def build_w_diagram(m: int, presentation: Optional[Presentation] = None,
                    cell_budget: int = DEFAULT_CELL_BUDGET) -> VanKampenDiagram:
    """Diagram over G(2) with boundary ``w_m`` and ``2 (2^m - 1)`` cells."""
    from .families import G
    if m < 1:
        raise ValueError("m must be >= 1")
    _budget(2 * ((1 << m) - 1), cell_budget)
    pres = presentation or G(2)
    return _w_builder(m, pres).build()


def build_xn_diagram(n: int = 2, cell_budget: int = DEFAULT_CELL_BUDGET) -> VanKampenDiagram:
    """Diagram over P(2) with boundary ``x2``.

    The P-relator cell is folded onto itself along its ``t``-edge, forming a
    single t-annulus; its inner loop ``v_2`` and the ``v_2`` part of its
    outer loop are each capped by a ``w_2``-diagram (``v_2 = w_2``).
    """
    from .families import P, v_word, w_word
    if n != 2:
        raise ValueError("build_xn_diagram is only available for n = 2")
    pres = P(2)
    v = v_word(2, pres.alphabet)
    assert v.letters == w_word(2, pres.alphabet).letters
    cap_area = 2 * ((1 << 2) - 1)
    _budget(1 + 2 * cap_area, cell_budget)
    rel = len(pres.relators) - 1
    b = DiagramBuilder.cell(pres, rel, 1)          # t v t^-1 x2^-1 v^-1
    inner_cap = _w_builder(2, pres).mirror()       # boundary v^-1
    b.glue(1, inner_cap, 0, len(v))                # -> t^-1 x2^-1 v^-1 t
    b.fold(len(b.boundary) - 1)                    # -> x2^-1 v^-1
    outer_cap = _w_builder(2, pres)                # boundary v
    b.glue(1, outer_cap, 0, len(v))                # -> x2^-1
    b.mirror()                                     # -> x2
    return b.build()


# -- t-annuli -----------------------------------------------------------------

@dataclass(frozen=True)
class TAnnulus:
    cells: tuple[int, ...]          # indices into diagram.faces, in annulus order
    inner_boundary_word: Word
    outer_boundary_word: Word


def t_annuli(d: VanKampenDiagram, stable: str = "t") -> list[TAnnulus]:
    """Group the cells containing the stable letter into t-annuli."""
    _require_valid(d)
    pres = d.presentation
    a = pres.alphabet
    if stable not in a.names:
        return []
    tt = a.index(stable)
    if any(abs(x) == tt for x in boundary_word(d).letters):
        raise AnnulusError(f"boundary word contains {stable}; t-annuli need a {stable}-free boundary")
    darts = d.darts
    labels = [x.label for x in darts]
    twin = [x.twin for x in darts]
    face_of = {}
    for fi, f in enumerate(d.faces):
        for x in f.darts:
            face_of[x] = fi
    t_cells = {}
    for fi, f in enumerate(d.faces):
        plus = [x for x in f.darts if labels[x] == tt]
        minus = [x for x in f.darts if labels[x] == -tt]
        if not plus and not minus:
            continue
        if len(plus) != 1 or len(minus) != 1:
            raise AnnulusError(f"cell {fi} has {len(plus)} t-edges and {len(minus)} t^-1-edges")
        t_cells[fi] = (plus[0], minus[0])
    # follow each cell's t-dart across its edge to the neighbouring cell
    succ = {}
    for fi, (plus, _) in t_cells.items():
        other = twin[plus]
        if other not in face_of or face_of[other] not in t_cells:
            raise AnnulusError(f"t-edge of cell {fi} does not lead into another t-cell")
        succ[fi] = face_of[other]
    if sorted(succ.values()) != sorted(succ):
        raise AnnulusError("t-cells do not chain into closed annuli")

    phi = [darts[twin[i]].next for i in range(len(darts))]
    outer_face = _outer_region(d, phi, set(t_cells), face_of)
    result = []
    done = set()
    for start in sorted(t_cells):
        if start in done:
            continue
        cycle = [start]
        done.add(start)
        while succ[cycle[-1]] != start:
            cycle.append(succ[cycle[-1]])
            done.add(cycle[-1])
        side_a, side_b = [], []        # arc after t (before t^-1), arc after t^-1
        for fi in cycle:
            plus, minus = t_cells[fi]
            side_a.append(_arc(phi, plus, minus))
            side_b.append(_arc(phi, minus, plus))
        # A-arcs chain against the annulus direction, B-arcs along it
        word_a = [labels[x] for arc in reversed(side_a) for x in arc]
        word_b = [labels[x] for arc in side_b for x in arc]
        darts_a = [x for arc in side_a for x in arc]
        a_outer = _touches(darts_a, twin, face_of, outer_face)
        wa = free_reduce(Word(tuple(word_a), a))
        wb = free_reduce(Word(tuple(word_b), a))
        inner, outer = (wb, wa) if a_outer else (wa, wb)
        result.append(TAnnulus(tuple(cycle), inner, outer))
    return result


def _arc(phi, frm, to) -> list[int]:
    out = []
    x = phi[frm]
    while x != to:
        out.append(x)
        x = phi[x]
    return out


def _outer_region(d, phi, blocked: set, face_of) -> set:
    """Faces (by index, -1 for the outer face) reachable from the outer face across non-blocked edges."""
    def face(x):
        return face_of.get(x, -1)
    adj: dict[int, set] = {}
    for x, dart in enumerate(d.darts):
        fa, fb = face(x), face(dart.twin)
        if fa in blocked or fb in blocked:
            continue
        adj.setdefault(fa, set()).add(fb)
    reach = {-1}
    queue = deque([-1])
    while queue:
        f = queue.popleft()
        for g in adj.get(f, ()):
            if g not in reach:
                reach.add(g)
                queue.append(g)
    return reach


def _touches(arc_darts, twin, face_of, region) -> bool:
    return any(face_of.get(twin[x], -1) in region for x in arc_darts)
