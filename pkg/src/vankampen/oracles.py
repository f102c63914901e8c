"""Brute-force area and filling-length oracles.

States are freely reduced words; a move splices ``r^{+-1}`` at a position
and freely reduces.  Every move costs one, so the uniform-cost search runs
as a layered breadth-first search.  Within a layer, successors are
generated state by state in discovery order and, per state, by the move key
``(position, relator index, sign)`` with ``sign = -1`` before ``+1``;
keeping only first discoveries makes the returned witness the
lexicographically smallest minimum-cost move sequence.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import kernels
from .families import Presentation
from .words import Word, free_reduce

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchCaps:
    max_word_length: int = 24
    max_cost: int = 64
    max_states: int = 20_000_000

    def __post_init__(self):
        for name in ("max_word_length", "max_cost", "max_states"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Insert:
    relator: int
    sign: int
    position: int

    def to_json(self):
        return {"op": "insert", "relator": self.relator, "sign": self.sign,
                "position": self.position}


@dataclass(frozen=True)
class FreeReduceAll:
    def to_json(self):
        return {"op": "reduce"}


@dataclass(frozen=True)
class NullSequence:
    start: Word
    moves: tuple
    cost: int
    peak: int

    def to_json(self) -> dict:
        return {"start": self.start.to_json(), "cost": self.cost, "peak": self.peak,
                "moves": [m.to_json() for m in self.moves]}

    @classmethod
    def from_json(cls, data: dict, presentation: Presentation) -> "NullSequence":
        moves = []
        for m in data["moves"]:
            if m["op"] == "insert":
                moves.append(Insert(int(m["relator"]), int(m["sign"]), int(m["position"])))
            elif m["op"] == "reduce":
                moves.append(FreeReduceAll())
            else:
                raise ValueError(f"unknown move {m!r}")
        start = Word(tuple(data["start"]), presentation.alphabet)
        return cls(start, tuple(moves), int(data["cost"]), int(data["peak"]))


class ReplayError(ValueError):
    pass


def replay(p: Presentation, seq: NullSequence) -> tuple[int, int]:
    """Replay ``seq``; returns ``(cost, peak)`` or raises ReplayError.

    Peak is the largest freely reduced length seen, including the start.
    """
    cur = list(seq.start.letters)
    cur_reduced = free_reduce(seq.start)
    peak = len(cur_reduced)
    cost = 0
    for m in seq.moves:
        if isinstance(m, Insert):
            if not 0 <= m.relator < len(p.relators) or m.sign not in (1, -1):
                raise ReplayError(f"bad move {m}")
            if not 0 <= m.position <= len(cur):
                raise ReplayError(f"position {m.position} outside word of length {len(cur)}")
            r = p.relators[m.relator] if m.sign == 1 else p.relators[m.relator].inverse()
            cur = cur[:m.position] + list(r.letters) + cur[m.position:]
            cost += 1
        else:
            cur = list(free_reduce(Word(tuple(cur), p.alphabet)).letters)
            peak = max(peak, len(cur))
    if free_reduce(Word(tuple(cur), p.alphabet)).letters:
        raise ReplayError("null sequence does not end at the empty word")
    if (cost, peak) != (seq.cost, seq.peak):
        raise ReplayError(f"recorded cost/peak {(seq.cost, seq.peak)} != replayed {(cost, peak)}")
    return cost, peak


@dataclass
class SearchResult:
    cost: Optional[int]
    witness: Optional[NullSequence]
    status: str                   # "found" | "exhausted" | "cost-cap" | "state-cap" | "length-cap"
    states: int = 0
    layers: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.cost is not None


LowerBound = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _isin_sorted(keys: np.ndarray, sorted_visited: np.ndarray) -> np.ndarray:
    if sorted_visited.size == 0:
        return np.zeros(keys.shape[0], dtype=bool)
    idx = np.searchsorted(sorted_visited, keys)
    idx = np.minimum(idx, sorted_visited.size - 1)
    return sorted_visited[idx] == keys


class _Visited:
    """Visited set over key rows: sorted int64 array when K == 1, else a set of bytes."""

    def __init__(self, K: int):
        self.K = K
        self.sorted = np.empty(0, dtype=np.int64)
        self.set: set = set()

    def __len__(self):
        return self.sorted.size if self.K == 1 else len(self.set)

    def filter_new(self, keys: np.ndarray) -> np.ndarray:
        if self.K == 1:
            return ~_isin_sorted(keys[:, 0], self.sorted)
        return np.array([k.tobytes() not in self.set for k in keys], dtype=bool)

    def add(self, keys: np.ndarray) -> None:
        if self.K == 1:
            self.sorted = np.union1d(self.sorted, keys[:, 0])
        else:
            self.set.update(k.tobytes() for k in keys)


def _first_occurrences(keys: np.ndarray) -> np.ndarray:
    """Indices of first occurrences of each distinct row, in original order."""
    if keys.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if keys.shape[1] == 1:
        _, first = np.unique(keys[:, 0], return_index=True)
    else:
        view = np.ascontiguousarray(keys).view(np.dtype((np.void, keys.dtype.itemsize * keys.shape[1])))
        _, first = np.unique(view.ravel(), return_index=True)
    return np.sort(first)


def uniform_cost_search(p: Presentation, w: Word, caps: SearchCaps,
                        lower_bound: Optional[LowerBound] = None,
                        cost_bound: Optional[int] = None,
                        backend: Optional[str] = None, parallel: bool = False,
                        chunk: int = 50_000) -> SearchResult:
    """Layered search from ``w`` to the empty word under ``caps``.

    ``lower_bound`` (optional) maps decoded words to admissible lower bounds
    on their remaining cost; states with ``depth + bound > cost_bound`` are
    dropped.  Without it this is plain uniform-cost search.
    """
    w = free_reduce(w.over(p.alphabet) if w.alphabet != p.alphabet else w)
    L = caps.max_word_length
    if len(w) > L:
        return SearchResult(None, None, "length-cap")
    codec = kernels.KeyCodec(len(p.alphabet), max(L, 1))
    rels, rel_lens = kernels.pack_relators([r.letters for r in p.relators])
    R2 = rels.shape[0]
    limit = caps.max_cost if cost_bound is None else min(cost_bound, caps.max_cost)

    start_words = np.zeros((1, max(L, 1)), dtype=np.int8)
    start_words[0, :len(w)] = w.letters
    start_lens = np.array([len(w)], dtype=np.int32)
    frontier = codec.encode(start_words, start_lens)
    empty_key = np.zeros(codec.K, dtype=np.int64)
    visited = _Visited(codec.K)
    visited.add(frontier)
    history: list[tuple[np.ndarray, np.ndarray, int]] = []   # (parent idx, move idx, M) per layer
    layer_sizes = [1]

    if len(w) == 0:
        return SearchResult(0, NullSequence(w, (), 0, 0), "found", 1, layer_sizes)
    if lower_bound is not None and lower_bound(start_words, start_lens)[0] > limit:
        return SearchResult(None, None, "cost-cap", 1, layer_sizes)
    if R2 == 0:
        return SearchResult(None, None, "exhausted", 1, layer_sizes)

    for depth in range(1, limit + 1):
        words, lens = codec.decode(frontier)
        W = int(lens.max()) if lens.size else 0
        words = np.ascontiguousarray(words[:, :max(W, 1)])
        M = (words.shape[1] + 1) * R2
        new_keys, new_src = [], []
        for lo in range(0, frontier.shape[0], chunk):
            succ = kernels.expand(words[lo:lo + chunk], lens[lo:lo + chunk], rels, rel_lens,
                                  L, codec, backend=backend, parallel=parallel)
            ok = np.nonzero(succ[:, 0] != kernels.INVALID)[0]
            keys = succ[ok]
            first = _first_occurrences(keys)
            keys, src = keys[first], ok[first] + lo * M
            fresh = visited.filter_new(keys)
            new_keys.append(keys[fresh])
            new_src.append(src[fresh])
        keys = np.concatenate(new_keys) if new_keys else np.empty((0, codec.K), np.int64)
        src = np.concatenate(new_src) if new_src else np.empty(0, np.int64)
        # chunks can rediscover each other's states; keep the first
        first = _first_occurrences(keys)
        keys, src = keys[first], src[first]
        visited.add(keys)
        if lower_bound is not None and keys.shape[0]:
            dw, dl = codec.decode(keys)
            keep = depth + lower_bound(dw, dl) <= limit
            keys, src = keys[keep], src[keep]
        history.append((src // M, src % M, M))
        layer_sizes.append(int(keys.shape[0]))
        hit = np.nonzero((keys == empty_key).all(axis=1))[0]
        if hit.size:
            moves = _trace(history, int(hit[0]), R2)
            witness = _witness(p, w, moves)
            return SearchResult(depth, witness, "found", len(visited), layer_sizes)
        if keys.shape[0] == 0:
            return SearchResult(None, None, "exhausted", len(visited), layer_sizes)
        if len(visited) > caps.max_states:
            return SearchResult(None, None, "state-cap", len(visited), layer_sizes)
        frontier = keys
        log.debug("layer %d: %d new states (%d visited)", depth, keys.shape[0], len(visited))
    return SearchResult(None, None, "cost-cap", len(visited), layer_sizes)


def _trace(history, index: int, R2: int) -> list[Insert]:
    moves = []
    for parent, move, M in reversed(history):
        mv = int(move[index])
        pos, k = divmod(mv, R2)
        rel, s = divmod(k, 2)
        moves.append(Insert(rel, 1 if s else -1, pos))
        index = int(parent[index])
    moves.reverse()
    return moves


def _witness(p: Presentation, w: Word, inserts: list[Insert]) -> NullSequence:
    moves = []
    cur = w
    peak = len(w)
    for ins in inserts:
        moves.append(ins)
        moves.append(FreeReduceAll())
        r = p.relators[ins.relator] if ins.sign == 1 else p.relators[ins.relator].inverse()
        cur = free_reduce(Word(cur.letters[:ins.position] + r.letters + cur.letters[ins.position:],
                               p.alphabet))
        peak = max(peak, len(cur))
    seq = NullSequence(w, tuple(moves), len(inserts), peak)
    replay(p, seq)
    return seq


def min_area(p: Presentation, w: Word, caps: SearchCaps = SearchCaps(),
             lower_bound: Optional[LowerBound] = None, **kw):
    """Minimum number of relator insertions taking ``w`` to the empty word.

    Returns ``(cost, witness)`` or None when nothing is found within caps.
    With ``lower_bound`` the cost bound is raised from the bound of ``w``
    one step at a time, so the first success is a minimum.
    """
    res = area_search(p, w, caps, lower_bound, **kw)
    return (res.cost, res.witness) if res.found else None


def area_search(p: Presentation, w: Word, caps: SearchCaps = SearchCaps(),
                lower_bound: Optional[LowerBound] = None, **kw) -> SearchResult:
    if lower_bound is None:
        return uniform_cost_search(p, w, caps, **kw)
    w = free_reduce(w.over(p.alphabet) if w.alphabet != p.alphabet else w)
    arr = np.zeros((1, max(len(w), 1)), dtype=np.int8)
    arr[0, :len(w)] = w.letters
    start = int(lower_bound(arr, np.array([len(w)], dtype=np.int32))[0])
    res = SearchResult(None, None, "cost-cap")
    for bound in range(start, caps.max_cost + 1):
        res = uniform_cost_search(p, w, caps, lower_bound, cost_bound=bound, **kw)
        if res.found or res.status in ("state-cap", "length-cap"):
            return res
    return res


def fill_length(p: Presentation, w: Word, caps: SearchCaps = SearchCaps(), **kw):
    """Least peak length over null sequences, as ``(peak, witness)``, or None.

    Tries word-length caps ``len(w), len(w) + 1, ...`` up to
    ``caps.max_word_length``; the witness is the cheapest (then
    lexicographically smallest) sequence at the first cap that succeeds.
    """
    w = free_reduce(w.over(p.alphabet) if w.alphabet != p.alphabet else w)
    for peak in range(len(w), caps.max_word_length + 1):
        sub = SearchCaps(max(peak, 1), caps.max_cost, caps.max_states)
        res = uniform_cost_search(p, w, sub, **kw)
        if res.found:
            return peak, res.witness
    return None


# -- reports ----------------------------------------------------------------

def reduced_words(alphabet_size: int, length: int) -> Iterable[tuple[int, ...]]:
    """All freely reduced words of the given length, in lexicographic letter order."""
    letters = sorted([i for i in range(1, alphabet_size + 1)] +
                     [-i for i in range(1, alphabet_size + 1)])

    def rec(prefix):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for a in letters:
            if prefix and prefix[-1] == -a:
                continue
            prefix.append(a)
            yield from rec(prefix)
            prefix.pop()

    yield from rec([])


@dataclass
class ProfileRow:
    length: int
    value: Optional[int]
    trivial_words: int
    exact: bool
    argmax: Optional[Word] = None

    def as_dict(self):
        return {"length": self.length, "max_area": self.value, "trivial_words": self.trivial_words,
                "exact": self.exact, "argmax": self.argmax.to_json() if self.argmax is not None else None}


def dehn_profile(p: Presentation, L: int, caps: SearchCaps = SearchCaps(),
                 is_trivial: Optional[Callable[[Word], bool]] = None, **kw) -> list[ProfileRow]:
    """Rows ``(length, max area over trivial words of that length)`` for lengths ``0..L``.

    ``is_trivial`` pre-screens words; by default the solver matching the
    presentation's family tag is used.  Rows where some trivial word was not
    filled within caps are marked inexact (a lower bound).
    """
    if is_trivial is None:
        is_trivial = _default_screen(p)
    rows = []
    for length in range(L + 1):
        best, arg, count, exact = 0, None, 0, True
        for letters in reduced_words(len(p.alphabet), length):
            w = Word(letters, p.alphabet)
            if not is_trivial(w):
                continue
            count += 1
            res = min_area(p, w, caps, **kw)
            if res is None:
                exact = False
                continue
            if res[0] > best or arg is None:
                best, arg = res[0], w
        rows.append(ProfileRow(length, best if count else None, count, exact, arg))
    return rows


def _default_screen(p: Presentation) -> Callable[[Word], bool]:
    from .wordproblem import is_trivial_G, is_trivial_P
    if p.family is None:
        raise ValueError("dehn_profile needs a triviality screen for untagged presentations")
    tag, n = p.family
    if tag == "G":
        return lambda w: is_trivial_G(n, w).is_trivial
    if tag == "P":
        return lambda w: is_trivial_P(n, w)
    if tag in ("Q", "T"):
        return lambda w: True
    raise ValueError(f"no triviality screen for family {tag}")


@dataclass
class ScalingRow:
    m: int
    diagram_area: int
    oracle_area: Optional[int]
    oracle_note: str
    ratio: Optional[float]

    def as_dict(self):
        return {"m": self.m, "diagram_area": self.diagram_area, "oracle_area": self.oracle_area,
                "oracle_note": self.oracle_note,
                "ratio": None if self.ratio is None else round(self.ratio, 6)}


def scaling_report(family: str, m_range: Iterable[int], caps: SearchCaps = SearchCaps(),
                   oracle_max_m: int = 3, cell_budget: int = 1 << 16,
                   lower_bound: Optional[LowerBound] = None, **kw) -> list[ScalingRow]:
    """Areas of ``build_w_diagram(m)`` next to oracle minima and successive ratios."""
    from .diagrams import area, build_w_diagram
    from .families import G, w_word
    if family != "w_words":
        raise ValueError(f"unknown scaling family {family!r}")
    rows: list[ScalingRow] = []
    prev = None
    for m in m_range:
        d_area = area(build_w_diagram(m, cell_budget=cell_budget))
        oracle, note = None, "skipped: caps"
        if m <= oracle_max_m:
            res = min_area(G(2), w_word(m), caps, lower_bound=lower_bound, **kw)
            oracle, note = (res[0], "exact") if res else (None, "not found within caps")
        ratio = d_area / prev if prev else None
        rows.append(ScalingRow(m, d_area, oracle, note, ratio))
        prev = d_area
    return rows


def rows_to_csv(rows) -> str:
    dicts = [r.as_dict() for r in rows]
    buf = io.StringIO()
    if not dicts:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(dicts[0].keys()), lineterminator="\n")
    writer.writeheader()
    for d in dicts:
        writer.writerow({k: json.dumps(v) if isinstance(v, list) else ("" if v is None else v)
                         for k, v in d.items()})
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([r.as_dict() for r in rows], indent=2, sort_keys=True) + "\n"
