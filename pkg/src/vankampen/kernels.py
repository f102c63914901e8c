"""Batch kernels for the oracle search.

Words live in padded ``int8`` matrices (one row per word, ``lens`` holding
the lengths).  A move splices relator ``k`` (relators and their inverses,
interleaved as ``2*i`` for ``r_i^-1`` and ``2*i + 1`` for ``r_i``) at a
position and freely reduces.  Search states are identified by integer keys:
letters become base-``2g+1`` digits packed into ``K`` int64 columns.

Two interchangeable backends compute successors: a numba ``@njit`` kernel
and a vectorised numpy one.  ``VANKAMPEN_BACKEND=numpy`` forces the numpy
path; by default numba is used when importable.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
    from numba import njit, prange
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

INVALID = -1


def _default_backend() -> str:
    choice = os.environ.get("VANKAMPEN_BACKEND", "").strip().lower()
    if choice in ("numpy", "python"):
        return "numpy"
    if choice == "numba" and not HAS_NUMBA:
        raise RuntimeError("VANKAMPEN_BACKEND=numba but numba is not importable")
    return "numba" if HAS_NUMBA else "numpy"


BACKEND = _default_backend()


class KeyCodec:
    """Packs words of length ``<= max_len`` over ``num_gens`` generators into int64 rows."""

    def __init__(self, num_gens: int, max_len: int):
        self.num_gens = num_gens
        self.base = 2 * num_gens + 1
        self.max_len = max_len
        self.per = max(1, int(63 / math.log2(self.base)))
        while self.base ** self.per >= 2 ** 63:
            self.per -= 1
        self.K = max(1, -(-max_len // self.per))
        self.powers = np.array([self.base ** i for i in range(self.per)], dtype=np.int64)

    def digits(self, words: np.ndarray) -> np.ndarray:
        g = self.num_gens
        d = words.astype(np.int64)
        return np.where(d > 0, d, np.where(d < 0, g - d, 0))

    def encode(self, words: np.ndarray, lens: np.ndarray) -> np.ndarray:
        """Rows of ``words`` (padded with anything past ``lens``) to ``(N, K)`` keys."""
        n = words.shape[0]
        width = self.K * self.per
        padded = np.zeros((n, width), dtype=np.int64)
        w = min(words.shape[1], width)
        d = self.digits(words[:, :w])
        mask = np.arange(w)[None, :] < lens[:, None]
        padded[:, :w] = np.where(mask, d, 0)
        padded = padded.reshape(n, self.K, self.per)
        return (padded * self.powers[None, None, :]).sum(axis=2)

    def decode(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = keys.shape[0]
        g = self.num_gens
        digits = np.empty((n, self.K, self.per), dtype=np.int64)
        rest = keys.copy()
        for i in range(self.per):
            digits[:, :, i] = rest % self.base
            rest //= self.base
        digits = digits.reshape(n, self.K * self.per)[:, :max(self.max_len, 1)]
        lens = (digits != 0).sum(axis=1).astype(np.int32)
        letters = np.where(digits > g, g - digits, digits).astype(np.int8)
        return letters, lens


def pack_relators(relators) -> tuple[np.ndarray, np.ndarray]:
    """Interleave ``r_i^-1`` and ``r_i`` as rows ``2i`` and ``2i+1``."""
    rows = []
    for r in relators:
        letters = tuple(r)
        rows.append(tuple(-a for a in reversed(letters)))
        rows.append(letters)
    width = max((len(r) for r in rows), default=1) or 1
    mat = np.zeros((len(rows), width), dtype=np.int8)
    lens = np.zeros(len(rows), dtype=np.int32)
    for i, r in enumerate(rows):
        mat[i, :len(r)] = r
        lens[i] = len(r)
    return mat, lens


# -- numpy backend ------------------------------------------------------------

def _run_length(match: np.ndarray, limit: np.ndarray) -> np.ndarray:
    """Length of the leading all-True run along the last axis, capped by ``limit``."""
    width = match.shape[-1]
    allowed = np.arange(width) < limit[..., None]
    run = np.cumprod(match & allowed, axis=-1)
    return run.sum(axis=-1)


def expand_numpy(words, lens, rels, rel_lens, max_len, codec: KeyCodec):
    """Keys of all splice-and-reduce successors, shape ``(F * M, K)``, ``M = (W+1) * R2``."""
    F, W = words.shape
    R2, Lr = rels.shape
    P = W + 1
    wi = words.astype(np.int16)
    ri = rels.astype(np.int16)
    n = lens.astype(np.int64)[:, None, None]                         # F,1,1
    pos = np.arange(P, dtype=np.int64)[None, :, None]                 # 1,P,1
    rl = rel_lens.astype(np.int64)[None, None, :]                     # 1,1,R2
    valid = pos <= n

    def u_at(idx):
        # idx broadcastable to (F,P,R2,X); out-of-range reads give 0
        ok = (idx >= 0) & (idx < W)
        safe = np.clip(idx, 0, W - 1)
        rows = np.arange(F)[:, None, None, None]
        return np.where(ok, wi[rows, safe], 0)

    ii = np.arange(Lr, dtype=np.int64)
    # k1: suffix of u[:pos] against prefix of r
    u_back = u_at(pos[..., None] - 1 - ii)                            # F,P,1,Lr
    r_front = ri[None, None, :, :]                                    # 1,1,R2,Lr
    k1 = _run_length(u_back == -r_front, np.minimum(pos, rl) + 0 * n)
    # k2: suffix of r[k1:] against prefix of u[pos:]
    r_back_idx = rl[..., None] - 1 - ii                               # 1,1,R2,Lr
    r_back = np.take_along_axis(
        np.broadcast_to(ri[None, None, :, :], (1, 1, R2, Lr)),
        np.clip(r_back_idx, 0, Lr - 1), axis=3)
    u_fwd = u_at(pos[..., None] + ii)                                 # F,P,1,Lr
    k2 = _run_length(u_fwd == -r_back, np.minimum(rl - k1, n - pos))
    # k3: u[:pos-k1] against u[pos+k2:] once r is used up
    used = (k1 + k2) == rl
    left_end = pos - k1
    right_start = pos + k2
    jj = np.arange(W, dtype=np.int64)
    a3 = u_at(left_end[..., None] - 1 - jj)
    b3 = u_at(right_start[..., None] + jj)
    k3 = np.where(used, _run_length(a3 == -b3, np.minimum(left_end, n - right_start)), 0)

    A = left_end - k3                       # kept prefix length
    B = rl - k1 - k2                        # kept relator slice length
    out_len = n + rl - 2 * (k1 + k2 + k3)
    ok = valid & (out_len <= max_len)

    width = max_len
    j = np.arange(width, dtype=np.int64)
    jf = j[None, None, None, :]
    A4, B4, k14, L4 = A[..., None], B[..., None], k1[..., None], out_len[..., None]
    from_u1 = u_at(np.broadcast_to(jf, A4.shape[:3] + (width,)))
    r_idx = np.clip(k14 + jf - A4, 0, Lr - 1)
    from_r = np.take_along_axis(np.broadcast_to(ri[None, None, :, :], (F, P, R2, Lr)), r_idx, axis=3)
    from_u2 = u_at((right_start + k3)[..., None] + (jf - A4 - B4))
    out = np.where(jf < A4, from_u1, np.where(jf < A4 + B4, from_r, from_u2))
    out = np.where(jf < L4, out, 0)

    flat_out = out.reshape(F * P * R2, width).astype(np.int8)
    flat_len = np.broadcast_to(out_len, (F, P, R2)).reshape(-1)
    keys = codec.encode(flat_out, np.clip(flat_len, 0, width))
    keys[~ok.reshape(-1)] = INVALID
    return keys


# -- numba backend ------------------------------------------------------------

if HAS_NUMBA:
    @njit(cache=True)
    def _expand_row(words, lens, rels, rel_lens, max_len, base, per, K, f, out, M):
        n = lens[f]
        W = words.shape[1]
        R2 = rels.shape[0]
        buf = np.empty(W + rels.shape[1] + 1, np.int64)
        g = (base - 1) // 2
        for p in range(W + 1):
            for k in range(R2):
                idx = f * M + p * R2 + k
                if p > n:
                    for c in range(K):
                        out[idx, c] = -1
                    continue
                top = 0
                for i in range(p):
                    buf[top] = words[f, i]
                    top += 1
                for i in range(rel_lens[k]):
                    a = rels[k, i]
                    if top > 0 and buf[top - 1] == -a:
                        top -= 1
                    else:
                        buf[top] = a
                        top += 1
                for i in range(p, n):
                    a = words[f, i]
                    if top > 0 and buf[top - 1] == -a:
                        top -= 1
                    else:
                        buf[top] = a
                        top += 1
                if top > max_len:
                    for c in range(K):
                        out[idx, c] = -1
                    continue
                for c in range(K):
                    acc = 0
                    mul = 1
                    for i in range(per):
                        q = c * per + i
                        if q < top:
                            a = buf[q]
                            d = a if a > 0 else g - a
                            acc += d * mul
                        mul *= base
                    out[idx, c] = acc

    @njit(cache=True)
    def _expand_serial(words, lens, rels, rel_lens, max_len, base, per, K, out):
        F = words.shape[0]
        M = (words.shape[1] + 1) * rels.shape[0]
        for f in range(F):
            _expand_row(words, lens, rels, rel_lens, max_len, base, per, K, f, out, M)

    @njit(cache=True, parallel=True)
    def _expand_parallel(words, lens, rels, rel_lens, max_len, base, per, K, out):
        F = words.shape[0]
        M = (words.shape[1] + 1) * rels.shape[0]
        for f in prange(F):
            _expand_row(words, lens, rels, rel_lens, max_len, base, per, K, f, out, M)


def expand_numba(words, lens, rels, rel_lens, max_len, codec: KeyCodec, parallel: bool = False):
    F, W = words.shape
    M = (W + 1) * rels.shape[0]
    out = np.empty((F * M, codec.K), dtype=np.int64)
    fn = _expand_parallel if parallel else _expand_serial
    fn(np.ascontiguousarray(words, dtype=np.int8), lens.astype(np.int64),
       rels, rel_lens.astype(np.int64), max_len, codec.base, codec.per, codec.K, out)
    return out


def expand(words, lens, rels, rel_lens, max_len, codec: KeyCodec,
           backend: str | None = None, parallel: bool = False) -> np.ndarray:
    """Successor keys for every (state, position, signed relator), state-major.

    Rows for positions past a word's end, or successors longer than
    ``max_len``, are filled with ``INVALID``.
    """
    backend = backend or BACKEND
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return expand_numba(words, lens, rels, rel_lens, max_len, codec, parallel)
    if backend != "numpy":
        raise ValueError(f"unknown backend {backend!r}")
    keys = expand_numpy(words, lens, rels, rel_lens, max_len, codec)
    return keys
