import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vankampen import kernels
from vankampen.families import G, P
from vankampen.oracles import SearchCaps, area_search

from _reference import naive_reduce, splice_successors

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")


def _batch(words, width):
    arr = np.zeros((len(words), max(width, 1)), dtype=np.int8)
    lens = np.zeros(len(words), dtype=np.int32)
    for i, w in enumerate(words):
        arr[i, :len(w)] = w
        lens[i] = len(w)
    return arr, lens


reduced = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=14).map(naive_reduce)


@given(st.lists(reduced, min_size=1, max_size=6))
def test_codec_round_trip(words):
    codec = kernels.KeyCodec(2, 20)
    arr, lens = _batch(words, 20)
    back, blens = codec.decode(codec.encode(arr, lens))
    for i, w in enumerate(words):
        assert blens[i] == len(w)
        assert tuple(back[i, :blens[i]]) == w


def test_codec_multiword_keys():
    codec = kernels.KeyCodec(3, 60)
    assert codec.K > 1
    w = tuple([1, 2, -3, 3] * 15)
    arr, lens = _batch([w], 60)
    back, blens = codec.decode(codec.encode(arr, lens))
    assert tuple(back[0, :blens[0]]) == w


def test_pack_relators_order():
    rels, lens = kernels.pack_relators([(2, 1, -2, -1, -1)])
    assert tuple(rels[0, :lens[0]]) == (1, 1, 2, -1, -2)
    assert tuple(rels[1, :lens[1]]) == (2, 1, -2, -1, -1)


def _expected_keys(words, relators, max_len, codec, width):
    R2 = 2 * len(relators)
    out = []
    for w in words:
        succ = splice_successors(w, relators)
        for pos in range(width + 1):
            for k in range(R2):
                ri, s = divmod(k, 2)
                sign = 1 if s else -1
                if pos > len(w):
                    out.append(None)
                    continue
                v = succ[(pos, ri, sign)]
                out.append(v if len(v) <= max_len else None)
    return out


def _check_backend(backend, words, presentation, max_len, parallel=False):
    relators = [r.letters for r in presentation.relators]
    codec = kernels.KeyCodec(len(presentation.alphabet), max_len)
    width = max(len(w) for w in words)
    arr, lens = _batch(words, width)
    rels, rel_lens = kernels.pack_relators(relators)
    keys = kernels.expand(arr, lens, rels, rel_lens, max_len, codec, backend=backend,
                          parallel=parallel)
    expected = _expected_keys(words, relators, max_len, codec, arr.shape[1])
    assert keys.shape[0] == len(expected)
    for row, exp in zip(keys, expected):
        if exp is None:
            assert row[0] == kernels.INVALID
        else:
            a, l = _batch([exp], max_len)
            assert (row == codec.encode(a, l)[0]).all()


@given(st.lists(reduced, min_size=1, max_size=5), st.integers(4, 20))
@settings(max_examples=60, deadline=None)
def test_numpy_backend_matches_reference(words, max_len):
    _check_backend("numpy", words, G(2), max_len)


@needs_numba
@given(st.lists(reduced, min_size=1, max_size=5), st.integers(4, 20))
@settings(max_examples=60, deadline=None)
def test_numba_backend_matches_reference(words, max_len):
    _check_backend("numba", words, G(2), max_len)


@needs_numba
def test_parallel_matches_serial_on_p2():
    p = P(2)
    words = [(1, 2, 3), (3, -1, -1), (), (2, 2, -3, 1)]
    _check_backend("numba", words, p, 40, parallel=True)
    _check_backend("numpy", words, p, 40)


@needs_numba
@pytest.mark.parametrize("parallel", [False, True])
def test_searches_identical_across_backends(parallel):
    from vankampen.families import w_word
    caps = SearchCaps(16, 10, 1_000_000)
    a = area_search(G(2), w_word(2), caps, backend="numpy")
    b = area_search(G(2), w_word(2), caps, backend="numba", parallel=parallel)
    assert a.layers == b.layers
    assert a.witness.to_json() == b.witness.to_json()


def test_unknown_backend():
    codec = kernels.KeyCodec(2, 4)
    arr, lens = _batch([(1,)], 1)
    rels, rl = kernels.pack_relators([(1, 1)])
    with pytest.raises(ValueError):
        kernels.expand(arr, lens, rels, rl, 4, codec, backend="cuda")
