import pytest
from hypothesis import given, settings, strategies as st

from vankampen.families import (G, P, Q, T, Conjugate, Invert, MultiplyRight, OperationError,
                                ParameterError, Presentation, apply_op, apply_sequence,
                                g_word, inverse_ops, is_cyclically_reduced, op_from_json,
                                op_to_json, p_relator, presentations_equal, replay_prefixes,
                                standard_trivialization_sequence, v_word, w_word)
from vankampen.oracles import SearchCaps, min_area
from vankampen.words import cyclically_reduce, exponent_sum, free_reduce

from _reference import expand_g_word, naive_reduce


def test_bs_presentation():
    g = G(2)
    assert g.alphabet.names == ("x1", "x2")
    assert [str(r) for r in g.relators] == ["x2 x1 x2^-1 x1^-2"]


@pytest.mark.parametrize("n", range(2, 11))
def test_g_structure(n):
    g = G(n)
    assert len(g.alphabet) == n
    assert len(g.relators) == n - 1
    assert g.total_length() == 5 * (n - 1)


@pytest.mark.parametrize("n", [1, 0, -3])
def test_parameter_errors(n):
    for fam in (G, P, Q, T):
        with pytest.raises(ParameterError):
            fam(n)


def test_w_words():
    assert w_word(1).letters == (2, 1, -2, 1, 2, -1, -2, -1)
    assert w_word(0).letters == ()          # [x1, x1]
    for m in range(1, 12):
        assert len(w_word(m)) == 4 * m + 4
    with pytest.raises(ParameterError):
        w_word(-1)


@pytest.mark.parametrize("n,k", [(2, 1), (2, 3), (3, 1), (3, 2), (4, 1), (2, 7)])
def test_g_word_matches_spelled_out_recursion(n, k):
    assert g_word(n, k).letters == expand_g_word(n, k)


def test_v_words():
    v2 = v_word(2)
    assert len(v2) == 12
    assert v2.letters == w_word(2).letters
    for n in range(2, 9):
        assert len(v_word(n)) == (n + 1) * 2 ** n
    assert len(p_relator(2)) == 27


def test_p_and_q():
    p = P(2)
    assert p.alphabet.names == ("x1", "x2", "t")
    rel = p.relators[-1]
    assert exponent_sum(rel, "t") == 0 and exponent_sum(rel, "x2") == -1
    for n in range(2, 11):
        q = Q(n)
        assert q.is_balanced()
        assert len(q.alphabet) == n + 1
        assert not P(n).is_balanced()


def test_t_presentation():
    assert [r.letters for r in T(3).relators] == [(1,), (2,), (3,), (4,)]


def test_json_round_trip():
    for p in (G(3), P(2), Q(4), T(2)):
        back = Presentation.from_json(p.to_json())
        assert presentations_equal(back, p)
        assert back.family == p.family


def test_presentations_equal_is_multiset():
    q = Q(2)
    swapped = q.with_relators(reversed(q.relators))
    assert presentations_equal(q, swapped)
    inverted = apply_op(q, Invert(0))
    assert not presentations_equal(q, inverted)


def test_apply_op_examples():
    q = Q(2)
    assert apply_op(q, Invert(2)).relators[2].letters == (-3,)
    assert apply_op(q, Conjugate(0, 2, 1)).relators[0].letters == \
        naive_reduce((2,) + q.relators[0].letters + (-2,))
    assert apply_op(q, Conjugate(0, 2, -1)).relators[0].letters == \
        naive_reduce((-2,) + q.relators[0].letters + (2,))
    prod = apply_op(q, MultiplyRight(1, 2)).relators[1]
    assert prod.letters == naive_reduce(q.relators[1].letters + (3,))


def test_apply_op_errors():
    q = Q(2)
    for bad in (Invert(3), MultiplyRight(0, 0), MultiplyRight(0, 9), Conjugate(0, 4, 1),
                Conjugate(0, 1, 0)):
        with pytest.raises(OperationError):
            apply_op(q, bad)


ops_q2 = st.one_of(
    st.builds(Invert, st.integers(0, 2)),
    st.builds(MultiplyRight, st.integers(0, 2), st.integers(0, 2)).filter(lambda o: o.i != o.j),
    st.builds(Conjugate, st.integers(0, 2), st.integers(1, 3), st.sampled_from([1, -1])),
)


@given(st.lists(ops_q2, max_size=6), ops_q2)
@settings(max_examples=60, deadline=None)
def test_inverse_ops_undo(prefix, op):
    p = apply_sequence(Q(2), prefix)
    back = apply_sequence(apply_op(p, op), inverse_ops(op))
    assert [r.letters for r in back.relators] == [r.letters for r in p.relators]


@given(ops_q2)
def test_op_json_round_trip(op):
    assert op_from_json(op_to_json(op)) == op


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_standard_trivialization(n):
    q = Q(n)
    ops = standard_trivialization_sequence(n)
    assert presentations_equal(apply_sequence(q, ops), T(n))
    assert all(p.is_balanced() for p in replay_prefixes(q, ops))
    assert len(ops) <= q.total_length()


def test_trivialization_lengths_golden():
    # measured once, frozen to catch accidental changes in the construction
    assert [len(standard_trivialization_sequence(n)) for n in (2, 3, 4, 5)] == [27, 55, 111, 231]


def _cores(p):
    # cyclic cores generate the same normal closure, and splicing a
    # cyclically reduced relator can remove any of its conjugates in one move
    return p.with_relators([cyclically_reduce(r)[0] for r in p.relators])


def test_each_operation_preserves_the_normal_closure():
    """Old and new relators are products of at most two conjugates of each other's."""
    p = Q(2)
    longest = max(len(r) for r in p.relators)
    for op in standard_trivialization_sequence(2):
        nxt = apply_op(p, op)
        for src, dst in ((p, nxt), (nxt, p)):
            r = dst.relators[op.i]
            res = min_area(_cores(src), r, SearchCaps(len(r) + longest, 2, 2_000_000))
            assert res is not None and res[0] <= 2, op
        p = nxt


def test_is_cyclically_reduced():
    a = G(2).alphabet
    assert is_cyclically_reduced(a.parse("x1 x2"))
    assert not is_cyclically_reduced(a.parse("x1 x2 x1^-1"))
    assert free_reduce(a.parse("x1 x1^-1")).letters == ()
