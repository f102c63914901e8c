import json

import pytest
from hypothesis import given, settings, strategies as st

from vankampen.families import G, P, g_alphabet, g_word, p_alphabet, v_word, w_word
from vankampen.oracles import SearchCaps, min_area
from vankampen.tower import Exact, UndecidedAtCap
from vankampen.words import Word, concat, conjugate, exponent_sum, inverse
from vankampen.wordproblem import (NONTRIVIAL, TRIVIAL, CertificateError, WpVerdict,
                                   ZCertificate, is_power_of_x1, is_trivial_G, is_trivial_P,
                                   normal_form_bs, replay_certificate, z_certificate)

from _reference import bfs_area, bs_is_trivial, bs_matrix, bs_power_of_x1

A2 = g_alphabet(2)
A3 = g_alphabet(3)
bs_letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=24)


def W2(ls):
    return Word(tuple(ls), A2)


@pytest.mark.parametrize("m", range(1, 21))
def test_bs_conjugation_doubles(m):
    w = W2((2,) * m + (1,) + (-2,) * m)
    assert normal_form_bs(w) == (0, Exact(2 ** m), 0)


def test_bs_normal_form_examples():
    assert normal_form_bs(W2((2, 2, 2, 1, -2, -2, -2))) == (0, Exact(8), 0)
    assert normal_form_bs(W2((1, 2, -1))) == (0, Exact(-1), 1)
    assert normal_form_bs(W2(())) == (0, Exact(0), 0)
    assert normal_form_bs(W2((-2, 1, 2))) == (1, Exact(1), 1)


@given(bs_letters)
def test_bs_normal_form_matches_matrices(ls):
    p, m, q = normal_form_bs(W2(ls))
    rebuilt = (-2,) * p + ((1,) if m.value > 0 else (-1,)) * abs(m.value) + (2,) * q
    assert bs_matrix(rebuilt) == bs_matrix(ls)
    if p > 0 and q > 0:
        assert m.value % 2 == 1


@given(bs_letters)
@settings(max_examples=300)
def test_g2_solver_matches_matrices(ls):
    assert is_trivial_G(2, W2(ls)).is_trivial == bs_is_trivial(ls)


@given(bs_letters)
@settings(max_examples=150)
def test_g3_restricted_to_bs_subgroup(ls):
    # <x1, x2> in G_3 is a copy of BS(1,2)
    assert is_trivial_G(3, Word(tuple(ls), A3)).is_trivial == bs_is_trivial(ls)


conj_factors = st.lists(st.tuples(st.integers(0, 1), st.sampled_from([1, -1]),
                                  st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=6)),
                        max_size=4)


@given(conj_factors)
@settings(max_examples=150, deadline=None)
def test_products_of_conjugates_are_trivial(factors):
    g3 = G(3)
    w = Word((), A3)
    for rel, sign, u in factors:
        r = g3.relators[rel] if sign == 1 else inverse(g3.relators[rel])
        w = concat(w, conjugate(r, Word(tuple(u), A3)))
    assert is_trivial_G(3, w) == TRIVIAL


@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=20))
@settings(max_examples=150, deadline=None)
def test_top_exponent_sum_is_an_invariant(ls):
    w = Word(tuple(ls), A3)
    if exponent_sum(w, "x3") != 0:
        assert is_trivial_G(3, w) == NONTRIVIAL


@pytest.mark.parametrize("k", range(1, 8))
def test_g_words_are_powers(k):
    assert is_power_of_x1(2, g_word(2, k)) == Exact(2 ** k)
    assert bs_power_of_x1(g_word(2, k).letters) == 2 ** k


def test_g_word_towers():
    assert is_power_of_x1(3, g_word(3, 1)) == Exact(4)
    assert is_power_of_x1(3, g_word(3, 3)) == Exact(256)
    assert is_power_of_x1(3, g_word(3, 5)) == Exact(2 ** 32)
    assert is_power_of_x1(4, g_word(4, 2)) == Exact(2 ** 16)
    assert is_power_of_x1(2, W2((2,))) is None


def test_witness_triviality():
    assert is_trivial_G(2, v_word(2)) == TRIVIAL
    assert is_trivial_G(3, v_word(3)) == TRIVIAL
    assert is_trivial_G(4, v_word(4), cap=1 << 17) == TRIVIAL
    assert is_trivial_G(2, W2((1,))) == NONTRIVIAL
    for m in range(1, 12):
        assert is_trivial_G(2, w_word(m)) == TRIVIAL


def test_v4_at_default_cap_is_undecided_not_wrong():
    verdict = is_trivial_G(4, v_word(4))
    assert verdict.kind == "undecided"


def test_step_budget():
    assert is_trivial_G(3, v_word(3), max_steps=3).kind == "undecided"


def test_g3_agrees_with_bruteforce_fillings():
    """Short words the brute-force search fills must be trivial to the solver."""
    rels = [r.letters for r in G(3).relators]
    candidates = [
        (3, 2, -3, -2, -2), (2, 1, -2, -1, -1),
        conjugate(G(3).relators[1], Word((1,), A3)).letters,
        concat(G(3).relators[0], inverse(G(3).relators[0])).letters,
    ]
    for c in candidates:
        found = bfs_area(c, rels, max_len=len(c) + 5, max_cost=2)
        if found is not None:
            assert is_trivial_G(3, Word(tuple(c), A3)).is_trivial


def test_verdict_text():
    for v in (TRIVIAL, NONTRIVIAL, WpVerdict("undecided", "cap")):
        assert WpVerdict.parse(str(v)) == v
    with pytest.raises(ValueError):
        WpVerdict.parse("maybe")


def test_wrong_alphabet():
    with pytest.raises(ValueError):
        is_trivial_G(2, Word((3,), p_alphabet(2)))


@pytest.mark.parametrize("n", [2, 3])
def test_z_certificate_replays(n):
    cert = z_certificate(n)
    assert replay_certificate(cert)
    back = ZCertificate.from_json(json.loads(json.dumps(cert.to_json())))
    assert back == cert and replay_certificate(back)


def test_tampered_certificate_rejected():
    data = z_certificate(2).to_json()
    data["steps"][1]["inputs"]["pieces"][2]["letters"] = [-3]
    with pytest.raises(CertificateError):
        replay_certificate(ZCertificate.from_json(data))
    data = z_certificate(2).to_json()
    data["steps"] = data["steps"][:-1]
    with pytest.raises(CertificateError):
        replay_certificate(ZCertificate.from_json(data))
    data = z_certificate(2).to_json()
    data["steps"][0]["inputs"]["word"] = [1]
    with pytest.raises(CertificateError):
        replay_certificate(ZCertificate.from_json(data))


def test_certificate_needs_cap_for_n4():
    with pytest.raises(UndecidedAtCap):
        z_certificate(4)
    assert replay_certificate(z_certificate(4, cap=1 << 17), cap=1 << 17)


def test_is_trivial_p():
    a = p_alphabet(2)
    assert is_trivial_P(2, a.parse("x2"))
    assert is_trivial_P(2, a.parse("x1"))
    assert is_trivial_P(2, a.parse("t x1 t^-1"))
    assert not is_trivial_P(2, a.parse("t"))
    assert not is_trivial_P(2, a.parse("t^2 x1 t^-1"))
    assert is_trivial_P(2, P(2).relators[-1])


def test_p_triviality_agrees_with_oracle_on_short_words():
    p = P(2)
    a = p.alphabet
    for text in ("t x1 t^-1 x1^-1", "x2 x1 x2^-1 x1^-2"):
        w = a.parse(text)
        assert is_trivial_P(2, w)
    assert min_area(p, a.parse("x2 x1 x2^-1 x1^-2"), SearchCaps(10, 2, 10_000))[0] == 1
