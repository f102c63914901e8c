import json

import pytest

from vankampen.families import G, P, w_word
from vankampen.oracles import (FreeReduceAll, Insert, NullSequence, ReplayError, SearchCaps,
                               area_search, dehn_profile, fill_length, min_area, replay,
                               reduced_words, rows_to_csv, rows_to_json, scaling_report)
from vankampen.words import Word

from _reference import bfs_area, naive_reduce

G2 = G(2)
A = G2.alphabet
R = G2.relators[0]


def test_empty_and_relator():
    assert min_area(G2, Word((), A), SearchCaps(4, 4, 100))[0] == 0
    cost, wit = min_area(G2, R, SearchCaps(10, 4, 1000))
    assert cost == 1
    assert wit.moves[0] == Insert(0, -1, 0) and wit.moves[1] == FreeReduceAll()
    assert replay(G2, wit) == (1, 5)


@pytest.mark.parametrize("m,expected", [(1, 2), (2, 6)])
def test_w_word_areas(m, expected):
    cost, wit = min_area(G2, w_word(m), SearchCaps(16, 16, 2_000_000))
    assert cost == expected
    assert replay(G2, wit) == (cost, wit.peak)


def test_w1_witness_golden():
    _, wit = min_area(G2, w_word(1), SearchCaps(12, 8, 100_000))
    assert (wit.cost, wit.peak) == (2, 8)
    assert wit.to_json()["moves"] == [
        {"op": "insert", "relator": 0, "sign": -1, "position": 0}, {"op": "reduce"},
        {"op": "insert", "relator": 0, "sign": 1, "position": 1}, {"op": "reduce"},
    ]
    # a looser length cap explores more but must return the same tie-broken witness
    again = min_area(G2, w_word(1), SearchCaps(24, 8, 100_000))[1]
    assert again.to_json() == wit.to_json()


def test_agrees_with_reference_bfs():
    rels = [R.letters]
    for letters in [(1, 2, -1, -2), (2, 1, -2, -1, -1), (2, 1, 1, -2, -1, -1, -1, -1),
                    w_word(1).letters]:
        w = Word(letters, A)
        ours = min_area(G2, w, SearchCaps(10, 6, 500_000))
        ref = bfs_area(letters, rels, 10, 6)
        assert (ours[0] if ours else None) == ref


def test_nontrivial_is_absent_not_an_error():
    res = area_search(G2, Word((1,), A), SearchCaps(8, 30, 1_000_000))
    assert res.status == "exhausted" and min_area(G2, Word((1,), A), SearchCaps(8, 30, 10**6)) is None


def test_cap_statuses():
    assert area_search(G2, w_word(3), SearchCaps(8, 30, 10**6)).status == "length-cap"
    assert area_search(G2, w_word(2), SearchCaps(16, 3, 10**6)).status == "cost-cap"
    assert area_search(G2, w_word(3), SearchCaps(24, 30, 500)).status == "state-cap"


def test_monotone_in_caps():
    w = w_word(2)
    values = []
    for L in (12, 13, 14, 16, 18):
        res = min_area(G2, w, SearchCaps(L, 20, 2_000_000))
        values.append(res[0] if res else None)
    found = [v for v in values if v is not None]
    assert found == sorted(found, reverse=True)
    assert values[-1] == 6


def test_fill_length():
    assert fill_length(G2, Word((), A), SearchCaps(4, 4, 100))[0] == 0
    assert fill_length(G2, R, SearchCaps(10, 4, 1000))[0] == 5
    peak, wit = fill_length(G2, w_word(1), SearchCaps(12, 10, 100_000))
    assert peak == 8            # golden: no intermediate word is longer than w_1 itself
    assert replay(G2, wit)[1] == peak
    assert peak >= len(w_word(1))


def test_replay_rejects_bad_sequences():
    _, wit = min_area(G2, w_word(1), SearchCaps(12, 8, 100_000))
    with pytest.raises(ReplayError):
        replay(G2, NullSequence(wit.start, wit.moves[:2], 1, wit.peak))
    with pytest.raises(ReplayError):
        replay(G2, NullSequence(wit.start, wit.moves, wit.cost + 1, wit.peak))
    with pytest.raises(ReplayError):
        replay(G2, NullSequence(wit.start, (Insert(0, 1, 99),), 1, 8))
    back = NullSequence.from_json(json.loads(json.dumps(wit.to_json())), G2)
    assert back == wit


def test_reduced_word_counts():
    for n in range(0, 6):
        words = list(reduced_words(2, n))
        assert len(words) == (1 if n == 0 else 4 * 3 ** (n - 1))
        assert all(naive_reduce(w) == w for w in words)
        assert words == sorted(words)


def test_dehn_profile_small():
    rows = dehn_profile(G2, 8, SearchCaps(12, 16, 1_000_000))
    by = {r.length: r for r in rows}
    assert by[0].value == 0
    assert by[5].value == 1 and by[5].trivial_words == 10
    assert by[8].value == 2
    assert all(r.exact for r in rows)
    # odd lengths other than 5 carry no trivial words this short
    assert by[1].value is None and by[3].value is None


def test_dehn_profile_needs_a_screen():
    from vankampen.families import Presentation
    bare = Presentation(A, (R,))
    with pytest.raises(ValueError):
        dehn_profile(bare, 2)


def test_scaling_report():
    rows = scaling_report("w_words", range(1, 4), SearchCaps(20, 20, 5_000_000))
    assert [r.diagram_area for r in rows] == [2, 6, 14]
    assert [r.oracle_area for r in rows] == [2, 6, 14]
    assert rows[0].ratio is None
    assert rows[1].ratio == 3.0 and abs(rows[2].ratio - 14 / 6) < 1e-12
    big = scaling_report("w_words", [10], oracle_max_m=3)
    assert big[0].diagram_area == 2046 and big[0].oracle_note == "skipped: caps"
    assert scaling_report("w_words", []) == []
    with pytest.raises(ValueError):
        scaling_report("v_words", [1])


def test_report_formats():
    rows = scaling_report("w_words", range(1, 3), SearchCaps(16, 10, 10**6))
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "m,diagram_area,oracle_area,oracle_note,ratio"
    assert "\r" not in text and text.endswith("\n")
    data = json.loads(rows_to_json(rows))
    assert data[1]["oracle_area"] == 6
    assert rows_to_csv([]) == ""


def test_p2_oracle_small():
    p = P(2)
    a = p.alphabet
    assert min_area(p, p.relators[-1], SearchCaps(30, 2, 10_000))[0] == 1
    assert min_area(p, a.parse("t"), SearchCaps(6, 3, 100_000)) is None


def test_caps_validation():
    with pytest.raises(ValueError):
        SearchCaps(0, 1, 1)
