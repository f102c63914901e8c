import pytest
from hypothesis import given, strategies as st

from vankampen import tower as ti
from vankampen.tower import Exact, Saturated, UndecidedAtCap


def test_exact_until_cap():
    assert ti.exact(2 ** 63, cap=64) == Exact(2 ** 63)
    s = ti.exact(2 ** 64 + 1, cap=64)
    assert isinstance(s, Saturated) and s.sign == 1 and s.floor_bits == 64 and s.parity == 1


@pytest.mark.parametrize("h,k,value", [(0, 5, 5), (1, 3, 8), (2, 2, 16), (2, 3, 256),
                                       (2, 4, 65536), (3, 2, 65536)])
def test_tower_values(h, k, value):
    assert ti.tower(h, k) == Exact(value)


def test_tower_saturates():
    big = ti.tower(3, 3, cap=256)
    assert isinstance(big, Saturated)
    assert big.floor_bits == 256 and big.parity_known and big.parity == 0
    assert isinstance(ti.tower(4, 3), Saturated)
    with pytest.raises(ValueError):
        ti.tower(-1, 2)


def test_shift_and_halve():
    assert ti.shift(Exact(3), 4) == Exact(48)
    assert ti.halve(Exact(48), 4) == Exact(3)
    with pytest.raises(ValueError):
        ti.halve(Exact(3), 1)
    s = ti.shift(Exact(1), 100, cap=64)
    assert isinstance(s, Saturated) and s.floor_bits == 100
    with pytest.raises(UndecidedAtCap):
        ti.halve(s, 1)
    with pytest.raises(ValueError):
        ti.shift(Exact(1), -1)


def test_saturated_arithmetic():
    s = Saturated(1, 100, True, 0)
    assert ti.add(s, Exact(1), cap=64).parity == 1
    assert ti.add(s, s).floor_bits == 100
    with pytest.raises(UndecidedAtCap):
        ti.add(s, ti.neg(s))
    with pytest.raises(UndecidedAtCap):
        ti.two_adic_valuation(s)
    assert ti.sign(ti.neg(s)) == -1


def test_valuation():
    assert ti.two_adic_valuation(Exact(96)) == 5
    with pytest.raises(ValueError):
        ti.two_adic_valuation(Exact(0))


def test_json():
    assert ti.to_json(Exact(-7)) == "-7"
    assert ti.to_json(Saturated(1, 300, True, 0)) == {"saturated": True, "sign": 1,
                                                      "floor_bits": 300, "parity": 0}


@given(st.integers(-2 ** 70, 2 ** 70), st.integers(-2 ** 70, 2 ** 70))
def test_add_agrees_with_int_below_cap(a, b):
    assert ti.add(Exact(a), Exact(b), cap=128) == Exact(a + b)


@given(st.integers(1, 2 ** 40), st.integers(0, 40))
def test_shift_halve_round_trip(a, m):
    assert ti.halve(ti.shift(Exact(a), m), m) == Exact(a)
