from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tracemap.fmt import fixed2, percent_shares


@pytest.mark.parametrize(
    "value, text",
    [(505.39, "505.39"), (183.3, "183.30"), (1.0, "1.00"), (2.505, "2.51"), (0.125, "0.13"), (0.0, "0.00"), (1e-9, "0.00")],
)
def test_fixed2_half_up(value, text):
    assert fixed2(value) == text


def test_shares_au_re_example():
    shares = percent_shares([105, 3736 - 105])
    assert shares[0] == "2.81"


def test_shares_empty_and_zero():
    assert percent_shares([]) == []
    assert percent_shares([0, 0]) == ["0.00", "0.00"]


def test_thirds_close_to_100():
    assert percent_shares([1, 1, 1]) == ["33.34", "33.33", "33.33"]


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=300))
def test_shares_close_and_stay_within_a_hundredth(counts):
    shares = percent_shares(counts)
    cents = [int(s.replace(".", "")) for s in shares]
    assert sum(cents) == 10000
    total = sum(counts)
    for c, cent in zip(counts, cents):
        assert abs(Fraction(cent) - Fraction(10000 * c, total)) < 1
