import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depinsim.reputation import ReputationBook, ReputationRecord, initial, score, update

from oracles import laplace


def test_initial_score_is_half():
    assert score(initial()) == 0.5
    assert score(initial("a")) == score(initial("b"))
    rec = initial()
    assert (rec.successes, rec.failures) == (0, 0)


@pytest.mark.parametrize(
    "before,success,after,expected",
    [
        ((0, 0), True, (1, 0), 2 / 3),
        ((1, 0), False, (1, 1), 0.5),
        ((99, 0), True, (100, 0), 101 / 102),
    ],
)
def test_update(before, success, after, expected):
    rec = update(ReputationRecord("p", *before), success)
    assert (rec.successes, rec.failures) == after
    assert score(rec) == pytest.approx(expected)


@pytest.mark.parametrize("counts,expected", [((0, 0), 0.5), ((1, 1), 0.5), ((4, 0), 5 / 6)])
def test_score(counts, expected):
    assert score(ReputationRecord("p", *counts)) == pytest.approx(expected)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_score_bounds_and_monotonicity(s, f):
    rec = ReputationRecord("p", s, f)
    assert 0 < score(rec) < 1
    assert laplace(s + 1, f) >= laplace(s, f) >= laplace(s, f + 1)
    assert score(update(rec, True)) >= score(rec) >= score(update(rec, False))


@given(st.lists(st.booleans(), max_size=60), st.randoms())
def test_order_independence(outcomes, rnd):
    shuffled = outcomes[:]
    rnd.shuffle(shuffled)
    a = b = initial("p")
    for o in outcomes:
        a = update(a, o)
    for o in shuffled:
        b = update(b, o)
    assert a == b


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ReputationRecord("p", -1, 0)


def test_book_tracks_processors():
    book = ReputationBook(["a"])
    book.report("a", True)
    book.report("b", False)
    assert book.score("a") == pytest.approx(2 / 3)
    assert book.score("b") == pytest.approx(1 / 3)
    assert book.score("never-seen") == 0.5
    assert list(book.snapshot()) == ["a", "b"]
