import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import eps_values
from tastamp import corpus
from tastamp.model import make
from tastamp.periodic import analyze
from tastamp.timestamp import (
    EPS,
    OpenUnit,
    Point,
    Timestamp,
    align,
    canonicalize,
    compute_timestamp,
    difference_witness,
    equals,
    extract_by_location,
    includes,
    intersection,
    is_full,
    measured_size,
    membership,
    parse,
    path_widths,
    position_of,
    pretty,
    timestamp_equals,
    timestamp_from_dict,
    union,
)


times = st.fractions(min_value=0, max_value=40, max_denominator=4)


def test_position_of():
    assert position_of(0) == 0
    assert position_of(Fraction(1, 2)) == 1
    assert position_of(3) == 6
    assert Point(2).contains(2) and not Point(2).contains(Fraction(5, 2))
    assert OpenUnit(2).contains(Fraction(5, 2)) and not OpenUnit(2).contains(3)


def test_membership_examples():
    s = EPS.from_cells(2, 1, [Point(1)])
    assert membership(s, 1) and not membership(s, Fraction(3, 2))
    s = EPS.from_cells(2, 1, periodic=[OpenUnit(2)])
    assert membership(s, Fraction(29, 4))
    s = EPS.from_cells(2, 1, periodic=[Point(2)])
    assert membership(s, 2) and membership(s, 9) and not membership(s, Fraction(5, 2))


def test_align_examples():
    a = EPS.from_cells(2, 2, periodic=[Point(2)])
    b = EPS.from_cells(3, 3, periodic=[Point(3)])
    a2, b2 = align(a, b)
    assert (a2.t_per, a2.L) == (b2.t_per, b2.L) == (3, 6)
    x, y = align(a, a)
    assert x == y
    bounded = EPS.from_cells(1, 1, [Point(0)])
    p, q = align(bounded, b)
    assert p.L == 3 and not p.periodic


def test_set_examples():
    s = parse("{1} ∪ (3,7]")
    assert includes(s, s)
    assert equals(union(s, EPS.empty()), s)
    a, b = parse("{1}"), parse("(1,2)")
    assert not includes(a, b)
    assert difference_witness(a, b) == Point(1)


def test_is_full_examples():
    assert is_full(EPS.full())
    assert not is_full(EPS(1, 1, frozenset({1}), frozenset({2, 3})))
    assert is_full(compute_timestamp(corpus.single())["a"])


def test_canonicalize_examples():
    s = EPS.from_cells(0, 4, periodic=[Point(0), Point(2)])
    c = canonicalize(s)
    assert c.L == 2 and equals(c, s)
    assert canonicalize(EPS(3, 2, frozenset({1}), frozenset())).periodic == frozenset()
    t = EPS.from_cells(3, 1, [Point(1), Point(2)], [Point(3)])
    ct = canonicalize(t)
    assert ct.t_per == 1
    for k in range(2 * (t.t_per + 2 * t.L) + 1):
        assert membership(ct, Fraction(k, 2)) == membership(t, Fraction(k, 2))


def test_pretty_examples():
    s = EPS.from_cells(8, 1, [Point(1), OpenUnit(3), Point(4), OpenUnit(4), Point(5), OpenUnit(5), Point(6), OpenUnit(6), Point(7)])
    assert pretty(s) == "{1} ∪ (3,7]"
    assert pretty(EPS.empty()) == "∅"
    assert pretty(EPS.full()) == "[0,∞)"
    assert pretty(parse("(1,2) ∪ (3,∞)")) == "(1,2) ∪ (3,∞)"


def test_parse_periodic_forms():
    s = parse("(1,3] ∪ {5} ∪ (6 + ([0,2) ∪ {3} ∪ (8,18)) + 21ℕ₀)")
    assert (s.t_per, s.L) == (6, 21)
    assert membership(s, 6) and membership(s, 27) and membership(s, 30) and not membership(s, 29)
    assert membership(s, Fraction(31, 2)) and not membership(s, 14)
    assert equals(parse(pretty(s)), s)
    with pytest.raises(ValueError):
        parse("(1,3] ∪ nonsense")


@given(eps_values(), times)
def test_periodicity_of_representation(s, t):
    if t >= s.t_per:
        assert membership(s, t) == membership(s, t + s.L)


@given(eps_values(), eps_values())
def test_align_preserves_membership(a, b):
    rng = random.Random(7)
    a2, b2 = align(a, b)
    for _ in range(1000):
        t = Fraction(rng.randrange(0, 400), rng.choice([1, 2, 3, 4]))
        assert membership(a2, t) == membership(a, t)
        assert membership(b2, t) == membership(b, t)


@given(eps_values(), eps_values(), times)
def test_union_intersection_membership(a, b, t):
    assert membership(union(a, b), t) == (membership(a, t) or membership(b, t))
    assert membership(intersection(a, b), t) == (membership(a, t) and membership(b, t))


@given(eps_values(), eps_values())
def test_includes_both_ways_is_equality(a, b):
    assert (includes(a, b) and includes(b, a)) == equals(a, b)
    w = difference_witness(a, b)
    if w is not None:
        assert membership(a, w.sample()) and not membership(b, w.sample())


@given(eps_values())
def test_canonicalize_keeps_membership(s):
    c = canonicalize(s)
    assert equals(c, s)
    assert c.L <= s.L and c.t_per <= s.t_per
    assert canonicalize(c) == c


@given(eps_values())
def test_pretty_parse_roundtrip(s):
    assert equals(parse(pretty(s)), s)


def test_timestamp_json_roundtrip(rand_corpus):
    for m in rand_corpus[:10]:
        ts = compute_timestamp(m)
        back = timestamp_from_dict(json.loads(ts.to_json()))
        assert timestamp_equals(back, ts)


def test_extract_silent_only():
    m = make("s", ["x"], ["a"], ["q"], "q", [("e", "q", "q", None, [("x", "==", 1)], ["x"])])
    ts = compute_timestamp(m)
    assert ts.actions == ["a"] and ts["a"].prefix == frozenset() and ts["a"].periodic == frozenset()


def test_extract_x2(x2):
    s = canonicalize(compute_timestamp(x2)["a"])
    assert pretty(s) == "1 + ({1}) + 2ℕ₀"
    for n in range(0, 30):
        assert membership(s, n) == (n >= 2 and n % 2 == 0)
        assert not membership(s, n + Fraction(1, 2))


def test_path_timestamp(path_model):
    ts = compute_timestamp(path_model)
    assert pretty(ts["a"]) == "{1} ∪ (3,7]"
    assert pretty(ts["b"]) == "[2,4]"


def test_path_widths_example(path_model):
    pw = path_widths(corpus.path_example(), corpus.PATH)
    assert pw.d == [0, 2, 1, 0]
    assert pw.s == [0, 2, 3, 2]
    assert pw.w == [0, 0, 2, 2, 2]
    per = analyze(path_model).per
    by_loc = extract_by_location(per)
    assert [measured_size(by_loc[f"p{i}"]) for i in range(1, 5)] == pw.s


def test_path_widths_edge_cases():
    one = make("one", ["x"], ["a"], ["q0", "q1"], "q0", [("e", "q0", "q1", "a", [("x", "==", 1)], ["x"])])
    pw = path_widths(one, ["e"])
    assert pw.s == [0] and pw.w == [0, 0]
    free = make("free", ["x"], ["a"], ["q"], "q", [("e", "q", "q", "a", [], [])])
    pw = path_widths(free, ["e", "e"])
    assert pw.d == [float("inf")] * 2 and pw.s[-1] == float("inf")
    with pytest.raises(ValueError):
        path_widths(make("two", ["x", "y"], ["a"], ["q"], "q", []), [])


def test_timestamp_of_aligns():
    ts = Timestamp.of({"a": parse("{1}"), "b": EPS.full()})
    assert ts["a"].L == ts["b"].L
    assert ts.contains(1, "a") and not ts.contains(2, "a") and ts.contains(7, "b")
