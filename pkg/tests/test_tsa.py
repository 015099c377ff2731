from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import eps_values
from tastamp import corpus, tsa
from tastamp.model import make
from tastamp.timestamp import EPS, Timestamp, compute_timestamp, parse

THREE_FLOWERS = {
    "a": "(1,3] ∪ {5} ∪ (6 + ([0,2) ∪ {3} ∪ (8,18)) + 21ℕ₀)",
    "b": "[0,1] ∪ (2,4) ∪ {5} ∪ (6 + ((0,1) ∪ (1,2) ∪ (5,6) ∪ (8,9)) + 10ℕ₀)",
    "c": "[1,4] ∪ {6} ∪ (10,∞)",
}


def three_flowers():
    return Timestamp.of({a: parse(t) for a, t in THREE_FLOWERS.items()})


def _shape_invariants(out: tsa.TsaModel):
    m = out.model
    assert tsa.check_deterministic(out)
    for action, fl in out.flowers.items():
        assert fl.stalk
        loop_bounds = [a.bound for tid in fl.loop for a in m.transition(tid).guard]
        L = max((a.bound for tid in fl.loop[-1:] for a in m.transition(tid).guard), default=0)
        assert all(0 <= b <= L for b in loop_bounds)
        if fl.case == "FRACTIONAL_ENTRY":
            for tid in fl.loop:
                assert [a.op for a in m.transition(tid).guard] == ["=="]
        if fl.case == "INTEGRAL_ANCHOR":
            assert fl.anchor.isdigit()
            closing = m.transition(fl.loop[-1])
            assert closing.resets == frozenset({"x"}) and closing.guard[0].op == "=="


def test_three_flower_cases():
    out = tsa.build(three_flowers())
    assert {a: f.case for a, f in out.flowers.items()} == {
        "a": "INTEGRAL_ANCHOR",
        "b": "FRACTIONAL_ENTRY",
        "c": "INTEGRAL_ANCHOR",
    }
    _shape_invariants(out)
    assert sorted(out.sidecar()) == ["a", "b", "c"]


def test_three_flowers_roundtrip():
    rep = tsa.roundtrip_verify(three_flowers())
    assert rep.equal and rep.deterministic, rep.difference


def test_bounded_stalk_only():
    out = tsa.build(Timestamp.of({"a": parse("{1} ∪ (3,7]")}))
    fl = out.flowers["a"]
    assert len(fl.stalk) == 2 and not fl.loop and fl.case == "NONE"
    guards = [[str(a) for a in out.model.transition(t).guard] for t in fl.stalk]
    assert guards == [["x==1"], ["x>3", "x<=7"]]


def test_unit_intervals_case_two(unit):
    out = tsa.build(compute_timestamp(unit))
    fl = out.flowers["a"]
    assert fl.case == "FRACTIONAL_ENTRY" and fl.anchor == "(0,1)"
    entry = out.model.transition(fl.stalk[-1])
    assert [str(a) for a in entry.guard] == ["x>0", "x<1"] and entry.resets == frozenset({"x"})
    closing = out.model.transition(fl.loop[-1])
    assert [str(a) for a in closing.guard] == ["x==1"] and closing.resets == frozenset({"x"})
    assert tsa.roundtrip_verify(compute_timestamp(unit)).equal


def test_check_deterministic_examples():
    assert tsa.check_deterministic(tsa.build(Timestamp.of({"a": EPS.empty()})))
    bad = make("bad", ["x"], ["a"], ["q0", "q1"], "q0", [
        ("u", "q0", "q1", "a", [], []),
        ("v", "q0", "q1", "a", [("x", ">", 1)], []),
    ])
    assert not tsa.check_deterministic(bad)
    assert not tsa.check_deterministic(corpus.unit_intervals())


def test_roundtrip_corpus(rand_corpus):
    for m in rand_corpus[:12]:
        ts = compute_timestamp(m)
        rep = tsa.roundtrip_verify(ts)
        assert rep.equal and rep.deterministic, (m.name, rep.difference)


@settings(max_examples=30)
@given(st.dictionaries(st.sampled_from(["a", "b"]), eps_values(), min_size=1))
def test_roundtrip_property(sets):
    ts = Timestamp.of(sets)
    out = tsa.build(ts)
    _shape_invariants(out)
    rep = tsa.roundtrip_verify(ts)
    assert rep.equal, rep.difference

