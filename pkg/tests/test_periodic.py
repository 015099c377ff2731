import pytest

from conftest import GOLDEN
from tastamp import corpus
from tastamp.model import make
from tastamp.periodic import (
    AnalysisConfig,
    CycleExplosion,
    NoStabilization,
    analyze,
    build_layers,
    compute_period,
    compute_t0,
    contract_again,
    contract_zeno,
    Cycle,
    escalate_and_retry,
    fold,
    forward_periodicity_violations,
    level1_simple_cycles,
    periodic_dot,
    periodic_to_dict,
    shortest_cycles_through,
    smallest_multiple_above,
    stabilization_persists,
)
from tastamp.region import AugEdge, AugGraph, EdgeWeight, RegionCore, build_aug_graph


def synthetic(n, edges, M=0):
    """Augmented graph with ``n`` placeholder nodes and ``(src, dst, base, starred)`` edges."""
    model = make("syn", [], ["a"], ["q"], "q", [])
    nodes = [RegionCore("q", (), ((0,),), True)._replace(location=f"n{i}") for i in range(n)]
    es = [AugEdge(u, v, f"e{i}", "a", EdgeWeight(b, s)) for i, (u, v, b, s) in enumerate(edges)]
    return AugGraph(model, M, nodes, es)


def cyc(duration, node=0):
    return Cycle((node,), (EdgeWeight(duration),))


def test_contract_zero_cycle():
    cg = contract_zeno(synthetic(3, [(0, 1, 0, False), (1, 0, 0, False), (1, 2, 1, False)]))
    assert cg.classes == [(0, 1), (2,)]
    assert cg.edges == [(0, 1, EdgeWeight(1))]


def test_contract_acyclic_identity():
    cg = contract_zeno(synthetic(3, [(0, 1, 0, False), (1, 2, 1, False)]))
    assert cg.classes == [(0,), (1,), (2,)]
    assert len(cg.edges) == 2


def test_starred_zero_not_contracted():
    cg = contract_zeno(synthetic(2, [(0, 1, 0, False), (1, 0, 0, True)]))
    assert len(cg.classes) == 2


def test_level1_two_loops_off_stem():
    g = synthetic(3, [(0, 1, 1, False), (0, 2, 1, False), (1, 1, 2, False), (2, 2, 3, False)])
    cycles = level1_simple_cycles(contract_zeno(g))
    assert sorted(c.duration for c in cycles) == [2, 3]


def test_level1_excludes_nested_loop():
    # loop at 1; node 2 only reachable through it, with its own loop
    g = synthetic(3, [(0, 1, 1, False), (1, 1, 2, False), (1, 2, 1, False), (2, 2, 5, False)])
    cycles = level1_simple_cycles(contract_zeno(g))
    assert [c.duration for c in cycles] == [2]


def test_level1_no_cycles():
    assert level1_simple_cycles(contract_zeno(synthetic(2, [(0, 1, 1, False)]))) == []


def test_cycle_cap_and_fallback():
    n = 7
    edges = [(u, v, 1 + (u + v) % 3, False) for u in range(n) for v in range(n) if u != v]
    cg = contract_zeno(synthetic(n, edges))
    with pytest.raises(CycleExplosion):
        level1_simple_cycles(cg, cap=50)
    short = shortest_cycles_through(cg, range(n))
    assert short and all(not c.starred and c.duration > 0 for c in short)
    assert {v for c in short for v in c.nodes} == set(range(n))


def test_compute_period_examples():
    assert compute_period([cyc(2, 0), cyc(3, 1)], 3).L == 6
    assert compute_period([cyc(2)], 2).L == 4
    p = compute_period([], 0)
    assert (p.lcm_base, p.L) == (1, 1)
    assert smallest_multiple_above(6, 3) == 6


def test_compute_t0_examples():
    g = synthetic(5, [(0, 1, 2, False), (1, 2, 1, True)])
    assert compute_t0(g) == 11
    assert compute_t0(synthetic(1, [])) == 1
    assert compute_t0(synthetic(2, [(0, 1, 3, True)])) == 7


def test_cover_keeps_private_nodes():
    cycles = [Cycle((0, 1), (EdgeWeight(1), EdgeWeight(1))), Cycle((1, 2), (EdgeWeight(1), EdgeWeight(2))),
              Cycle((0, 1, 2), (EdgeWeight(1), EdgeWeight(1), EdgeWeight(3)))]
    p = compute_period(cycles, 1)
    nodes = {v for c in p.cover for v in c.nodes}
    assert nodes == {0, 1, 2}
    for c in p.cover:
        others = set().union(*(set(o.nodes) for o in p.cover if o is not c))
        assert set(c.nodes) - others
    assert p.L > 1 and p.L % p.lcm_base == 0


def test_x2_layers(x2):
    aug = build_aug_graph(x2)
    res = build_layers(aug, 4, compute_t0(aug))
    assert not res.bounded
    for k in range(res.k, res.k + 3):
        start = res.layers.block_start(k)
        present = [n - start for n in range(start, start + 4) if res.layers.nodes_at(n)]
        assert [(start + p) % 2 for p in present] == [0, 0]


def test_transition_free_bounded():
    res = build_layers(build_aug_graph(make("z", ["x"], ["a"], ["q"], "q", [])), 1, 1)
    assert res.bounded and res.t_per == 1
    per = fold(res)
    assert not any(n.periodic for n in per.nodes)


def test_silent_loop_stabilizes():
    m = make("s", ["x"], ["a"], ["q"], "q", [("e", "q", "q", None, [], [])])
    an = analyze(m)
    assert not an.info.bounded
    assert all(e.label is None for e in an.per.edges)


def test_fold_single_unguarded():
    an = analyze(corpus.single())
    assert an.info.L == 1
    per = an.per
    concrete = [n for n in per.nodes if not n.periodic]
    assert sum(1 for n in concrete if n.t_int == 0 and n.core == 0) == 1
    targets = {per.cell_position(e.dst) % 2 for e in per.edges if per.nodes[e.dst].periodic}
    assert targets == {0, 1}


def test_fold_x2(x2):
    per = analyze(x2).per
    periodic = [n for n in per.nodes if n.periodic]
    assert sorted(n.t_int for n in periodic) == [4, 6]
    assert (GOLDEN / "x2_loop_rper.dot").read_text() == periodic_dot(per)
    d = periodic_to_dict(per)
    assert d["L"] == 4 and len(d["nodes"]) == 4


def test_x2_period_info(x2):
    info = analyze(x2).info.to_dict()
    assert info == {"M": 2, "M_w": 2, "N": 1, "t0": 3, "L": 4, "t_per": 3, "escalated": False, "bounded": False}


def test_escalation_route(x2):
    aug = build_aug_graph(x2)
    L, res = escalate_and_retry(aug, contract_zeno(aug), 1000, compute_t0(aug), None)
    assert L == 4 and not res.bounded


def test_no_stabilization_without_escalation(x2):
    aug = build_aug_graph(x2)
    with pytest.raises(NoStabilization):
        # the odd period 3 cannot reproduce an event pattern of period 2
        build_layers(aug, 3, compute_t0(aug), block_cap=20)


def test_explosion_falls_back(rand_corpus):
    an = analyze(rand_corpus[7], AnalysisConfig(cycle_cap=1000))
    assert stabilization_persists(an.layers)
    assert forward_periodicity_violations(an.layers) == []


def _check_invariants(model):
    an = analyze(model)
    info = an.info
    assert info.L > info.M
    assert info.t0 == info.M_w * info.N + 1
    if not info.bounded:
        assert info.t_per >= info.t0 and (info.t_per - info.t0) % info.L == 0
    for c in an.period.wz1:
        assert c.duration == sum(w.base for w in c.weights)
    assert an.period.L % an.period.lcm_base == 0 or info.escalated
    again = contract_again(an.contracted)
    assert len(again.classes) == len(an.contracted.classes)
    assert not any(w.base == 0 and not w.starred and u == v for u, v, w in an.contracted.edges)
    assert stabilization_persists(an.layers)
    assert forward_periodicity_violations(an.layers) == []
    per = an.per
    weights = {}
    for e in an.aug.edges:
        weights.setdefault((e.src, e.dst, e.tid), []).append(e.weight)
    for e in per.edges:
        a, b = per.nodes[e.src], per.nodes[e.dst]
        if a.periodic or b.periodic:
            continue
        assert any(w.admits(b.t_int - a.t_int) for w in weights[(a.core, b.core, e.tid)])
    for n in per.nodes:
        if n.periodic:
            assert info.t_per <= n.t_int < info.t_per + info.L
        else:
            assert n.t_int < info.t_per


def test_invariants_on_corpus(rand_corpus):
    for m in rand_corpus:
        _check_invariants(m)


def test_invariants_on_fixtures(x2, unit, path_model):
    for m in (x2, unit, path_model, corpus.single()):
        _check_invariants(m)
