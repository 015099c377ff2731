"""Period analysis of the augmented region automaton and its folding into a finite periodic automaton.

Pipeline: :func:`contract_zeno` -> :func:`level1_simple_cycles` -> :func:`compute_period`
-> :func:`compute_t0` -> :func:`build_layers` -> :func:`fold`.  :func:`analyze` runs it.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .model import EntaModel
from .region import AugGraph, EdgeWeight, RegionCore, build_aug_graph, format_core

log = logging.getLogger(__name__)


class CycleExplosion(RuntimeError):
    pass


class NoStabilization(RuntimeError):
    pass


# --- Zeno contraction -----------------------------------------------------------

@dataclass
class ContractedGraph:
    classes: list[tuple[int, ...]]  # augmented-graph node indices per class
    node_class: list[int]
    edges: list[tuple[int, int, EdgeWeight]]
    initial: int = 0

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.classes)))
        g.add_edges_from((u, v) for u, v, _ in self.edges)
        return g

    def weights(self) -> dict[tuple[int, int], list[EdgeWeight]]:
        out: dict[tuple[int, int], list[EdgeWeight]] = {}
        for u, v, w in self.edges:
            out.setdefault((u, v), []).append(w)
        return out


def _is_zeno(w: EdgeWeight) -> bool:
    return w.base == 0 and not w.starred


def contract_zeno(aug: AugGraph) -> ContractedGraph:
    """Collapse every strongly connected set of exact-0-weight edges into one node."""
    n = len(aug.nodes)
    zero = nx.DiGraph()
    zero.add_nodes_from(range(n))
    zero.add_edges_from((e.src, e.dst) for e in aug.edges if _is_zeno(e.weight))
    components = sorted((tuple(sorted(c)) for c in nx.strongly_connected_components(zero)), key=min)
    node_class = [0] * n
    for k, comp in enumerate(components):
        for v in comp:
            node_class[v] = k
    edges = []
    seen = set()
    for e in aug.edges:
        cu, cv = node_class[e.src], node_class[e.dst]
        if cu == cv and _is_zeno(e.weight):
            continue
        key = (cu, cv, e.weight)
        if key not in seen:
            seen.add(key)
            edges.append(key)
    return ContractedGraph(components, node_class, edges, node_class[0])


def contract_again(cg: ContractedGraph) -> ContractedGraph:
    """Contract a quotient graph once more (used to check idempotence)."""
    n = len(cg.classes)
    zero = nx.DiGraph()
    zero.add_nodes_from(range(n))
    zero.add_edges_from((u, v) for u, v, w in cg.edges if _is_zeno(w))
    components = sorted((tuple(sorted(c)) for c in nx.strongly_connected_components(zero)), key=min)
    node_class = [0] * n
    for k, comp in enumerate(components):
        for v in comp:
            node_class[v] = k
    edges = []
    seen = set()
    for u, v, w in cg.edges:
        key = (node_class[u], node_class[v], w)
        if key[0] == key[1] and _is_zeno(w):
            continue
        if key not in seen:
            seen.add(key)
            edges.append(key)
    return ContractedGraph(components, node_class, edges, node_class[cg.initial])


# --- cycles and period ------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    nodes: tuple[int, ...]  # contracted nodes, rotated so the smallest comes first
    weights: tuple[EdgeWeight, ...]  # weights[i] labels nodes[i] -> nodes[i + 1]

    @property
    def duration(self) -> int:
        return sum(w.base for w in self.weights)

    @property
    def starred(self) -> bool:
        return any(w.starred for w in self.weights)

    def sort_key(self):
        return (self.duration, self.nodes, tuple((w.base, w.starred) for w in self.weights))


def _expand_cycles(node_cycles, weights, cap: int) -> list[Cycle]:
    out = []
    for nodes in node_cycles:
        i = nodes.index(min(nodes))
        nodes = tuple(nodes[i:] + nodes[:i])
        hops = [weights[(nodes[j], nodes[(j + 1) % len(nodes)])] for j in range(len(nodes))]
        for choice in itertools.product(*hops):
            out.append(Cycle(nodes, tuple(choice)))
            if len(out) > cap:
                raise CycleExplosion(f"more than {cap} simple cycles")
    return sorted(set(out), key=Cycle.sort_key)


def _bounded_simple_cycles(g: nx.DiGraph, cap: int):
    for count, cyc in enumerate(nx.simple_cycles(g)):
        if count >= cap:
            raise CycleExplosion(f"more than {cap} simple cycles")
        yield cyc


def cycle_nodes(cg: ContractedGraph) -> set[int]:
    """Nodes lying on some cycle of the contracted graph."""
    g = cg.digraph()
    on_cycle = {u for u, v, _ in cg.edges if u == v}
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            on_cycle |= comp
    return on_cycle


def level1_entries(cg: ContractedGraph) -> set[int]:
    """Cycle nodes reachable from the initial node along a path avoiding all other cycle nodes."""
    on_cycle = cycle_nodes(cg)
    succ: dict[int, set[int]] = {}
    for u, v, _ in cg.edges:
        succ.setdefault(u, set()).add(v)
    entries = set()
    seen = {cg.initial}
    queue = deque([cg.initial])
    while queue:
        u = queue.popleft()
        if u in on_cycle:
            entries.add(u)
            continue
        for v in sorted(succ.get(u, ())):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return entries


def level1_simple_cycles(cg: ContractedGraph, cap: int = 100_000) -> list[Cycle]:
    entries = level1_entries(cg)
    if not entries:
        return []
    g = cg.digraph()
    keep = set()
    for comp in nx.strongly_connected_components(g):
        if comp & entries:
            keep |= comp
    sub = g.subgraph(keep)
    node_cycles = [c for c in _bounded_simple_cycles(sub, cap) if entries.intersection(c)]
    return _expand_cycles(node_cycles, cg.weights(), cap)


def all_simple_cycles(cg: ContractedGraph, cap: int = 100_000) -> list[Cycle]:
    return _expand_cycles(list(_bounded_simple_cycles(cg.digraph(), cap)), cg.weights(), cap)


def shortest_cycles_through(cg: ContractedGraph, nodes) -> list[Cycle]:
    """For each node, one minimum-duration cycle through it that avoids starred edges."""
    import heapq

    best: dict[tuple[int, int], EdgeWeight] = {}
    for u, v, w in cg.edges:
        if not w.starred and ((u, v) not in best or w.base < best[(u, v)].base):
            best[(u, v)] = w
    succ: dict[int, list[tuple[int, EdgeWeight]]] = {}
    for (u, v), w in sorted(best.items()):
        succ.setdefault(u, []).append((v, w))
    found = []
    for src in sorted(nodes):
        dist = {}
        prev: dict[int, tuple[int, EdgeWeight]] = {}
        heap = [(w.base, v, src, w) for v, w in succ.get(src, [])]
        heapq.heapify(heap)
        while heap:
            d, v, u, w = heapq.heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            prev[v] = (u, w)
            if v == src:
                break
            for x, wx in succ.get(v, []):
                if x not in dist:
                    heapq.heappush(heap, (d + wx.base, x, v, wx))
        if src not in dist:
            continue
        path, weights = [], []
        v = src
        while True:
            u, w = prev[v]
            path.append(u)
            weights.append(w)
            v = u
            if v == src:
                break
        path.reverse()
        weights.reverse()
        i = path.index(min(path))
        found.append(Cycle(tuple(path[i:] + path[:i]), tuple(weights[i:] + weights[:i])))
    return sorted(set(found), key=Cycle.sort_key)


def smallest_multiple_above(base: int, M: int) -> int:
    return base * (M // base + 1)


@dataclass
class PeriodComputation:
    wz1: list[Cycle]
    contributing: list[Cycle]  # wz1 cycles without stars and with positive duration
    cover: list[Cycle]
    lcm_base: int
    L: int


def node_cover(cycles: list[Cycle]) -> list[Cycle]:
    """Greedy cover of the nodes of ``cycles`` in which every chosen cycle keeps a private node."""
    covered: set[int] = set()
    cover: list[Cycle] = []
    for c in sorted(cycles, key=Cycle.sort_key):
        if set(c.nodes) - covered:
            cover.append(c)
            covered |= set(c.nodes)
    changed = True
    while changed:
        changed = False
        for c in reversed(cover):
            others = set().union(*(set(o.nodes) for o in cover if o is not c))
            if set(c.nodes) <= others:
                cover.remove(c)
                changed = True
                break
    return cover


def compute_period(cycles: list[Cycle], M: int) -> PeriodComputation:
    contributing = [c for c in cycles if not c.starred and c.duration > 0]
    cover = node_cover(contributing)
    base = math.lcm(*(c.duration for c in cover)) if cover else 1
    return PeriodComputation(cycles, contributing, cover, base, smallest_multiple_above(base, M))


def compute_t0(aug: AugGraph) -> int:
    return aug.max_weight * len(aug.nodes) + 1


# --- the layered (infinite) augmented region automaton ------------------------------

LevelSig = tuple  # (nodes, unstarred incoming edges, active starred edges)


class Layers:
    """Breadth-first unfolding of the augmented region automaton by integer part of ``t``.

    ``levels[n]`` holds the augmented-node indices present with ``floor(t) == n``.
    Starred edges are expanded lazily: once fired from level ``n`` with base ``m``
    their target is present at every level ``>= n + m``.
    """

    def __init__(self, aug: AugGraph, L: int, t0: int):
        self.aug = aug
        self.L = L
        self.t0 = t0
        self.out = aug.out_edges()
        self.edge_index = {id(e): i for i, e in enumerate(aug.edges)}
        self.levels: list[frozenset[int]] = []
        self.sigs: list[LevelSig] = []
        self._pending: dict[int, set[int]] = {0: {0}}
        self._pending_in: dict[int, set[int]] = {}
        self._persist_nodes: dict[int, int] = {}
        self._persist_edges: dict[int, int] = {}
        self.bounded_at: int | None = None

    def _finished(self, n: int) -> bool:
        return not self._persist_nodes and not any(k >= n for k in self._pending)

    def _build_level(self) -> None:
        n = len(self.levels)
        nodes = set(self._pending.pop(n, ()))
        nodes |= {v for v, s in self._persist_nodes.items() if s <= n}
        incoming = set(self._pending_in.pop(n, ()))
        work = sorted(nodes)
        while work:
            u = work.pop()
            for e in self.out[u]:
                ei = self.edge_index[id(e)]
                w = e.weight
                if w.starred:
                    start = n + w.base
                    self._persist_edges.setdefault(ei, start)
                    if self._persist_nodes.get(e.dst, start + 1) > start:
                        self._persist_nodes[e.dst] = start
                    if start == n and e.dst not in nodes:
                        nodes.add(e.dst)
                        work.append(e.dst)
                elif w.base == 0:
                    incoming.add(ei)
                    if e.dst not in nodes:
                        nodes.add(e.dst)
                        work.append(e.dst)
                else:
                    self._pending.setdefault(n + w.base, set()).add(e.dst)
                    self._pending_in.setdefault(n + w.base, set()).add(ei)
        active = frozenset(ei for ei, s in self._persist_edges.items() if s <= n)
        self.levels.append(frozenset(nodes))
        self.sigs.append((frozenset(nodes), frozenset(incoming), active))
        if not nodes and self.bounded_at is None and self._finished(n + 1):
            self.bounded_at = n

    def extend_to(self, n_levels: int) -> None:
        while len(self.levels) < n_levels:
            self._build_level()
            if self.bounded_at is not None:
                return

    def block_start(self, k: int) -> int:
        return self.t0 + k * self.L

    def block_signature(self, k: int) -> tuple[LevelSig, ...]:
        start = self.block_start(k)
        self.extend_to(start + self.L)
        return tuple(self.sigs[start:start + self.L])

    def nodes_at(self, n: int) -> frozenset[int]:
        if self.bounded_at is not None and n >= self.bounded_at:
            return frozenset()
        self.extend_to(n + 1)
        return self.levels[n]


@dataclass
class LayerResult:
    layers: Layers
    t_per: int
    k: int
    bounded: bool

    @property
    def blocks_built(self) -> int:
        return 0 if self.bounded else self.k + 3


def build_layers(aug: AugGraph, L: int, t0: int, block_cap: int | None = None) -> LayerResult:
    """Unfold until three consecutive period blocks coincide (or the automaton dies out)."""
    if L < 1 or t0 < 1:
        raise ValueError("L and t0 must be positive")
    if block_cap is None:
        block_cap = len(aug.nodes) * L + 2
    layers = Layers(aug, L, t0)
    k = 0
    while True:
        layers.extend_to(layers.block_start(k + 3))
        if layers.bounded_at is not None:
            return LayerResult(layers, layers.bounded_at, 0, True)
        if layers.block_signature(k) == layers.block_signature(k + 1) == layers.block_signature(k + 2):
            return LayerResult(layers, layers.block_start(k), k, False)
        k += 1
        if k > block_cap:
            raise NoStabilization(f"no stabilization within {block_cap} blocks (L={L}, t0={t0})")


def stabilization_persists(result: LayerResult, extra: int = 2) -> bool:
    """Check that ``extra`` further blocks repeat the signature of the detected block."""
    if result.bounded:
        return all(not result.layers.nodes_at(result.t_per + i) for i in range(extra * result.layers.L + 1))
    ref = result.layers.block_signature(result.k)
    return all(result.layers.block_signature(result.k + 3 + j) == ref for j in range(extra))


def forward_periodicity_violations(result: LayerResult) -> list[tuple[int, int, str]]:
    """Layered edges leaving levels ``>= t0`` whose ``L``-shift is missing (within built range)."""
    layers = result.layers
    if result.bounded:
        return []
    L = layers.L
    top = len(layers.levels) - L
    bad = []
    for n in range(layers.t0, top):
        shifted = layers.levels[n + L]
        for u in layers.levels[n]:
            if u not in shifted:
                bad.append((n, u, "source"))
                continue
            for e in layers.out[u]:
                d = n + e.weight.base
                if d < top and e.dst not in layers.levels[d + L]:
                    bad.append((n, u, e.tid))
    return bad


# --- folding ------------------------------------------------------------------------

@dataclass(frozen=True)
class PNode:
    core: int  # augmented-node index
    t_int: int  # absolute level, or periodic offset in [t_per, t_per + L)
    periodic: bool


@dataclass(frozen=True)
class PEdge:
    src: int
    dst: int
    tid: str
    label: str | None
    starred: bool


@dataclass
class PeriodicAutomaton:
    aug: AugGraph
    t_per: int
    L: int
    bounded: bool
    nodes: list[PNode] = field(default_factory=list)
    edges: list[PEdge] = field(default_factory=list)

    def core(self, i: int) -> RegionCore:
        return self.aug.nodes[self.nodes[i].core]

    def cell_position(self, i: int) -> int:
        """Position ``2n`` (point ``{n}``) or ``2n + 1`` (interval ``(n, n+1)``) of node ``i``'s time."""
        node = self.nodes[i]
        return 2 * node.t_int + (0 if self.core(i).t_is_integral() else 1)


def fold(result: LayerResult) -> PeriodicAutomaton:
    layers = result.layers
    t_per, L = result.t_per, layers.L
    aug = layers.aug
    per = PeriodicAutomaton(aug, t_per, L, result.bounded)
    index: dict[tuple[int, int], int] = {}
    top = t_per if result.bounded else t_per + L
    for n in range(top):
        for c in sorted(layers.nodes_at(n)):
            index[(c, n)] = len(per.nodes)
            per.nodes.append(PNode(c, n, n >= t_per))

    def image(core: int, level: int) -> int:
        if level >= t_per:
            level = t_per + (level - t_per) % L
        try:
            return index[(core, level)]
        except KeyError:
            raise NoStabilization(f"folded target missing: node {core} at level {level}") from None

    seen = set()

    def add(src: int, dst: int, e, starred: bool) -> None:
        key = (src, dst, e.tid, starred)
        if key not in seen:
            seen.add(key)
            per.edges.append(PEdge(src, dst, e.tid, e.label, starred))

    for (c, n), src in list(index.items()):
        for e in layers.out[c]:
            first = n + e.weight.base
            if not e.weight.starred:
                add(src, image(e.dst, first), e, False)
                continue
            for level in range(first, t_per):
                add(src, image(e.dst, level), e, True)
            if not result.bounded:
                for level in range(max(first, t_per), max(first, t_per) + L):
                    add(src, image(e.dst, level), e, True)
    return per


# --- orchestration ------------------------------------------------------------------

@dataclass
class PeriodInfo:
    M: int
    M_w: int
    N: int
    t0: int
    L: int
    t_per: int
    blocks_built: int
    escalated: bool
    bounded: bool

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "M_w": self.M_w,
            "N": self.N,
            "t0": self.t0,
            "L": self.L,
            "t_per": self.t_per,
            "escalated": self.escalated,
            "bounded": self.bounded,
        }


@dataclass
class AnalysisConfig:
    cycle_cap: int = 100_000
    block_cap: int | None = None
    escalate: bool = True


@dataclass
class Analysis:
    model: EntaModel
    aug: AugGraph
    contracted: ContractedGraph
    period: PeriodComputation
    layers: LayerResult
    info: PeriodInfo
    per: PeriodicAutomaton


def escalate_and_retry(aug: AugGraph, cg: ContractedGraph, cap: int, t0: int, block_cap: int | None):
    try:
        cycles = all_simple_cycles(cg, cap)
    except CycleExplosion:
        cycles = shortest_cycles_through(cg, range(len(cg.classes)))
    durations = [c.duration for c in cycles if not c.starred and c.duration > 0]
    base = math.lcm(*durations) if durations else 1
    L = smallest_multiple_above(base, aug.M)
    return L, build_layers(aug, L, t0, block_cap)


def analyze(model: EntaModel, config: AnalysisConfig | None = None) -> Analysis:
    config = config or AnalysisConfig()
    aug = build_aug_graph(model)
    cg = contract_zeno(aug)
    try:
        cycles = level1_simple_cycles(cg, config.cycle_cap)
    except CycleExplosion:
        log.warning("too many level-1 cycles; using shortest cycles through entry nodes")
        cycles = shortest_cycles_through(cg, level1_entries(cg))
    period = compute_period(cycles, aug.M)
    t0 = compute_t0(aug)
    L = period.L
    escalated = False
    try:
        layers = build_layers(aug, L, t0, config.block_cap)
    except NoStabilization:
        if not config.escalate:
            raise
        log.warning("no stabilization with L=%d; escalating to all simple cycles", L)
        L, layers = escalate_and_retry(aug, cg, config.cycle_cap, t0, config.block_cap)
        escalated = True
    info = PeriodInfo(
        M=aug.M,
        M_w=aug.max_weight,
        N=len(aug.nodes),
        t0=t0,
        L=L,
        t_per=layers.t_per,
        blocks_built=layers.blocks_built,
        escalated=escalated,
        bounded=layers.bounded,
    )
    return Analysis(model, aug, cg, period, layers, info, fold(layers))


# --- export ------------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def periodic_dot(per: PeriodicAutomaton) -> str:
    model = per.aug.model
    lines = ["digraph Rper {", "  rankdir=LR;"]
    for i, node in enumerate(per.nodes):
        when = f"t={node.t_int}+{per.L}ℕ" if node.periodic else f"t={node.t_int}"
        shape = "doubleoctagon" if node.periodic else "box"
        label = f"{when} | {format_core(model, per.core(i))}"
        lines.append(f"  p{i} [shape={shape}, label={_quote(label)}];")
    for e in per.edges:
        label = (e.label if e.label is not None else "eps") + (" *" if e.starred else "")
        lines.append(f"  p{e.src} -> p{e.dst} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def periodic_to_dict(per: PeriodicAutomaton) -> dict:
    model = per.aug.model
    return {
        "t_per": per.t_per,
        "L": per.L,
        "bounded": per.bounded,
        "nodes": [
            {
                "id": i,
                "region": format_core(model, per.core(i)),
                "t": node.t_int,
                "periodic": node.periodic,
            }
            for i, node in enumerate(per.nodes)
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "transition": e.tid, "action": e.label, "starred": e.starred}
            for e in per.edges
        ],
    }
