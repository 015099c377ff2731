"""Clock regions that also track the global clock, and the augmented region automaton.

A region core stores the location, the integer part of every regular clock
(``None`` once the clock has passed the maximal guard constant) and the
ordering of fractional parts of the global clock ``t`` and of every uncapped
regular clock.  The integer part of ``t`` is not stored; it is recovered as
edge weights.

Tracked clocks are numbered: 0 is ``t``, ``i + 1`` is the model's ``i``-th clock.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .model import EntaModel, TransitionDef, max_constant

T_INDEX = 0


class RegionCore(NamedTuple):
    location: str
    ints: tuple  # int or None (capped) per regular clock
    groups: tuple  # tuple of sorted tuples of tracked indices, increasing fractional part
    zero_first: bool

    def t_is_integral(self) -> bool:
        return self.zero_first and T_INDEX in self.groups[0]

    def all_capped(self) -> bool:
        return all(k is None for k in self.ints)


class EdgeWeight(NamedTuple):
    base: int
    starred: bool = False

    def admits(self, delta: int) -> bool:
        return delta == self.base or (self.starred and delta > self.base)

    def __str__(self) -> str:
        return f"{self.base}*" if self.starred else str(self.base)


@dataclass(frozen=True)
class AugEdge:
    src: int
    dst: int
    tid: str
    label: str | None
    weight: EdgeWeight


@dataclass
class AugGraph:
    """The augmented region automaton; ``nodes[0]`` is the initial region."""

    model: EntaModel
    M: int
    nodes: list[RegionCore]
    edges: list[AugEdge]

    @property
    def initial(self) -> RegionCore:
        return self.nodes[0]

    def out_edges(self) -> list[list[AugEdge]]:
        out: list[list[AugEdge]] = [[] for _ in self.nodes]
        for e in self.edges:
            out[e.src].append(e)
        return out

    @property
    def max_weight(self) -> int:
        return max((e.weight.base for e in self.edges), default=0)


def initial_region(model: EntaModel) -> RegionCore:
    tracked = tuple(range(len(model.clocks) + 1))
    return RegionCore(model.initial, (0,) * len(model.clocks), (tracked,), True)


def delay_step(core: RegionCore, M: int) -> tuple[RegionCore, int]:
    """Time successor of a region; returns the new core and 1 iff ``t`` crossed an integer."""
    if core.zero_first:
        return core._replace(zero_first=False), 0
    *rest, last = core.groups
    ints = list(core.ints)
    kept = []
    crossed = 0
    for c in last:
        if c == T_INDEX:
            crossed = 1
            kept.append(c)
            continue
        k = ints[c - 1] + 1
        if k > M:
            ints[c - 1] = None
        else:
            ints[c - 1] = k
            kept.append(c)
    if kept:
        return RegionCore(core.location, tuple(ints), (tuple(kept), *rest), True), crossed
    return RegionCore(core.location, tuple(ints), tuple(rest), False), crossed


def _atom_holds(op: str, bound: int, k, frac_zero: bool) -> bool:
    if k is None:
        return op in (">", ">=")
    if op == "==":
        return frac_zero and k == bound
    if op == "<":
        return k < bound
    if op == "<=":
        return k <= bound if frac_zero else k < bound
    if op == ">":
        return k > bound if frac_zero else k >= bound
    return k >= bound  # ">="


class Regions:
    """Region operations bound to one model (clock order and guard constant)."""

    def __init__(self, model: EntaModel):
        self.model = model
        self.M = max_constant(model)
        self.index = {c: i + 1 for i, c in enumerate(model.clocks)}
        self.by_location: dict[str, list[TransitionDef]] = {q: [] for q in model.locations}
        for tr in model.transitions:
            self.by_location[tr.source].append(tr)

    def enabled(self, core: RegionCore, tr: TransitionDef) -> bool:
        zero = core.groups[0] if core.zero_first else ()
        for atom in tr.guard:
            i = self.index[atom.clock]
            if not _atom_holds(atom.op, atom.bound, core.ints[i - 1], i in zero):
                return False
        return True

    def fire(self, core: RegionCore, tr: TransitionDef) -> RegionCore:
        if not self.enabled(core, tr):
            raise ValueError(f"transition {tr.id} is disabled in {core}")
        if not tr.resets:
            return core._replace(location=tr.target)
        reset = {self.index[c] for c in tr.resets}
        ints = tuple(0 if i + 1 in reset else k for i, k in enumerate(core.ints))
        groups = [tuple(c for c in g if c not in reset) for g in core.groups]
        if core.zero_first:
            groups[0] = tuple(sorted(set(groups[0]) | reset))
        else:
            groups.insert(0, tuple(sorted(reset)))
        return RegionCore(tr.target, ints, tuple(g for g in groups if g), True)

    def closure_edges(self, core: RegionCore) -> Iterator[tuple[RegionCore, int, bool]]:
        """Yield ``(region, t offset, starred)`` for every region reachable from ``core`` by delay."""
        seen = set()
        offset = 0
        star = False
        u = core
        while u not in seen:
            seen.add(u)
            star = star or u.all_capped()
            yield u, offset, star
            u, crossed = delay_step(u, self.M)
            offset += crossed

    def successors(self, core: RegionCore) -> Iterator[tuple[RegionCore, TransitionDef, EdgeWeight]]:
        for u, off, star in self.closure_edges(core):
            for tr in self.by_location[u.location]:
                if self.enabled(u, tr):
                    yield self.fire(u, tr), tr, EdgeWeight(off, star)


def enabled(model: EntaModel, core: RegionCore, tr: TransitionDef) -> bool:
    return Regions(model).enabled(core, tr)


def fire(model: EntaModel, core: RegionCore, tr: TransitionDef) -> RegionCore:
    return Regions(model).fire(core, tr)


def closure_edges(model: EntaModel, core: RegionCore) -> list[tuple[RegionCore, int, bool]]:
    return list(Regions(model).closure_edges(core))


def build_aug_graph(model: EntaModel) -> AugGraph:
    """Worklist construction of the augmented region automaton (nodes in BFS discovery order)."""
    regions = Regions(model)
    start = initial_region(model)
    nodes = [start]
    index = {start: 0}
    edges: list[AugEdge] = []
    seen_edges = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for dst, tr, w in regions.successors(nodes[i]):
            j = index.get(dst)
            if j is None:
                j = index[dst] = len(nodes)
                nodes.append(dst)
                queue.append(j)
            key = (i, j, tr.id, w)
            if key not in seen_edges:
                seen_edges.add(key)
                edges.append(AugEdge(i, j, tr.id, tr.label, w))
    return AugGraph(model, regions.M, nodes, edges)


# --- rendering ----------------------------------------------------------------

def clock_name(model: EntaModel, i: int) -> str:
    return "t" if i == T_INDEX else model.clocks[i - 1]


def format_simplex(model: EntaModel, core: RegionCore) -> str:
    parts = ["{" + ",".join(clock_name(model, c) for c in g) + "}" for g in core.groups]
    if core.zero_first:
        parts[0] = "0=" + parts[0]
    else:
        parts.insert(0, "0")
    return " < ".join(parts)


def format_core(model: EntaModel, core: RegionCore) -> str:
    ints = ",".join(f"{c}={'T' if k is None else k}" for c, k in zip(model.clocks, core.ints))
    return f"{core.location} | {ints or '-'} | {format_simplex(model, core)}"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def aug_graph_dot(graph: AugGraph) -> str:
    lines = ["digraph Rt {", "  rankdir=LR;"]
    for i, core in enumerate(graph.nodes):
        shape = "doublecircle" if i == 0 else "box"
        lines.append(f"  n{i} [shape={shape}, label={_quote(format_core(graph.model, core))}];")
    for e in graph.edges:
        label = f"{e.label if e.label is not None else 'eps'} / {e.weight}"
        lines.append(f"  n{e.src} -> n{e.dst} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
