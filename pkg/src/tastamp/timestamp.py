"""Eventually periodic sets of cells and timestamps built from them.

A cell is either an integral point ``{n}`` or an open unit interval ``(n, n+1)``.
Internally a cell is addressed by its *position*: ``2n`` for ``{n}`` and
``2n + 1`` for ``(n, n+1)``, so that consecutive positions are adjacent on the
time line and set algebra reduces to sets of integers.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .model import EntaModel


class Cell(NamedTuple):
    kind: str  # "point" | "open"
    n: int

    @property
    def pos(self) -> int:
        return 2 * self.n + (self.kind == "open")

    @classmethod
    def at(cls, pos: int) -> "Cell":
        return cls("open" if pos % 2 else "point", pos // 2)

    def contains(self, t) -> bool:
        t = Fraction(t)
        if self.kind == "point":
            return t == self.n
        return self.n < t < self.n + 1

    def sample(self) -> Fraction:
        return Fraction(self.n) if self.kind == "point" else Fraction(2 * self.n + 1, 2)

    def __str__(self) -> str:
        return f"{{{self.n}}}" if self.kind == "point" else f"({self.n},{self.n + 1})"


def Point(n: int) -> Cell:
    return Cell("point", n)


def OpenUnit(n: int) -> Cell:
    return Cell("open", n)


def position_of(t) -> int:
    t = Fraction(t)
    n = math.floor(t)
    return 2 * n + (0 if t == n else 1)


@dataclass(frozen=True)
class EPS:
    """Eventually periodic set: explicit cells before ``t_per``, an ``L``-periodic pattern after.

    ``prefix`` holds positions ``< 2*t_per``; ``periodic`` holds positions in
    ``[2*t_per, 2*(t_per+L))``.  The pattern owns every time ``>= t_per``.
    """

    t_per: int = 0
    L: int = 1
    prefix: frozenset = frozenset()
    periodic: frozenset = frozenset()

    def __post_init__(self):
        if self.L < 1 or self.t_per < 0:
            raise ValueError("need L >= 1 and t_per >= 0")
        lo, hi = 2 * self.t_per, 2 * (self.t_per + self.L)
        if any(p < 0 or p >= lo for p in self.prefix):
            raise ValueError("prefix cell outside [0, t_per)")
        if any(p < lo or p >= hi for p in self.periodic):
            raise ValueError("periodic cell outside [t_per, t_per + L)")

    @classmethod
    def empty(cls) -> "EPS":
        return cls()

    @classmethod
    def full(cls) -> "EPS":
        return cls(0, 1, frozenset(), frozenset({0, 1}))

    @classmethod
    def from_cells(cls, t_per: int, L: int, prefix: Iterable[Cell] = (), periodic: Iterable[Cell] = ()) -> "EPS":
        return cls(t_per, L, frozenset(c.pos for c in prefix), frozenset(c.pos for c in periodic))

    @property
    def bounded(self) -> bool:
        return not self.periodic

    @property
    def prefix_cells(self) -> list[Cell]:
        return [Cell.at(p) for p in sorted(self.prefix)]

    @property
    def periodic_cells(self) -> list[Cell]:
        return [Cell.at(p) for p in sorted(self.periodic)]

    def has_pos(self, p: int) -> bool:
        lo = 2 * self.t_per
        if p < lo:
            return p in self.prefix
        return lo + (p - lo) % (2 * self.L) in self.periodic

    def __contains__(self, t) -> bool:
        return membership(self, t)

    def positions_upto(self, end: int) -> list[int]:
        """All member positions ``< end``."""
        return [p for p in range(end) if self.has_pos(p)]

    def cells_upto(self, horizon: int) -> list[Cell]:
        """Member cells lying entirely inside ``[0, horizon]``."""
        return [Cell.at(p) for p in range(2 * horizon + 1) if self.has_pos(p)]

    def reshape(self, t_per: int, L: int) -> "EPS":
        """Same set, represented with other parameters (``t_per`` may only move past the old one
        when ``L`` is a multiple of the current period)."""
        lo, hi = 2 * t_per, 2 * (t_per + L)
        return EPS(
            t_per,
            L,
            frozenset(p for p in range(lo) if self.has_pos(p)),
            frozenset(p for p in range(lo, hi) if self.has_pos(p)),
        )


def membership(s: EPS, t) -> bool:
    if t < 0:
        return False
    return s.has_pos(position_of(t))


def align(a: EPS, b: EPS) -> tuple[EPS, EPS]:
    t_per = max(a.t_per, b.t_per)
    L = math.lcm(a.L, b.L)
    return a.reshape(t_per, L), b.reshape(t_per, L)


def union(a: EPS, b: EPS) -> EPS:
    a, b = align(a, b)
    return EPS(a.t_per, a.L, a.prefix | b.prefix, a.periodic | b.periodic)


def intersection(a: EPS, b: EPS) -> EPS:
    a, b = align(a, b)
    return EPS(a.t_per, a.L, a.prefix & b.prefix, a.periodic & b.periodic)


def difference_witness(a: EPS, b: EPS) -> Cell | None:
    """Earliest cell of ``a`` that is missing from ``b``."""
    a, b = align(a, b)
    missing = (a.prefix - b.prefix) | (a.periodic - b.periodic)
    return Cell.at(min(missing)) if missing else None


def includes(a: EPS, b: EPS) -> bool:
    """True iff ``a`` is included in ``b``."""
    return difference_witness(a, b) is None


def equals(a: EPS, b: EPS) -> bool:
    a, b = align(a, b)
    return a.prefix == b.prefix and a.periodic == b.periodic


def is_full(s: EPS) -> bool:
    return len(s.prefix) == 2 * s.t_per and len(s.periodic) == 2 * s.L


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def canonicalize(s: EPS) -> EPS:
    """Smallest period, then smallest threshold, with identical membership."""
    lo = 2 * s.t_per
    L = s.L
    for d in _divisors(s.L):
        if all(s.has_pos(p) == s.has_pos(p + 2 * d) for p in range(lo, lo + 2 * s.L)):
            L = d
            break
    t_per = s.t_per
    while t_per > 0 and all(s.has_pos(p) == s.has_pos(p + 2 * L) for p in (2 * t_per - 2, 2 * t_per - 1)):
        t_per -= 1
    return s.reshape(t_per, L)


# --- text form ---------------------------------------------------------------------

def _runs(positions: Sequence[int]) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    for p in sorted(positions):
        if runs and runs[-1][1] == p - 1:
            runs[-1] = (runs[-1][0], p)
        else:
            runs.append((p, p))
    return runs


def _interval(p: int, q: int | None) -> str:
    if q is not None and p == q and p % 2 == 0:
        return f"{{{p // 2}}}"
    left = f"[{p // 2}" if p % 2 == 0 else f"({p // 2}"
    if q is None:
        return f"{left},∞)"
    right = f"{q // 2}]" if q % 2 == 0 else f"{q // 2 + 1})"
    return f"{left},{right}"


def intervals(s: EPS) -> list[tuple[int, int | None]]:
    """Maximal runs of member positions of the prefix; a full tail is reported with end ``None``."""
    runs = _runs(s.prefix)
    if s.periodic and is_full(EPS(0, s.L, frozenset(), frozenset(p - 2 * s.t_per for p in s.periodic))):
        start = 2 * s.t_per
        if runs and runs[-1][1] == start - 1:
            start = runs.pop()[0]
        runs.append((start, None))
    return runs


def pretty(s: EPS) -> str:
    runs = intervals(s)
    parts = [_interval(p, q) for p, q in runs]
    if s.periodic and not (runs and runs[-1][1] is None):
        base = 2 * s.t_per
        inner = " ∪ ".join(_interval(p - base, q - base) for p, q in _runs(s.periodic))
        parts.append(f"{s.t_per} + ({inner}) + {s.L}ℕ₀")
    return " ∪ ".join(parts) if parts else "∅"


_ITEM = re.compile(r"\{\s*(\d+)\s*\}|([\[(])\s*(\d+)\s*,\s*(\d+|∞|inf)\s*([\])])")
_PERIODIC = re.compile(r"\(?\s*(\d+)\s*\+\s*\((.*)\)\s*\+\s*(\d+)\s*(?:ℕ₀|ℕ|N0|N)\s*\)?\s*$")


def _scan(text: str) -> tuple[list[int], int | None]:
    """Positions of the finite items in ``text`` plus the start position of an infinite one."""
    positions: list[int] = []
    tail = None
    rest = _ITEM.sub("", text).replace("∪", "").replace("U", "").strip()
    if rest not in ("", "∅"):
        raise ValueError(f"cannot parse {text!r}")
    for m in _ITEM.finditer(text):
        if m.group(1) is not None:
            positions.append(2 * int(m.group(1)))
            continue
        lo_closed, lo, hi, hi_closed = m.group(2) == "[", int(m.group(3)), m.group(4), m.group(5) == "]"
        first = 2 * lo if lo_closed else 2 * lo + 1
        if hi in ("∞", "inf"):
            tail = first if tail is None else min(tail, first)
            continue
        last = 2 * int(hi) if hi_closed else 2 * int(hi) - 1
        if last < first:
            raise ValueError(f"empty interval in {text!r}")
        positions.extend(range(first, last + 1))
    return positions, tail


def parse(text: str) -> EPS:
    """Inverse of :func:`pretty`; also accepts ``base + (pattern) + Lℕ₀`` wrapped in parentheses."""
    text = text.strip()
    periodic = None
    m = _PERIODIC.search(text)
    if m:
        base, L = int(m.group(1)), int(m.group(3))
        rel, rel_tail = _scan(m.group(2))
        if rel_tail is not None or any(p >= 2 * L for p in rel):
            raise ValueError("pattern must lie inside one period")
        periodic = (base, L, {2 * base + p for p in rel})
        text = text[: m.start()].rstrip().rstrip("∪").rstrip()
    positions, tail = _scan(text)
    if periodic is not None and tail is not None:
        raise ValueError("both an infinite interval and a periodic part")
    if periodic is not None:
        base, L, pat = periodic
        if any(p >= 2 * base for p in positions):
            raise ValueError("prefix reaches into the periodic part")
        return EPS(base, L, frozenset(positions), frozenset(pat))
    if tail is not None:
        t_per = max([(tail + 1) // 2] + [p // 2 + 1 for p in positions])
        pre = {p for p in positions if p < 2 * t_per} | set(range(tail, 2 * t_per))
        return EPS(t_per, 1, frozenset(pre), frozenset({2 * t_per, 2 * t_per + 1}))
    t_per = max((p // 2 + 1 for p in positions), default=0)
    return EPS(t_per, 1, frozenset(positions), frozenset())


def eps_to_dict(s: EPS) -> dict:
    cell = lambda c: {"kind": c.kind, "n": c.n}  # noqa: E731
    return {"prefix": [cell(c) for c in s.prefix_cells], "periodic": [cell(c) for c in s.periodic_cells]}


# --- timestamps ---------------------------------------------------------------------

@dataclass(frozen=True)
class Timestamp:
    """Per-action eventually periodic sets sharing one ``(t_per, L)``."""

    t_per: int
    L: int
    sets: Mapping[str, EPS] = field(default_factory=dict)

    def __post_init__(self):
        for a, s in self.sets.items():
            if (s.t_per, s.L) != (self.t_per, self.L):
                raise ValueError(f"action {a}: parameters differ from the timestamp's")

    @classmethod
    def of(cls, sets: Mapping[str, EPS]) -> "Timestamp":
        if not sets:
            return cls(0, 1, {})
        t_per = max(s.t_per for s in sets.values())
        L = math.lcm(*(s.L for s in sets.values()))
        return cls(t_per, L, {a: sets[a].reshape(t_per, L) for a in sorted(sets)})

    def __getitem__(self, action: str) -> EPS:
        return self.sets.get(action, EPS.empty().reshape(self.t_per, self.L))

    @property
    def actions(self) -> list[str]:
        return sorted(self.sets)

    def contains(self, t, action: str) -> bool:
        return membership(self[action], t)

    def pretty(self) -> str:
        return "\n".join(f"{a}: {pretty(canonicalize(self.sets[a]))}" for a in self.actions)

    def to_dict(self) -> dict:
        return {
            "t_per": self.t_per,
            "L": self.L,
            "actions": {a: eps_to_dict(self.sets[a]) for a in self.actions},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def canonicalize_timestamp(ts: Timestamp) -> Timestamp:
    return Timestamp.of({a: canonicalize(s) for a, s in ts.sets.items()})


def timestamp_equals(x: Timestamp, y: Timestamp) -> bool:
    actions = set(x.sets) | set(y.sets)
    return all(equals(x[a], y[a]) for a in actions)


def timestamp_from_dict(data) -> Timestamp:
    def cells(items):
        return [Cell(c["kind"], int(c["n"])) for c in items]

    t_per, L = int(data["t_per"]), int(data["L"])
    sets = {
        a: EPS.from_cells(t_per, L, cells(v.get("prefix", [])), cells(v.get("periodic", [])))
        for a, v in data["actions"].items()
    }
    return Timestamp(t_per, L, sets)


def extract(per, actions: Sequence[str]) -> Timestamp:
    """Timestamp of a folded periodic automaton: the time cell of every target of an observable edge."""
    prefix: dict[str, set[int]] = {a: set() for a in actions}
    periodic: dict[str, set[int]] = {a: set() for a in actions}
    for e in per.edges:
        if e.label is None:
            continue
        pos = per.cell_position(e.dst)
        (periodic if per.nodes[e.dst].periodic else prefix)[e.label].add(pos)
    return Timestamp(
        per.t_per,
        per.L,
        {a: EPS(per.t_per, per.L, frozenset(prefix[a]), frozenset(periodic[a])) for a in actions},
    )


def extract_by_location(per) -> dict[str, EPS]:
    """Time cells of the edges entering each location, whatever their label."""
    prefix: dict[str, set[int]] = {}
    periodic: dict[str, set[int]] = {}
    for q in per.aug.model.locations:
        prefix[q], periodic[q] = set(), set()
    for e in per.edges:
        q = per.core(e.dst).location
        pos = per.cell_position(e.dst)
        (periodic if per.nodes[e.dst].periodic else prefix)[q].add(pos)
    return {q: EPS(per.t_per, per.L, frozenset(prefix[q]), frozenset(periodic[q])) for q in prefix}


def measured_size(s: EPS) -> float:
    """Total length of the set; points have length 0."""
    if s.periodic and any(p % 2 for p in s.periodic):
        return math.inf
    return float(sum(p % 2 for p in s.prefix))


# --- widths of single-clock paths ----------------------------------------------------

@dataclass
class PathWidths:
    lower: list[float]
    upper: list[float]
    d: list[float]
    s: list[float]
    w: list[float]  # w[0] is the initial width


def path_widths(model: EntaModel, path: Sequence[str]) -> PathWidths:
    """Durations, timestamp sizes and trail widths along a path of a one-clock model.

    Lower bounds are pushed forward and upper bounds backward across events that
    do not reset the clock; then ``s_i = w_{i-1} + d_i`` and the width becomes
    ``s_i`` on resets.
    """
    if len(model.clocks) != 1:
        raise ValueError("path widths need exactly one clock")
    x = model.clocks[0]
    events = [model.transition(tid) for tid in path]
    loc = model.initial
    for i, tr in enumerate(events, start=1):
        if tr.source != loc:
            raise ValueError(f"path does not chain at event {i}")
        loc = tr.target
    lower, upper = [], []
    for tr in events:
        lo, hi = 0.0, math.inf
        for a in tr.guard:
            if a.op in (">", ">=", "=="):
                lo = max(lo, a.bound)
            if a.op in ("<", "<=", "=="):
                hi = min(hi, a.bound)
        lower.append(lo)
        upper.append(hi)
    n = len(events)
    for i in range(n - 1):
        if x not in events[i].resets and lower[i + 1] < lower[i]:
            lower[i + 1] = lower[i]
    for i in range(n - 2, -1, -1):
        if x not in events[i].resets and upper[i] > upper[i + 1]:
            upper[i] = upper[i + 1]
    for i in range(n):
        if upper[i] < lower[i]:
            raise ValueError(f"unreachable path: event {i + 1} has empty feasible window")
    d = [max(u - l, 0.0) for l, u in zip(lower, upper)]
    s: list[float] = []
    w = [0.0]
    for i, tr in enumerate(events):
        s.append(w[-1] + d[i])
        w.append(s[-1] if x in tr.resets else w[-1])
    return PathWidths(lower, upper, d, s, w)


def compute_timestamp(model: EntaModel, config=None) -> Timestamp:
    """Run the full analysis and extract the timestamp of ``model``."""
    from .periodic import analyze

    return extract(analyze(model, config).per, model.actions)
