"""Exhaustive exploration of the concrete semantics on a rational grid.

All coordinates are kept as integers in units of ``1/K``.  A regular clock that
exceeds the maximal guard constant is frozen at a sentinel just above it: such
values satisfy exactly the same guards forever, so the frozen system is
bisimilar to the real one while staying finite.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .model import EntaModel, max_constant
from .timestamp import Cell, Timestamp, position_of


@dataclass(frozen=True)
class GridConfig:
    K: int = 2
    T: int = 10
    max_steps: int | None = None

    def __post_init__(self):
        if self.K < 1 or self.T < 1 or (self.max_steps is not None and self.max_steps < 1):
            raise ValueError("grid denominator, horizon and max_steps must be positive")

    def complete_for(self, model: EntaModel) -> bool:
        return self.K >= len(model.clocks) + 2


class _Grid:
    def __init__(self, model: EntaModel, cfg: GridConfig):
        self.model = model
        self.cfg = cfg
        self.K = cfg.K
        self.limit = cfg.T * cfg.K
        self.cap = max_constant(model) * cfg.K + 1
        idx = {c: i for i, c in enumerate(model.clocks)}
        self.out: dict[str, list] = {q: [] for q in model.locations}
        for tr in model.transitions:
            guard = [(idx[a.clock], a.op, a.bound * cfg.K) for a in tr.guard]
            resets = frozenset(idx[c] for c in tr.resets)
            self.out[tr.source].append((tr, guard, resets))

    def start(self):
        return (self.model.initial, (0,) * len(self.model.clocks), 0)

    @staticmethod
    def _sat(guard, vals) -> bool:
        for i, op, b in guard:
            v = vals[i]
            if op == "<":
                ok = v < b
            elif op == "<=":
                ok = v <= b
            elif op == "==":
                ok = v == b
            elif op == ">=":
                ok = v >= b
            else:
                ok = v > b
            if not ok:
                return False
        return True

    def tick(self, state):
        loc, vals, now = state
        if now >= self.limit:
            return None
        cap = self.cap
        return (loc, tuple(v + 1 if v < cap else cap for v in vals), now + 1)

    def jumps(self, state):
        loc, vals, now = state
        for tr, guard, resets in self.out[loc]:
            if self._sat(guard, vals):
                new = tuple(0 if i in resets else v for i, v in enumerate(vals)) if resets else vals
                yield tr, (tr.target, new, now)


@dataclass
class EventSet:
    K: int
    T: int
    events: set[tuple[Fraction, str]] = field(default_factory=set)
    # (grid time, action) -> post-jump (location, clocks) reached by such an event
    post: dict[tuple[int, str], set] = field(default_factory=dict)
    states: int = 0

    def by_action(self) -> dict[str, set[int]]:
        out: dict[str, set[int]] = {}
        for t, a in self.events:
            out.setdefault(a, set()).add(position_of(t))
        return out

    def to_list(self) -> list[list]:
        return [[str(t), a] for t, a in sorted(self.events, key=lambda e: (e[0], e[1]))]


def explore(model: EntaModel, cfg: GridConfig, keep_post: bool = False) -> EventSet:
    """All observable ``(time, action)`` events of grid runs up to the horizon.

    Unit delays and jumps are explored breadth first from the initial state; with
    ``max_steps`` a state only counts if it is reachable with that many jumps (0-1 BFS).
    """
    grid = _Grid(model, cfg)
    result = EventSet(cfg.K, cfg.T)
    start = grid.start()
    depth = {start: 0}
    queue = deque([start])
    bound = cfg.max_steps
    while queue:
        s = queue.popleft()
        d = depth[s]
        nxt = grid.tick(s)
        if nxt is not None:
            if bound is None:
                if nxt not in depth:
                    depth[nxt] = 0
                    queue.append(nxt)
            elif depth.get(nxt, d + 1) > d:
                depth[nxt] = d
                queue.appendleft(nxt)
        if bound is not None and d >= bound:
            continue
        for tr, target in grid.jumps(s):
            if tr.label is not None:
                result.events.add((Fraction(s[2], cfg.K), tr.label))
                if keep_post:
                    result.post.setdefault((s[2], tr.label), set()).add(target[:2])
            if bound is None:
                if target not in depth:
                    depth[target] = 0
                    queue.append(target)
            elif depth.get(target, d + 2) > d + 1:
                depth[target] = d + 1
                queue.append(target)
    result.states = len(depth)
    return result


@dataclass
class CheckReport:
    sound: bool
    complete: bool
    missing: list[tuple[str, Cell]]
    spurious: list[tuple[Fraction, str]]
    events: int

    @property
    def ok(self) -> bool:
        return self.sound and self.complete

    def to_dict(self) -> dict:
        return {
            "sound": self.sound,
            "complete": self.complete,
            "missing": [{"action": a, "cell": str(c)} for a, c in self.missing],
            "spurious": [[str(t), a] for t, a in self.spurious],
            "events": self.events,
        }


def check(model: EntaModel, ts: Timestamp, cfg: GridConfig, events: EventSet | None = None) -> CheckReport:
    """Compare a computed timestamp with the grid exploration.

    Soundness: every explored event lies in the timestamp.  Completeness: every
    timestamp cell inside ``[0, T]`` holds an explored event of its action.
    """
    events = events or explore(model, cfg)
    spurious = sorted((e for e in events.events if not ts.contains(e[0], e[1])), key=lambda e: (e[0], e[1]))
    seen = events.by_action()
    missing = []
    for a in ts.actions:
        for cell in ts[a].cells_upto(cfg.T):
            if cell.pos not in seen.get(a, ()):
                missing.append((a, cell))
    return CheckReport(not spurious, not missing, missing, spurious, len(events.events))


@dataclass
class SuffixReport:
    checked: int
    violations: list[tuple[Fraction, str, tuple]]

    @property
    def ok(self) -> bool:
        return not self.violations


def suffix_shift_check(model: EntaModel, cfg: GridConfig, t_per: int, L: int, events: EventSet | None = None) -> SuffixReport:
    """Every state entered by an observable event at ``t_r`` in ``[t_per, T - L]`` must also be
    entered by the same action at ``t_r + L``.

    Guards never read absolute time, so a matching post-event state at ``t_r + L``
    carries every continuation of the original run shifted by ``L``.
    """
    if events is None or not events.post:
        events = explore(model, cfg, keep_post=True)
    K = cfg.K
    lo, hi = t_per * K, (cfg.T - L) * K
    checked = 0
    bad = []
    for (now, action), states in sorted(events.post.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        if not lo <= now <= hi:
            continue
        later = events.post.get((now + L * K, action), set())
        for st in sorted(states):
            checked += 1
            if st not in later:
                bad.append((Fraction(now, K), action, st))
    return SuffixReport(checked, bad)


def find_run(model: EntaModel, cfg: GridConfig, action: str, cell: Cell) -> list[tuple[Fraction, str]] | None:
    """A schedule of ``(delay, transition id)`` for ``simulate`` whose last jump is ``action`` inside ``cell``."""
    grid = _Grid(model, cfg)
    start = grid.start()
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for tr, target in grid.jumps(s):
            if tr.label == action and cell.contains(Fraction(s[2], cfg.K)):
                steps = _schedule(parent, s, cfg.K)
                wait = steps.pop()[0] if steps and steps[-1][1] is None else Fraction(0)
                return steps + [(wait, tr.id)]
            if target not in parent:
                parent[target] = (s, tr.id)
                queue.append(target)
        nxt = grid.tick(s)
        if nxt is not None and nxt not in parent:
            parent[nxt] = (s, None)
            queue.append(nxt)
    return None


def _schedule(parent, s, K) -> list[tuple[Fraction, str]]:
    chain = []
    while parent[s] is not None:
        s, tid = parent[s]
        chain.append(tid)
    out = []
    ticks = 0
    for tid in reversed(chain):
        if tid is None:
            ticks += 1
        else:
            out.append((Fraction(ticks, K), tid))
            ticks = 0
    return out + [(Fraction(ticks, K), None)] if ticks else out


def observable_traces(model: EntaModel, cfg: GridConfig, max_events: int = 2) -> set[tuple]:
    """Every observable trace (up to ``max_events`` events) of grid runs within the horizon."""
    grid = _Grid(model, cfg)
    start = (grid.start(), ())
    seen = {start}
    queue = deque([start])
    traces = {()}
    while queue:
        s, trace = queue.popleft()
        nxt = grid.tick(s)
        succ = [] if nxt is None else [(nxt, trace)]
        for tr, target in grid.jumps(s):
            if tr.label is None:
                succ.append((target, trace))
            elif len(trace) < max_events:
                new = trace + ((Fraction(s[2], cfg.K), tr.label),)
                traces.add(new)
                succ.append((target, new))
        for item in succ:
            if item not in seen:
                seen.add(item)
                queue.append(item)
    return traces
