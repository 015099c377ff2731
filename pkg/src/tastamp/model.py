"""Timed automata with silent transitions: data model, JSON I/O and concrete semantics.

Time values in the concrete semantics are :class:`fractions.Fraction` so that
simulation and the grid oracle stay exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

#: Name of the analysis-only global clock; models may not declare it.
GLOBAL_CLOCK = "t"

OPS = ("<", "<=", "==", ">=", ">")


class ModelError(ValueError):
    """Raised for malformed model files or invalid semantic steps."""


@dataclass(frozen=True)
class GuardAtom:
    clock: str
    op: str
    bound: int

    def holds(self, value) -> bool:
        if self.op == "<":
            return value < self.bound
        if self.op == "<=":
            return value <= self.bound
        if self.op == "==":
            return value == self.bound
        if self.op == ">=":
            return value >= self.bound
        return value > self.bound

    def __str__(self) -> str:
        return f"{self.clock}{self.op}{self.bound}"


@dataclass(frozen=True)
class TransitionDef:
    id: str
    source: str
    target: str
    label: str | None  # None is the silent label
    guard: tuple[GuardAtom, ...] = ()
    resets: frozenset[str] = frozenset()

    @property
    def silent(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class EntaModel:
    name: str
    clocks: tuple[str, ...]
    actions: tuple[str, ...]
    locations: tuple[str, ...]
    initial: str
    transitions: tuple[TransitionDef, ...]

    def transition(self, tid: str) -> TransitionDef:
        for tr in self.transitions:
            if tr.id == tid:
                return tr
        raise KeyError(tid)

    def outgoing(self, location: str) -> list[TransitionDef]:
        return [tr for tr in self.transitions if tr.source == location]


@dataclass(frozen=True)
class State:
    location: str
    valuation: tuple[tuple[str, Fraction], ...]
    now: Fraction = Fraction(0)

    def value(self, clock: str) -> Fraction:
        return dict(self.valuation)[clock]

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.valuation)


@dataclass(frozen=True)
class TimedTrace:
    events: tuple[tuple[Fraction, str | None], ...] = ()

    def __post_init__(self):
        times = [t for t, _ in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("trace times must be non-decreasing")


@dataclass
class Run:
    states: list[State] = field(default_factory=list)
    steps: list[tuple[Fraction, str]] = field(default_factory=list)


def validate(model: EntaModel) -> list[str]:
    """Return human-readable violations; an empty list means the model is well formed."""
    problems: list[str] = []
    clocks = set(model.clocks)
    locations = set(model.locations)
    if len(clocks) != len(model.clocks):
        problems.append("duplicate clock names")
    if GLOBAL_CLOCK in clocks:
        problems.append(f"clock name {GLOBAL_CLOCK!r} is reserved")
    if len(locations) != len(model.locations):
        problems.append("duplicate location names")
    if model.initial not in locations:
        problems.append(f"initial location {model.initial} is not declared")
    seen: set[str] = set()
    for tr in model.transitions:
        where = f"transition {tr.id}"
        if tr.id in seen:
            problems.append(f"{where}: duplicate id")
        seen.add(tr.id)
        if tr.source not in locations:
            problems.append(f"{where}: unknown source {tr.source}")
        if tr.target not in locations:
            problems.append(f"{where}: unknown target {tr.target}")
        if tr.label is not None and tr.label not in model.actions:
            problems.append(f"{where}: unknown action {tr.label}")
        for atom in tr.guard:
            if atom.clock not in clocks:
                problems.append(f"{where}: unknown clock {atom.clock}")
            if atom.op not in OPS:
                problems.append(f"{where}: bad operator {atom.op}")
            if not isinstance(atom.bound, int) or isinstance(atom.bound, bool) or atom.bound < 0:
                problems.append(f"{where}: bound must be a non-negative integer")
        for c in sorted(tr.resets):
            if c == GLOBAL_CLOCK:
                problems.append(f"{where}: reset of reserved clock {GLOBAL_CLOCK}")
            elif c not in clocks:
                problems.append(f"{where}: unknown reset clock {c}")
    if not model.actions and any(not tr.silent for tr in model.transitions):
        problems.append("observable transitions present but the alphabet is empty")
    return problems


def max_constant(model: EntaModel) -> int:
    return max((a.bound for tr in model.transitions for a in tr.guard), default=0)


def guard_sat(guard: Iterable[GuardAtom], valuation: Mapping[str, Fraction]) -> bool:
    return all(atom.holds(valuation[atom.clock]) for atom in guard)


def initial_state(model: EntaModel) -> State:
    return State(model.initial, tuple((c, Fraction(0)) for c in model.clocks), Fraction(0))


def delay(state: State, d) -> State:
    d = Fraction(d)
    if d < 0:
        raise ModelError("negative delay")
    return State(state.location, tuple((c, v + d) for c, v in state.valuation), state.now + d)


def jump(state: State, transition: TransitionDef) -> State:
    if transition.source != state.location:
        raise ModelError(f"ill-sourced: {transition.id} does not leave {state.location}")
    if not guard_sat(transition.guard, state.as_dict()):
        raise ModelError(f"disabled: guard of {transition.id} does not hold")
    val = tuple((c, Fraction(0) if c in transition.resets else v) for c, v in state.valuation)
    return State(transition.target, val, state.now)


def simulate(model: EntaModel, schedule: Sequence[tuple[object, str]]) -> tuple[Run, TimedTrace]:
    """Apply ``(delay, transition id)`` pairs from the initial state."""
    state = initial_state(model)
    run = Run(states=[state])
    events = []
    for i, (d, tid) in enumerate(schedule):
        state = delay(state, d)
        try:
            state = jump(state, model.transition(tid))
        except ModelError as exc:
            raise ModelError(f"step {i}: {exc}") from exc
        except KeyError:
            raise ModelError(f"step {i}: unknown transition {tid}") from None
        run.states.append(state)
        run.steps.append((Fraction(d), tid))
        events.append((state.now, model.transition(tid).label))
    return run, TimedTrace(tuple(events))


def observable(trace: TimedTrace) -> TimedTrace:
    return TimedTrace(tuple(e for e in trace.events if e[1] is not None))


def linearize_path(model: EntaModel, path: Sequence[str]) -> EntaModel:
    """Unroll a path of transition ids into a chain model ``p0 -> p1 -> ... -> pn``.

    Event ``i`` of the path becomes the only transition entering location ``p{i}``.
    """
    loc = model.initial
    transitions = []
    for i, tid in enumerate(path, start=1):
        tr = model.transition(tid)
        if tr.source != loc:
            raise ModelError(f"path does not chain at event {i}: {tid} leaves {tr.source}, not {loc}")
        transitions.append(replace(tr, id=f"e{i}", source=f"p{i - 1}", target=f"p{i}"))
        loc = tr.target
    return EntaModel(
        name=f"{model.name}-path",
        clocks=model.clocks,
        actions=model.actions,
        locations=tuple(f"p{i}" for i in range(len(path) + 1)),
        initial="p0",
        transitions=tuple(transitions),
    )


# --- JSON ---------------------------------------------------------------------

_MODEL_KEYS = {"name", "clocks", "actions", "locations", "initial", "transitions"}
_TRANSITION_KEYS = {"id", "from", "to", "action", "guard", "resets"}
_ATOM_KEYS = {"clock", "op", "bound"}


def _check_keys(obj, allowed: set[str], where: str, required: set[str] | None = None) -> None:
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ModelError(f"{where}: unknown keys {sorted(unknown)}")
    missing = (allowed if required is None else required) - set(obj)
    if missing:
        raise ModelError(f"{where}: missing keys {sorted(missing)}")


def model_from_dict(data) -> EntaModel:
    _check_keys(data, _MODEL_KEYS, "model")
    transitions = []
    for i, t in enumerate(data["transitions"]):
        where = f"transitions[{i}]"
        _check_keys(t, _TRANSITION_KEYS, where, required={"id", "from", "to"})
        guard = []
        for atom in t.get("guard", []):
            _check_keys(atom, _ATOM_KEYS, f"{where}.guard")
            bound = atom["bound"]
            if not isinstance(bound, int) or isinstance(bound, bool):
                raise ModelError(f"{where}: guard bound must be an integer (diagonal constraints are not supported)")
            if atom["op"] not in OPS:
                raise ModelError(f"{where}: bad operator {atom['op']!r}")
            guard.append(GuardAtom(str(atom["clock"]), atom["op"], bound))
        resets = t.get("resets", [])
        if GLOBAL_CLOCK in resets:
            raise ModelError(f"{where}: clock {GLOBAL_CLOCK!r} is reserved")
        transitions.append(
            TransitionDef(
                id=str(t["id"]),
                source=str(t["from"]),
                target=str(t["to"]),
                label=t.get("action"),
                guard=tuple(guard),
                resets=frozenset(resets),
            )
        )
    if GLOBAL_CLOCK in data["clocks"]:
        raise ModelError(f"clock name {GLOBAL_CLOCK!r} is reserved")
    return EntaModel(
        name=str(data["name"]),
        clocks=tuple(data["clocks"]),
        actions=tuple(data["actions"]),
        locations=tuple(data["locations"]),
        initial=str(data["initial"]),
        transitions=tuple(transitions),
    )


def model_to_dict(model: EntaModel) -> dict:
    return {
        "name": model.name,
        "clocks": list(model.clocks),
        "actions": list(model.actions),
        "locations": list(model.locations),
        "initial": model.initial,
        "transitions": [
            {
                "id": tr.id,
                "from": tr.source,
                "to": tr.target,
                "action": tr.label,
                "guard": [{"clock": a.clock, "op": a.op, "bound": a.bound} for a in tr.guard],
                "resets": [c for c in model.clocks if c in tr.resets],
            }
            for tr in model.transitions
        ],
    }


def loads(text: str) -> EntaModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    model = model_from_dict(data)
    problems = validate(model)
    if problems:
        raise ModelError("; ".join(problems))
    return model


def dumps(model: EntaModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def load(path) -> EntaModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def make(
    name: str,
    clocks: Sequence[str],
    actions: Sequence[str],
    locations: Sequence[str],
    initial: str,
    transitions: Sequence[tuple],
) -> EntaModel:
    """Terse constructor used by fixtures and generators.

    Each transition is ``(id, source, target, label, guard, resets)`` where guard
    is a sequence of ``(clock, op, bound)`` triples.
    """
    trs = tuple(
        TransitionDef(tid, src, dst, label, tuple(GuardAtom(*a) for a in guard), frozenset(resets))
        for tid, src, dst, label, guard, resets in transitions
    )
    return EntaModel(name, tuple(clocks), tuple(actions), tuple(locations), initial, trs)
