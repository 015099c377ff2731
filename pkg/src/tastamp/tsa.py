"""Deterministic one-clock automata realizing a given timestamp ("bouquet of flowers").

Every action gets its own flower hanging off the shared initial location: a
stalk of transitions, one per maximal interval, on a clock that is never reset,
optionally followed by a loop that replays the periodic pattern.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import EntaModel, GuardAtom, TransitionDef
from .timestamp import (
    EPS,
    Cell,
    Timestamp,
    _runs,
    canonicalize,
    canonicalize_timestamp,
    difference_witness,
    equals,
)

CLOCK = "x"
INITIAL = "q0"


@dataclass
class Flower:
    action: str
    stalk: list[str] = field(default_factory=list)
    loop: list[str] = field(default_factory=list)
    case: str = "NONE"  # NONE | INTEGRAL_ANCHOR | FRACTIONAL_ENTRY
    anchor: str | None = None

    def to_dict(self) -> dict:
        return {"case": self.case, "anchor": self.anchor, "stalk_len": len(self.stalk), "loop_len": len(self.loop)}


@dataclass
class TsaModel:
    model: EntaModel
    flowers: dict[str, Flower]

    def sidecar(self) -> dict:
        return {a: f.to_dict() for a, f in sorted(self.flowers.items())}


def run_guard(p: int, q: int) -> tuple[GuardAtom, ...]:
    """Guard on ``x`` for the run of cell positions ``p..q``."""
    if p == q and p % 2 == 0:
        return (GuardAtom(CLOCK, "==", p // 2),)
    atoms = []
    if p % 2:
        atoms.append(GuardAtom(CLOCK, ">", p // 2))
    elif p > 0:
        atoms.append(GuardAtom(CLOCK, ">=", p // 2))
    if q % 2:
        atoms.append(GuardAtom(CLOCK, "<", q // 2 + 1))
    else:
        atoms.append(GuardAtom(CLOCK, "<=", q // 2))
    return tuple(atoms)


class _FlowerBuilder:
    def __init__(self, action: str):
        self.action = action
        self.flower = Flower(action)
        self.locations: list[str] = []
        self.transitions: list[TransitionDef] = []
        self.current = INITIAL

    def _location(self) -> str:
        loc = f"{self.action}.{len(self.locations) + 1}"
        self.locations.append(loc)
        return loc

    def step(self, guard, reset: bool = False, target: str | None = None, part: str = "stalk") -> str:
        target = target or self._location()
        tid = f"{self.action}.{part[0]}{len(getattr(self.flower, part)) + 1}"
        resets = frozenset({CLOCK}) if reset else frozenset()
        self.transitions.append(TransitionDef(tid, self.current, target, self.action, tuple(guard), resets))
        getattr(self.flower, part).append(tid)
        self.current = target
        return target


def build_flower(action: str, s: EPS) -> _FlowerBuilder | None:
    s = canonicalize(s)
    if not s.prefix and not s.periodic:
        return None
    fb = _FlowerBuilder(action)
    if s.bounded:
        for p, q in _runs(s.prefix):
            fb.step(run_guard(p, q))
        return fb
    period = 2 * s.L
    points = [p for p in sorted(s.periodic) if p % 2 == 0]
    if points:
        anchor = points[0]
        fb.flower.case = "INTEGRAL_ANCHOR"
        fb.flower.anchor = str(anchor // 2)
        for p, q in _runs(s.positions_upto(anchor)):
            fb.step(run_guard(p, q))
        head = fb.step([GuardAtom(CLOCK, "==", anchor // 2)], reset=True)
        rel = [p - anchor for p in range(anchor + 1, anchor + period) if s.has_pos(p)]
        for p, q in _runs(rel):
            fb.step(run_guard(p, q), part="loop")
    else:
        entry = min(s.periodic)
        n0 = entry // 2
        fb.flower.case = "FRACTIONAL_ENTRY"
        fb.flower.anchor = f"({n0},{n0 + 1})"
        for p, q in _runs(s.positions_upto(entry)):
            fb.step(run_guard(p, q))
        head = fb.step([GuardAtom(CLOCK, ">", n0), GuardAtom(CLOCK, "<", n0 + 1)], reset=True)
        for p in range(entry + 1, entry + period):
            if s.has_pos(p):
                assert p % 2 == 1, "fractional-entry pattern must consist of open unit cells"
                fb.step([GuardAtom(CLOCK, "==", (p - entry) // 2)], part="loop")
    fb.step([GuardAtom(CLOCK, "==", s.L)], reset=True, target=head, part="loop")
    return fb


def build(ts: Timestamp) -> TsaModel:
    flowers: dict[str, Flower] = {}
    locations = [INITIAL]
    transitions: list[TransitionDef] = []
    for action in ts.actions:
        fb = build_flower(action, ts[action])
        if fb is None:
            continue
        flowers[action] = fb.flower
        locations += fb.locations
        transitions += fb.transitions
    model = EntaModel(
        name="tsa",
        clocks=(CLOCK,),
        actions=tuple(ts.actions),
        locations=tuple(locations),
        initial=INITIAL,
        transitions=tuple(transitions),
    )
    return TsaModel(model, flowers)


def check_deterministic(tsa: TsaModel | EntaModel) -> bool:
    model = tsa.model if isinstance(tsa, TsaModel) else tsa
    if model.clocks != (CLOCK,):
        return False
    if any(tr.silent for tr in model.transitions):
        return False
    outgoing: dict[str, list[TransitionDef]] = {}
    for tr in model.transitions:
        outgoing.setdefault(tr.source, []).append(tr)
    for loc, trs in outgoing.items():
        labels = [tr.label for tr in trs]
        if loc == model.initial:
            if len(set(labels)) != len(labels):
                return False
        elif len(trs) > 1:
            return False
    if isinstance(tsa, TsaModel):
        for action, flower in tsa.flowers.items():
            if not flower.stalk:
                return False
            if any(model.transition(tid).label != action for tid in flower.stalk + flower.loop):
                return False
    return True


@dataclass
class RoundtripReport:
    equal: bool
    deterministic: bool
    difference: tuple[str, Cell, str] | None = None


def roundtrip_verify(ts: Timestamp, config=None) -> RoundtripReport:
    from .timestamp import compute_timestamp

    ts = canonicalize_timestamp(ts)
    tsa = build(ts)
    got = compute_timestamp(tsa.model, config)
    for a in sorted(set(ts.actions) | set(got.actions)):
        want, have = ts[a], got[a]
        if not equals(want, have):
            missing = difference_witness(want, have)
            if missing is not None:
                return RoundtripReport(False, check_deterministic(tsa), (a, missing, "missing from TSA"))
            return RoundtripReport(False, check_deterministic(tsa), (a, difference_witness(have, want), "extra in TSA"))
    return RoundtripReport(True, check_deterministic(tsa))
