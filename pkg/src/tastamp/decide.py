"""1-bounded universality, 1-bounded inclusion, and timestamp-based refutation of inclusion."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .model import EntaModel
from .timestamp import EPS, Cell, Timestamp, compute_timestamp, difference_witness, is_full, union


@dataclass(frozen=True)
class Witness:
    action: str
    cell: Cell
    direction: str

    def to_dict(self) -> dict:
        return {"action": self.action, "cell": {"kind": self.cell.kind, "n": self.cell.n}, "direction": self.direction}


@dataclass
class Verdict:
    answer: bool
    witnesses: list[Witness]
    note: str = ""

    @property
    def witness(self) -> Witness | None:
        return self.witnesses[0] if self.witnesses else None

    def to_dict(self) -> dict:
        out = {"answer": self.answer, "witnesses": [w.to_dict() for w in self.witnesses]}
        if self.note:
            out["note"] = self.note
        return out


def first_observable(model: EntaModel) -> EntaModel:
    """Redirect every observable transition into a fresh sink so that only first events remain."""
    sink = "sink"
    while sink in model.locations:
        sink += "_"
    transitions = tuple(tr if tr.silent else replace(tr, target=sink) for tr in model.transitions)
    return replace(model, locations=model.locations + (sink,), transitions=transitions)


def first_timestamp(model: EntaModel, config=None) -> Timestamp:
    return compute_timestamp(first_observable(model), config)


def universal1(model: EntaModel, config=None, aggregate: bool = False) -> Verdict:
    """Is every single-event observable trace accepted?

    Per-action by default; ``aggregate`` only asks that some action be possible at every time.
    """
    ts = first_timestamp(model, config)
    if aggregate:
        total = EPS.empty()
        for a in ts.actions:
            total = union(total, ts[a])
        gap = difference_witness(EPS.full(), total)
        witnesses = [] if gap is None else [Witness("*", gap, "missing from full set")]
        return Verdict(not witnesses, witnesses)
    witnesses = []
    for a in ts.actions:
        if not is_full(ts[a]):
            witnesses.append(Witness(a, difference_witness(EPS.full(), ts[a]), "missing from full set"))
    return Verdict(not witnesses, witnesses)


def _compare(ta: Timestamp, tb: Timestamp) -> list[Witness]:
    found = []
    for a in ta.actions:
        cell = difference_witness(ta[a], tb[a])
        if cell is not None:
            found.append(Witness(a, cell, "in A, not in B"))
    return sorted(found, key=lambda w: (w.cell.pos, w.action))


def include1(a: EntaModel, b: EntaModel, config=None) -> Verdict:
    """Decide whether every first observable event of ``a`` is a first observable event of ``b``."""
    found = _compare(first_timestamp(a, config), first_timestamp(b, config))
    return Verdict(not found, found[:1])


def refute_inclusion(a: EntaModel, b: EntaModel, config=None) -> Verdict:
    """Look for a timestamp cell of ``a`` absent from ``b``; such a cell refutes language inclusion.

    ``answer`` is False when a witness was found. When none is found nothing is
    decided about language inclusion.
    """
    found = _compare(compute_timestamp(a, config), compute_timestamp(b, config))
    if found:
        return Verdict(False, found[:1], "language of A is not included in language of B")
    return Verdict(True, [], "inconclusive: timestamps are included; language inclusion is not decided")
