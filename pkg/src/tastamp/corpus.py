"""Named example automata and a seeded generator of small random models."""
from __future__ import annotations

import random

from .model import EntaModel, make


def path_example() -> EntaModel:
    """One-clock automaton whose path 0-1-2-3-2 has events at x=1, 1<=x<=3, 1<x<2 and x=3."""
    return make(
        "path-example",
        ["x"],
        ["a", "b"],
        ["0", "1", "2", "3"],
        "0",
        [
            ("t1", "0", "1", "a", [("x", "==", 1)], ["x"]),
            ("t2", "1", "2", "b", [("x", ">=", 1), ("x", "<=", 3)], ["x"]),
            ("t3", "2", "3", "a", [("x", ">", 1), ("x", "<", 2)], []),
            ("t4", "3", "2", "a", [("x", "==", 3)], []),
        ],
    )


PATH = ["t1", "t2", "t3", "t4"]


def x2_loop() -> EntaModel:
    return make("x2-loop", ["x"], ["a"], ["q"], "q", [("a", "q", "q", "a", [("x", "==", 2)], ["x"])])


def unit_intervals() -> EntaModel:
    """Silent reset every time unit plus an observable event strictly inside each unit interval."""
    return make(
        "unit-intervals",
        ["x"],
        ["a"],
        ["q0", "q1"],
        "q0",
        [
            ("eps", "q0", "q0", None, [("x", "==", 1)], ["x"]),
            ("a", "q0", "q1", "a", [("x", ">", 0), ("x", "<", 1)], []),
        ],
    )


def single(guard=(), label="a", name="single") -> EntaModel:
    return make(name, ["x"], [label], ["q0", "q1"], "q0", [("a", "q0", "q1", label, list(guard), [])])


def random_model(rng: random.Random, name: str) -> EntaModel:
    """Random model with at most 4 locations, 2 clocks, constant 3 and 6 transitions."""
    n_loc = rng.randint(1, 4)
    n_clk = rng.randint(0, 2)
    clocks = ["x", "y"][:n_clk]
    locations = [f"q{i}" for i in range(n_loc)]
    actions = ["a", "b"]
    n_tr = rng.randint(1, 6)
    transitions = []
    for i in range(n_tr):
        src = "q0" if i == 0 else rng.choice(locations)
        dst = rng.choice(locations)
        label = None if rng.random() < 0.3 else rng.choice(actions)
        guard = []
        for c in clocks:
            r = rng.random()
            if r < 0.35:
                continue
            if r < 0.55:
                guard.append((c, "==", rng.randint(0, 3)))
            elif r < 0.8:
                lo = rng.randint(0, 2)
                guard.append((c, rng.choice([">", ">="]), lo))
                if rng.random() < 0.6:
                    guard.append((c, rng.choice(["<", "<="]), rng.randint(lo + 1, 3)))
            else:
                guard.append((c, rng.choice(["<", "<="]), rng.randint(1, 3)))
        resets = [c for c in clocks if rng.random() < 0.45]
        transitions.append((f"t{i}", src, dst, label, guard, resets))
    return make(name, clocks, actions, locations, "q0", transitions)


def random_corpus(n: int = 25, seed: int = 20240601) -> list[EntaModel]:
    rng = random.Random(seed)
    return [random_model(rng, f"rand{i:02d}") for i in range(n)]
