"""Brute-force reference implementations used only by the tests."""
from fractions import Fraction
from math import floor

from hypothesis import strategies as st

from tastamp.region import RegionCore
from tastamp.timestamp import EPS


def classify(location, now, values, M):
    """Region core of a concrete state, computed straight from the definition.

    A clock is capped from ``M + 1`` on; values in ``(M, M + 1)`` keep integer part ``M``.
    """
    ints = tuple(floor(v) if v < M + 1 else None for v in values)
    tracked = [(0, now)] + [(i + 1, v) for i, v in enumerate(values) if ints[i] is not None]
    fracs = sorted({v - floor(v) for _, v in tracked})
    groups = tuple(tuple(sorted(c for c, v in tracked if v - floor(v) == f)) for f in fracs)
    return RegionCore(location, ints, groups, fracs[0] == 0)


def samples(K=4, top=4):
    return [Fraction(n, K) for n in range(top * K + 1)]


@st.composite
def eps_values(draw):
    t_per = draw(st.integers(0, 5))
    L = draw(st.integers(1, 4))
    prefix = draw(st.frozensets(st.integers(0, max(2 * t_per - 1, 0)))) if t_per else frozenset()
    periodic = draw(st.frozensets(st.integers(2 * t_per, 2 * (t_per + L) - 1)))
    return EPS(t_per, L, prefix, periodic)
