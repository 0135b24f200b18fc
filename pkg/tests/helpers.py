"""Shared random-instance builders and hypothesis strategies."""

import hypothesis.strategies as st
import numpy as np

from tripfit import CompositeProtection, ProtectionScheme, TripZone


def random_zone(rng: np.random.Generator, max_steps: int = 4) -> TripZone:
    """Random staircase with 1..max_steps steps inside the fault box."""
    k = int(rng.integers(1, max_steps + 1))
    taus = np.sort(rng.uniform(0.0, 5.0, k))
    vs = np.sort(rng.uniform(5.0, 95.0, k))
    steps = []
    prev_t = -1.0
    for t, v in zip(taus, vs):
        if t > prev_t:  # guard against duplicate draws
            steps.append((float(t), float(v)))
            prev_t = float(t)
    return TripZone(tuple(steps))


def random_composite(rng: np.random.Generator, max_schemes: int = 4) -> CompositeProtection:
    n = int(rng.integers(1, max_schemes + 1))
    fractions = rng.dirichlet(np.ones(n))
    fractions = fractions / fractions.sum()
    entries = tuple(
        (ProtectionScheme(f"S{i}", random_zone(rng)), float(pi))
        for i, pi in enumerate(fractions)
    )
    return CompositeProtection(entries)


@st.composite
def trip_zones(draw, max_steps: int = 4) -> TripZone:
    k = draw(st.integers(0, max_steps))
    taus = draw(
        st.lists(
            st.floats(0.0, 5.0, allow_nan=False, allow_infinity=False),
            min_size=k, max_size=k, unique=True,
        )
    )
    vs = draw(
        st.lists(
            st.floats(0.0, 100.0, allow_nan=False, allow_infinity=False),
            min_size=k, max_size=k,
        )
    )
    return TripZone(tuple(zip(sorted(taus), sorted(vs))))


@st.composite
def fault_points(draw):
    tau = draw(st.floats(0.0, 5.0, allow_nan=False))
    v = draw(st.floats(0.0, 100.0, allow_nan=False))
    return tau, v
