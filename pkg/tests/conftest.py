from __future__ import annotations

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from pathtriple.cfcore import KSequence
from pathtriple.paths import Path

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GOLDEN = KSequence.from_list([1])
MIXED = KSequence.from_list([2, 1, 0, 3, 1])
TWOS = KSequence.from_list([2])


@pytest.fixture
def golden() -> KSequence:
    return GOLDEN


@pytest.fixture
def mixed() -> KSequence:
    return MIXED


@st.composite
def paths(draw, k: KSequence, m: int = 1, max_blocks: int = 3, max_deg: int = 2) -> Path:
    """Valid paths from v_m: alpha/beta blocks separated by gamma edges."""
    closed = []
    pos = m
    for _ in range(draw(st.integers(0, max_blocks))):
        p, q = draw(st.integers(0, max_deg)), draw(st.integers(0, max_deg))
        if k.at(pos + p + q) == 0:
            break
        b = draw(st.integers(1, k.at(pos + p + q)))
        closed.append((p, q, b))
        pos += p + q + 1
    tail = (draw(st.integers(0, max_deg)), draw(st.integers(0, max_deg)))
    return Path(m, tuple(closed), tail)


ks = st.sampled_from([GOLDEN, MIXED, TWOS])
