import math

from hypothesis import given
from hypothesis import strategies as st

from grazecont import ImpactPoint, SectionPoint, State, wrap_centered, wrap_phase
from grazecont.points import TWO_PI


def test_wrap_phase_basic():
    assert wrap_phase(0.0) == 0.0
    assert wrap_phase(TWO_PI) == 0.0
    assert wrap_phase(-0.5) == TWO_PI - 0.5
    assert wrap_phase(-1e-18) == 0.0


@given(st.floats(-1e4, 1e4))
def test_wrap_phase_range(z):
    w = wrap_phase(z)
    assert 0.0 <= w < TWO_PI
    assert abs(wrap_centered(w - z)) < 1e-9


@given(st.floats(-1e4, 1e4))
def test_wrap_centered_range(dz):
    w = wrap_centered(dz)
    assert -math.pi < w <= math.pi
    assert abs(math.remainder(w - dz, TWO_PI)) < 1e-9


def test_wrap_centered_edges():
    assert wrap_centered(math.pi) == math.pi
    assert wrap_centered(-math.pi) == math.pi
    assert abs(wrap_centered(TWO_PI - 1e-3) + 1e-3) < 1e-15


def test_point_times():
    assert ImpactPoint(0.1, 1.62).time(0.81) == 1.62 / 0.81
    assert ImpactPoint(0.1, 1.62, t=100.0).time(0.81) == 100.0
    assert SectionPoint(-0.2, 0.5).time(0.5) == 1.0
    assert State(0.0, 0.0, TWO_PI + 1.0).phase(1.0) == 1.0
