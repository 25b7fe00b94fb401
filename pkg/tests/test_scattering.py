import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltashell.numerics import Bracket, find_root
from deltashell.scattering import (Interaction, bound_state, bound_states, low_energy_params,
                                   phase_shift, phase_shift_derivative, phase_shift_table,
                                   resonance_positions)


def mp_tan_delta(g, l, x):
    """tan(delta_l) in 50-digit arithmetic."""
    with mp.workdps(50):
        g, x = mp.mpf(g), mp.mpf(x)
        j = mp.sqrt(mp.pi / (2 * x)) * mp.besselj(l + 0.5, x)
        n = mp.sqrt(mp.pi / (2 * x)) * mp.bessely(l + 0.5, x)
        return g * x * j * j / (1 + g * x * j * n)


def test_phase_shift_examples():
    assert abs(phase_shift(Interaction(2.0), 0, math.pi)) < 1e-12
    d = phase_shift(Interaction(2.0), 0, 1.0)
    assert d == pytest.approx(1.5069, abs=1e-4)
    assert math.tan(d) == pytest.approx(15.61, abs=0.01)
    # at unitarity cot(d0) = r0 x / 2 with r0 = 4/3, so d0 sits 2x/3 below pi/2
    x = 1e-3
    assert phase_shift(Interaction(1.0), 0, x) == pytest.approx(math.pi / 2 - 2 * x / 3, abs=1e-9)
    assert phase_shift(Interaction(1.0), 0, 1e-8) == pytest.approx(math.pi / 2, abs=1e-5)


@settings(max_examples=80, deadline=None)
@given(st.floats(-20, 20).filter(lambda g: abs(g) > 1e-3), st.integers(0, 6),
       st.floats(1e-3, 30))
def test_phase_shift_matches_high_precision(g, l, x):
    ref = float(mp.atan(mp_tan_delta(g, l, x)))
    d = phase_shift(Interaction(g), l, x)
    # branch-insensitive comparison
    assert abs(math.sin(d - ref)) < 1e-9 * max(1.0, abs(ref)) + 1e-300
    assert -math.pi / 2 < d <= math.pi / 2


def test_threshold_tiny_x_no_cancellation():
    # at g = 2l+1 the denominator is O(x^2) and the direct product loses every digit
    for l, x in [(0, 1e-4), (1, 1e-3), (2, 0.05), (1, 0.3)]:
        g = 2 * l + 1
        ref = float(mp.atan(mp_tan_delta(g, l, x)))
        assert phase_shift(Interaction(g), l, x) == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_derivative_examples():
    inter = Interaction(2.0)
    h = 1e-5
    fd = (phase_shift(inter, 0, 1 + h) - phase_shift(inter, 0, 1 - h)) / (2 * h)
    assert phase_shift_derivative(inter, 0, 1.0) == pytest.approx(fd, rel=1e-6)
    for l in range(4):
        assert abs(phase_shift_derivative(Interaction(1e-12), l, 1.0)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-10, 10).filter(lambda g: abs(g) > 0.05), st.integers(0, 4),
       st.floats(0.05, 15))
def test_derivative_matches_finite_difference(g, l, x):
    inter = Interaction(g)
    h = 1e-5 * x
    d1 = phase_shift(inter, l, x + h) - phase_shift(inter, l, x - h)
    d1 = math.atan(math.tan(d1))  # remove a possible pi jump
    fd = d1 / (2 * h)
    an = phase_shift_derivative(inter, l, x)
    assert an == pytest.approx(fd, rel=1e-4, abs=1e-6 * (1 + abs(an)))


def test_derivative_continuous_through_resonance():
    g = 5.0
    res = [r for r in resonance_positions(g, 0, 10.0) if r[0] == 0]
    assert res
    xr = res[0][1]
    x = np.linspace(xr - 0.05, xr + 0.05, 2001)
    d = phase_shift_derivative(Interaction(g), 0, x)
    assert np.all(np.isfinite(d))
    assert np.max(np.abs(np.diff(d))) < 1e-2 * np.max(np.abs(d))


def test_low_energy_examples():
    p = low_energy_params(Interaction(2.0), 0)
    assert p.a_over_R_pow == pytest.approx(2.0) and p.r0_over_R_pow == pytest.approx(1.0)
    assert low_energy_params(Interaction(6.0), 1).a_over_R_pow == pytest.approx(2 / 3)
    assert low_energy_params(Interaction(6.0), 1).shape_P is None
    assert math.isinf(low_energy_params(Interaction(3.0), 1).a_over_R_pow)


def test_shape_parameter_at_unitarity():
    p = low_energy_params(Interaction(1.0), 0)
    assert p.r0_over_R_pow == pytest.approx(4 / 3)
    # sign fixed by x cot(d0) = -R/a + r0 x^2/2 - P r0^3 x^4
    assert p.shape_P == pytest.approx(-3 / 80, rel=1e-14)


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0, -3.0, 8.0])
def test_shape_parameter_from_expansion(g):
    p = low_energy_params(Interaction(g), 0)
    vals = []
    with mp.workdps(50):
        gm = mp.mpf(g)
        inv_a, r0 = (gm - 1) / gm, 2 * (gm + 1) / (3 * gm)
        assert float(r0) == pytest.approx(p.r0_over_R_pow, rel=1e-14)
        for x in (mp.mpf("1e-3"), mp.mpf("5e-4")):
            rest = x / mp_tan_delta(g, 0, x) + inv_a - r0 * x * x / 2
            vals.append(float(-rest / (r0 ** 3 * x ** 4)))
    est = (4 * vals[1] - vals[0]) / 3
    assert est == pytest.approx(p.shape_P, rel=1e-4, abs=1e-8)


@pytest.mark.parametrize("g,l", [(0.5, 0), (2.0, 0), (-4.0, 0), (2.0, 1), (6.0, 1), (9.0, 2)])
def test_scattering_length_consistency(g, l):
    a = low_energy_params(Interaction(g), l).a_over_R_pow
    vals = []
    for x in (1e-3, 1e-4):
        vals.append(float(x ** (2 * l + 1) / mp_tan_delta(g, l, x)))
    est = vals[1] + (vals[1] - vals[0]) / 99.0
    assert est == pytest.approx(-1.0 / a, rel=1e-4)


@pytest.mark.parametrize("g", [0.5, 2.0, -4.0, 10.0])
def test_effective_range_consistency(g):
    p = low_energy_params(Interaction(g), 0)
    x = 1e-3
    d = phase_shift(Interaction(g), 0, x)
    est = (x / math.tan(d) + 1.0 / p.a_over_R_pow) / (x * x / 2)
    assert est == pytest.approx(p.r0_over_R_pow, rel=1e-3)


@pytest.mark.parametrize("g", [0.5, 1.5, 2.9, 3.1, 6.9, 7.1])
@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_bound_state_threshold(g, l):
    bs = bound_state(Interaction(g), l)
    assert (bs is not None) == (g > 2 * l + 1)
    if bs is not None:
        assert bs.y > 0 and bs.energy_reduced == -bs.y ** 2


def test_bound_state_examples():
    assert bound_state(Interaction(0.5), 0) is None
    assert bound_state(Interaction(2.0), 0).y == pytest.approx(0.7968, abs=1e-4)


@pytest.mark.parametrize("g", [1.1, 2.0, 5.0, 10.0])
def test_s_wave_closed_form(g):
    ref = find_root(lambda y: 2 * y - g * (1 - math.exp(-2 * y)), Bracket(1e-6, g))
    assert bound_state(Interaction(g), 0).y == pytest.approx(ref, rel=1e-10)


def test_shallow_bound_state():
    g = 1 + 1e-6
    y = bound_state(Interaction(g), 0).y
    a = low_energy_params(Interaction(g), 0).a_over_R_pow
    assert y * a == pytest.approx(1.0, rel=1e-5)


def test_bound_states_by_parity():
    inter = Interaction(6.0)
    assert [b.l for b in bound_states(inter)] == [0, 1, 2]
    assert [b.l for b in bound_states(inter, parity=0)] == [0, 2]
    assert [b.l for b in bound_states(inter, parity=1)] == [1]


@pytest.mark.parametrize("g", [-10.0, -1.0, 0.5, 1.0, 3.0, 10.0])
def test_high_energy_decay(g):
    d = phase_shift_table(g, 3, [50.0])[:, 0]
    assert np.all(np.abs(d) < 0.2)


def test_hard_sphere_proxy():
    hs = Interaction.hard_sphere()
    assert phase_shift(hs, 0, 0.3) == pytest.approx(-0.3, rel=1e-9)
    with pytest.raises(ValueError, match="hard"):
        Interaction.from_inverse_scattering_length(1.0)


def test_free_gas():
    assert np.all(phase_shift_table(0.0, 5, [0.1, 1.0, 10.0]) == 0.0)
    with pytest.raises(ValueError):
        phase_shift(Interaction(1.0), 0, 0.0)
    with pytest.raises(ValueError):
        Interaction(math.inf)
