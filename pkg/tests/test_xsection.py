import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from deltashell.scattering import Interaction, phase_shift_table
from deltashell.xsection import (Statistics, differential_sigma, partial_wave_sums, q1, q2)

BOSE, FERMI, HALF = Statistics.bose(), Statistics.fermi(), Statistics.spin_s("1/2")

couplings = st.floats(-30, 30).filter(lambda g: abs(g) > 1e-3)


def test_statistics_weights():
    assert HALF.weights == (0.25, 0.75)
    assert Statistics.spin_s(1).weights == pytest.approx((2 / 3, 1 / 3))
    assert Statistics.spin_s(0).weights == (1.0, 0.0)
    assert Statistics.parse("spin-0.5") == HALF
    assert HALF.is_fermionic and not Statistics.spin_s(1).is_fermionic
    with pytest.raises(ValueError):
        Statistics.spin_s("1/3")
    with pytest.raises(ValueError):
        Statistics.parse("anyon")


@settings(max_examples=40)
@given(st.integers(0, 20))
def test_spin_weights_sum_to_one(two_s):
    wb, wf = Statistics.spin_s(two_s / 2).weights
    assert wb + wf == pytest.approx(1.0, abs=1e-15)
    assert (wf > wb) == (two_s % 2 == 1)


def test_q1_examples():
    x = 1e-3
    assert q1(Interaction.hard_sphere(), BOSE, x).value == pytest.approx(2.0, abs=1e-3)
    assert q1(Interaction(1.0), BOSE, x).value == pytest.approx(2 / x**2, rel=5e-3)
    assert q1(Interaction(1.0), HALF, x).value == pytest.approx(0.5 / x**2, rel=5e-3)


def test_q2_examples():
    x = 1e-3
    assert abs(q2(Interaction(1e-12), HALF, 1.0).value) < 1e-10
    assert q2(Interaction(1.0), BOSE, x).value == pytest.approx(4 / 3 / x**2, rel=5e-3)
    assert q2(Interaction(1.0), HALF, x).value == pytest.approx(1 / 3 / x**2, rel=5e-3)


def test_result_metadata():
    r = q1(Interaction(2.0), HALF, np.array([0.5, 5.0, 40.0]))
    assert r.converged.all()
    assert np.all(r.l_max_used >= np.array([0.5, 5.0, 40.0]) + 10)


def test_cap_reports_nonconvergence():
    r = q1(Interaction(2.0), HALF, 60.0, lmax_cap=20)
    assert not r.converged and r.value > 0


@settings(max_examples=200, deadline=None)
@given(couplings, st.floats(1e-3, 40.0))
def test_termwise_unitarity_and_positivity(g, x):
    lmax = int(x) + 30
    d = phase_shift_table(g, lmax + 2, [x])[:, 0]
    ls = np.arange(lmax + 1)
    t1 = (2 / x**2) * (2 * ls + 1) * np.sin(d[: lmax + 1]) ** 2
    t2 = (2 / x**2) * (ls + 1) * (ls + 2) / (2 * ls + 3) * np.sin(d[2:] - d[:-2]) ** 2
    assert np.all(t1 <= (2 / x**2) * (2 * ls + 1) * (1 + 1e-12))
    assert np.all(t2 <= (2 / x**2) * (ls + 1) * (ls + 2) / (2 * ls + 3) * (1 + 1e-12))
    s = partial_wave_sums(Interaction(g), x)
    for v in (s.q1_bose, s.q1_fermi, s.q2_bose, s.q2_fermi):
        assert v[0] >= 0


@settings(max_examples=60, deadline=None)
@given(couplings, st.floats(1e-3, 30.0))
def test_mixing_is_affine(g, x):
    inter = Interaction(g)
    for f in (q1, q2):
        mixed = f(inter, HALF, x).value
        assert mixed == pytest.approx(0.75 * f(inter, FERMI, x).value
                                      + 0.25 * f(inter, BOSE, x).value, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("g", [3.0, 5.0, -1e12])
def test_continuity_on_dense_grid(g):
    x = np.linspace(0.2, 12.0, 4001)
    s = partial_wave_sums(Interaction(g), x)
    v = x**2 * s.q1(HALF)
    assert np.max(np.abs(np.diff(v))) < 0.05 * np.max(v)


def test_high_energy_decay():
    x = np.array([10.0, 30.0, 60.0, 100.0])
    s = partial_wave_sums(Interaction(5.0), x)
    # x^2 q grows at most like the geometric l_max^2 ~ x^2 limit
    assert np.all(s.q1(HALF) < 10.0) and np.all(s.q2(HALF) < 10.0)


def test_differential_sigma_examples():
    th = np.linspace(0, np.pi, 7)
    assert np.all(differential_sigma(Interaction(1e-12), 1.0, th) < 1e-20)
    with pytest.raises(ValueError):
        differential_sigma(Interaction(1.0), 1.0, 4.0)


def test_single_even_wave_is_symmetric():
    # x small enough that only the s wave scatters
    th = np.linspace(0, np.pi, 9)
    d = differential_sigma(Interaction(1.0), 1e-3, th, lmax=0)
    assert np.allclose(d, d[::-1], rtol=1e-14)


@pytest.mark.parametrize("g,x", [(2.5, 1.7), (-4.0, 3.0), (1.0, 0.4), (7.0, 5.5)])
def test_distinguishable_angular_integral(g, x):
    inter = Interaction(g)
    num = quad(lambda t: 2 * np.pi * np.sin(t) * (1 - np.cos(t))
               * differential_sigma(inter, x, t), 0, np.pi, epsrel=1e-11, limit=200)[0]
    d = phase_shift_table(g, 60, [x])[:, 0]
    ls = np.arange(60)
    # Legendre orthogonality gives (4 pi / x^2) sum (l+1) sin^2(d_{l+1} - d_l)
    ref = 4 * np.pi / x**2 * np.sum((ls + 1) * np.sin(d[1:] - d[:-1]) ** 2)
    assert num == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("g,x", [(2.5, 1.7), (-4.0, 3.0), (7.0, 5.5)])
@pytest.mark.parametrize("kind", ["bose", "fermi"])
def test_symmetrized_angular_integrals(g, x, kind):
    inter = Interaction(g)
    stats = BOSE if kind == "bose" else FERMI

    def moment(w):
        # identical particles: half the solid angle
        return 0.5 * quad(lambda t: 2 * np.pi * np.sin(t) * w(t)
                          * differential_sigma(inter, x, t, kind), 0, np.pi,
                          epsrel=1e-11, limit=200)[0]

    assert moment(lambda t: 1 - np.cos(t)) == pytest.approx(
        4 * math.pi * q1(inter, stats, x).value, rel=1e-6)
    assert moment(lambda t: np.sin(t) ** 2) == pytest.approx(
        4 * math.pi * q2(inter, stats, x).value, rel=1e-6)
