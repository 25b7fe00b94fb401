"""Phase shifts, low-energy parameters and bound states of the delta-shell potential.

All lengths are in units of the shell radius R, so the only input is the
coupling ``g = 2 mu v R / hbar^2`` and the dimensionless wave number ``x = kR``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .numerics import (L_CAP, Bracket, find_root, mod_sph_in_table, mod_sph_kn_table,
                       sph_jn_table)

HARD_SPHERE_G = -1e12
# resonances narrower than this (relative to x_r) are treated as decoupled
DECOUPLED_WIDTH = 1e-14


@dataclass(frozen=True)
class Interaction:
    """Delta-shell coupling. Negative ``g`` is repulsive; ``g -> -inf`` is a hard sphere."""

    g: float
    label: str = ""

    def __post_init__(self):
        if not math.isfinite(self.g):
            raise ValueError(f"coupling must be finite, got {self.g}")

    @property
    def is_free(self) -> bool:
        return self.g == 0.0

    @property
    def inverse_scattering_length(self) -> float:
        """R / a_sl = (g - 1) / g."""
        return (self.g - 1.0) / self.g if self.g != 0 else -math.inf

    @classmethod
    def hard_sphere(cls) -> "Interaction":
        return cls(HARD_SPHERE_G, label="HS")

    @classmethod
    def from_inverse_scattering_length(cls, inv_a: float) -> "Interaction":
        """Coupling with R/a_sl = ``inv_a``, i.e. ``g = 1 / (1 - inv_a)``."""
        if inv_a == 1.0:
            raise ValueError("R/a_sl = 1 is the hard-sphere limit g -> -inf; "
                             "use Interaction.hard_sphere() instead")
        return cls(1.0 / (1.0 - inv_a))


@dataclass(frozen=True)
class LowEnergyParams:
    l: int
    a_over_R_pow: float
    r0_over_R_pow: float
    shape_P: Optional[float] = None


@dataclass(frozen=True)
class BoundState:
    l: int
    y: float

    @property
    def energy_reduced(self) -> float:
        """E_l in units of hbar^2 / (2 mu R^2)."""
        return -self.y * self.y


_SERIES_X = 0.5
_SERIES_TERMS = 14


def _small_x_jn(ls: np.ndarray, x: np.ndarray):
    """P = -(2l+1) x j_l n_l - 1 and dP/dx from the power series of j_l and n_l.

    At threshold (g = 2l+1) the denominator is -g P / (2l+1) = O(x^2), which the
    direct product loses to cancellation for small x.
    """
    ls = np.asarray(ls)[:, None]
    u = (x * x)[None, :]
    a = np.ones((ls.shape[0], 1))
    b = np.ones((ls.shape[0], 1))
    am = np.zeros((ls.shape[0], x.size))
    bm = np.zeros_like(am)
    da = np.zeros_like(am)
    db = np.zeros_like(am)
    power = np.ones_like(u)
    for k in range(1, _SERIES_TERMS + 1):
        a = a * -0.5 / (k * (2 * ls + 2 * k + 1))
        b = b * -0.5 / (k * (2 * k - 1 - 2 * ls))
        power = power * u
        am += a * power
        bm += b * power
        da += 2 * k * a * power
        db += 2 * k * b * power
    da /= x
    db /= x
    p = am + bm + am * bm
    dp = da * (1.0 + bm) + (1.0 + am) * db
    return p, dp


def _near_threshold(g: float, lmax: int) -> np.ndarray:
    # waves whose denominator 1 - g/(2l+1) + O(x^2) loses digits at small x
    ls = np.arange(lmax + 1)
    c = g / (2 * ls + 1.0)
    return ls[np.abs(1.0 - c) < 0.5 * np.abs(c)]


def _phase_parts(g: float, lmax: int, x: np.ndarray):
    j, n = sph_jn_table(lmax + 1, x)
    gx = g * x
    num = gx * j[: lmax + 1] ** 2
    with np.errstate(invalid="ignore"):
        den = 1.0 + gx * j[: lmax + 1] * n[: lmax + 1]
    ls, small = _near_threshold(g, lmax), x < _SERIES_X
    if ls.size and small.any():
        p, _ = _small_x_jn(ls, x[small])
        c = g / (2 * ls + 1.0)[:, None]
        den[np.ix_(ls, small)] = (1.0 - c) - c * p
    return j, n, num, den


def _principal_atan2(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # flip both signs when den < 0 so atan2 lands directly in [-pi/2, pi/2];
    # shifting by pi afterwards would cancel catastrophically for tiny phases
    s = np.where(den < 0, -1.0, 1.0)
    delta = np.arctan2(num * s, den * s)
    return np.where(delta <= -0.5 * np.pi, 0.5 * np.pi, delta)


def phase_shift_table(g: float, lmax: int, x) -> np.ndarray:
    """Phase shifts for l = 0..lmax at every ``x``; shape ``(lmax + 1, len(x))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if g == 0.0:
        return np.zeros((lmax + 1, x.size))
    _, _, num, den = _phase_parts(g, lmax, x)
    delta = _principal_atan2(num, den)
    # n_l overflowed: j_l underflowed with it and the wave does not scatter
    delta[~np.isfinite(den)] = 0.0
    return delta


def _derivative_parts(g: float, lmax: int, x: np.ndarray):
    j, n, num, den = _phase_parts(g, lmax, x)
    ls = np.arange(lmax + 1)[:, None]
    inv_x = 1.0 / x
    with np.errstate(invalid="ignore", over="ignore"):
        jl, nl = j[: lmax + 1], n[: lmax + 1]
        dj = ls * inv_x * jl - j[1:]
        dn = ls * inv_x * nl - n[1:]
        dnum = g * (jl * jl + 2.0 * x * jl * dj)
        dden = g * (jl * nl + x * dj * nl + x * jl * dn)
    near, small = _near_threshold(g, lmax), x < _SERIES_X
    if near.size and small.any():
        _, dp = _small_x_jn(near, x[small])
        dden[np.ix_(near, small)] = -g / (2 * near + 1.0)[:, None] * dp
    return num, den, dnum, dden


def phase_shift_derivative_table(g: float, lmax: int, x) -> np.ndarray:
    """d(delta_l)/dx for l = 0..lmax, computed branch-free from tan = N/D."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if g == 0.0:
        return np.zeros((lmax + 1, x.size))
    num, den, dnum, dden = _derivative_parts(g, lmax, x)
    with np.errstate(invalid="ignore", over="ignore"):
        out = (dnum * den - num * dden) / (num * num + den * den)
    out[~np.isfinite(out)] = 0.0
    return out


def phase_shift(inter: Interaction, l: int, x):
    """delta_l(x) on the principal branch (-pi/2, pi/2]."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("x = kR must be positive")
    out = phase_shift_table(inter.g, l, x)[l]
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def phase_shift_derivative(inter: Interaction, l: int, x):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("x = kR must be positive")
    out = phase_shift_derivative_table(inter.g, l, x)[l]
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def double_factorial_odd(l: int) -> float:
    """(2l+1)!!"""
    return float(math.prod(range(1, 2 * l + 2, 2)))


def low_energy_params(inter: Interaction, l: int) -> LowEnergyParams:
    """Generalized scattering length and effective range in powers of R.

    ``a_over_R_pow`` is a^(l)/R^(2l+1) and ``r0_over_R_pow`` is r0^(l)/R^(1-2l).
    At ``g = 2l + 1`` the scattering length is a signed infinity.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    g = inter.g
    dfac = double_factorial_odd(l)
    pole = g - (2 * l + 1)
    if g == 0.0:
        a = 0.0
    elif pole == 0.0:
        a = math.inf
    else:
        a = (2 * l + 1) / dfac**2 * g / pole
    r_pref = 2.0 * dfac**2 / ((2 * l + 3) * (2 * l - 1))
    if g == 0.0:
        r0 = math.inf
    else:
        r0 = r_pref * ((2 * l - 1) / g - 1.0)
    shape = None
    if l == 0:
        shape = -3.0 / 40.0 * g * g * (3.0 + g) / (1.0 + g) ** 3 if g != -1.0 else math.inf
    return LowEnergyParams(l, a, r0, shape)


def _bound_condition(l: int, g: float):
    # (2/pi) y i_l(y) k_l(y) - 1/g; decreasing from 1/(2l+1) to 0
    def f(y):
        i = mod_sph_in_table(l, y, scaled=True)[l, 0]
        k = mod_sph_kn_table(l, y, scaled=True)[l, 0]
        return 2.0 / math.pi * y * i * k - 1.0 / g
    return f


def bound_state(inter: Interaction, l: int, tol: float = 1e-12) -> Optional[BoundState]:
    """The bound state with angular momentum ``l``, or None when g <= 2l+1.

    Solves i_l(y) k_l(y) = pi / (2 g y) for y = kappa R, the matching condition
    for a wavefunction regular at the origin, decaying outside, continuous at
    the shell with the derivative jump set by g.
    """
    g = inter.g
    if not g > 2 * l + 1:
        return None
    f = _bound_condition(l, g)
    hi = max(1.0, g)
    lo = min(1e-3, 0.5 * hi)
    while f(lo) <= 0.0:
        lo *= 1e-3
        if lo < 1e-250:
            raise ArithmeticError(f"bound state not bracketed for g={g}, l={l}")
    y = find_root(f, Bracket(lo, hi), tol=tol * lo)
    return BoundState(l, y)


@lru_cache(maxsize=4096)
def _bound_states_cached(g: float) -> tuple:
    if g <= 1.0:
        return ()
    lmax = int(math.ceil((g - 1.0) / 2.0))
    found = (bound_state(Interaction(g), l) for l in range(lmax + 1))
    return tuple(bs for bs in found if bs is not None)


def bound_states(inter: Interaction, parity: Optional[int] = None) -> list[BoundState]:
    """All bound states; ``parity`` 0 keeps even l, 1 keeps odd l."""
    return [bs for bs in _bound_states_cached(float(inter.g))
            if parity is None or bs.l % 2 == parity]


def resonance_positions(g: float, lmax: int, x_max: float,
                        samples: int = 600) -> list[tuple[int, float, float]]:
    """Zeros of the phase-shift denominator ``1 + g x j_l n_l`` for x < x_max.

    Returns ``(l, x_r, width)`` with ``width = |N / D'|`` at the zero, the
    half-width of the Lorentzian spike in d(delta_l)/dx. Used to seed
    quadrature meshes so narrow resonances are never stepped over.

    Cavity modes trapped inside a strongly repulsive shell show up here with
    widths far below double resolution; callers drop them (``DECOUPLED_WIDTH``).
    """
    if g == 0.0:
        return []
    grid = np.unique(np.concatenate([
        np.geomspace(1e-7 * x_max, x_max, samples // 2),
        np.linspace(x_max / samples, x_max, samples // 2),
    ]))
    _, _, _, den = _phase_parts(g, lmax, grid)
    found = []
    for l in range(lmax + 1):
        d = den[l]
        ok = np.isfinite(d)
        idx = np.nonzero(ok[:-1] & ok[1:] & (np.sign(d[:-1]) * np.sign(d[1:]) < 0))[0]
        for i in idx:
            def f(x, l=l):
                return _phase_parts(g, l, np.array([x]))[3][l, 0]
            try:
                xr = find_root(f, Bracket(grid[i], grid[i + 1]), tol=1e-15 * grid[i + 1])
            except ArithmeticError:
                continue
            num, _, _, dden = _derivative_parts(g, l, np.array([xr]))
            width = abs(num[l, 0] / dden[l, 0])
            if np.isfinite(width):
                found.append((l, float(xr), float(width)))
    return found


@lru_cache(maxsize=4096)
def _all_resonances(g: float, x_quant: float) -> tuple:
    lmax = min(L_CAP - 1, int(math.ceil(x_quant)) + 20)
    return tuple(resonance_positions(g, lmax, x_quant))


def _coupled(g: float, r) -> bool:
    # attractive-shell resonances below resolution are quasi-bound states and
    # still count; repulsive ones are cavity modes sealed off from outside
    return g > 0 or r[2] > DECOUPLED_WIDTH * max(r[1], 1.0)


def _narrow_resonances(g: float, x_quant: float) -> tuple:
    return tuple(r for r in _all_resonances(g, x_quant)
                 if _coupled(g, r) and r[2] < 0.1)


def sharp_resonances(g: float, x_max: float, rel_width: float) -> list[tuple[int, float, float]]:
    """Coupled resonances below ``x_max`` with width < ``rel_width * x_r``.

    These are too narrow for d(delta)/dx to be sampled without roundoff noise
    (the denominator is a difference of O(1) terms), so integrals over them
    are better done from the phase jump.
    """
    x_quant = 2.0 ** math.ceil(math.log2(max(x_max, 1.0)))
    return [r for r in _narrow_resonances(float(g), x_quant)
            if r[1] < x_max and r[2] < rel_width * r[1]]


def resonance_breakpoints(g: float, x_max: float) -> list[float]:
    """Quadrature breakpoints clustered around narrow resonances and 1/|a_sl|."""
    pts = []
    steps = np.array([0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0, 1000.0])
    x_quant = 2.0 ** math.ceil(math.log2(max(x_max, 1.0)))
    for _, xr, w in _narrow_resonances(float(g), x_quant):
        pts.extend(xr + w * steps)
        pts.extend(xr - w * steps[1:])
    if g != 1.0 and g != 0.0:
        inv_a = abs((g - 1.0) / g)
        if inv_a > 0:
            pts.extend(inv_a * np.array([0.01, 0.1, 0.3, 1.0, 3.0, 10.0]))
    return sorted(p for p in pts if 0.0 < p < x_max)
