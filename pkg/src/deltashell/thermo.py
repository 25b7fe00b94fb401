"""Second virial coefficient, virial-corrected entropy, and eta/s minima.

Bound-state energies are in units of hbar^2/(2 mu R^2) so that
``E_l / k_B T = -y_l^2 / (2 pi tau)``; the Gaussian weight of the continuum
integral is ``exp(-xi x^2)`` with ``xi = 1 / (2 pi tau)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfcx

from .numerics import (Bracket, MinimizationError, QuadratureSpec, envelope_cutoff,
                       integrate_semi_infinite, minimize_scalar)
from .scattering import (Interaction, bound_states, phase_shift_derivative_table,
                         phase_shift_table, resonance_breakpoints, sharp_resonances)
from .transport import (OMEGA_22, first_order_from_omegas, omega_bundle,
                        second_order_from_omegas)
from .xsection import LMAX_CAP, Statistics

ETA_TILDE_HBAR = 5.0 * math.sqrt(2.0) / 32.0
KSS_BOUND = 1.0 / (4.0 * math.pi)
_EXP_LIMIT = 700.0
# below this |R/a_sl| the s-wave scattering-length spike is integrated analytically
_NEAR_UNITARY = 1e-2
# resonances narrower than this times x_r are integrated from the phase jump
_SHARP_WIDTH = 1e-5


class ThermoDomainError(ValueError):
    """Inputs outside the validity of the dilute-gas expressions."""


class VirialOverflowError(ThermoDomainError, ArithmeticError):
    def __init__(self, l: int, y: float, tau: float):
        super().__init__(f"bound-state Boltzmann factor overflows: l={l}, y={y:.6g}, "
                         f"tau={tau:.6g} (exponent {y * y / (2 * math.pi * tau):.1f})")
        self.l, self.y, self.tau = l, y, tau


class NoInteriorMinimumError(RuntimeError):
    """Raised with the scan-edge values; ``edge`` holds the best admissible point."""

    def __init__(self, message: str, boundary_values, edge=None):
        super().__init__(message)
        self.boundary_values = boundary_values
        self.edge = edge


@dataclass(frozen=True)
class GasState:
    tau: float
    dilution: float
    stats: Statistics

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.dilution < 0:
            raise ValueError("dilution nR^3 must be >= 0")

    @property
    def n_lambda3(self) -> float:
        return self.dilution * self.tau ** -1.5

    @property
    def degenerate(self) -> bool:
        return self.n_lambda3 >= 1.0


@dataclass(frozen=True)
class VirialResult:
    """a2 = statistics_part + bound_state_part + continuum_part, and T da2/dT."""

    a2: float
    T_da2_dT: float
    statistics_part: float
    bound_state_part: float
    continuum_part: float
    l_max: int = 0


def _zero_range_s_wave(inv_a: float, xi: float) -> tuple[float, float]:
    """(1/pi) int dx L(x) e^{-xi x^2} and its T d/dT for L = d/dx[-arctan(a x)].

    At inv_a = 0 the Lorentzian collapses onto x = 0 and contributes +1/2.
    """
    if inv_a == 0.0:
        return 0.5, 0.0
    b = math.sqrt(xi) * abs(inv_a)
    sign = math.copysign(1.0, inv_a)
    value = -0.5 * sign * erfcx(b)
    t_deriv = 0.5 * sign * (b * b * erfcx(b) - b / math.sqrt(math.pi))
    return value, t_deriv


def _sharp_windows(g: float, lmax: int, x_cut: float) -> list[tuple[int, float, float, float]]:
    """(l, x_r, width, half-window) for the very narrow resonances."""
    out = []
    for l, xr, w in sharp_resonances(g, x_cut, _SHARP_WIDTH):
        if l <= lmax:
            out.append((l, xr, w, min(max(1e2 * w, 1e-4 * xr), 0.5 * xr)))
    return out


def _window_jump(g: float, l: int, xr: float, half: float) -> float:
    # phase gained across the window, close to pi for an isolated resonance
    d = phase_shift_table(g, l, np.array([xr - half, xr + half]))[l]
    return float((d[1] - d[0]) % math.pi)


def _window_part(g: float, l: int, xr: float, width: float, half: float, xi: float):
    """(value, T d/dT) of (1/pi) int d(delta_l)/dx (2l+1) h(x) over the window.

    h is e^{-xi x^2} and xi x^2 e^{-xi x^2}; the phase jump carries the
    leading term and a Lorentzian second moment the curvature of h.
    """
    u = xi * xr * xr
    e = math.exp(-u)
    h = np.array([e, u * e])
    h2 = np.array([(4.0 * u - 2.0) * xi * e, (2.0 - 10.0 * u + 4.0 * u * u) * xi * e])
    m2 = 2.0 * width * (half - width * math.atan(half / width))
    jump = _window_jump(g, l, xr, half)
    return (2 * l + 1) * (h * jump + 0.5 * h2 * m2) / math.pi


def _parity_sums(inter: Interaction, tau: float, quad: QuadratureSpec, lmax_cap: int):
    """Bound and continuum sums (value, T d/dT) per parity: index 0 even, 1 odd."""
    xi = 1.0 / (2.0 * math.pi * tau)
    bound = np.zeros((2, 2))
    cont = np.zeros((2, 2))
    for bs in bound_states(inter):
        expo = bs.y * bs.y / (2.0 * math.pi * tau)
        if expo > _EXP_LIMIT:
            raise VirialOverflowError(bs.l, bs.y, tau)
        w = (2 * bs.l + 1) * math.exp(expo)
        bound[bs.l % 2] += (w, -expo * w)
    l_edge = (inter.g - 1.0) / 2.0
    if l_edge >= 1.0 and l_edge == int(l_edge):
        # exactly at threshold an l >= 1 state sits at zero energy and is
        # still normalizable, so it counts with weight e^0
        bound[int(l_edge) % 2] += (inter.g, 0.0)
    if inter.is_free:
        return bound, cont, 0
    x_cut = envelope_cutoff(xi, 0.0, quad.abs_floor)
    lmax = min(lmax_cap, int(math.ceil(x_cut)) + 20)
    weights = (2 * np.arange(lmax + 1) + 1.0)[:, None]
    inv_a = inter.inverse_scattering_length
    split = abs(inv_a) < _NEAR_UNITARY
    a_sl = 1.0 / inv_a if split and inv_a != 0.0 else math.inf
    windows = _sharp_windows(inter.g, lmax, x_cut)

    def integrand(x):
        d = phase_shift_derivative_table(inter.g, lmax, x)
        if split and math.isfinite(a_sl):
            d[0] += a_sl / (1.0 + (a_sl * x) ** 2)
        for l, xr, _, half in windows:
            d[l, np.abs(x - xr) < half] = 0.0
        d *= weights
        gauss = np.exp(-xi * x * x)
        return np.stack([d * gauss, d * (xi * x * x) * gauss])

    breaks = resonance_breakpoints(inter.g, x_cut)
    breaks += [xr + s * half for _, xr, _, half in windows for s in (-1.0, 1.0)]
    parts = integrate_semi_infinite(integrand, xi, quad, breakpoints=breaks)
    cont[0] = parts[:, 0::2].sum(axis=1) / math.pi
    cont[1] = parts[:, 1::2].sum(axis=1) / math.pi
    for l, xr, width, half in windows:
        cont[l % 2] += _window_part(inter.g, l, xr, width, half, xi)
    if split:
        cont[0] += _zero_range_s_wave(inv_a, xi)
    return bound, cont, lmax


@lru_cache(maxsize=8192)
def _virial_cached(inter: Interaction, stats: Statistics, tau: float,
                   quad: QuadratureSpec, lmax_cap: int) -> VirialResult:
    bound, cont, lmax = _parity_sums(inter, tau, quad, lmax_cap)
    wb, wf = stats.weights
    c = 2.0 ** 1.5
    # Bose: -2^{-5/2}, even l; Fermi: +2^{-5/2}, odd l
    stat_part = wb * -(2.0 ** -2.5) + wf * 2.0 ** -2.5
    bound_part = -c * (wb * bound[0, 0] + wf * bound[1, 0])
    cont_part = -c * (wb * cont[0, 0] + wf * cont[1, 0])
    t_deriv = -c * (wb * (bound[0, 1] + cont[0, 1]) + wf * (bound[1, 1] + cont[1, 1]))
    a2 = stat_part + bound_part + cont_part
    return VirialResult(a2, t_deriv, stat_part, bound_part, cont_part, lmax)


def second_virial(inter: Interaction, stats: Statistics, tau: float,
                  quad: QuadratureSpec = QuadratureSpec(),
                  lmax_cap: int = LMAX_CAP) -> VirialResult:
    """Second virial coefficient from bound states and phase-shift derivatives.

    Spin-s particles mix the complete Bose and Fermi evaluations with the same
    weights as the cross sections. ``T_da2_dT`` is differentiated analytically
    under the integral.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    return _virial_cached(inter, stats, float(tau), quad, lmax_cap)


def entropy_from_virial(a2: float, T_da2_dT: float, state: GasState) -> float:
    """s / (n k_B) = 5/2 - ln(n lambda^3) + (a2/2 - T da2/dT) n lambda^3."""
    if state.dilution <= 0:
        raise ThermoDomainError("entropy per particle diverges at zero density")
    n_lambda3 = state.n_lambda3
    return 2.5 - math.log(n_lambda3) + (0.5 * a2 - T_da2_dT) * n_lambda3


def entropy_density(inter: Interaction, state: GasState, virial: VirialResult | None = None,
                    quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP) -> float:
    """Entropy per particle s/(n k_B) including the second virial correction."""
    if virial is None:
        virial = second_virial(inter, state.stats, state.tau, quad, lmax_cap)
    return entropy_from_virial(virial.a2, virial.T_da2_dT, state)


def eta_over_s_from_parts(eta_norm: float, s_per_nkB: float, dilution: float) -> float:
    """eta/s in units of hbar/k_B from eta/eta~ and s/(n k_B)."""
    if s_per_nkB <= 0:
        raise ThermoDomainError(f"entropy per particle {s_per_nkB:.4g} <= 0")
    return ETA_TILDE_HBAR * eta_norm / (dilution * s_per_nkB)


def eta_over_s(inter: Interaction, state: GasState, order: int = 1,
               quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP) -> float:
    """[eta]_order / s in units of hbar / k_B."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    omegas, _ = omega_bundle(inter, state.stats, state.tau, quad, lmax_cap)
    _, eta = first_order_from_omegas(omegas, state.tau)
    if order == 2:
        eta *= second_order_from_omegas(omegas, state.stats, state.tau,
                                        state.dilution).eta2_over_eta1
    s = entropy_density(inter, state, None, quad, lmax_cap)
    return eta_over_s_from_parts(eta, s, state.dilution)


def _eta_s_curve(inter, stats, dilution, order, quad, lmax_cap):
    """ln(tau) -> (eta/s, s/(n k_B)); inadmissible states give (inf, nan)."""
    def f(log_tau):
        state = GasState(math.exp(log_tau), dilution, stats)
        try:
            s = entropy_density(inter, state, None, quad, lmax_cap)
            return eta_over_s(inter, state, order, quad, lmax_cap), s
        except ThermoDomainError:
            return math.inf, math.nan
    return f


@dataclass(frozen=True)
class EtaSMinimum:
    tau_min: float
    value: float
    order: int
    label: str = ""


def _admissible(s: np.ndarray) -> np.ndarray:
    # the truncated virial entropy turns over at large n lambda^3; below the
    # lowest temperature where s still increases with T the expansion is void
    ok = np.isfinite(s) & (s > 0)
    rising = np.ones(s.size, dtype=bool)
    bad = np.nonzero(~ok[:-1] | ~ok[1:] | (s[:-1] >= s[1:]))[0]
    if bad.size:
        rising[: bad.max() + 1] = False
    return ok & rising


def min_eta_over_s(inter: Interaction, stats: Statistics, dilution: float, order: int = 1,
                   tau_range: tuple[float, float] = (1e-2, 10.0), points: int = 40,
                   rel_width: float = 1e-4, quad: QuadratureSpec = QuadratureSpec(),
                   lmax_cap: int = LMAX_CAP, tau_floor: float = 1e-5) -> EtaSMinimum:
    """Minimum of eta/s over temperature at fixed nR^3 and coupling.

    A log-spaced scan brackets the minimum, then golden-section search in
    ln(tau) refines it to relative width ``rel_width``. Only admissible states
    count: s > 0 and s increasing with temperature (positive heat capacity of
    the virial-corrected gas). If the scan minimum sits on the low-temperature
    edge, the scan is extended downward a decade at a time, at most to
    ``tau_floor``, until that edge becomes inadmissible.
    """
    if dilution <= 0:
        raise ValueError("dilution must be positive")
    f = _eta_s_curve(inter, stats, dilution, order, quad, lmax_cap)
    lo, hi = math.log(tau_range[0]), math.log(tau_range[1])
    step = (hi - lo) / (points - 1)
    grid = list(np.linspace(lo, hi, points))
    pairs = [f(t) for t in grid]
    floor = math.log(tau_floor)
    per_decade = max(2, int(round(math.log(10.0) / step)))
    while True:
        values = np.array([p[0] for p in pairs])
        valid = _admissible(np.array([p[1] for p in pairs]))
        values = np.where(valid, values, math.inf)
        i = int(np.argmin(values))
        if i > 0 or not valid[0] or grid[0] <= floor + 1e-12:
            break
        extra = [t for t in (grid[0] - step * k for k in range(per_decade, 0, -1))
                 if t >= floor - 1e-12] or [floor]
        grid = extra + grid
        pairs = [f(t) for t in extra] + pairs
    grid = np.array(grid)
    if not np.isfinite(values).any():
        raise NoInteriorMinimumError("no admissible state in the scan",
                                     (values[0], values[-1]))
    first_valid = int(np.argmax(valid))
    if i == first_valid or i == grid.size - 1:
        edge = EtaSMinimum(math.exp(grid[i]), float(values[i]), order, inter.label)
        raise NoInteriorMinimumError(
            f"eta/s minimum at the edge of the admissible scan, tau={edge.tau_min:.4g}",
            (values[first_valid], values[-1]), edge)

    def g(log_tau):
        if log_tau < grid[first_valid]:
            return math.inf
        return f(log_tau)[0]

    try:
        log_tau, value = minimize_scalar(g, Bracket(grid[i - 1], grid[i + 1]), tol=rel_width)
    except MinimizationError:
        log_tau, value = grid[i], values[i]
    if not value <= values[i]:
        log_tau, value = grid[i], values[i]
    return EtaSMinimum(math.exp(log_tau), float(value), order, inter.label)
