"""Omega integrals and normalized Chapman-Enskog transport coefficients.

Temperatures enter as ``tau = T / T_tilde`` with ``T_tilde = 2 pi hbar^2 / (k_B m R^2)``,
so that ``R / lambda = sqrt(tau)``. Coefficients are normalized to the
hard-sphere-like reference values D~, eta~, kappa~.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np

from .numerics import QuadratureSpec, envelope_cutoff, integrate_semi_infinite
from .scattering import Interaction, resonance_breakpoints
from .xsection import LMAX_CAP, Statistics, partial_wave_sums

SNAP_TOL = 1e-9

# q^(n)(x) provider, used to substitute model cross sections
CrossSection = Callable[[int, np.ndarray], np.ndarray]


class DegenerateGasWarning(UserWarning):
    pass


@dataclass(frozen=True)
class OmegaSpec:
    alpha: float
    n: int
    t: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if self.t < 1:
            raise ValueError("t must be >= 1")


OMEGA_11 = OmegaSpec(1.0, 1, 1)
OMEGA_22 = OmegaSpec(1.0, 2, 2)
OMEGA_23 = OmegaSpec(1.0, 2, 3)
OMEGA_24 = OmegaSpec(1.0, 2, 4)
OMEGA_22_43 = OmegaSpec(4.0 / 3.0, 2, 2)
ALL_OMEGAS = (OMEGA_11, OMEGA_22, OMEGA_23, OMEGA_24, OMEGA_22_43)


@dataclass(frozen=True)
class TransportResult:
    D_norm: float
    eta_norm: float
    kappa_norm: float
    order: int = 1
    dilution: Optional[float] = None
    metadata: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class SecondOrderEta:
    delta_eta: float
    epsilon_eta: float
    eta2_over_eta1: float
    n_lambda3: float
    degenerate: bool


def _check_tau(tau: float):
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError(f"reduced temperature must be positive, got {tau}")


def x_of_gamma(gamma, tau: float):
    """kR at reduced momentum ``gamma`` and reduced temperature ``tau``."""
    return gamma * math.sqrt(2.0 * math.pi * tau)


def omega_set(inter: Interaction, stats: Statistics, specs: Iterable[OmegaSpec], tau: float,
              quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP,
              cross_section: CrossSection | None = None) -> tuple[np.ndarray, dict]:
    """Several omega integrals on one shared adaptive mesh.

    Returns the values in the order of ``specs`` and a diagnostics dict with
    the largest partial wave used and the number of non-converged nodes.
    """
    _check_tau(tau)
    specs = tuple(specs)
    scale = math.sqrt(2.0 * math.pi * tau)
    alphas = np.array([s.alpha for s in specs])[:, None]
    powers = np.array([2 * s.t + 3 for s in specs])[:, None]
    use_q2 = np.array([s.n == 2 for s in specs])[:, None]
    diag = {"l_max": 0, "nonconverged_nodes": 0}

    def integrand(gam):
        x = gam * scale
        if cross_section is not None:
            qa, qb = cross_section(1, x), cross_section(2, x)
        else:
            sums = partial_wave_sums(inter, x, lmax_cap=lmax_cap)
            qa, qb = sums.q1(stats), sums.q2(stats)
            diag["l_max"] = max(diag["l_max"], int(sums.l_max_used.max()))
            diag["nonconverged_nodes"] += int((~sums.converged).sum())
        q = np.where(use_q2, qb[None, :], qa[None, :])
        return np.exp(-alphas * gam * gam) * gam ** powers * q

    decay, power = float(alphas.min()), float(powers.max())
    breaks = None
    if cross_section is None and not inter.is_free:
        gamma_cut = envelope_cutoff(decay, power, quad.abs_floor)
        breaks = [p / scale for p in resonance_breakpoints(inter.g, gamma_cut * scale)]
    values = integrate_semi_infinite(integrand, decay, quad, power=power, breakpoints=breaks)
    return np.atleast_1d(values), diag


def omega(inter: Interaction, stats: Statistics, spec: OmegaSpec, tau: float,
          quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP,
          cross_section: CrossSection | None = None) -> float:
    """omega_alpha^(n,t) = int_0^inf dgamma e^{-alpha gamma^2} gamma^(2t+3) q^(n)(x(gamma))."""
    values, _ = omega_set(inter, stats, (spec,), tau, quad, lmax_cap, cross_section)
    return float(values[0])


@lru_cache(maxsize=8192)
def _omega_bundle(inter: Interaction, stats: Statistics, tau: float,
                  quad: QuadratureSpec, lmax_cap: int):
    values, diag = omega_set(inter, stats, ALL_OMEGAS, tau, quad, lmax_cap)
    return dict(zip(ALL_OMEGAS, values.tolist())), diag


def omega_bundle(inter: Interaction, stats: Statistics, tau: float,
                 quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP,
                 cross_section: CrossSection | None = None):
    """All five omega integrals used by the first and second approximations."""
    if cross_section is not None:
        values, diag = omega_set(inter, stats, ALL_OMEGAS, tau, quad, lmax_cap, cross_section)
        return dict(zip(ALL_OMEGAS, values.tolist())), diag
    omegas, diag = _omega_bundle(inter, stats, float(tau), quad, lmax_cap)
    return dict(omegas), dict(diag)


def first_order_from_omegas(omegas: dict, tau: float) -> tuple[float, float]:
    """(D/D~, eta/eta~) from omega^(1,1) and omega^(2,2)."""
    root = math.sqrt(tau)
    return root / omegas[OMEGA_11], root / omegas[OMEGA_22]


def coefficients_first(inter: Interaction, stats: Statistics, tau: float,
                       quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP,
                       cross_section: CrossSection | None = None) -> TransportResult:
    """First Chapman-Enskog approximation; eta/eta~ and kappa/kappa~ coincide."""
    omegas, diag = omega_bundle(inter, stats, tau, quad, lmax_cap, cross_section)
    d_norm, eta_norm = first_order_from_omegas(omegas, tau)
    meta = dict(diag, omega_11=omegas[OMEGA_11], omega_22=omegas[OMEGA_22])
    return TransportResult(d_norm, eta_norm, eta_norm, 1, None, meta)


def delta_epsilon_eta(omegas: dict) -> tuple[float, float]:
    """Second-approximation corrections (delta_eta, epsilon_eta) for the viscosity."""
    w22, w23, w24 = omegas[OMEGA_22], omegas[OMEGA_23], omegas[OMEGA_24]
    w22_43 = omegas[OMEGA_22_43]
    delta = 3.0 * (7.0 * w22 - 2.0 * w23) ** 2 / (
        2.0 * (w22 * (77.0 * w22 + 6.0 * w24) - 6.0 * w23 * w23))
    epsilon = 2.0 ** -3.5 * (4.0 - 128.0 / 3.0 ** 1.5 * w22_43 / w22)
    return delta, epsilon


def second_order_from_omegas(omegas: dict, stats: Statistics, tau: float,
                             dilution: float) -> SecondOrderEta:
    if dilution < 0:
        raise ValueError("dilution nR^3 must be >= 0")
    delta, epsilon = delta_epsilon_eta(omegas)
    n_lambda3 = dilution * tau ** -1.5
    sign = -1.0 if stats.is_fermionic else 1.0
    ratio = (1.0 + delta) * (1.0 + sign * n_lambda3 * epsilon)
    return SecondOrderEta(delta, epsilon, ratio, n_lambda3, n_lambda3 >= 1.0)


def second_order_eta(inter: Interaction, stats: Statistics, tau: float, dilution: float,
                     quad: QuadratureSpec = QuadratureSpec(), lmax_cap: int = LMAX_CAP,
                     cross_section: CrossSection | None = None) -> SecondOrderEta:
    """[eta]_2 / [eta]_1 = (1 + delta_eta)(1 +- n lambda^3 epsilon_eta).

    The sign is + for bosons and - for fermions (half-integer spin).
    """
    _check_tau(tau)
    omegas, _ = omega_bundle(inter, stats, tau, quad, lmax_cap, cross_section)
    result = second_order_from_omegas(omegas, stats, tau, dilution)
    if result.degenerate:
        warnings.warn(f"n lambda^3 = {result.n_lambda3:.3g} >= 1: outside the "
                      "non-degenerate regime", DegenerateGasWarning, stacklevel=2)
    return result


def asymptotic_first(inter: Interaction, tau: float, which: str,
                     snap: float = SNAP_TOL) -> float:
    """Closed-form T << T~ limits of D/D~ (``which="D"``) or eta/eta~ (``"eta"``)."""
    _check_tau(tau)
    g = inter.g
    if which not in ("D", "eta"):
        raise ValueError("which must be 'D' or 'eta'")
    if abs(g - 1.0) < snap:
        return (8.0 if which == "D" else 6.0) * math.pi * tau ** 1.5
    if abs(g - 3.0) < snap:
        return (4.0 / 17.0 if which == "D" else 1.0 / 6.0) * math.sqrt(tau)
    base = ((1.0 - g) / g) ** 2 * math.sqrt(tau)
    return 2.0 * base if which == "D" else base


def diffusion_viscosity_ratio(inter: Interaction, stats: Statistics, tau: float,
                              quad: QuadratureSpec = QuadratureSpec(),
                              lmax_cap: int = LMAX_CAP) -> float:
    """m n D / eta, which is 3/5 of (D/D~)/(eta/eta~)."""
    res = coefficients_first(inter, stats, tau, quad, lmax_cap)
    return 0.6 * res.D_norm / res.eta_norm


def g_from_inverse_scattering_length(inv_a: float) -> Interaction:
    return Interaction.from_inverse_scattering_length(inv_a)
