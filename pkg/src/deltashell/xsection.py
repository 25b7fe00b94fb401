"""Dimensionless transport cross sections q1, q2 with quantum-statistics symmetrization.

``q^(n) = phi^(n) / (4 pi R^2)``; for identical particles only even (Bose) or
odd (Fermi) partial waves contribute, and spin-s particles mix the two sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import eval_legendre

from .scattering import Interaction, phase_shift_table

LMAX_CAP = 120
SUM_REL_TOL = 1e-10


@dataclass(frozen=True)
class Statistics:
    """Bose, Fermi, or spin-s particles (``spin`` a non-negative multiple of 1/2)."""

    kind: str
    spin: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("bose", "fermi", "spin"):
            raise ValueError(f"unknown statistics {self.kind!r}")
        if self.kind == "spin":
            s = Fraction(self.spin)
            if s < 0 or (2 * s).denominator != 1:
                raise ValueError(f"spin must be a non-negative multiple of 1/2, got {self.spin}")
            object.__setattr__(self, "spin", s)

    @classmethod
    def bose(cls) -> "Statistics":
        return cls("bose")

    @classmethod
    def fermi(cls) -> "Statistics":
        return cls("fermi")

    @classmethod
    def spin_s(cls, s) -> "Statistics":
        return cls("spin", Fraction(s))

    @classmethod
    def parse(cls, text: str) -> "Statistics":
        """Accepts ``bose``, ``fermi``, ``spin-1/2``, ``spin-1``, ``spin-0.5``."""
        t = text.strip().lower()
        if t in ("bose", "boson", "bosons"):
            return cls.bose()
        if t in ("fermi", "fermion", "fermions"):
            return cls.fermi()
        if t.startswith("spin-") or t.startswith("spin="):
            return cls.spin_s(Fraction(t[5:]).limit_denominator(2))
        raise ValueError(f"cannot parse statistics {text!r}")

    @property
    def weights(self) -> tuple[float, float]:
        """(Bose weight, Fermi weight)."""
        if self.kind == "bose":
            return 1.0, 0.0
        if self.kind == "fermi":
            return 0.0, 1.0
        s = self.spin
        major, minor = float((s + 1) / (2 * s + 1)), float(s / (2 * s + 1))
        if s.denominator == 1:
            return major, minor
        return minor, major

    @property
    def is_fermionic(self) -> bool:
        """Quantum statistics of the species itself (half-integer spin is Fermi)."""
        if self.kind == "spin":
            return self.spin.denominator == 2
        return self.kind == "fermi"

    @property
    def name(self) -> str:
        if self.kind == "spin":
            return f"spin-{self.spin}"
        return self.kind


@dataclass(frozen=True)
class CrossSectionResult:
    value: float | np.ndarray
    l_max_used: int | np.ndarray
    converged: bool | np.ndarray


@dataclass
class PartialWaveSums:
    """q1 and q2 split by partial-wave parity, for every x of one batch."""

    x: np.ndarray
    q1_bose: np.ndarray
    q1_fermi: np.ndarray
    q2_bose: np.ndarray
    q2_fermi: np.ndarray
    l_max_used: np.ndarray
    converged: np.ndarray

    def q1(self, stats: Statistics) -> np.ndarray:
        wb, wf = stats.weights
        return wb * self.q1_bose + wf * self.q1_fermi

    def q2(self, stats: Statistics) -> np.ndarray:
        wb, wf = stats.weights
        return wb * self.q2_bose + wf * self.q2_fermi


def _convergence(terms: np.ndarray, parity: int, x: np.ndarray, rel_tol: float):
    """First l at which two consecutive two-wave blocks are both negligible."""
    lmax = terms.shape[0] - 1
    starts = np.arange(parity, lmax - 2, 4)
    if starts.size < 2:
        return np.full(x.size, lmax), np.zeros(x.size, dtype=bool)
    blocks = terms[starts] + terms[starts + 2]
    total = np.abs(terms[parity::2].sum(axis=0))
    small = blocks <= rel_tol * total
    ends = starts + 2
    reach = ends[1:, None] >= (x + 10.0)[None, :]
    ok = small[:-1] & small[1:] & reach
    found = ok.any(axis=0)
    first = np.argmax(ok, axis=0)
    used = np.where(found, ends[1:][first], lmax)
    return used, found


def partial_wave_sums(inter: Interaction, x, rel_tol: float = SUM_REL_TOL,
                      lmax_cap: int = LMAX_CAP) -> PartialWaveSums:
    """Parity-resolved q1, q2 at every ``x`` with adaptive truncation in l.

    Waves are summed to a common batch cutoff; ``l_max_used`` reports where
    each x actually converged.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("x = kR must be positive")
    if inter.is_free:
        zero = np.zeros(x.size)
        return PartialWaveSums(x, zero, zero, zero, zero,
                               np.zeros(x.size, dtype=int), np.ones(x.size, dtype=bool))
    lmax = min(lmax_cap, int(math.ceil(x.max())) + 18)
    while True:
        delta = phase_shift_table(inter.g, lmax + 2, x)
        ls = np.arange(lmax + 1)[:, None]
        t1 = (2 * ls + 1) * np.sin(delta[: lmax + 1]) ** 2
        t2 = (ls + 1) * (ls + 2) / (2 * ls + 3) * np.sin(delta[2:] - delta[: lmax + 1]) ** 2
        used = np.zeros(x.size, dtype=int)
        conv = np.ones(x.size, dtype=bool)
        for terms in (t1, t2):
            for parity in (0, 1):
                u, c = _convergence(terms, parity, x, rel_tol)
                used = np.maximum(used, u)
                conv &= c
        if conv.all() or lmax >= lmax_cap:
            break
        lmax = lmax_cap
    pref = 2.0 / (x * x)
    return PartialWaveSums(
        x,
        pref * t1[0::2].sum(axis=0), pref * t1[1::2].sum(axis=0),
        pref * t2[0::2].sum(axis=0), pref * t2[1::2].sum(axis=0),
        used, conv)


def _wrap(values: np.ndarray, used, conv, x) -> CrossSectionResult:
    if np.ndim(x) == 0:
        return CrossSectionResult(float(values[0]), int(used[0]), bool(conv[0]))
    return CrossSectionResult(values, used, conv)


def q1(inter: Interaction, stats: Statistics, x, rel_tol: float = SUM_REL_TOL,
       lmax_cap: int = LMAX_CAP) -> CrossSectionResult:
    """First transport cross section ``(2/x^2) sum' (2l+1) sin^2 delta_l``."""
    s = partial_wave_sums(inter, x, rel_tol, lmax_cap)
    return _wrap(s.q1(stats), s.l_max_used, s.converged, x)


def q2(inter: Interaction, stats: Statistics, x, rel_tol: float = SUM_REL_TOL,
       lmax_cap: int = LMAX_CAP) -> CrossSectionResult:
    """Second transport cross section with the l, l+2 interference kernel."""
    s = partial_wave_sums(inter, x, rel_tol, lmax_cap)
    return _wrap(s.q2(stats), s.l_max_used, s.converged, x)


def scattering_amplitude(inter: Interaction, x: float, theta, lmax: int | None = None):
    """f(theta)/R = sum_l (2l+1) e^{i delta_l} sin(delta_l) P_l(cos theta) / x."""
    if lmax is None:
        lmax = min(LMAX_CAP, int(math.ceil(x)) + 30)
    delta = phase_shift_table(inter.g, lmax, np.array([x]))[:, 0]
    mu = np.cos(np.asarray(theta, dtype=float))
    ls = np.arange(lmax + 1)
    coef = (2 * ls + 1) * np.exp(1j * delta) * np.sin(delta) / x
    legendre = eval_legendre(ls[:, None], np.atleast_1d(mu)[None, :])
    amp = coef @ legendre
    return amp if np.ndim(theta) else amp[0]


def differential_sigma(inter: Interaction, x: float, theta, symmetry: str | None = None,
                       lmax: int | None = None):
    """dsigma/dOmega in units of R^2.

    ``symmetry`` None gives the distinguishable-particle |f(theta)|^2; ``"bose"``
    and ``"fermi"`` give |f(theta) +- f(pi - theta)|^2.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0) | (theta > np.pi)):
        raise ValueError("theta must lie in [0, pi]")
    f = scattering_amplitude(inter, x, theta, lmax)
    if symmetry is None:
        return np.abs(f) ** 2
    f_back = scattering_amplitude(inter, x, np.pi - theta, lmax)
    if symmetry == "bose":
        return np.abs(f + f_back) ** 2
    if symmetry == "fermi":
        return np.abs(f - f_back) ** 2
    raise ValueError(f"unknown symmetry {symmetry!r}")
