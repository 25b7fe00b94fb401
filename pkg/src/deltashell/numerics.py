"""Special functions, semi-infinite quadrature, root finding and 1-D minimization.

Everything here is a pure function of its arguments. The Bessel routines are
vectorized over ``x`` and return whole tables in ``l`` because the physics
modules need every partial wave at every quadrature node at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

L_CAP = 200

_RESCALE = 1e100
# below this the leading small-x term of j_l is exact in double precision
_TINY_X = 1e-40


class NumericsError(RuntimeError):
    pass


class QuadratureError(NumericsError):
    def __init__(self, message: str, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RootFindingError(NumericsError):
    pass


class MinimizationError(NumericsError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_floor: float = 1e-14
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


# ---------------------------------------------------------------------------
# spherical Bessel functions
# ---------------------------------------------------------------------------

def _as_positive_array(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("spherical Bessel arguments must be finite and > 0")
    return x


def _check_order(l: int):
    if l < 0:
        raise ValueError(f"order must be >= 0, got {l}")
    if l > L_CAP:
        raise ValueError(f"order {l} exceeds the cap {L_CAP}")


def _miller_start(lmax: int, xmax: float) -> int:
    top = max(lmax, int(math.ceil(xmax)))
    return top + 20 + int(math.sqrt(40.0 * (top + 1)))


def sph_jn_table(lmax: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(j, n)`` with shape ``(lmax + 1, len(x))``.

    ``j_l`` comes from a Miller downward recurrence normalized by the sum rule
    ``sum (2l+1) j_l^2 = 1``; ``n_l`` from the upward recurrence. Entries of
    ``n_l`` that overflow are returned as ``-inf``; matching ``j_l`` are 0.
    """
    x = _as_positive_array(x)
    tiny = x < _TINY_X
    if tiny.any():
        j = np.empty((lmax + 1, x.size))
        n = np.empty((lmax + 1, x.size))
        ls = np.arange(lmax + 1)[:, None]
        log_dfac = np.cumsum(np.log(2.0 * np.arange(lmax + 1) + 1.0))[:, None]
        with np.errstate(under="ignore"):
            j[:, tiny] = np.exp(ls * np.log(x[tiny]) - log_dfac)
        n[:, tiny] = -np.inf
        n[0, tiny] = -1.0 / x[tiny]
        if (~tiny).any():
            j[:, ~tiny], n[:, ~tiny] = sph_jn_table(lmax, x[~tiny])
        return j, n
    top = _miller_start(lmax, float(x.max()))
    m = x.size
    j = np.empty((lmax + 1, m))
    # rescalings are counted per entry and applied once at the end
    count = np.zeros(m)
    stored = np.zeros((lmax + 1, m))
    f_next = np.zeros(m)
    f_cur = np.full(m, 1e-30)
    norm = np.zeros(m)
    inv_x = 1.0 / x
    # f^2 must stay finite between checks: bound the growth over one stride
    growth = max(math.log10((2 * top + 1) / float(x.min())), 1.0)
    stride = max(1, int(50.0 / growth))
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for l in range(top, 0, -1):
            norm += (2 * l + 1) * f_cur * f_cur
            if l <= lmax:
                j[l] = f_cur
                stored[l] = count
            f_prev = (2 * l + 1) * inv_x * f_cur - f_next
            f_next, f_cur = f_cur, f_prev
            if l % stride:
                continue
            big = np.abs(f_cur) > _RESCALE
            if big.any():
                scale = np.where(big, 1.0 / _RESCALE, 1.0)
                f_cur = f_cur * scale
                f_next = f_next * scale
                norm *= scale * scale
                count += big
        norm += f_cur * f_cur
        j[0] = f_cur
        stored[0] = count
        j *= (1.0 / _RESCALE) ** (count - stored)

        sin, cos = np.sin(x), np.cos(x)
        j0 = sin * inv_x
        u = x * x
        # the closed form for j1 cancels catastrophically at small x
        j1 = np.where(x < 0.1, x / 3.0 * (1.0 - u / 10.0 * (1.0 - u / 28.0)),
                      (j0 - cos) * inv_x)
        ref = np.where(np.abs(j0) >= np.abs(j1), j0, j1)
        raw = np.where(np.abs(j0) >= np.abs(j1), f_cur, f_next)
        sign = np.where(np.sign(ref) == np.sign(raw), 1.0, -1.0)
        j *= sign / np.sqrt(norm)

        n = np.empty((lmax + 1, m))
        n[0] = -cos * inv_x
        if lmax >= 1:
            n[1] = (n[0] - sin) * inv_x
        for l in range(1, lmax):
            n[l + 1] = (2 * l + 1) * inv_x * n[l] - n[l - 1]
    n[~np.isfinite(n)] = -np.inf
    return j, n


def sph_bessel_j(l: int, x):
    """Spherical Bessel function of the first kind ``j_l(x)`` for ``x > 0``."""
    _check_order(l)
    scalar = np.ndim(x) == 0
    j, _ = sph_jn_table(l, x)
    out = j[l]
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def sph_bessel_n(l: int, x):
    """Spherical Bessel function of the second kind ``n_l(x)`` (often ``y_l``)."""
    _check_order(l)
    scalar = np.ndim(x) == 0
    _, n = sph_jn_table(l, x)
    out = n[l]
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def mod_sph_in_table(lmax: int, x, scaled: bool = False) -> np.ndarray:
    """Modified spherical Bessel ``i_l`` for l = 0..lmax (Miller recurrence).

    With ``scaled`` the result is ``exp(-x) i_l(x)``.
    """
    x = _as_positive_array(x)
    top = _miller_start(lmax, float(x.max()))
    m = x.size
    out = np.empty((lmax + 1, m))
    f_next = np.zeros(m)
    f_cur = np.full(m, 1e-30)
    inv_x = 1.0 / x
    for l in range(top, 0, -1):
        if l <= lmax:
            out[l] = f_cur
        f_prev = (2 * l + 1) * inv_x * f_cur + f_next
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            f_cur = f_cur * scale
            f_next = f_next * scale
            if l <= lmax:
                out[l:] *= scale
    out[0] = f_cur
    i0_scaled = -np.expm1(-2.0 * x) / (2.0 * x)
    out *= i0_scaled / f_cur
    if not scaled:
        if np.any(x > 700.0):
            raise OverflowError("i_l(x) overflows for x > 700; use scaled=True")
        out *= np.exp(x)
    return out


def mod_sph_kn_table(lmax: int, x, scaled: bool = False) -> np.ndarray:
    """Modified spherical Bessel ``k_l`` with ``k_0(x) = (pi/2) e^{-x} / x``.

    Upward recurrence. With ``scaled`` the result is ``exp(x) k_l(x)``.
    """
    x = _as_positive_array(x)
    inv_x = 1.0 / x
    out = np.empty((lmax + 1, x.size))
    out[0] = 0.5 * np.pi * inv_x
    if lmax >= 1:
        out[1] = out[0] * (1.0 + inv_x)
    with np.errstate(over="ignore"):
        for l in range(1, lmax):
            out[l + 1] = out[l - 1] + (2 * l + 1) * inv_x * out[l]
    if not scaled:
        out *= np.exp(-x)
    return out


def mod_sph_bessel_i(l: int, x, scaled: bool = False):
    _check_order(l)
    scalar = np.ndim(x) == 0
    out = mod_sph_in_table(l, x, scaled)[l]
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def mod_sph_bessel_k(l: int, x, scaled: bool = False):
    _check_order(l)
    scalar = np.ndim(x) == 0
    out = mod_sph_kn_table(l, x, scaled)[l]
    return float(out[0]) if scalar else out.reshape(np.shape(x))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights live on the odd-indexed Kronrod nodes.
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]


def envelope_cutoff(decay_scale: float, power: float, floor: float) -> float:
    """Point beyond which ``exp(-a t^2) t^p`` is below ``floor`` times its peak."""
    if decay_scale <= 0:
        raise ValueError("decay_scale must be positive")
    target = -math.log(floor)
    if power > 0:
        peak = 0.5 * power * (math.log(power / (2.0 * decay_scale)) - 1.0)
    else:
        peak = 0.0
    t = math.sqrt(target / decay_scale) + 1.0
    for _ in range(50):
        t_new = math.sqrt((target + peak + power * math.log(max(t, 1e-300))) / decay_scale)
        if abs(t_new - t) < 1e-12 * t:
            break
        t = t_new
    return t_new


def _initial_mesh(cut: float, breakpoints) -> np.ndarray:
    pts = [0.0]
    pts += [cut * 10.0 ** e for e in range(-8, 0)]
    pts += list(np.linspace(0.1 * cut, cut, 10)[1:])
    if breakpoints is not None:
        pts += [p for p in breakpoints if 0.0 < p < cut]
    return np.unique(np.asarray(pts, dtype=float))


_CANCELLATION_FACTOR = 1e-3


def _qk15_error(vals, k, g, half):
    """QUADPACK-style error estimate and roundoff floor per panel."""
    eps = np.finfo(float).eps
    mean = k / (2.0 * half)
    resasc = half * (np.abs(vals - mean[..., None]) @ KRONROD_WEIGHTS)
    resabs = half * (np.abs(vals) @ KRONROD_WEIGHTS)
    raw = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5)
    err = np.where((resasc > 0) & (raw > 0), scaled, raw)
    floor = 50.0 * eps * resabs
    return np.maximum(err, floor), floor, resabs


def integrate_panels(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray,
                     spec: QuadratureSpec = QuadratureSpec()):
    """Adaptive G7/K15 on the panels given by ``edges``.

    ``f`` maps a 1-D array of nodes to an array of shape ``(..., nodes)``; the
    leading axes are independent integrands that share one adaptive mesh.
    Error control is global, as in QUADPACK: the panels carrying most of the
    error are bisected until every integrand's summed error estimate is below
    ``rel_tol`` relative to its value, or ``1e-3 * rel_tol`` relative to the
    integral of its absolute value when it nearly cancels. Returns
    ``(value, error, n_panels)``.
    """
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    new_lo, new_hi = lo, hi
    k_all = err_all = abs_all = floor_all = None
    while True:
        half = 0.5 * (new_hi - new_lo)
        mid = 0.5 * (new_hi + new_lo)
        nodes = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
        vals = np.asarray(f(nodes), dtype=float)
        lead = vals.shape[:-1]
        vals = vals.reshape(lead + (new_lo.size, 15))
        k = (vals @ KRONROD_WEIGHTS) * half
        g = (vals @ GAUSS_WEIGHTS) * half
        err, floor, resabs = _qk15_error(vals, k, g, half)
        if k_all is None:
            k_all, err_all, abs_all, floor_all = k, err, resabs, floor
        else:
            k_all = np.concatenate([k_all, k], axis=-1)
            err_all = np.concatenate([err_all, err], axis=-1)
            abs_all = np.concatenate([abs_all, resabs], axis=-1)
            floor_all = np.concatenate([floor_all, floor], axis=-1)
            lo = np.concatenate([lo, new_lo])
            hi = np.concatenate([hi, new_hi])
        value = k_all.sum(axis=-1)
        error = err_all.sum(axis=-1)
        tol = np.maximum(spec.rel_tol * np.abs(value), spec.abs_floor)
        # integrands that cancel are judged against their L1 norm instead
        tol = np.maximum(tol, _CANCELLATION_FACTOR * spec.rel_tol * abs_all.sum(axis=-1))
        failing = error > tol
        if not failing.any():
            return value, error, lo.size
        # panels at roundoff level or at double resolution cannot improve
        splittable = (hi - lo) > 1e-15 * np.maximum(np.abs(0.5 * (hi + lo)), 1e-300)
        excess = np.where((err_all > floor_all)
                          & failing[..., None], err_all / tol[..., None], 0.0)
        score = excess.reshape(-1, lo.size).max(axis=0) * splittable
        if not score.any():
            return value, error, lo.size
        order = np.argsort(score)[::-1]
        cum = np.cumsum(score[order])
        n_split = int(np.searchsorted(cum, 0.5 * cum[-1])) + 1
        if lo.size + n_split > spec.max_subdivisions:
            raise QuadratureError(
                f"quadrature did not converge within {spec.max_subdivisions} panels "
                f"(error estimate {np.max(error):.3e})", value, error)
        pick = np.zeros(lo.size, dtype=bool)
        pick[order[:n_split]] = True
        mid_p = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid_p])
        new_hi = np.concatenate([mid_p, hi[pick]])
        keep = ~pick
        lo, hi = lo[keep], hi[keep]
        k_all, err_all = k_all[..., keep], err_all[..., keep]
        abs_all = abs_all[..., keep]
        floor_all = floor_all[..., keep]


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray], decay_scale: float,
                            spec: QuadratureSpec = QuadratureSpec(), power: float = 0.0,
                            breakpoints=None):
    """Integrate ``f`` over ``(0, inf)`` assuming ``|f| <~ C exp(-a t^2) t^p``.

    The domain is cut where the Gaussian envelope drops below
    ``spec.abs_floor`` relative to its peak. ``f`` may return several
    integrands stacked on leading axes; the result then has that shape.
    """
    cut = envelope_cutoff(decay_scale, power, spec.abs_floor)
    edges = _initial_mesh(cut, breakpoints)
    value, _, _ = integrate_panels(f, edges, spec)
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# roots and minima
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12,
              max_iter: int = 200) -> float:
    flo, fhi = f(bracket.lo), f(bracket.hi)
    if flo == 0.0:
        return bracket.lo
    if fhi == 0.0:
        return bracket.hi
    if np.sign(flo) == np.sign(fhi):
        raise RootFindingError(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: f = {flo:.3e}, {fhi:.3e}")
    try:
        return brentq(f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                      maxiter=max_iter)
    except RuntimeError as exc:
        raise RootFindingError(str(exc)) from exc


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(f: Callable[[float], float], bracket: Bracket,
                    tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search; returns ``(x_min, f_min)``."""
    a, b = bracket.lo, bracket.hi
    fa, fb = f(a), f(b)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    if fc > fa and fd > fb:
        raise MinimizationError(
            f"f decreases toward both ends of [{a}, {b}]; not unimodal")
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    best = min([(fa, bracket.lo), (fb, bracket.hi), (fc, c), (fd, d)])
    if best[1] in (bracket.lo, bracket.hi):
        return best[1], best[0]
    x = 0.5 * (a + b)
    fx = f(x)
    return (x, fx) if fx <= best[0] else (best[1], best[0])
