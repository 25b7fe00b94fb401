"""Command-line parameter scans emitting CSV or JSON datasets.

Every subcommand scans one variable (g or inv_a, tau, or x) and writes one
row per scan point. Rows that fail are kept, filled with NaN and flagged.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from . import __version__
from .numerics import QuadratureSpec
from .scattering import Interaction, low_energy_params
from .thermo import (GasState, NoInteriorMinimumError, entropy_density, eta_over_s,
                     min_eta_over_s, second_virial)
from .transport import (DegenerateGasWarning, asymptotic_first, coefficients_first,
                        second_order_eta)
from .xsection import LMAX_CAP, Statistics, partial_wave_sums

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3
DIGITS = 12

# subcommand -> (scan variables allowed, columns)
SUBCOMMANDS = {
    "low-energy": (("g", "inv_a"), ("g", "inv_a", "a_over_R", "r0_over_R", "P")),
    "xsection": (("x",), ("x", "q1", "q2", "l_max")),
    "transport": (("tau",), ("tau", "D_norm", "eta_norm", "kappa_norm",
                             "asymptote_D", "asymptote_eta")),
    "resonance": (("inv_a", "g"), ("inv_a", "eta_norm", "ratio_mnD_eta", "delta_eta",
                                   "l_max")),
    "virial": (("tau",), ("tau", "a2", "T_da2_dT")),
    "eta-s": (("tau",), ("tau", "eta_over_s_1", "eta_over_s_2", "s_per_nkB")),
    "eta-s-min": (("inv_a", "g"), ("inv_a", "dilution", "tau_min", "min_1", "min_2",
                                   "tau_min_2")),
    "units": ((), ("T_tilde_K", "D_tilde_m2_per_s", "eta_tilde_Pa_s",
                   "kappa_tilde_W_per_mK")),
}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class ScanSpec:
    subcommand: str
    variable: str | None
    lo: float = 0.0
    hi: float = 0.0
    points: int = 1
    spacing: str = "linear"
    fixed: dict = field(default_factory=dict)
    quad: QuadratureSpec = QuadratureSpec()
    lmax_cap: int = LMAX_CAP
    overrides: tuple = ()
    out: str | None = None
    fmt: str = "csv"
    strict: bool = False

    def values(self) -> np.ndarray:
        if self.variable is None:
            return np.array([math.nan])
        if self.points == 1:
            return np.array([self.lo])
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass
class Dataset:
    columns: tuple
    rows: list
    flags: list
    metadata: dict
    warnings: list = field(default_factory=list)


def _build_parser() -> _Parser:
    p = _Parser(prog="deltashell", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"deltashell {__version__}")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--g", type=float)
        s.add_argument("--inv-a", type=float)
        s.add_argument("--tau", type=float)
        s.add_argument("--hard-sphere", action="store_true")
        for var in ("g", "inv-a", "tau", "x"):
            s.add_argument(f"--{var}-min", type=float)
            s.add_argument(f"--{var}-max", type=float)
        s.add_argument("--points", type=int, default=1)
        s.add_argument("--spacing", choices=("linear", "log"), default="linear")
        s.add_argument("--stats", default="spin-1/2")
        s.add_argument("--dilution", type=float, nargs="+",
                       help="nR^3; eta-s-min accepts several values")
        s.add_argument("--order", type=int, choices=(1, 2), default=1)
        s.add_argument("--l", type=int, default=0, help="partial wave for low-energy")
        s.add_argument("--mass", type=float, help="particle mass in kg (units)")
        s.add_argument("--radius", type=float, help="shell radius in m (units)")
        s.add_argument("--tol", type=float)
        s.add_argument("--abs-floor", type=float)
        s.add_argument("--max-subdivisions", type=int)
        s.add_argument("--lmax-cap", type=int)
        s.add_argument("--out")
        s.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        s.add_argument("--strict", action="store_true")
    return p


def _scan_range(ns, allowed):
    given = [v for v in ("g", "inv_a", "tau", "x")
             if getattr(ns, f"{v}_min") is not None or getattr(ns, f"{v}_max") is not None]
    bad = [v for v in given if v not in allowed]
    if bad:
        raise UsageError(f"--{bad[0].replace('_', '-')}-min/max not valid for {ns.subcommand}")
    if len(given) > 1:
        raise UsageError("exactly one scan variable allowed, got "
                         + ", ".join(f"--{v.replace('_', '-')}-min" for v in given))
    if not given:
        return None, math.nan, math.nan
    var = given[0]
    lo, hi = getattr(ns, f"{var}_min"), getattr(ns, f"{var}_max")
    flag = var.replace("_", "-")
    if lo is None or hi is None:
        lo = hi if lo is None else lo
        hi = lo if hi is None else hi
        if ns.points != 1:
            raise UsageError(f"--{flag}-min and --{flag}-max are both required")
    if lo > hi:
        raise UsageError(f"range inversion: --{flag}-min {lo} > --{flag}-max {hi}")
    if lo == hi and ns.points > 1:
        raise UsageError(f"empty range --{flag}-min = --{flag}-max with --points > 1")
    if ns.spacing == "log" and lo <= 0:
        raise UsageError(f"--spacing log requires --{flag}-min > 0")
    return var, lo, hi


def parse_args(argv) -> ScanSpec:
    """Validate command-line flags into a ScanSpec; raises UsageError."""
    ns = _build_parser().parse_args(list(argv))
    if ns.subcommand is None:
        raise UsageError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    allowed, _ = SUBCOMMANDS[ns.subcommand]
    if ns.points < 1:
        raise UsageError("--points must be >= 1")
    var, lo, hi = _scan_range(ns, allowed)
    try:
        stats = Statistics.parse(ns.stats)
    except ValueError as exc:
        raise UsageError(f"--stats: {exc}") from None
    fixed = {"stats": stats.name, "order": ns.order}
    coupling = [f for f in ("g", "inv_a") if getattr(ns, f) is not None]
    if ns.hard_sphere:
        coupling.append("hard_sphere")
    if len(coupling) > 1:
        raise UsageError("give only one of --g, --inv-a, --hard-sphere")
    if var in ("g", "inv_a") and coupling:
        raise UsageError(f"--{coupling[0].replace('_', '-')} conflicts with the "
                         f"--{var.replace('_', '-')} scan")
    sub = ns.subcommand
    if ns.hard_sphere:
        fixed["g"], fixed["label"] = Interaction.hard_sphere().g, "HS"
    elif ns.g is not None:
        fixed["g"] = ns.g
    elif ns.inv_a is not None:
        if ns.inv_a == 1.0:
            raise UsageError("--inv-a 1 is the hard-sphere limit; use --hard-sphere")
        fixed["g"] = Interaction.from_inverse_scattering_length(ns.inv_a).g
    needs_coupling = sub in ("xsection", "transport", "virial", "eta-s") or (
        sub in ("low-energy", "resonance", "eta-s-min") and var is None)
    if needs_coupling and "g" not in fixed:
        raise UsageError(f"{sub} requires --g, --inv-a or --hard-sphere")
    if sub in ("resonance",) and ns.tau is None:
        raise UsageError("resonance requires --tau")
    if sub in ("eta-s", "eta-s-min") and ns.dilution is None:
        raise UsageError(f"{sub} requires --dilution")
    if sub == "transport" and ns.order == 2 and ns.dilution is None:
        raise UsageError("transport --order 2 requires --dilution")
    if sub in ("xsection", "transport", "virial", "eta-s") and var is None:
        raise UsageError(f"{sub} requires a --{allowed[0].replace('_', '-')}-min/max range")
    if sub == "units" and (ns.mass is None or ns.radius is None):
        raise UsageError("units requires --mass and --radius")
    if ns.dilution is not None:
        if any(d <= 0 for d in ns.dilution):
            raise UsageError("--dilution must be > 0")
        if len(ns.dilution) > 1 and sub != "eta-s-min":
            raise UsageError(f"{sub} takes a single --dilution value")
        fixed["dilution"] = ns.dilution if sub == "eta-s-min" else ns.dilution[0]
    if ns.tau is not None:
        if ns.tau <= 0:
            raise UsageError("--tau must be > 0")
        fixed["tau"] = ns.tau
    if sub == "low-energy":
        if ns.l < 0:
            raise UsageError("--l must be >= 0")
        fixed["l"] = ns.l
    if sub == "units":
        if ns.mass <= 0 or ns.radius <= 0:
            raise UsageError("--mass and --radius must be > 0")
        fixed["mass"], fixed["radius"] = ns.mass, ns.radius
    if var == "x" and lo <= 0:
        raise UsageError("--x-min must be > 0")
    if var == "tau" and lo <= 0:
        raise UsageError("--tau-min must be > 0")
    quad_kw, overrides = {}, []
    for flag, key in (("tol", "rel_tol"), ("abs_floor", "abs_floor"),
                      ("max_subdivisions", "max_subdivisions")):
        if getattr(ns, flag) is not None:
            quad_kw[key] = getattr(ns, flag)
            overrides.append(key)
    try:
        quad = QuadratureSpec(**quad_kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lmax_cap = LMAX_CAP
    if ns.lmax_cap is not None:
        if not 2 <= ns.lmax_cap <= 190:
            raise UsageError("--lmax-cap must lie in [2, 190]")
        lmax_cap = ns.lmax_cap
        overrides.append("lmax_cap")
    points = ns.points if var is not None else 1
    return ScanSpec(sub, var, lo, hi, points, ns.spacing, fixed, quad, lmax_cap,
                    tuple(overrides), ns.out, ns.fmt, ns.strict)


def _coupling(spec: ScanSpec, value: float) -> Interaction:
    label = spec.fixed.get("label", "")
    if spec.variable == "g":
        return Interaction(value)
    if spec.variable == "inv_a":
        return Interaction.from_inverse_scattering_length(value)
    return Interaction(spec.fixed["g"], label)


def _nan_row(n):
    return tuple([math.nan] * n)


def _row_low_energy(spec, v):
    inter = _coupling(spec, v)
    p = low_energy_params(inter, spec.fixed["l"])
    shape = p.shape_P if p.shape_P is not None else math.nan
    return (inter.g, inter.inverse_scattering_length, p.a_over_R_pow, p.r0_over_R_pow,
            shape), ""


def _row_xsection(spec, x):
    inter = _coupling(spec, None)
    stats = Statistics.parse(spec.fixed["stats"])
    s = partial_wave_sums(inter, x, lmax_cap=spec.lmax_cap)
    flag = "" if s.converged[0] else "nonconverged"
    return (x, float(s.q1(stats)[0]), float(s.q2(stats)[0]), int(s.l_max_used[0])), flag


def _row_transport(spec, tau):
    inter = _coupling(spec, None)
    stats = Statistics.parse(spec.fixed["stats"])
    res = coefficients_first(inter, stats, tau, spec.quad, spec.lmax_cap)
    eta, kappa = res.eta_norm, res.kappa_norm
    if spec.fixed["order"] == 2:
        eta *= second_order_eta(inter, stats, tau, spec.fixed["dilution"], spec.quad,
                                spec.lmax_cap).eta2_over_eta1
    flag = "nonconverged" if res.metadata["nonconverged_nodes"] else ""
    return (tau, res.D_norm, eta, kappa, asymptotic_first(inter, tau, "D"),
            asymptotic_first(inter, tau, "eta")), flag


def _row_resonance(spec, v):
    inter = _coupling(spec, v)
    stats = Statistics.parse(spec.fixed["stats"])
    tau = spec.fixed["tau"]
    res = coefficients_first(inter, stats, tau, spec.quad, spec.lmax_cap)
    second = second_order_eta(inter, stats, tau, spec.fixed.get("dilution", 0.0),
                              spec.quad, spec.lmax_cap)
    flag = "nonconverged" if res.metadata["nonconverged_nodes"] else ""
    return (inter.inverse_scattering_length, res.eta_norm, 0.6 * res.D_norm / res.eta_norm,
            second.delta_eta, res.metadata["l_max"]), flag


def _row_virial(spec, tau):
    inter = _coupling(spec, None)
    v = second_virial(inter, Statistics.parse(spec.fixed["stats"]), tau, spec.quad,
                      spec.lmax_cap)
    return (tau, v.a2, v.T_da2_dT), ""


def _row_eta_s(spec, tau):
    inter = _coupling(spec, None)
    state = GasState(tau, spec.fixed["dilution"], Statistics.parse(spec.fixed["stats"]))
    s = entropy_density(inter, state, None, spec.quad, spec.lmax_cap)
    one = eta_over_s(inter, state, 1, spec.quad, spec.lmax_cap)
    two = eta_over_s(inter, state, 2, spec.quad, spec.lmax_cap)
    return (tau, one, two, s), "degenerate" if state.degenerate else ""


def _min_or_edge(inter, stats, dilution, order, spec):
    try:
        return min_eta_over_s(inter, stats, dilution, order, quad=spec.quad,
                              lmax_cap=spec.lmax_cap), ""
    except NoInteriorMinimumError as exc:
        if exc.edge is None:
            raise
        return exc.edge, "edge"


def _row_eta_s_min(spec, v, d):
    inter = _coupling(spec, v)
    stats = Statistics.parse(spec.fixed["stats"])
    m1, f1 = _min_or_edge(inter, stats, d, 1, spec)
    tau2 = min2 = math.nan
    f2 = ""
    if spec.fixed["order"] == 2:
        m2, f2 = _min_or_edge(inter, stats, d, 2, spec)
        tau2, min2 = m2.tau_min, m2.value
    flag = "edge" if "edge" in (f1, f2) else ""
    return (inter.inverse_scattering_length, d, m1.tau_min, m1.value, min2, tau2), flag


def _row_units(spec, _):
    m, r = spec.fixed["mass"], spec.fixed["radius"]
    hbar, kb = constants.hbar, constants.k
    t_tilde = 2.0 * math.pi * hbar**2 / (kb * m * r * r)
    n = spec.fixed.get("dilution", math.nan) / r**3
    d_tilde = 3.0 * math.sqrt(2.0) / 32.0 * hbar / (m * n * r**3)
    eta_tilde = 5.0 * math.sqrt(2.0) / 32.0 * hbar / r**3
    kappa_tilde = 75.0 / (64.0 * math.sqrt(2.0)) * hbar * kb / (m * r**3)
    return (t_tilde, d_tilde, eta_tilde, kappa_tilde), ""


_ROWS = {
    "low-energy": _row_low_energy, "xsection": _row_xsection, "transport": _row_transport,
    "resonance": _row_resonance, "virial": _row_virial, "eta-s": _row_eta_s,
    "eta-s-min": _row_eta_s_min, "units": _row_units,
}


def _metadata(spec: ScanSpec) -> dict:
    meta = {
        "tool": "deltashell", "version": __version__, "subcommand": spec.subcommand,
        "variable": spec.variable, "points": spec.points, "spacing": spec.spacing,
        "rel_tol": spec.quad.rel_tol, "abs_floor": spec.quad.abs_floor,
        "max_subdivisions": spec.quad.max_subdivisions, "lmax_cap": spec.lmax_cap,
    }
    if spec.variable is not None:
        meta["range"] = [spec.lo, spec.hi]
    meta.update(spec.fixed)
    if spec.overrides:
        meta["overrides"] = list(spec.overrides)
    return meta


def run_scan(spec: ScanSpec) -> Dataset:
    """One row per scan point; failing rows are NaN-filled and flagged."""
    columns = SUBCOMMANDS[spec.subcommand][1]
    compute = _ROWS[spec.subcommand]
    rows, flags, notes = [], [], []
    if spec.subcommand == "eta-s-min":
        # dilution-major order; the tau-grid caches are shared across dilutions
        points = [(d, v) for d in spec.fixed["dilution"] for v in spec.values()]
    else:
        points = [(None, v) for v in spec.values()]
    for d, v in points:
        extra = () if d is None else (d,)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DegenerateGasWarning)
            try:
                row, flag = compute(spec, float(v), *extra)
            except (ArithmeticError, ValueError, RuntimeError) as exc:
                row, flag = _nan_row(len(columns)), f"error:{type(exc).__name__}"
                if spec.variable is not None:
                    row = (float(v),) + extra + row[1 + len(extra):]
                notes.append(f"{spec.variable}={v:.{DIGITS}g}: {exc}")
        if any(issubclass(w.category, DegenerateGasWarning) for w in caught):
            flag = flag or "degenerate"
        rows.append(tuple(row))
        flags.append(flag)
    return Dataset(columns, rows, flags, _metadata(spec), notes)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), f".{DIGITS}g")


def _json_value(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(format(float(v), f".{DIGITS}g"))
    return v if math.isfinite(v) else None


def render(ds: Dataset, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "metadata": ds.metadata,
            "warnings": ds.warnings,
            "columns": {c: [_json_value(r[i]) for r in ds.rows]
                        for i, c in enumerate(ds.columns)},
            "flag": ds.flags,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(ds.metadata):
        buf.write(f"# {key}: {json.dumps(ds.metadata[key], sort_keys=True)}\n")
    for note in ds.warnings:
        buf.write(f"# warning: {note}\n")
    buf.write(",".join(ds.columns + ("flag",)) + "\n")
    for row, flag in zip(ds.rows, ds.flags):
        buf.write(",".join([_fmt(v) for v in row] + [flag]) + "\n")
    return buf.getvalue()


def emit(ds: Dataset, fmt: str = "csv", path: str | None = None):
    """Write ``ds`` to ``path`` (stdout when None); raises OSError with the path."""
    text = render(ds, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        print(f"deltashell: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ds = run_scan(spec)
    for note in ds.warnings:
        print(f"deltashell: warning: {note}", file=sys.stderr)
    try:
        emit(ds, spec.fmt, spec.out)
    except OSError as exc:
        print(f"deltashell: {exc}", file=sys.stderr)
        return EXIT_IO
    if spec.strict and any(f.startswith("error") for f in ds.flags):
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
