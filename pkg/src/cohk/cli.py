"""Command-line experiment runner.

``cohk run config.json`` executes one experiment described by a JSON
config, prints a check-by-check summary, and writes CSV data files plus
``report.json`` into the output directory.  ``cohk list`` prints the
experiment table.  Exit codes: 0 every check passed, 1 a check failed,
2 the config was rejected.

The config is a single JSON object::

    {"space": {"kind": "klauder", "dim": 1},
     "experiment": "spectrum",
     "params": {"t_max": 251.327, "E_step": 0.01},
     "output": {"path": "out", "format": "csv"}}

Complex values are written as two-element arrays [re, im]; plain numbers
are accepted where the imaginary part is zero.  Unknown keys anywhere in
the config are rejected with the offending path, so a typo fails loudly
instead of silently running a default.

Reports are deterministic: the same config, seed, and library version
reproduce every output file byte for byte.  Wall time is printed to
stdout but kept out of report.json for exactly that reason.  The seed
defaults to 0xC0FFEE and is echoed in the report; COHK_THREADS caps the
worker threads used for independent sweep points (the fan-out never
changes results, only speed, because all random draws happen up front on
the main thread).
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .catalog import (
    geometry_report,
    infinitesimal_cs_margin,
    make_space,
    wtg_matrix,
)
from .core import DEFAULT_SEED, DomainError, gram, psd_check
from .dynamics import HamiltonianSpec, autocorrelation, df_action, el_integrate, propagate_ode
from .fock import (
    OscGenerator,
    ccr_epsilon_check,
    gamma_colon_residual,
    gen_block,
    klauder_kernel,
    osc_act,
    osc_from_block,
    weyl_relation_residuals,
)
from .spectral import (
    oscillator_series,
    resolvent_element,
    resolvent_equation_residual,
    resolvent_symmetry_residual,
    schwinger_dyson_residual,
    spectral_density,
    spectrum_scan,
)

__all__ = ["ConfigError", "RunReport", "main", "run_config"]


class ConfigError(ValueError):
    """Config rejected; the message names the offending path or key."""


# ---------------------------------------------------------------------------
# config parsing helpers


def _as_float(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    return float(v)


def _as_int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer")
    return v


def _as_bool(v, path):
    if not isinstance(v, bool):
        raise ConfigError(f"{path}: expected true or false")
    return v


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _as_complex(v, path):
    """A number, or an [re, im] pair."""
    if _is_num(v):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(_is_num(x) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{path}: expected a number or an [re, im] pair")


def _as_complex_vector(v, path, length=None):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a coordinate array")
    out = np.array([_as_complex(x, f"{path}[{i}]") for i, x in enumerate(v)])
    if length is not None and len(out) != length:
        raise ConfigError(f"{path}: expected {length} coordinates, got {len(out)}")
    return out


def _as_complex_matrix(v, path, n):
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(f"{path}: expected {n} rows")
    return np.array([_as_complex_vector(row, f"{path}[{i}]", n) for i, row in enumerate(v)])


_SPACE_KEYS = {
    "euclidean": {"dim"},
    "hermitian": {"dim"},
    "sphere": {"dim"},
    "klauder": {"dim"},
    "reciprocal": set(),
    "szego": set(),
    "schur": {"preset"},
    "debranges": {"preset"},
}

_SCALAR_KINDS = {"reciprocal", "szego", "schur", "debranges"}


def _build_space(desc, path="space"):
    if not isinstance(desc, dict):
        raise ConfigError(f"{path}: expected an object with a 'kind' key")
    kind = desc.get("kind")
    if kind not in _SPACE_KEYS:
        known = ", ".join(sorted(_SPACE_KEYS))
        raise ConfigError(f"{path}.kind: unknown space kind {kind!r} (one of: {known})")
    for key in desc:
        if key != "kind" and key not in _SPACE_KEYS[kind]:
            raise ConfigError(f"{path}.{key}: unknown key for a {kind} space")
    if "dim" in desc:
        dim = _as_int(desc["dim"], f"{path}.dim")
        if dim < 1:
            raise ConfigError(f"{path}.dim: must be at least 1")
    if "preset" in desc and not isinstance(desc["preset"], str):
        raise ConfigError(f"{path}.preset: expected a string")
    try:
        return make_space(desc), kind
    except DomainError as err:
        raise ConfigError(f"{path}: {err}") from None


def _parse_point(space, kind, v, path):
    """One point in the space's label chart.

    Scalar-label spaces take a number or [re, im]; the vector spaces take
    an array of those.  Real charts (euclidean coordinates, reciprocal
    points) reject nonzero imaginary parts.
    """
    if kind in _SCALAR_KINDS:
        c = _as_complex(v, path)
        if kind == "reciprocal":
            if c.imag != 0.0:
                raise ConfigError(f"{path}: reciprocal points are real")
            coords = c.real
        else:
            coords = c
    else:
        arr = _as_complex_vector(v, path)
        if kind == "euclidean":
            if np.any(arr.imag != 0.0):
                raise ConfigError(f"{path}: euclidean coordinates must be real")
            coords = arr.real
        else:
            coords = arr
    try:
        return space.validate(coords)
    except DomainError as err:
        raise ConfigError(f"{path}: {err}") from None


def _parse_generator(params, dim, path="params"):
    """params.gen as {rho, p, q, X}, or a harmonic generator from omega0."""
    gd = params.get("gen")
    if gd is None:
        omega = _as_float(params["omega0"], f"{path}.omega0")
        return OscGenerator(0.0, np.zeros(dim), np.zeros(dim), omega * np.eye(dim))
    if not isinstance(gd, dict):
        raise ConfigError(f"{path}.gen: expected an object with rho/p/q/X")
    for key in gd:
        if key not in ("rho", "p", "q", "X"):
            raise ConfigError(f"{path}.gen.{key}: unknown generator key")
    rho = _as_complex(gd.get("rho", 0.0), f"{path}.gen.rho")
    p = _as_complex_vector(gd.get("p", [0.0] * dim), f"{path}.gen.p", dim)
    q = _as_complex_vector(gd.get("q", [0.0] * dim), f"{path}.gen.q", dim)
    if "X" in gd:
        X = _as_complex_matrix(gd["X"], f"{path}.gen.X", dim)
    else:
        X = np.eye(dim, dtype=complex)
    return OscGenerator(rho, p, q, X)


def _default_label(dim):
    # the label used throughout the docs: z0 = -1/2 keeps K(z,z) = 1 at dim 1
    return np.array([-0.5] + [1.0] * dim, dtype=complex)


def _parse_label(space, params, name, dim, default=None):
    v = params.get(name)
    if v is None:
        return space.validate(default if default is not None else _default_label(dim))
    return _parse_point(space, "klauder", v, f"params.{name}")


def _require_klauder(kind, experiment):
    if kind != "klauder":
        raise ConfigError(
            f"space.kind: the {experiment} experiment runs on a klauder space"
        )


# ---------------------------------------------------------------------------
# report plumbing


@dataclass
class Check:
    """One named numeric compared against the tolerance it shipped with."""

    name: str
    value: float
    tolerance: float
    comparison: str  # "<=" or ">="
    passed: bool


def _check_le(name, value, tol):
    return Check(name, float(value), float(tol), "<=", bool(value <= tol))


def _check_ge(name, value, tol):
    return Check(name, float(value), float(tol), ">=", bool(value >= tol))


@dataclass
class RunReport:
    experiment: str
    space: dict
    seed: int
    library_version: str
    checks: list
    passed: bool
    data_files: list
    params: dict
    wall_time_s: float = 0.0

    def to_json(self):
        """Report file payload; wall time stays out so reruns are identical."""
        return {
            "experiment": self.experiment,
            "space": self.space,
            "seed": self.seed,
            "library_version": self.library_version,
            "params": _jsonable(self.params),
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "tolerance": c.tolerance,
                    "comparison": c.comparison,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "passed": self.passed,
            "data_files": self.data_files,
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(outdir, name, header, rows, files):
    with open(os.path.join(outdir, name), "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    files.append(name)


def _worker_count():
    env = os.environ.get("COHK_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError("COHK_THREADS: expected an integer") from None
        if cap < 1:
            raise ConfigError("COHK_THREADS: must be at least 1")
    else:
        cap = 4
    return max(1, min(cap, os.cpu_count() or 1))


def _fan_out(fn, items):
    """Ordered map over independent work items, threads capped by COHK_THREADS."""
    items = list(items)
    n = _worker_count()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    doc: str


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: tuple
    runner: object = field(repr=False, default=None)


@dataclass
class RunContext:
    space: object
    kind: str
    params: dict
    rng: np.random.Generator
    outdir: str
    files: list


def _resolve_params(exp, raw):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("params: expected an object")
    allowed = {p.name: p for p in exp.params}
    for key in raw:
        if key not in allowed and key != "seed":
            raise ConfigError(f"params.{key}: unknown parameter for {exp.name}")
    resolved = {p.name: p.default for p in exp.params}
    resolved.update({k: v for k, v in raw.items() if k != "seed"})
    return resolved


def _run_gram_psd(ctx):
    p = ctx.params
    samples = _as_int(p["samples"], "params.samples")
    n_points = _as_int(p["n_points"], "params.n_points")
    tol_rel = _as_float(p["tol_rel"], "params.tol_rel")
    tol_abs = _as_float(p["tol_abs"], "params.tol_abs")
    if p["points"] is not None:
        if not isinstance(p["points"], list) or len(p["points"]) < 2:
            raise ConfigError("params.points: expected at least two points")
        sets = [[_parse_point(ctx.space, ctx.kind, v, f"params.points[{i}]")
                 for i, v in enumerate(p["points"])]]
    else:
        if samples < 1 or n_points < 2:
            raise ConfigError("params.samples/params.n_points: need >= 1 sample of >= 2 points")
        sets = [ctx.space.sample_points(ctx.rng, n_points) for _ in range(samples)]

    def one(pts):
        g = gram(ctx.space, ctx.space.stack(pts))
        return psd_check(g, tol_rel=tol_rel, tol_abs=tol_abs)

    reports = _fan_out(one, sets)
    rows = [
        (i, r.min_eigenvalue, r.max_eigenvalue, r.hermiticity_defect)
        for i, r in enumerate(reports)
    ]
    _write_csv(ctx.outdir, "gram_eigs.csv",
               ["sample", "min_eig", "max_eig", "herm_defect"], rows, ctx.files)
    worst = min(reports, key=lambda r: r.min_eigenvalue)
    floor = -tol_abs - tol_rel * max(1.0, worst.max_eigenvalue)
    checks = [
        Check("min_eigenvalue", worst.min_eigenvalue, floor, ">=",
              all(r.passed for r in reports)),
        _check_le("hermiticity_defect",
                  max(r.hermiticity_defect for r in reports), 1e-12),
    ]
    return checks


def _run_geometry_check(ctx):
    p = ctx.params
    cases = _as_int(p["cases"], "params.cases")
    rel_tol = _as_float(p["rel_tol"], "params.rel_tol")
    margin_tol = _as_float(p["margin_tol"], "params.margin_tol")
    if cases < 1:
        raise ConfigError("params.cases: need at least one case")
    draws = []
    for _ in range(cases):
        z = ctx.space.sample_point(ctx.rng)
        X = ctx.space.sample_tangent(z, ctx.rng)
        Y = ctx.space.sample_tangent(z, ctx.rng)
        draws.append((z, X, Y))

    def one(case):
        z, X, Y = case
        rep = geometry_report(ctx.space, z, X, Y)
        scale = max(1.0, abs(complex(ctx.space.kernel(z, z))) ** 2)
        margin = infinitesimal_cs_margin(ctx.space, z, X) / scale
        wtg = psd_check(wtg_matrix(ctx.space, z, X), tol_rel=1e-7, tol_abs=1e-8)
        return rep, margin, wtg

    results = _fan_out(one, draws)
    rows = [
        (i, r.rel_discrepancies[0], r.rel_discrepancies[1], r.rel_discrepancies[2],
         m, w.min_eigenvalue)
        for i, (r, m, w) in enumerate(results)
    ]
    _write_csv(ctx.outdir, "geometry_cases.csv",
               ["case", "rel_g", "rel_theta", "rel_omega", "cs_margin", "wtg_min_eig"],
               rows, ctx.files)
    closed_rels = [max(r.rel_discrepancies[:2]) for r, _, _ in results
                   if r.provenance == "closed"]
    checks = [
        _check_le("closed_vs_fd_rel", max(closed_rels) if closed_rels else 0.0, rel_tol),
        _check_ge("cs_margin_over_scale", min(m for _, m, _ in results), -margin_tol),
        Check("wtg_min_eigenvalue",
              min(w.min_eigenvalue for _, _, w in results), -1e-8, ">=",
              all(w.passed for _, _, w in results)),
    ]
    return checks


def _run_weyl_check(ctx):
    _require_klauder(ctx.kind, "weyl-check")
    p = ctx.params
    samples = _as_int(p["samples"], "params.samples")
    tol = _as_float(p["tol"], "params.tol")
    if samples < 1:
        raise ConfigError("params.samples: need at least one sample")
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    pairs = [(ctx.space.sample_point(ctx.rng), ctx.space.sample_point(ctx.rng))
             for _ in range(samples)]

    def cvec():
        return ctx.rng.standard_normal(dim) + 1j * ctx.rng.standard_normal(dim)

    pv, qv, ppv, qpv = cvec(), cvec(), cvec(), cvec()
    rep = weyl_relation_residuals(pv, qv, ppv, qpv, pairs)
    rho = complex(ctx.rng.standard_normal() + 1j * ctx.rng.standard_normal())
    X = (ctx.rng.standard_normal((dim, dim)) + 1j * ctx.rng.standard_normal((dim, dim))) / 2.0
    colon = gamma_colon_residual(rho, cvec(), cvec(), X, pairs)
    rows = [
        ("exchange", rep.exchange, rep.scale),
        ("composition", rep.composition, rep.scale),
        ("inverse", rep.inverse, rep.scale),
        ("swap", rep.swap, rep.scale),
        ("group_commutator", rep.group_commutator, rep.scale),
        ("normal_ordering", colon, 1.0),
    ]
    _write_csv(ctx.outdir, "weyl_residuals.csv",
               ["identity", "residual", "scale"], rows, ctx.files)
    checks = [
        _check_le("weyl_max_residual_over_scale", rep.max_residual / rep.scale, tol),
        _check_le("normal_ordering_residual", colon, tol),
    ]
    return checks


def _run_ccr_check(ctx):
    _require_klauder(ctx.kind, "ccr-check")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    pv = _as_complex_vector(p["p"], "params.p", dim) if p["p"] is not None else np.ones(dim)
    qv = _as_complex_vector(p["q"], "params.q", dim) if p["q"] is not None else np.ones(dim)
    z = _parse_label(ctx.space, p, "z", dim, default=np.zeros(dim + 1))
    zp = _parse_label(ctx.space, p, "zp", dim, default=np.zeros(dim + 1))
    eps0 = _as_float(p["eps0"], "params.eps0")
    levels = _as_int(p["levels"], "params.levels")
    tol = _as_float(p["tol"], "params.tol")
    if not 0 < eps0 <= 1:
        raise ConfigError("params.eps0: expected a step in (0, 1]")
    if levels < 2:
        raise ConfigError("params.levels: need at least two halving levels")
    eps_list = [eps0 / 2 ** j for j in range(levels)]
    rep = ccr_epsilon_check(pv, qv, z, zp, eps_list)
    rows = [
        (e, d.real, d.imag, (d / e ** 2).real, (d / e ** 2).imag)
        for e, d in zip(eps_list, rep.deltas)
    ]
    _write_csv(ctx.outdir, "ccr_deltas.csv",
               ["eps", "delta_re", "delta_im", "quot_re", "quot_im"], rows, ctx.files)
    scale = max(1.0, abs(klauder_kernel(z, zp)))
    checks = [_check_le("ccr_product_residual_over_scale",
                        rep.residual_product / scale, tol)]
    return checks


def _traj_csv(ctx, name, traj):
    coords = np.stack([np.atleast_1d(np.asarray(pt, dtype=complex))
                       for pt in traj.points])
    header = ["t"]
    for j in range(coords.shape[1]):
        header += [f"re{j}", f"im{j}"]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t]
        for j in range(coords.shape[1]):
            row += [coords[i, j].real, coords[i, j].imag]
        rows.append(row)
    _write_csv(ctx.outdir, name, header, rows, ctx.files)


def _run_dynamics(ctx):
    _require_klauder(ctx.kind, "dynamics")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    gen = _parse_generator(p, dim)
    z0 = _parse_label(ctx.space, p, "z0", dim)
    t_end = _as_float(p["t_end"], "params.t_end")
    dt = _as_float(p["dt"], "params.dt")
    err_tol = _as_float(p["err_tol"], "params.err_tol")
    norm_tol = _as_float(p["norm_tol"], "params.norm_tol")
    if t_end <= 0 or dt <= 0:
        raise ConfigError("params.t_end/params.dt: must be positive")
    ham = HamiltonianSpec(gen=gen)
    traj = propagate_ode(ctx.space, ham, z0, t_end, dt)
    _traj_csv(ctx, "trajectory.csv", traj)
    series = autocorrelation(ctx.space, z0, traj)
    rows = [(t, v.real, v.imag) for t, v in zip(series.times, series.values)]
    _write_csv(ctx.outdir, "autocorr.csv", ["t", "re", "im"], rows, ctx.files)

    from scipy.linalg import expm

    step = osc_from_block(expm(-1j * dt * gen_block(gen)))
    exact = np.asarray(z0, dtype=complex)
    err = 0.0
    for pt in traj.points[1:]:
        exact = osc_act(step, exact)
        err = max(err, float(np.max(np.abs(np.asarray(pt) - exact))))
    checks = [_check_le("max_coordinate_error", err, err_tol)]

    adj = gen.adjoint()
    self_adjoint = (
        abs(gen.rho - adj.rho) <= 1e-12
        and np.allclose(gen.p, adj.p, atol=1e-12)
        and np.allclose(gen.X, adj.X, atol=1e-12)
    )
    if self_adjoint:
        norms = np.array([complex(ctx.space.kernel(pt, pt)).real for pt in traj.points])
        drift = float(np.max(np.abs(norms - norms[0])) / norms[0])
        checks.append(_check_le("norm_drift_rel", drift, norm_tol))
    return checks


def _run_spectrum(ctx):
    _require_klauder(ctx.kind, "spectrum")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    gen = _parse_generator(p, dim)
    z = _parse_label(ctx.space, p, "z", dim)
    zp = ctx.space.validate(z.copy()) if p["zp"] is None else _parse_label(
        ctx.space, p, "zp", dim)
    t_max = _as_float(p["t_max"], "params.t_max")
    dt = _as_float(p["dt"], "params.dt")
    e_min = _as_float(p["E_min"], "params.E_min")
    e_max = _as_float(p["E_max"], "params.E_max")
    e_step = _as_float(p["E_step"], "params.E_step")
    floor = _as_float(p["floor"], "params.floor")
    eta = _as_float(p["eta"], "params.eta")
    comp_tol = _as_float(p["completeness_tol"], "params.completeness_tol")
    if e_max <= e_min or e_step <= 0:
        raise ConfigError("params.E_min/E_max/E_step: expected an increasing grid")
    if eta <= 0:
        raise ConfigError("params.eta: must be positive")
    grid = np.arange(e_min, e_max + e_step * 0.5, e_step)
    same_label = np.allclose(z, zp)
    series = oscillator_series(gen, z, zp, t_max, dt)
    swapped = None if same_label else oscillator_series(gen, zp, z, t_max, dt)
    lines = spectrum_scan(series, grid, swapped=swapped, floor=floor)
    _write_csv(ctx.outdir, "lines.csv", ["E", "weight"],
               [(l.energy, l.weight) for l in lines], ctx.files)
    ham = HamiltonianSpec(gen=gen)
    dens = spectral_density(ctx.space, ham, z, zp, grid, eta, dt=dt)
    _write_csv(ctx.outdir, "density.csv", ["E", "density"],
               list(zip(grid, dens)), ctx.files)
    checks = [_check_ge("lines_found", float(len(lines)), 1.0)]
    if same_label and lines:
        # completeness: the scan weights are real and sum to K(z,z) when the
        # grid covers the support; off the diagonal the scan only reports
        # magnitudes, so the comparison is not meaningful there
        ksum = sum(l.weight for l in lines)
        kref = complex(ctx.space.kernel(z, zp)).real
        checks.append(_check_le("weight_sum_vs_kernel",
                                abs(ksum - kref) / max(1.0, abs(kref)), comp_tol))
        checks.append(_check_ge("density_min", float(np.min(dens)), -1e-6))
    return checks


def _run_resolvent(ctx):
    _require_klauder(ctx.kind, "resolvent")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    gen = _parse_generator(p, dim)
    z = _parse_label(ctx.space, p, "z", dim)
    zp = ctx.space.validate(z.copy()) if p["zp"] is None else _parse_label(
        ctx.space, p, "zp", dim)
    E = _as_complex(p["E"], "params.E")
    dt = _as_float(p["dt"], "params.dt")
    t_max = _as_float(p["t_max"], "params.t_max")
    eq_tol = _as_float(p["eq_tol"], "params.eq_tol")
    sym_tol = _as_float(p["sym_tol"], "params.sym_tol")
    if E.imag <= 0:
        raise ConfigError("params.E: needs a positive imaginary part")
    ham = HamiltonianSpec(gen=gen)
    g = resolvent_element(ctx.space, ham, z, zp, E, t_max=t_max, dt=dt).value
    _write_csv(ctx.outdir, "resolvent.csv", ["E_re", "E_im", "G_re", "G_im"],
               [(E.real, E.imag, g.real, g.imag)], ctx.files)
    eq = resolvent_equation_residual(ctx.space, ham, z, zp, E, t_max=t_max, dt=dt)
    sym = resolvent_symmetry_residual(ctx.space, ham, z, zp, E, t_max=t_max, dt=dt)
    scale = max(1.0, abs(complex(ctx.space.kernel(z, zp))))
    checks = [
        _check_le("resolvent_equation_residual", eq, eq_tol),
        _check_le("symmetry_residual_over_scale", sym / scale, sym_tol),
    ]
    return checks


def _quadratic_energy(space):
    """H(z) = K(z,z) |zhat|^2, the matrix element of the number operator."""

    def H(z):
        zhat = np.asarray(z, dtype=complex)[1:]
        return complex(space.kernel(z, z)).real * float(np.vdot(zhat, zhat).real)

    return H


def _run_df_propagate(ctx):
    _require_klauder(ctx.kind, "df-propagate")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    z0 = _parse_label(ctx.space, p, "z0", dim)
    t_end = _as_float(p["t_end"], "params.t_end")
    dt = _as_float(p["dt"], "params.dt")
    angle_tol = _as_float(p["angle_tol"], "params.angle_tol")
    exponent_tol = _as_float(p["exponent_tol"], "params.exponent_tol")
    stationarity = _as_bool(p["stationarity"], "params.stationarity")
    if t_end <= 0 or dt <= 0:
        raise ConfigError("params.t_end/params.dt: must be positive")
    if np.all(np.abs(np.asarray(z0)[1:]) < 1e-12):
        raise ConfigError("params.z0: the orbit angle needs a nonzero mode coordinate")
    ham = HamiltonianSpec(H=_quadratic_energy(ctx.space))
    traj = el_integrate(ctx.space, ham, z0, t_end, dt)
    _traj_csv(ctx, "trajectory.csv", traj)
    t_fin = float(traj.times[-1])
    got = np.asarray(traj.points[-1], dtype=complex)
    want = np.asarray(z0, dtype=complex).copy()
    want[1:] *= np.exp(-1j * t_fin)
    ang = 0.0
    for a, b in zip(got[1:], want[1:]):
        if abs(b) < 1e-12:
            continue
        d = np.angle(a) - np.angle(b)
        ang = max(ang, abs(math.atan2(math.sin(d), math.cos(d))))
    checks = [
        _check_le("orbit_angle_error", ang, angle_tol),
        _check_le("mode_magnitude_drift",
                  float(np.max(np.abs(np.abs(got[1:]) - np.abs(want[1:])))), 1e-6),
    ]
    if stationarity:
        from .dynamics import Trajectory

        base = el_integrate(ctx.space, ham, z0, 1.0, 5e-3)
        s0 = df_action(base, ham, ctx.space)
        n = len(base.points)
        bump = np.array([0.3 + 0.2j] + [1.0 - 0.5j] * dim)
        amps = np.sin(np.pi * np.arange(n) / (n - 1))

        def action_at(epsv):
            pts = [base.points[i] + epsv * amps[i] * bump for i in range(n)]
            return df_action(Trajectory(base.times, pts), ham, ctx.space)

        d1 = abs(action_at(0.02) - s0)
        d2 = abs(action_at(0.04) - s0)
        expo = math.log2(d2 / d1)
        checks.append(_check_le("stationarity_exponent_gap",
                                abs(expo - 2.0), exponent_tol))
    return checks


def _run_sd_residual(ctx):
    _require_klauder(ctx.kind, "sd-residual")
    p = ctx.params
    dim = ctx.space.sample_point(ctx.rng).shape[0] - 1
    gen = _parse_generator(p, dim)
    samples = _as_int(p["samples"], "params.samples")
    t_max = _as_float(p["t_max"], "params.t_max")
    tol = _as_float(p["tol"], "params.tol")
    E = _as_complex(p["E"], "params.E")
    eq_tol = _as_float(p["eq_tol"], "params.eq_tol")
    if samples < 1 or t_max <= 0:
        raise ConfigError("params.samples/params.t_max: must be positive")
    if E.imag <= 0:
        raise ConfigError("params.E: needs a positive imaginary part")
    ham = HamiltonianSpec(gen=gen)
    draws = []
    for _ in range(samples):
        z = ctx.space.sample_point(ctx.rng)
        zp = ctx.space.sample_point(ctx.rng)
        t = float(ctx.rng.uniform(0.0, t_max))
        draws.append((z, zp, t))

    def one(case):
        z, zp, t = case
        return schwinger_dyson_residual(ctx.space, ham, z, zp, t)

    residuals = _fan_out(one, draws)
    rows = [(i, d[2], r) for i, (d, r) in enumerate(zip(draws, residuals))]
    _write_csv(ctx.outdir, "sd_residuals.csv", ["sample", "t", "residual"],
               rows, ctx.files)
    zd = ctx.space.validate(_default_label(dim))
    eq = resolvent_equation_residual(ctx.space, ham, zd, zd, E)
    checks = [
        _check_le("sd_max_residual", max(residuals), tol),
        _check_le("resolvent_equation_residual", eq, eq_tol),
    ]
    return checks


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment(
            "gram-psd",
            "Gram matrices of sampled (or given) point sets pass the PSD check.",
            (
                Param("points", None, "explicit points; omit to sample"),
                Param("samples", 10, "number of seeded point sets"),
                Param("n_points", 20, "points per set"),
                Param("tol_rel", 1e-10, "relative eigenvalue floor"),
                Param("tol_abs", 1e-12, "absolute eigenvalue floor"),
            ),
            _run_gram_psd,
        ),
        Experiment(
            "geometry-check",
            "Closed-form metric/1-form vs finite differences; infinitesimal "
            "Cauchy-Schwarz margins and 2x2 kernel-jet PSD.",
            (
                Param("cases", 100, "seeded (z, X, Y) samples"),
                Param("rel_tol", 1e-5, "closed-vs-FD relative tolerance"),
                Param("margin_tol", 1e-8, "allowed negative margin over scale"),
            ),
            _run_geometry_check,
        ),
        Experiment(
            "weyl-check",
            "Weyl operator identities (exchange, composition, inverse, swap, "
            "group commutator) and the normal-ordering identity.",
            (
                Param("samples", 100, "seeded (z, z') label pairs"),
                Param("tol", 1e-12, "residual tolerance over scale"),
            ),
            _run_weyl_check,
        ),
        Experiment(
            "ccr-check",
            "eps^2 slope of the ordered-exponential commutator defect against "
            "the canonical commutation value.",
            (
                Param("p", None, "left exponent vector (default all ones)"),
                Param("q", None, "right exponent vector (default all ones)"),
                Param("z", None, "left label (default origin)"),
                Param("zp", None, "right label (default origin)"),
                Param("eps0", 0.1, "largest epsilon"),
                Param("levels", 6, "halvings of eps0"),
                Param("tol", 1e-6, "slope tolerance over scale"),
            ),
            _run_ccr_check,
        ),
        Experiment(
            "dynamics",
            "RK4 label trajectory vs the exact flow of an oscillator "
            "generator; norm conservation when self-adjoint.",
            (
                Param("gen", None, "generator {rho, p, q, X}"),
                Param("omega0", 1.0, "harmonic frequency when gen is omitted"),
                Param("z0", None, "initial label (default [-1/2, 1, ...])"),
                Param("t_end", 10.0, "integration horizon"),
                Param("dt", 1e-3, "RK4 step"),
                Param("err_tol", 1e-8, "max coordinate error tolerance"),
                Param("norm_tol", 1e-8, "relative norm drift tolerance"),
            ),
            _run_dynamics,
        ),
        Experiment(
            "spectrum",
            "Windowed line extraction and eta-broadened density from the "
            "autocorrelation series.",
            (
                Param("gen", None, "generator {rho, p, q, X}"),
                Param("omega0", 1.0, "harmonic frequency when gen is omitted"),
                Param("z", None, "left label (default [-1/2, 1, ...])"),
                Param("zp", None, "right label (default z)"),
                Param("t_max", 400.0 * math.pi, "series horizon"),
                Param("dt", 0.05, "series step"),
                Param("E_min", -0.5, "energy grid start"),
                Param("E_max", 6.5, "energy grid end"),
                Param("E_step", 0.002, "energy grid spacing"),
                Param("floor", 1e-4, "line detection floor (relative)"),
                Param("eta", 0.05, "density broadening"),
                Param("completeness_tol", 1e-3, "weight-sum vs kernel tolerance"),
            ),
            _run_spectrum,
        ),
        Experiment(
            "resolvent",
            "Resolvent matrix element by damped quadrature, with the "
            "resolvent-identity and symmetry residuals.",
            (
                Param("gen", None, "generator {rho, p, q, X}"),
                Param("omega0", 1.0, "harmonic frequency when gen is omitted"),
                Param("z", None, "left label (default [-1/2, 1, ...])"),
                Param("zp", None, "right label (default z)"),
                Param("E", [0.5, 0.1], "complex energy [re, im], im > 0"),
                Param("dt", 1e-2, "quadrature step"),
                Param("t_max", 0.0, "horizon (0 = auto from Im E)"),
                Param("eq_tol", 1e-4, "resolvent-identity residual tolerance"),
                Param("sym_tol", 1e-10, "conjugate-symmetry tolerance over scale"),
            ),
            _run_resolvent,
        ),
        Experiment(
            "df-propagate",
            "Variational label flow for the quadratic energy: orbit angle vs "
            "the exact rotation plus an action-stationarity probe.",
            (
                Param("z0", None, "initial label (default [-1/2, 1, ...])"),
                Param("t_end", 10.0, "integration horizon"),
                Param("dt", 1e-3, "RK4 step"),
                Param("angle_tol", 1e-6, "orbit angle tolerance (radians)"),
                Param("stationarity", True, "probe the action exponent"),
                Param("exponent_tol", 0.1, "allowed deviation from exponent 2"),
            ),
            _run_df_propagate,
        ),
        Experiment(
            "sd-residual",
            "Time-derivative identity of the autocorrelation kernel on seeded "
            "labels, plus one resolvent-identity spot check.",
            (
                Param("gen", None, "generator {rho, p, q, X}"),
                Param("omega0", 1.0, "harmonic frequency when gen is omitted"),
                Param("samples", 20, "seeded (z, z', t) draws"),
                Param("t_max", 2.0, "largest sampled time"),
                Param("tol", 1e-6, "derivative residual tolerance"),
                Param("E", [0.5, 0.1], "energy for the spot check"),
                Param("eq_tol", 1e-4, "spot-check residual tolerance"),
            ),
            _run_sd_residual,
        ),
    ]
}


# ---------------------------------------------------------------------------
# entry points


def _load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror or err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a single top-level object")
    for key in raw:
        if key not in ("space", "experiment", "params", "output"):
            raise ConfigError(f"{key}: unknown top-level key")
    for key in ("space", "experiment"):
        if key not in raw:
            raise ConfigError(f"{key}: missing required top-level key")
    return raw


def _resolve_output(raw, out_flag):
    out = raw.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output: expected an object")
    for key in out:
        if key not in ("path", "format"):
            raise ConfigError(f"output.{key}: unknown key")
    fmt = out.get("format", "csv")
    if fmt != "csv":
        raise ConfigError(f"output.format: unsupported format {fmt!r} (only csv)")
    path = out_flag if out_flag is not None else out.get("path", ".")
    if not isinstance(path, str):
        raise ConfigError("output.path: expected a string")
    return path


def run_config(config_path, out_flag=None, seed_flag=None):
    """Execute one experiment config; returns the RunReport."""
    t_start = time.perf_counter()
    raw = _load_config(config_path)
    space, kind = _build_space(raw["space"])
    name = raw["experiment"]
    if not isinstance(name, str) or name not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise ConfigError(f"experiment: unknown experiment {name!r} (one of: {known})")
    exp = EXPERIMENTS[name]
    params = _resolve_params(exp, raw.get("params"))
    raw_params = raw.get("params") or {}
    if seed_flag is not None:
        seed = seed_flag
    elif "seed" in raw_params:
        seed = _as_int(raw_params["seed"], "params.seed")
    else:
        seed = DEFAULT_SEED
    if seed < 0:
        raise ConfigError("params.seed: must be nonnegative")
    outdir = _resolve_output(raw, out_flag)
    os.makedirs(outdir, exist_ok=True)

    ctx = RunContext(
        space=space,
        kind=kind,
        params=params,
        rng=np.random.default_rng(seed),
        outdir=outdir,
        files=[],
    )
    try:
        checks = exp.runner(ctx)
    except DomainError as err:
        raise ConfigError(f"params: {err}") from None
    report = RunReport(
        experiment=name,
        space=raw["space"],
        seed=seed,
        library_version=__version__,
        checks=checks,
        passed=all(c.passed for c in checks),
        data_files=list(ctx.files),
        params=params,
        wall_time_s=0.0,
    )
    payload = json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        fh.write(payload)
    report.data_files.append("report.json")
    report.wall_time_s = time.perf_counter() - t_start
    return report


def _print_report(report):
    print(f"experiment: {report.experiment}  seed: {report.seed:#x}"
          f"  version: {report.library_version}")
    for c in report.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"[{mark}] {c.name}: value={c.value:.6g} tolerance={c.tolerance:.6g}"
              f" ({c.comparison})")
    print("files: " + ", ".join(report.data_files))
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict} (wall time {report.wall_time_s:.2f} s)")


def _print_experiments():
    print("experiments:")
    for name in sorted(EXPERIMENTS):
        exp = EXPERIMENTS[name]
        print(f"\n{name}")
        print(f"  {exp.description}")
        print("  params (all optional; 'seed' is accepted everywhere):")
        for p in exp.params:
            default = "sampled/derived" if p.default is None else repr(p.default)
            print(f"    {p.name:<18} default {default:<22} {p.doc}")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cohk",
        description="coherent-space experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--seed", type=int, default=None, help="seed override")
    sub.add_parser("list", help="describe the available experiments")
    args = parser.parse_args(argv)

    if args.command == "list":
        _print_experiments()
        return 0

    try:
        report = run_config(args.config, out_flag=args.out, seed_flag=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    _print_report(report)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
