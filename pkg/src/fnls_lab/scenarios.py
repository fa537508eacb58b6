"""Scenario configs, initial data and the pipelines behind ``fnls-lab run``."""

from __future__ import annotations

import copy
import logging
import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diagnostics as diag
from .checkpoint import CheckpointError, read_checkpoint, write_checkpoint
from .dynamics import (
    EvolveConfig,
    Monitors,
    TimeSeries,
    dyadic_increments,
    dyadic_windows,
    evolve,
)
from .grid import ComplexField, Grid, GridError, PhysParams, make_grid
from .groundstate import (
    GroundStateError,
    GroundStateReport,
    classify_initial_data,
    petviashvili_solve,
    pohozaev_soliton_check,
)
from .quadrature import beta_integral_closed_form, build_lambda_quadrature, default_lambda_scale
from .reporting import (
    DiagnosticRecord,
    emit_series,
    ensure_dir,
    write_json,
    write_records,
    write_scan_csv,
)
from .spectral import wrap_time
from .weights import build_distance_weight, build_morawetz_weight

log = logging.getLogger(__name__)

KINDS = (
    "ground-state",
    "dichotomy",
    "virial-check",
    "balakrishnan-check",
    "morawetz",
    "dispersive",
    "defocusing",
    "soliton",
)

EXIT_OK, EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_BLOWUP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- config parsing ---------------------------------------------------------------

_PI_RE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_length(value) -> float:
    """Numbers pass through; strings like ``"10pi"`` or ``"10*pi"`` are expanded."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = m.group(1)
            return (float(coef) if coef not in ("", "+") else 1.0) * math.pi
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"cannot interpret length {value!r}")


def _require(mapping: dict, key: str, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"missing '{key}' in {where}")
    return mapping[key]


def parse_grid(spec: dict, where: str = "grid") -> Grid:
    try:
        return make_grid(int(_require(spec, "d", where)), int(_require(spec, "n", where)), parse_length(_require(spec, "l", where)))
    except (GridError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_params(spec: dict) -> PhysParams:
    try:
        return PhysParams(float(_require(spec, "s", "params")), float(_require(spec, "p", "params")), spec.get("sign", "focusing"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from exc


def parse_evolve(spec: dict | None) -> EvolveConfig | None:
    if spec is None:
        return None
    allowed = {"dt", "t_end", "callback_stride", "blowup_hs_factor", "tail_fraction_max", "checkpoint_stride"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown evolve keys: {sorted(unknown)}")
    try:
        return EvolveConfig(**spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"evolve: {exc}") from exc


@dataclass
class Scenario:
    kind: str
    name: str
    params: PhysParams
    grid: Grid
    evolve: EvolveConfig | None
    initial: dict
    ground_state: dict
    diagnostics: dict
    expect: dict
    base_dir: str = "."
    raw: dict = field(default_factory=dict, repr=False)


def parse_scenario(cfg: dict, base_dir: str = ".") -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {', '.join(KINDS)}")
    params = parse_params(_require(cfg, "params", "config"))
    grid = parse_grid(_require(cfg, "grid", "config"))
    evo = parse_evolve(cfg.get("evolve"))
    if kind in ("dichotomy", "virial-check", "morawetz", "defocusing", "soliton") and evo is None:
        raise ConfigError(f"scenario kind {kind!r} needs an 'evolve' section")
    initial = cfg.get("initial", {"type": "gaussian", "amplitude": 1.0, "width": 1.0})
    if not isinstance(initial, dict) or "type" not in initial:
        raise ConfigError("initial-data spec must be an object with a 'type'")
    return Scenario(
        kind=kind,
        name=str(cfg.get("name", kind)),
        params=params,
        grid=grid,
        evolve=evo,
        initial=initial,
        ground_state=cfg.get("ground_state", {}) or {},
        diagnostics=cfg.get("diagnostics", {}) or {},
        expect=cfg.get("expect", {}) or {},
        base_dir=base_dir,
        raw=cfg,
    )


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


# -- initial data ------------------------------------------------------------------

def gaussian(grid: Grid, amplitude: float = 1.0, width: float | None = None, sigma: float | None = None, center=None) -> ComplexField:
    """``A exp(-|x-c|^2 / width^2)``, or ``A exp(-|x-c|^2 / (2 sigma^2))`` when ``sigma`` is given."""
    if sigma is not None:
        denom = 2.0 * float(sigma) ** 2
    else:
        denom = float(1.0 if width is None else width) ** 2
    if not denom > 0:
        raise ConfigError("gaussian width must be positive")
    c = [0.0] * grid.d if center is None else [float(v) for v in center]
    if len(c) != grid.d:
        raise ConfigError("gaussian center has the wrong dimension")
    r2 = sum((xj - cj) ** 2 for xj, cj in zip(grid.coords, c))
    return ComplexField(grid, np.broadcast_to(amplitude * np.exp(-r2 / denom), grid.shape).astype(complex))


def plane_wave(grid: Grid, amplitude: float, modes) -> ComplexField:
    """``A exp(i k.x)`` with ``k = (pi/l) m`` for integer mode numbers ``m``."""
    m = [int(v) for v in (modes if isinstance(modes, (list, tuple)) else [modes])]
    if len(m) != grid.d:
        raise ConfigError("plane-wave mode vector has the wrong dimension")
    phase = sum((math.pi / grid.l) * mj * xj for mj, xj in zip(m, grid.coords))
    return ComplexField(grid, np.broadcast_to(amplitude * np.exp(1j * phase), grid.shape))


def random_band_limited(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0, fraction: float = 1.0 / 3.0) -> ComplexField:
    """Random complex field whose spectrum is supported on ``|k| <= fraction * k_axis_max``."""
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs = coeffs * (grid.kabs <= fraction * grid.kmax_axis())
    vals = np.fft.ifftn(coeffs)
    peak = np.max(np.abs(vals))
    return ComplexField(grid, amplitude * vals / peak if peak > 0 else vals)


class Context:
    """Lazily computed shared objects for one scenario run."""

    def __init__(self, sc: Scenario, seed: int):
        self.sc = sc
        self.seed = seed
        self._gs: GroundStateReport | None = None

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def ground_state(self) -> GroundStateReport:
        if self._gs is None:
            spec = self.sc.ground_state
            grid = parse_grid(spec["grid"], "ground_state.grid") if "grid" in spec else self.sc.grid
            params = self.sc.params.with_sign("focusing")
            try:
                self._gs = petviashvili_solve(
                    params, grid, tol=float(spec.get("tol", 1e-10)), max_iter=int(spec.get("max_iter", 2000))
                )
            except GroundStateError as exc:
                raise ScenarioFailure(f"ground-state solve failed: {exc}") from exc
        return self._gs

    def initial(self) -> ComplexField:
        spec = self.sc.initial
        g = self.sc.grid
        kind = spec["type"]
        if kind == "gaussian":
            return gaussian(g, float(spec.get("amplitude", 1.0)), spec.get("width"), spec.get("sigma"), spec.get("center"))
        if kind == "plane-wave":
            return plane_wave(g, float(_require(spec, "A", "initial")), _require(spec, "m", "initial"))
        if kind == "scaled-ground-state":
            gs = self.ground_state()
            if gs.grid != g:
                raise ConfigError("scaled-ground-state data needs the ground state on the evolution grid")
            return gs.q * float(_require(spec, "c", "initial"))
        if kind == "checkpoint":
            path = os.path.join(self.sc.base_dir, _require(spec, "path", "initial"))
            try:
                ck = read_checkpoint(path)
            except OSError as exc:
                raise ConfigError(f"unreadable checkpoint {path}: {exc}") from exc
            if ck.field.grid != g:
                raise ConfigError(f"checkpoint grid {ck.field.grid} differs from the scenario grid {g}")
            return ck.field
        if kind == "random-band-limited":
            return random_band_limited(g, self.rng, float(spec.get("amplitude", 1.0)), float(spec.get("fraction", 1 / 3)))
        raise ConfigError(f"unknown initial-data type {kind!r}")


class ScenarioFailure(RuntimeError):
    pass


@dataclass
class ScenarioResult:
    name: str
    kind: str
    exit_code: int
    records: list
    outputs: dict
    status: str = "completed"
    message: str = ""

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


# -- helpers ---------------------------------------------------------------------

def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def _expect_records(report: dict, expect: dict, anchor: str) -> list[DiagnosticRecord]:
    """``expect`` maps report keys to ``[value, abs_tol]``."""
    out = []
    for key, spec in expect.items():
        if key not in report:
            raise ConfigError(f"expect refers to unknown report key {key!r}")
        target, tol = float(spec[0]), float(spec[1])
        out.append(DiagnosticRecord(f"expect-{key}", abs(float(report[key]) - target), tol, anchor, {"target": target}))
    return out


def _monotone_decreasing(values) -> bool:
    v = np.asarray(values, float)
    return bool(np.all(np.diff(v) < 0))


def _evolve_series(ctx: Context, u0: ComplexField, params: PhysParams, monitors: Monitors, out_dir: str) -> TimeSeries:
    cfg = ctx.sc.evolve
    if cfg.checkpoint_stride:
        ckdir = ensure_dir(os.path.join(out_dir, "checkpoints"))
        cfg = EvolveConfig(**{**cfg.__dict__, "checkpoint_dir": ckdir})
    return evolve(u0, cfg, params, monitors)


# -- pipelines ----------------------------------------------------------------------

def run_ground_state(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    gs = ctx.ground_state()
    rep = gs.to_json_dict()
    report_path = os.path.join(out_dir, "ground_state.json")
    write_json(rep, report_path)
    ck_path = os.path.join(out_dir, "ground_state.fnls")
    write_checkpoint(gs.q, ck_path, 0.0, sc.params.with_sign("focusing"))
    tol = float(sc.ground_state.get("tol", 1e-10))
    hs2 = gs.hs ** 2
    nehari = _rel(hs2 + gs.mass, gs.lp1 ** (sc.params.p + 1))
    records = [
        DiagnosticRecord("elliptic-residual", gs.residual, tol, "ground-state-equation", {"iterations": gs.iterations}),
        DiagnosticRecord("nehari-identity", nehari, 1e-4, "ground-state-equation"),
    ]
    d = gs.grid.d
    if sc.params.intercritical(d):
        gap = pohozaev_soliton_check(gs, sc.params)
        tol_p = float(sc.diagnostics.get("pohozaev_tol", 1e-2))
        records.append(DiagnosticRecord("soliton-identity", gap, tol_p, "soliton-pohozaev-identity"))
    records += _expect_records(rep, sc.expect, "ground-state-oracle")
    return records, {"report": report_path, "checkpoint": ck_path}, "completed"


def _standard_monitors(ctx: Context, extra: dict | None = None) -> Monitors:
    sc = ctx.sc
    dcfg = sc.diagnostics
    radii = dcfg.get("radii", [sc.grid.l / 4])
    kwargs = dict(radii=radii, potential_radii=dcfg.get("potential_radii", []))
    kwargs.update(extra or {})
    return Monitors(**kwargs)


def run_dichotomy(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    params = sc.params
    gs = ctx.ground_state()
    u0 = ctx.initial()
    thr = classify_initial_data(u0, gs, params)
    dcfg = sc.diagnostics
    t_wrap = wrap_time(u0, params)
    nwin = int(dcfg.get("dyadic_windows", 3))
    windows = dyadic_windows(t_wrap, nwin) if thr.classification == "scatter-candidate" else []
    snaps = sorted({t for w in windows for t in w})
    mon = _standard_monitors(ctx, {"ground_state": gs, "snapshot_times": snaps})
    series = _evolve_series(ctx, u0, params, mon, out_dir)
    records = [
        DiagnosticRecord(
            "classification",
            thr.classification == dcfg.get("expect_classification", thr.classification),
            True,
            "threshold-dichotomy",
            {"classification": thr.classification, "energy_ratio": thr.energy_ratio, "kinetic_ratio": thr.kinetic_ratio},
            mode="flag",
        )
    ]
    R = float(mon.radii[0])
    if thr.classification == "scatter-candidate":
        records.append(DiagnosticRecord("coercivity-y-max", float(np.nanmax(series.y_coercivity)), 1.0, "coercivity", mode="max",
                                        passed=bool(np.all(series.y_coercivity < 1.0))))
        conc = series.concentration[R]
        before = series.t <= t_wrap
        drop = 1.0 - float(conc[before].min()) / float(conc[0])
        records.append(DiagnosticRecord("concentration-decay", drop, float(dcfg.get("min_decay", 0.5)), "mass-non-concentration",
                                        {"R": R, "t_wrap": t_wrap}, mode="min"))
        if series.t[-1] + 1e-12 >= windows[-1][1] and not series.blowup_detected:
            inc = dyadic_increments(series, params, windows)
            records.append(DiagnosticRecord("cauchy-increments-decrease", _monotone_decreasing(inc), True, "scattering",
                                            {"windows": windows, "increments": inc}, mode="flag"))
            write_scan_csv(os.path.join(out_dir, "cauchy_increments.csv"), ["t1", "t2", "increment"],
                           [(a, b, v) for (a, b), v in zip(windows, inc)])
        else:
            records.append(DiagnosticRecord("cauchy-increments-decrease", False, True, "scattering",
                                            {"reason": "run ended before the last window"}, mode="flag"))
    elif thr.classification in ("blowup-candidate", "negative-energy-blowup"):
        records.append(DiagnosticRecord("blowup-sentinel", series.blowup_detected, True, "blow-up-region", mode="flag"))
    paths = {"series_csv": os.path.join(out_dir, "series.csv"), "summary": os.path.join(out_dir, "summary.json")}
    emit_series(series, paths["series_csv"], paths["summary"], records)
    write_json({**thr.__dict__, "t_wrap": t_wrap}, os.path.join(out_dir, "classification.json"))
    return records, paths, series.status


def _build_weight(grid: Grid, dcfg: dict):
    wcfg = dcfg.get("weight", {"type": "morawetz"})
    if wcfg.get("type", "morawetz") == "morawetz":
        return build_morawetz_weight(grid, float(wcfg.get("R", grid.l / 4)), float(wcfg.get("delta", 0.5)))
    if wcfg["type"] == "distance":
        return build_distance_weight(grid, float(wcfg.get("eps", 1.0)))
    raise ConfigError(f"unknown weight type {wcfg['type']!r}")


def run_virial_check(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    params = sc.params
    u0 = ctx.initial()
    records = []
    if dcfg.get("classify", False):
        thr = classify_initial_data(u0, ctx.ground_state(), params)
        records.append(DiagnosticRecord("below-threshold", thr.classification == "scatter-candidate", True,
                                        "threshold-dichotomy", {"classification": thr.classification}, mode="flag"))
    weight = _build_weight(sc.grid, dcfg)
    quad = None
    if params.s < 1:
        quad = build_lambda_quadrature(params.s, int(dcfg.get("nodes", 48)), default_lambda_scale(sc.grid))
    mon = _standard_monitors(ctx, {"weight": weight, "quad": quad, "rhs_every": int(dcfg.get("rhs_every", 1))})
    series = _evolve_series(ctx, u0, params, mon, out_dir)
    err, _ = diag.virial_fd_consistency(series.t, series.m_phi, series.virial_rhs)
    records.append(DiagnosticRecord("virial-consistency", err, float(dcfg.get("tol", 1e-2)), "virial-identity",
                                    {"sign": params.sign, "weight": weight.kind}))
    if weight.kind == "distance":
        rhs = series.virial_rhs[np.isfinite(series.virial_rhs)]
        records.append(DiagnosticRecord("distance-weight-rhs-min", float(rhs.min()), -1e-8, "defocusing-virial", mode="min"))
    paths = {"series_csv": os.path.join(out_dir, "series.csv"), "summary": os.path.join(out_dir, "summary.json")}
    emit_series(series, paths["series_csv"], paths["summary"], records)
    return records, paths, series.status


def run_balakrishnan(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    g = sc.grid
    orders = [float(s) for s in dcfg.get("orders", [sc.params.s])]
    nodes = int(dcfg.get("nodes", 200))
    tol = float(dcfg.get("tol", 1e-6))
    u = ctx.initial()
    records = []
    rows = []
    for s in orders:
        params = PhysParams(s, sc.params.p, sc.params.sign)
        quad = build_lambda_quadrature(s, nodes, default_lambda_scale(g))
        scales = np.unique(g.k2[g.k2 > 0])
        approx = np.array([quad.integrate(lambda lam: lam ** s / (a + lam) ** 2) for a in scales])
        exact = np.array([beta_integral_closed_form(s, a) for a in scales])
        qerr = float(np.max(np.abs(approx / exact - 1.0)))
        perr = diag.plancherel_identity_check(u, params, quad)
        berr = diag.balakrishnan_apply_check(u, params, quad)
        rows.append((s, qerr, perr, berr))
        records += [
            DiagnosticRecord("quadrature-closed-form", qerr, float(dcfg.get("quad_tol", 1e-8)), "balakrishnan-formula", {"s": s, "nodes": nodes}),
            DiagnosticRecord("plancherel-identity", perr, tol, "resolvent-plancherel", {"s": s, "nodes": nodes}),
            DiagnosticRecord("balakrishnan-apply", berr, tol, "balakrishnan-formula", {"s": s, "nodes": nodes}),
        ]
    paths = {"scan_csv": os.path.join(out_dir, "identities.csv"), "records": os.path.join(out_dir, "diagnostics.json")}
    write_scan_csv(paths["scan_csv"], ["s", "quadrature_err", "plancherel_err", "balakrishnan_err"], rows)
    ccfg = dcfg.get("commutator")
    if ccfg:
        cg = parse_grid(ccfg["grid"], "diagnostics.commutator.grid")
        cs = float(ccfg.get("s", sc.params.s))
        cparams = PhysParams(cs, sc.params.p)
        cu = gaussian(cg, 1.0, sigma=1.0)
        cu = ComplexField(cg, cu.physical() * cg.coords[0])  # x exp(-|x|^2/2): zero box mean
        radii = [float(r) for r in ccfg.get("radii", [2, 4, 8, 16])]
        slope, vals = diag.commutator_decay_scan(cu, cparams, None, radii)
        bound = -2 * cs + float(ccfg.get("slack", 0.3))
        records.append(DiagnosticRecord("commutator-decay-slope", slope, bound, "commutator-decay", {"s": cs, "radii": radii}))
        paths["commutator_csv"] = os.path.join(out_dir, "commutator.csv")
        write_scan_csv(paths["commutator_csv"], ["R", "value"], zip(radii, vals))
    write_records(records, paths["records"])
    return records, paths, "completed"


def run_morawetz(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    params = sc.params
    u0 = ctx.initial()
    R = float(dcfg.get("R", sc.grid.l / 2))
    mon = _standard_monitors(ctx, {"potential_radii": [R]})
    series = _evolve_series(ctx, u0, params, mon, out_dir)
    t_end = float(series.t[-1])
    horizons = [float(T) for T in dcfg.get("windows", np.linspace(t_end / 5, t_end, 5))]
    avgs = [diag.morawetz_time_average(series, R, 0.0, T) for T in horizons]
    weight = build_morawetz_weight(sc.grid, float(dcfg.get("weight_R", sc.grid.l / 4)), float(dcfg.get("delta", 0.5)))
    records = [
        DiagnosticRecord("morawetz-average-decreases", _monotone_decreasing(avgs), True, "morawetz-estimate",
                         {"R": R, "T": horizons, "averages": avgs}, mode="flag"),
        DiagnosticRecord("weight-hessian-min-eig", weight.min_hessian_eigenvalue(), -1e-10, "morawetz-weight", mode="min"),
    ]
    paths = {
        "series_csv": os.path.join(out_dir, "series.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
        "scan_csv": os.path.join(out_dir, "morawetz.csv"),
    }
    write_scan_csv(paths["scan_csv"], ["T", "average"], zip(horizons, avgs))
    emit_series(series, paths["series_csv"], paths["summary"], records)
    return records, paths, series.status


def run_dispersive(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    params = sc.params
    u0 = ctx.initial()
    r = float(dcfg.get("r", math.inf))
    horizon = 0.5 * wrap_time(u0, params, tail=1e-8)
    t1 = float(dcfg.get("t_start", 16.0))
    times = np.geomspace(t1, horizon, int(dcfg.get("samples", 25)))
    alpha, used, norms = diag.dispersive_decay_fit(u0, params, r, times, t_wrap=horizon * (1 + 1e-9))
    target = float(dcfg.get("target", sc.grid.d / 2.0))
    rel_tol = float(dcfg.get("rel_tol", 0.1))
    records = [DiagnosticRecord("decay-exponent", _rel(alpha, target), rel_tol, "dispersive-estimate",
                                {"alpha": alpha, "target": target, "r": r, "horizon": horizon})]
    paths = {"scan_csv": os.path.join(out_dir, "decay.csv"), "records": os.path.join(out_dir, "diagnostics.json")}
    write_scan_csv(paths["scan_csv"], ["t", "norm"], zip(used, norms))
    write_records(records, paths["records"])
    return records, paths, "completed"


def run_defocusing(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    params = sc.params.with_sign("defocusing")
    u0 = ctx.initial()
    weight = build_distance_weight(sc.grid, float(dcfg.get("eps", 1.0)))
    quad = None
    if params.s < 1:
        quad = build_lambda_quadrature(params.s, int(dcfg.get("nodes", 32)), default_lambda_scale(sc.grid))
    mon = _standard_monitors(ctx, {"weight": weight, "quad": quad, "rhs_every": int(dcfg.get("rhs_every", 5))})
    series = _evolve_series(ctx, u0, params, mon, out_dir)
    t_wrap = wrap_time(u0, params)
    R = float(mon.radii[0])
    conc = series.concentration[R]
    before = series.t <= t_wrap
    drop = 1.0 - float(conc[before].min()) / float(conc[0])
    drift = float(np.max(np.abs(series.energy - series.energy[0]))) / abs(float(series.energy[0]))
    rhs = series.virial_rhs[np.isfinite(series.virial_rhs)]
    records = [
        DiagnosticRecord("energy-drift", drift, float(dcfg.get("energy_tol", 1e-6)), "defocusing-scattering"),
        DiagnosticRecord("concentration-decay", drop, float(dcfg.get("min_decay", 0.5)), "defocusing-scattering",
                         {"R": R, "t_wrap": t_wrap}, mode="min"),
        DiagnosticRecord("distance-weight-rhs-min", float(rhs.min()), -1e-8, "defocusing-virial", mode="min"),
    ]
    paths = {"series_csv": os.path.join(out_dir, "series.csv"), "summary": os.path.join(out_dir, "summary.json")}
    emit_series(series, paths["series_csv"], paths["summary"], records)
    return records, paths, series.status


def run_soliton(ctx: Context, out_dir: str) -> tuple[list, dict, str]:
    sc = ctx.sc
    dcfg = sc.diagnostics
    params = sc.params
    gs = ctx.ground_state()
    if gs.grid != sc.grid:
        raise ConfigError("soliton scenario needs the ground state on the evolution grid")
    u0 = gs.q
    R = float(dcfg.get("R", sc.grid.l / 4))
    mon = _standard_monitors(ctx, {"radii": [R], "ground_state": gs if params.s_c(sc.grid.d) > 0 else None})
    series = _evolve_series(ctx, u0, params, mon, out_dir)
    conc = series.concentration[R]
    conc_dev = float(np.max(np.abs(conc / conc[0] - 1.0)))
    hs_dev = float(np.max(np.abs(series.hs_norm / series.hs_norm[0] - 1.0)))
    records = [
        DiagnosticRecord("concentration-constant", conc_dev, float(dcfg.get("conc_tol", 1e-2)), "soliton-non-scattering", {"R": R}),
        DiagnosticRecord("hs-norm-constant", hs_dev, float(dcfg.get("hs_tol", 1e-2)), "soliton-non-scattering"),
    ]
    paths = {"series_csv": os.path.join(out_dir, "series.csv"), "summary": os.path.join(out_dir, "summary.json")}
    emit_series(series, paths["series_csv"], paths["summary"], records)
    return records, paths, series.status


PIPELINES: dict[str, Callable[[Context, str], tuple[list, dict, str]]] = {
    "ground-state": run_ground_state,
    "dichotomy": run_dichotomy,
    "virial-check": run_virial_check,
    "balakrishnan-check": run_balakrishnan,
    "morawetz": run_morawetz,
    "dispersive": run_dispersive,
    "defocusing": run_defocusing,
    "soliton": run_soliton,
}


def exit_code_for(records, status: str) -> int:
    if status == "blow-up-detected":
        return EXIT_BLOWUP
    return EXIT_OK if all(r.passed for r in records) else EXIT_DIAGNOSTIC


def run_scenario(cfg: dict, out_dir: str, seed: int = 0, base_dir: str = ".") -> ScenarioResult:
    """Parse ``cfg``, run its pipeline and write outputs under ``out_dir``."""
    try:
        sc = parse_scenario(cfg, base_dir)
    except ConfigError as exc:
        return ScenarioResult(str(cfg.get("name", "?")) if isinstance(cfg, dict) else "?", "?", EXIT_CONFIG, [], {}, "error", str(exc))
    ensure_dir(out_dir)
    ctx = Context(sc, seed)
    try:
        records, outputs, status = PIPELINES[sc.kind](ctx, out_dir)
    except (ConfigError, CheckpointError) as exc:
        return ScenarioResult(sc.name, sc.kind, EXIT_CONFIG, [], {}, "error", str(exc))
    except (ScenarioFailure, diag.DiagnosticError, FloatingPointError) as exc:
        log.error("%s: %s", sc.name, exc)
        return ScenarioResult(sc.name, sc.kind, EXIT_DIAGNOSTIC, [], {}, "failed", str(exc))
    if "records" not in outputs:
        outputs["records"] = os.path.join(out_dir, "diagnostics.json")
        write_records(records, outputs["records"])
    code = exit_code_for(records, status)
    return ScenarioResult(sc.name, sc.kind, code, records, outputs, status)


def expand_sweep(cfg: dict) -> list[dict]:
    """A config with a ``sweep`` list expands into one config per override."""
    sweep = cfg.get("sweep")
    if not sweep:
        return [cfg]
    if not isinstance(sweep, list) or not all(isinstance(o, dict) for o in sweep):
        raise ConfigError("'sweep' must be a list of override objects")
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    out = []
    for i, override in enumerate(sweep):
        merged = deep_merge(base, override)
        if "name" not in override:
            merged["name"] = f"{base.get('name', base.get('kind', 'run'))}_{i:03d}"
        out.append(merged)
    return out
