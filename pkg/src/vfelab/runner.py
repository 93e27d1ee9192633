"""Scenario orchestration: configuration, run pipelines, metrics, and output files.

A run is described by a JSON document merged over ``DEFAULTS``. The
``scenario`` key selects one pipeline; every pipeline returns a list of
metrics, each with a threshold, and the process exit code is 0 only if all
of them pass.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .analytic import (
    build_rhombus,
    constraint_residual,
    rhombus_impulse,
    riemann_samples,
    sample_constrained,
    trace_closed_form,
    trace_product,
)
from .diagnostics import (
    CornerRecorder,
    CornerTrack,
    ImpulseRecorder,
    ImpulseSeries,
    SliceRecorder,
    corner_turning_fraction,
    curvature_mass_fraction,
    fluid_impulse,
    grid_impulse,
    read_vorticity_grid,
    separation_exponent_fit,
    spectrum,
    square_dominance,
    vortex_ring_grid,
    window_turning,
    write_corner_track,
    write_impulse,
    write_slices,
    write_spectrum,
)
from .evolution import NumericalAbort, RhsConfig, StepController, evolve, speed_profile, stability_bound
from .geometry import TWO_PI, Filament, GeometryError, PeriodicShift, closed_curve_assemble, hausdorff
from .reconnection import (
    TH_X1_DEFAULT,
    Criterion,
    ReconnectionEvent,
    distance_check,
    impulse_flip_detect,
    min_separation,
    perform_reconnection,
)
from .scenarios import (
    EyeParams,
    PairParams,
    Perturbation,
    PolyEyeParams,
    ScenarioError,
    make_antiparallel_pair,
    make_eye,
    make_polygonal_eye,
)

log = logging.getLogger(__name__)

SCENARIOS = ("eye", "polygonal_eye", "pair_reconnection", "rhombus_check", "grid_impulse", "riemann_reference")

EXIT_OK = 0
EXIT_METRIC_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

DEFAULTS: dict[str, Any] = {
    "scenario": "eye",
    "output_dir": "vfelab_out",
    "eye": {"b": 1.0, "b_tilde": 0.0, "n_nodes": 1024, "t_end": math.pi / 2},
    "polygonal_eye": {"M": 12, "K": 4, "nodes_per_side": 64, "t_end": math.pi / 2},
    "pair": {
        "b": 0.22,
        "n_nodes": 1500,
        "axis_period": TWO_PI,
        "perturbation": {"mode_count": 1, "amplitude": 0.13, "seed": 0, "plane_angle": math.pi / 2},
        "t_max": 4.0,
        "post_window": math.pi,
    },
    "rhs": {"epsilon": 0.03, "r_c": 3e-3, "interaction_enabled": True},
    "controller": {
        "abs_tol": 1e-7,
        "rel_tol": 1e-7,
        "safety": 0.9,
        "tau_min": 1e-14,
        "tau_max_user": 1.0,
        "stability_cap_enabled": True,
        "stability_fraction": 0.3,
    },
    "observers": {
        "corner_samples": 512,
        "impulse_window": None,
        "slice_dq": 0.05,
        "slice_mode": "coordinate",
        "slice_every": 4,
    },
    "reconnection": {"criterion": "distance", "th_x1": TH_X1_DEFAULT, "th_F": 1e-6, "impulse_stride": 0.01},
    "rhombus": {"count": 1000, "seed": 0},
    "grid": {
        "header": None,
        "data": None,
        "dz": None,
        "ring": {"n": 64, "half_extent": 2.0, "R": 1.0, "gamma": 1.0, "core": 0.15},
    },
    "riemann": {"truncation": 400, "n_samples": 2**19},
    "acceptance": {
        "impulse_drift": 1e-4,
        "eye_dominance": 0.8,
        "pair_dominance": 0.6,
        "dominance_n_max": 8,
        "corner_mass": 0.5,
        "identity_tol": 1e-10,
        "ring_rel_error": 0.05,
        "exponent": 0.5,
        "exponent_tol": 0.1,
        "support_threshold": 0.05,
        "separation_span": math.pi / 4,
        "speed_profile_drift": 1e-3,
    },
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {where!r}")
        if isinstance(base[key], dict) and base[key] is not None:
            if not isinstance(val, dict):
                raise ConfigError(f"configuration key {where!r} expects an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def parse_override(text: str) -> tuple[list[str], Any]:
    """``a.b.c=value``; the value is parsed as JSON, falling back to a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return key.strip().split("."), val


def apply_override(cfg: dict, keys: list[str], val: Any) -> None:
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"unknown configuration key {'.'.join(keys)!r}")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(f"unknown configuration key {'.'.join(keys)!r}")
    node[keys[-1]] = val


def load_config(path=None, overrides=(), scenario=None, output=None) -> dict:
    user = {}
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
    cfg = _merge(DEFAULTS, user)
    for text in overrides:
        apply_override(cfg, *parse_override(text))
    if scenario is not None:
        cfg["scenario"] = scenario
    if output is not None:
        cfg["output_dir"] = str(output)
    if cfg["scenario"] not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg['scenario']!r}; choose from {', '.join(SCENARIOS)}")
    obs = cfg["observers"]
    if int(obs["corner_samples"]) < 64 or not obs["slice_dq"] > 0 or int(obs["slice_every"]) < 1:
        raise ConfigError("observer strides must be positive (corner_samples >= 64)")
    n_max = int(cfg["acceptance"]["dominance_n_max"])
    if int(obs["corner_samples"]) // 2 < (n_max + 1) ** 2 - 1:
        raise ConfigError(
            f"corner_samples={obs['corner_samples']} is too few for dominance_n_max={n_max}; "
            f"at least {2 * ((n_max + 1) ** 2 - 1)} are needed"
        )
    # every scenario validates the solver sections, used or not
    _rhs(cfg)
    _controller(cfg)
    return cfg


def _rhs(cfg) -> RhsConfig:
    try:
        return RhsConfig(**cfg["rhs"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"rhs: {exc}") from exc


def _controller(cfg) -> StepController:
    try:
        return StepController(**cfg["controller"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"controller: {exc}") from exc


# ---------------------------------------------------------------------------
# metrics and results


@dataclass
class Metric:
    name: str
    value: float
    threshold: float
    op: str  # "<", "<=", ">", ">=", "abs<" (|value - target| < tol, threshold = tol)
    target: float | None = None

    @property
    def passed(self) -> bool:
        v, th = self.value, self.threshold
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        if self.op == "<":
            return v < th
        if self.op == "<=":
            return v <= th
        if self.op == ">":
            return v > th
        if self.op == ">=":
            return v >= th
        if self.op == "abs<":
            return abs(v - self.target) < th
        raise ValueError(self.op)

    def record(self) -> dict:
        rec = {"value": self.value, "op": self.op, "threshold": self.threshold, "pass": self.passed}
        if self.target is not None:
            rec["target"] = self.target
        return rec


@dataclass
class RunOutputs:
    metrics: list[Metric] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    info: dict = field(default_factory=dict)
    corner: CornerTrack | None = None
    impulse: ImpulseSeries | None = None
    spectrum: Any = None
    slices: SliceRecorder | None = None


# ---------------------------------------------------------------------------
# scenario pipelines


def _corner_spectrum(track: CornerTrack, t_start: float, n_samples: int):
    """Spectrum of ``|X(0,t)|`` over the ``n_samples`` uniform samples starting at ``t_start``."""
    sel = track.times >= t_start - 1e-12
    mod = track.moduli[sel][:n_samples]
    if mod.size < n_samples:
        raise NumericalAbort(f"corner track holds {mod.size} samples, {n_samples} needed for the spectrum")
    return spectrum(mod)


def run_eye(cfg) -> RunOutputs:
    e = cfg["eye"]
    acc = cfg["acceptance"]
    f = make_eye(EyeParams(e["b"], e["b_tilde"], int(e["n_nodes"])))
    rhs = RhsConfig(0.0, cfg["rhs"]["r_c"], False)
    t_end = float(e["t_end"])
    half = math.pi / 16
    quarter = []

    def quarter_obs(g):
        if not quarter and g.time >= math.pi / 4 - 1e-9:
            quarter.append(g)

    out = _evolve_closed(f, rhs, _controller(cfg), t_end, cfg, extra=[quarter_obs])
    final = out.info.pop("final")
    corners = [0.0, math.pi]
    rotated = [math.pi / 2, 3 * math.pi / 2]
    if quarter:
        q = quarter[0]
        centers, turn = window_turning(q, half)
        peaks = np.sort(centers[np.argsort(turn)[-2:]])
        hit = bool(np.allclose(peaks, rotated, atol=1e-9))
        out.info["quarter_time"] = q.time
        out.info["quarter_peak_stations"] = peaks.tolist()
        out.info["quarter_rotated_fraction"] = corner_turning_fraction(q, rotated, half)
        out.metrics.append(Metric("quarter_peaks_rotated", float(hit), 1.0, ">="))
    if abs(t_end - math.pi / 2) < 1e-12:
        frac = corner_turning_fraction(final, corners, half)
        out.info["corner_curvature_mass_pointwise"] = curvature_mass_fraction(final, corners, half)
        out.metrics.append(Metric("corner_curvature_mass", frac, acc["corner_mass"], ">="))
    out.info["n_nodes"] = f.n_nodes
    return out


def run_polygonal_eye(cfg) -> RunOutputs:
    pe = cfg["polygonal_eye"]
    p = PolyEyeParams(int(pe["M"]), int(pe["K"]))
    f, theta_m = make_polygonal_eye(p, int(pe["nodes_per_side"]))
    rhs = RhsConfig(0.0, cfg["rhs"]["r_c"], False)
    out = _evolve_closed(f, rhs, _controller(cfg), float(pe["t_end"]), cfg, dominance=False)
    out.info.pop("final")
    limit = TWO_PI / float(p.l)
    # the junction corner sits at node 0: measure its angle from the two adjacent sides
    a = f.nodes[-1] - f.nodes[0]
    b = f.nodes[1] - f.nodes[0]
    measured = math.acos(float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b))))
    out.info.update({"theta_M": theta_m, "theta_limit": limit, "theta_measured": measured})
    out.metrics.append(Metric("corner_angle_error", abs(measured - theta_m), 1e-9, "<"))
    return out


def _evolve_closed(f: Filament, rhs, ctrl, t_end, cfg, dominance: bool = True, extra=()) -> RunOutputs:
    acc = cfg["acceptance"]
    obs = cfg["observers"]
    n_samp = int(obs["corner_samples"])
    window = min(math.pi / 2, t_end)
    dt = window / n_samp
    corner = CornerRecorder()
    imp = ImpulseRecorder(obs["impulse_window"])
    slices = SliceRecorder(obs["slice_dq"], "parameter")
    every = int(obs["slice_every"])
    count = [0]

    def slice_obs(g):
        if count[0] % every == 0:
            slices(g)
        count[0] += 1

    res = evolve(f, rhs, ctrl, t_end, [corner, imp, slice_obs, *extra], sample_dt=dt)
    out = RunOutputs(corner=corner.track(), impulse=imp.series(), slices=slices)
    mods = out.impulse.moduli
    drift = float(np.max(np.abs(mods - mods[0])) / mods[0])
    out.metrics.append(Metric("impulse_drift", drift, acc["impulse_drift"], "<"))
    out.info.update({"steps": res.steps, "rejected": res.rejected, "final": res.filament})
    if dominance and t_end >= math.pi / 2 - 1e-12:
        sp = _corner_spectrum(out.corner, f.time, n_samp)
        rep = square_dominance(sp, int(acc["dominance_n_max"]))
        out.spectrum = sp
        out.info["dominance_flags"] = {str(k): v for k, v in rep.flags.items()}
        out.metrics.append(Metric("square_dominance", rep.fraction, acc["eye_dominance"], ">="))
    return out


class _Detector:
    """``stop_when`` hook: distance test at every step, impulse flip on a time stride."""

    def __init__(self, rc: dict, t0: float):
        self.criterion = rc["criterion"]
        if self.criterion not in ("distance", "impulse", "auto"):
            raise ConfigError(f"unknown reconnection criterion {self.criterion!r}")
        self.th_x1 = float(rc["th_x1"])
        self.th_F = float(rc["th_F"])
        self.stride = float(rc["impulse_stride"])
        self.next_t = t0
        self.times: list[float] = []
        self.mods: list[float] = []
        self.event: ReconnectionEvent | None = None

    def __call__(self, f: Filament) -> bool:
        if self.criterion in ("distance", "auto"):
            ev = distance_check(f, self.th_x1)
            if ev is not None:
                self.event = ev
                return True
        if self.criterion in ("impulse", "auto") and f.time >= self.next_t - 1e-12:
            self.times.append(f.time)
            self.mods.append(float(np.linalg.norm(fluid_impulse(f))))
            self.next_t = f.time + self.stride
            if len(self.times) >= 3:
                t_flip = impulse_flip_detect(self.times[-3:], self.mods[-3:], self.th_F, rtol=1e-3)
                if t_flip is not None:
                    idx, x1 = min_separation(f)
                    self.event = ReconnectionEvent(float(f.time), idx, x1, Criterion.IMPULSE_FLIP)
                    return True
        return False


def run_pair(cfg) -> RunOutputs:
    pc = cfg["pair"]
    acc = cfg["acceptance"]
    obs = cfg["observers"]
    pert = Perturbation(**pc["perturbation"])
    p = PairParams(float(pc["b"]), pert, int(pc["n_nodes"]), float(pc["axis_period"]))
    rhs = _rhs(cfg)
    ctrl = _controller(cfg)
    f = make_antiparallel_pair(p)
    c0 = speed_profile(f, rhs)

    det = _Detector(cfg["reconnection"], f.time)
    pre_imp = ImpulseRecorder(obs["impulse_window"])
    profiles = []

    def speed_obs(h):
        profiles.append((h.time, speed_profile(h, rhs).c_of_s))

    stride = float(cfg["reconnection"]["impulse_stride"])
    res = evolve(f, rhs, ctrl, float(pc["t_max"]), [pre_imp, speed_obs], sample_dt=stride, stop_when=det)
    out = RunOutputs()
    out.info["pre_steps"] = res.steps
    out.info["stability_bound"] = stability_bound(f.h, rhs)
    if det.event is None:
        out.info["reconnected"] = False
        out.metrics.append(Metric("reconnection_triggered", 0.0, 1.0, ">="))
        out.impulse = pre_imp.series()
        return out
    ev = det.event
    g = res.filament
    out.events.append(ev.as_record())
    out.metrics.append(Metric("reconnection_triggered", 1.0, 1.0, ">="))
    out.info["t_rec"] = ev.t_rec
    # the tangent-length law: c(s) halfway to reconnection matches c(s) at t = 0
    t_mid, c_mid = min(profiles, key=lambda r: abs(r[0] - 0.5 * ev.t_rec))
    drift = float(np.max(np.abs(c_mid - c0.c_of_s)) / np.max(c0.c_of_s))
    out.info["speed_profile_time"] = t_mid
    out.metrics.append(Metric("speed_profile_drift", drift, acc["speed_profile_drift"], "<"))

    post, rhs2 = perform_reconnection(g, ev, rhs)
    # the rebuilt corner against the curve cut exactly at the touching node
    plain, _ = perform_reconnection(g, ev, rhs, corner=None)
    gap = hausdorff(closed_curve_assemble(post), closed_curve_assemble(plain))
    out.metrics.append(Metric("surgery_hausdorff", gap, 10.0 * g.h, "<"))

    n_samp = int(obs["corner_samples"])
    window = math.pi / 2
    dt = window / n_samp
    t_post = float(pc["post_window"])
    corner = CornerRecorder()
    imp = ImpulseRecorder(None, loop=True)
    L = p.axis_period
    slices = SliceRecorder(obs["slice_dq"], obs["slice_mode"], -0.5 * L, 0.5 * L)
    every = int(obs["slice_every"])
    count = [0]

    def slice_obs(h):
        if count[0] % every == 0:
            slices(h)
        count[0] += 1

    conc = []

    def conc_obs(h):
        # corner concentration of the assembled loop; its corners sit at loop parameters 0 and π
        loop = Filament(closed_curve_assemble(h), PeriodicShift(), h.time)
        conc.append((h.time, corner_turning_fraction(loop, [0.0, math.pi], math.pi / 16)))

    t_stop = ev.t_rec + max(t_post, window)
    res2 = evolve(post, rhs2, ctrl, t_stop, [corner, imp, slice_obs, conc_obs], sample_dt=dt)
    out.info["post_steps"] = res2.steps
    out.corner = corner.track()
    out.impulse = imp.series()
    out.slices = slices

    sp = _corner_spectrum(out.corner, ev.t_rec, n_samp)
    rep = square_dominance(sp, int(acc["dominance_n_max"]))
    out.spectrum = sp
    out.info["dominance_flags"] = {str(k): v for k, v in rep.flags.items()}
    out.metrics.append(Metric("square_dominance", rep.fraction, acc["pair_dominance"], ">="))

    ratio = quasi_period_ratio(conc, ev.t_rec, [window, 2 * window], dt)
    out.info["post_concentration_ratio"] = ratio
    if ratio is not None:
        out.metrics.append(Metric("post_quasi_period_ratio", ratio, 2.0, ">="))

    fit = separation_fit(slices, ev.t_rec, float(acc["support_threshold"]), float(acc["separation_span"]))
    out.info["separation_fit"] = fit
    out.metrics.append(
        Metric("separation_exponent", fit["alpha"], acc["exponent_tol"], "abs<", acc["exponent"])
    )
    return out


def quasi_period_ratio(series, t_rec: float, offsets, dt: float) -> float | None:
    """Smallest ratio of the corner concentration at ``t_rec + offset`` to its time median.

    ``None`` if the series does not reach every offset.
    """
    t = np.array([r[0] for r in series])
    c = np.array([r[1] for r in series])
    med = float(np.median(c))
    vals = []
    for off in offsets:
        j = int(np.argmin(np.abs(t - (t_rec + off))))
        if abs(t[j] - (t_rec + off)) > 0.5 * dt:
            return None
        vals.append(c[j] / med)
    return float(min(vals))


def separation_fit(slices: SliceRecorder, t_rec: float, rel_threshold: float, t_span: float) -> dict:
    """Fit the retreat of the sliced-impulse support after reconnection.

    The support at time ``t`` is the range of bins whose modulus exceeds
    ``rel_threshold`` times the peak modulus at ``t_rec``. Its two edges
    start at the reconnection points, ``x3 = ±L/2``, and move inwards as
    the corners travel; the retreat distance averaged over both edges is
    fitted against ``t - t_rec`` for ``t - t_rec <= t_span``.
    """
    t0, q, F0 = slices.rows[0]
    dq = q[1] - q[0] if q.size > 1 else 1.0
    thr = rel_threshold * float(np.max(F0))

    def edges(F):
        nz = np.nonzero(F > thr)[0]
        if nz.size == 0:
            return np.nan, np.nan
        return q[nz[0]], q[nz[-1]] + dq

    lo0, hi0 = edges(F0)
    ts, zs = [], []
    for t, _, F in slices.rows[1:]:
        if t - t_rec > t_span:
            break
        lo, hi = edges(F)
        r = 0.5 * ((lo - lo0) + (hi0 - hi))
        if np.isfinite(r) and r > 0:
            ts.append(t)
            zs.append(float(r))
    out = {"points": len(ts), "alpha": float("nan"), "stderr": float("nan"), "prefactor": float("nan")}
    if len(ts) >= 10:
        fit = separation_exponent_fit(np.array(ts), np.array(zs), t_rec)
        out.update(alpha=fit.alpha, stderr=fit.stderr, prefactor=fit.prefactor)
    return out


def run_rhombus(cfg) -> RunOutputs:
    rc = cfg["rhombus"]
    tol = float(cfg["acceptance"]["identity_tol"])
    rng = np.random.default_rng(int(rc["seed"]))
    count = int(rc["count"])
    # trace identity on unconstrained tuples
    free = sample_constrained(rng, count)
    from .analytic import RhombusAngles

    raw = RhombusAngles(*rng.uniform(-np.pi, np.pi, (4, count)))
    out = RunOutputs()
    res_free = float(np.max(np.abs(trace_product(raw) - trace_closed_form(raw))))
    res_con = float(np.max(np.abs(trace_product(free) + 1.0)))
    poly = build_rhombus(free)
    imp = rhombus_impulse(poly, free)
    res_f = float(np.max(np.abs(imp["f_sq"] - imp["f_sq_closed"])))
    res_21 = float(np.max(np.abs(imp["F_sq_angles"] - imp["F_sq_product"])))
    out.metrics += [
        Metric("trace_closed_form_residual", res_free, tol, "<"),
        Metric("trace_constrained_residual", res_con, tol, "<"),
        Metric("impulse_closed_form_residual", res_f, tol, "<"),
        Metric("impulse_angle_form_residual", res_21, tol, "<"),
    ]
    out.info["max_constraint_residual"] = float(np.max(constraint_residual(free)))
    return out


def run_grid(cfg) -> RunOutputs:
    gc = cfg["grid"]
    acc = cfg["acceptance"]
    out = RunOutputs()
    if gc["header"]:
        try:
            g = read_vorticity_grid(gc["header"], gc["data"])
        except OSError as exc:
            raise OSError(f"cannot read vorticity grid {gc['header']}: {exc}") from exc
        expected = None
    else:
        ring = gc["ring"]
        g = vortex_ring_grid(int(ring["n"]), float(ring["half_extent"]), float(ring["R"]), float(ring["gamma"]), float(ring["core"]))
        expected = float(ring["gamma"]) * math.pi * float(ring["R"]) ** 2
    dz = float(gc["dz"]) if gc["dz"] else g.spacing[2] * 4
    z, vecs = grid_impulse(g, dz)
    total = float(np.linalg.norm(vecs.sum(axis=0)))
    out.info["total_impulse"] = total
    rec = SliceRecorder(dz)
    rec.rows.append((0.0, z, np.linalg.norm(vecs, axis=1)))
    out.slices = rec
    if expected is not None:
        out.info["expected_impulse"] = expected
        out.metrics.append(Metric("ring_impulse_rel_error", abs(total - expected) / expected, acc["ring_rel_error"], "<"))
    return out


def run_riemann(cfg) -> RunOutputs:
    rc = cfg["riemann"]
    Q = int(rc["truncation"])
    N = int(rc["n_samples"])
    if N <= 2 * (Q + 1) ** 2:
        raise ConfigError(f"n_samples={N} must exceed 2(Q+1)² = {2 * (Q + 1) ** 2} to resolve every square")
    R = riemann_samples(N, Q).real
    sp = spectrum(R)
    rep = square_dominance(sp, Q)
    out = RunOutputs(spectrum=sp)
    out.metrics.append(Metric("square_dominance", rep.fraction, 1.0, ">="))
    return out


PIPELINES: dict[str, Callable[[dict], RunOutputs]] = {
    "eye": run_eye,
    "polygonal_eye": run_polygonal_eye,
    "pair_reconnection": run_pair,
    "rhombus_check": run_rhombus,
    "grid_impulse": run_grid,
    "riemann_reference": run_riemann,
}


# ---------------------------------------------------------------------------
# outputs


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_outputs(out: RunOutputs, directory, manifest: dict) -> list[Path]:
    """Write the series CSVs that exist plus ``manifest.json`` (atomically)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    if out.corner is not None:
        written.append(write_corner_track(d / "corner_track.csv", out.corner))
    if out.impulse is not None:
        written.append(write_impulse(d / "impulse.csv", out.impulse))
    if out.spectrum is not None:
        written.append(write_spectrum(d / "spectrum.csv", out.spectrum))
    if out.slices is not None and out.slices.rows:
        written.append(write_slices(d / "slices.csv", out.slices))
    fd, tmp = tempfile.mkstemp(prefix=".manifest.", dir=d)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, d / "manifest.json")
    written.append(d / "manifest.json")
    return written


def run_scenario(cfg: dict) -> tuple[int, dict]:
    """Run the configured scenario, write outputs, and return ``(exit_code, manifest)``."""
    start = time.perf_counter()
    manifest: dict[str, Any] = {"config": cfg, "code_version": __version__, "events": []}
    try:
        out = PIPELINES[cfg["scenario"]](cfg)
    except (ConfigError, ScenarioError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    metrics = {m.name: m.record() for m in out.metrics}
    ok = all(m.passed for m in out.metrics)
    manifest.update(
        events=out.events,
        metrics=metrics,
        info=out.info,
        status="pass" if ok else "fail",
        wall_time=time.perf_counter() - start,
    )
    write_outputs(out, cfg["output_dir"], manifest)
    return (EXIT_OK if ok else EXIT_METRIC_FAIL), manifest


def main_run(config=None, output=None, overrides=(), scenario=None) -> int:
    try:
        cfg = load_config(config, overrides, scenario, output)
        code, manifest = run_scenario(cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (NumericalAbort, GeometryError) as exc:
        log.error("numerical abort: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    for name, rec in manifest["metrics"].items():
        log.info("%s %s = %.6g (%s %g)", "PASS" if rec["pass"] else "FAIL", name, rec["value"] if rec["value"] is not None else float("nan"), rec["op"], rec["threshold"])
    return code
