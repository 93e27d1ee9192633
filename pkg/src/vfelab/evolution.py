"""Filament velocity, the tangent-length law, and embedded Runge-Kutta time stepping.

The velocity is the binormal flow ``X_s ∧ X_ss / |X_s|³`` plus, when enabled,
the interaction with the mirror vortex across ``x1 = 0``::

    - ε x1 / (x1² + r_c²) · (X_s ∧ e1) / |X_s|

Time integration uses the Dormand-Prince 5(4) pair with first-same-as-last
reuse, a mixed absolute/relative max-norm error test, and an optional hard
cap at the explicit stability bound ``h² / sqrt(4 + ε h² / r_c²)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    D1_WEIGHTS,
    D2_CENTER,
    D2_WEIGHTS,
    STENCIL_HALF_WIDTH,
    Filament,
    GeometryError,
    MirrorAntisymmetric,
    extend_nodes,
)
from . import _kernels

log = logging.getLogger(__name__)


class NumericalAbort(RuntimeError):
    """The step controller could not make progress (step fell below ``tau_min``)."""


@dataclass(frozen=True)
class RhsConfig:
    epsilon: float = 0.0
    r_c: float = 1e-2
    interaction_enabled: bool = False

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.interaction_enabled and not self.r_c > 0:
            raise ValueError("r_c must be positive when the interaction is enabled")

    @property
    def active(self) -> bool:
        return self.interaction_enabled and self.epsilon > 0


@dataclass(frozen=True)
class StepController:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    safety: float = 0.9
    tau_min: float = 1e-14
    tau_max_user: float = 1.0
    stability_cap_enabled: bool = True
    # fraction of the explicit bound actually used; the 5th-order pair is
    # only stable on the imaginary axis up to about 1.0, so the full bound
    # lets the highest 8th-order modes grow
    stability_fraction: float = 0.3

    def __post_init__(self):
        if not 0 < self.stability_fraction <= 1:
            raise ValueError("stability_fraction must lie in (0, 1]")
        if not 0 < self.safety < 1:
            raise ValueError("safety factor must lie in (0, 1)")
        if not self.tau_min < self.tau_max_user:
            raise ValueError("tau_min must be smaller than tau_max_user")


@dataclass(frozen=True, eq=False)
class SpeedProfile:
    c_of_s: np.ndarray

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self.c_of_s.min()), float(self.c_of_s.max())


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


def _boundary_args(boundary) -> tuple[bool, np.ndarray]:
    if isinstance(boundary, MirrorAntisymmetric):
        return True, np.zeros(3)
    return False, boundary.vector


def velocity(nodes: np.ndarray, boundary, h: float, cfg: RhsConfig) -> np.ndarray:
    """Array-level right-hand side (compiled kernel)."""
    mirror, shift = _boundary_args(boundary)
    out = np.empty_like(nodes)
    bad = _kernels.velocity_kernel(
        np.ascontiguousarray(nodes), mirror, shift, h, cfg.epsilon, cfg.r_c**2, cfg.active, out
    )
    if bad >= 0:
        raise GeometryError(f"zero tangent vector at node {bad}")
    return out


def velocity_reference(nodes: np.ndarray, boundary, h: float, cfg: RhsConfig) -> np.ndarray:
    """Plain numpy evaluation of the same right-hand side."""
    w = STENCIL_HALF_WIDTH
    ext = extend_nodes(nodes, boundary, w)
    n = nodes.shape[0]
    xs = np.zeros_like(nodes)
    xss = D2_CENTER * nodes
    for k in range(1, w + 1):
        hi = ext[w + k:w + k + n]
        lo = ext[w - k:w - k + n]
        xs += D1_WEIGHTS[k - 1] * (hi - lo)
        xss = xss + D2_WEIGHTS[k - 1] * (hi + lo)
    xs /= h
    xss /= h * h
    speed2 = np.einsum("ij,ij->i", xs, xs)
    if np.any(speed2 == 0.0):
        raise GeometryError(f"zero tangent vector at node {int(np.argmin(speed2))}")
    speed = np.sqrt(speed2)
    vel = _cross(xs, xss) / (speed2 * speed)[:, None]
    if cfg.active:
        x1 = nodes[:, 0]
        coef = cfg.epsilon * x1 / (x1 * x1 + cfg.r_c**2) / speed
        # X_s ∧ e1 = (0, X_s3, -X_s2)
        vel[:, 1] -= coef * xs[:, 2]
        vel[:, 2] += coef * xs[:, 1]
    return vel


def vfe_rhs(f: Filament, cfg: RhsConfig) -> np.ndarray:
    return velocity(f.nodes, f.boundary, f.h, cfg)


def speed_profile(f: Filament, cfg: RhsConfig) -> SpeedProfile:
    """``c(s) = |X_s| (x1² + r_c²)^(ε/2)``; time-invariant under the interaction model."""
    from .geometry import derivative_fields

    X_s, _ = derivative_fields(f)
    x1 = f.nodes[:, 0]
    c = np.linalg.norm(X_s, axis=1) * (x1**2 + cfg.r_c**2) ** (0.5 * cfg.epsilon)
    return SpeedProfile(c)


def stability_bound(h: float, cfg: RhsConfig) -> float:
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    eps = cfg.epsilon if cfg.interaction_enabled else 0.0
    penalty = eps * h * h / cfg.r_c**2 if eps > 0 else 0.0
    return h * h / np.sqrt(4.0 + penalty)


def dp54_step(nodes, boundary, h, cfg, tau, k1=None):
    """One Dormand-Prince step. Returns ``(y_new, err_vec, k7)``; ``k7`` is the FSAL stage."""
    mirror, shift = _boundary_args(boundary)
    y0 = np.ascontiguousarray(nodes, dtype=float)
    y_new = np.empty_like(y0)
    err = np.empty_like(y0)
    k7 = np.empty_like(y0)
    have = k1 is not None
    bad = _kernels.dp54_kernel(
        y0, k1 if have else y0, have, mirror, shift, h,
        cfg.epsilon, cfg.r_c**2, cfg.active, tau, y_new, err, k7,
    )
    if bad >= 0:
        raise GeometryError(f"zero tangent vector at node {bad}")
    return y_new, err, k7


@dataclass
class StepResult:
    filament: Filament
    tau_used: float
    tau_next: float
    error_estimate: float
    rejected: int
    k_last: np.ndarray = field(repr=False)


def step_cap(f: Filament, cfg: RhsConfig, ctrl: StepController) -> float:
    cap = ctrl.tau_max_user
    if ctrl.stability_cap_enabled:
        cap = min(cap, ctrl.stability_fraction * stability_bound(f.h, cfg))
    return cap


def adaptive_step(
    f: Filament,
    cfg: RhsConfig,
    ctrl: StepController,
    tau_try: float,
    k1: np.ndarray | None = None,
    cap: float | None = None,
) -> StepResult:
    """Take one accepted step, shrinking ``tau`` until the error test passes."""
    if tau_try <= 0:
        raise ValueError("tau_try must be positive")
    limit = step_cap(f, cfg, ctrl) if cap is None else cap
    tau = min(tau_try, limit)
    rejected = 0
    y0 = f.nodes
    while True:
        if tau < ctrl.tau_min:
            raise NumericalAbort(
                f"step size {tau:.3e} fell below tau_min={ctrl.tau_min:.3e} at t={f.time:.6f}"
            )
        y_new, err_vec, k7 = dp54_step(y0, f.boundary, f.h, cfg, tau, k1)
        if not np.all(np.isfinite(y_new)):
            err = np.inf
        else:
            scale = ctrl.abs_tol + ctrl.rel_tol * np.maximum(np.abs(y0), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            factor = 5.0 if err == 0.0 else min(5.0, ctrl.safety * err ** -0.2)
            tau_next = min(limit, tau * max(factor, 0.2))
            new = Filament(y_new, f.boundary, f.time + tau)
            return StepResult(new, tau, tau_next, err, rejected, k7)
        rejected += 1
        tau *= max(0.2, ctrl.safety * err ** -0.2) if np.isfinite(err) else 0.2


Observer = Callable[[Filament], None]


@dataclass
class EvolveResult:
    filament: Filament
    steps: int
    rejected: int
    stopped: bool
    tau_last: float


def evolve(
    f: Filament,
    cfg: RhsConfig,
    ctrl: StepController,
    t_end: float,
    observers: Sequence[Observer] = (),
    *,
    sample_dt: float | None = None,
    stop_when: Callable[[Filament], bool] | None = None,
    tau_init: float | None = None,
) -> EvolveResult:
    """Integrate to ``t_end``.

    Steps are clipped to land on the sample grid ``t0 + k·sample_dt``
    whether or not observers are attached, so observers never alter the
    trajectory. Observers run at every sample time, including ``t0``.
    ``stop_when`` is checked after each accepted step and ends the run early.
    """
    if not t_end > f.time:
        raise ValueError(f"t_end={t_end} must exceed the filament time {f.time}")
    t0 = f.time
    span = t_end - t0
    if sample_dt is None or sample_dt >= span:
        sample_times = np.array([t_end])
    else:
        n_full = int(np.floor(span / sample_dt + 1e-9))
        sample_times = t0 + sample_dt * np.arange(1, n_full + 1)
        if t_end - sample_times[-1] > 1e-9 * sample_dt:
            sample_times = np.append(sample_times, t_end)
        else:
            sample_times[-1] = t_end

    for obs in observers:
        obs(f)
    cap = step_cap(f, cfg, ctrl)
    tau = cap if tau_init is None else min(tau_init, cap)
    k1 = None
    steps = rejected = 0
    cur = f
    for target in sample_times:
        while True:
            remaining = target - cur.time
            clipped = remaining <= tau * (1 + 1e-10)
            res = adaptive_step(cur, cfg, ctrl, remaining if clipped else tau, k1, cap)
            steps += 1
            rejected += res.rejected
            k1 = res.k_last
            landed = clipped and res.rejected == 0
            # a clipped landing step does not shrink the working step size
            if not landed:
                tau = res.tau_next
            cur = replace(res.filament, time=float(target)) if landed else res.filament
            if stop_when is not None and stop_when(cur):
                return EvolveResult(cur, steps, rejected, True, tau)
            if landed:
                break
        for obs in observers:
            obs(cur)
    return EvolveResult(cur, steps, rejected, False, tau)


def evolve_fixed(
    f: Filament,
    cfg: RhsConfig,
    tau: float,
    n_steps: int,
    blowup: float | None = None,
) -> tuple[Filament, int]:
    """Fixed-step 5th-order integration (no error control).

    Stops early once ``max |X|`` exceeds ``blowup``; returns the final state
    and the number of steps taken.
    """
    y = f.nodes.copy()
    k1 = None
    for i in range(n_steps):
        y, _, k1 = dp54_step(y, f.boundary, f.h, cfg, tau, k1)
        if blowup is not None and not (np.max(np.abs(y)) <= blowup):
            return Filament(np.nan_to_num(y, nan=blowup, posinf=blowup, neginf=-blowup), f.boundary, f.time + (i + 1) * tau), i + 1
    return Filament(y, f.boundary, f.time + n_steps * tau), n_steps
