"""Initial conditions: eye-shaped vortices, polygonal eyes, perturbed pairs, reference curves."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special

from .geometry import TWO_PI, Filament, GeometryError, PeriodicShift


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class EyeParams:
    b: float = 1.0
    b_tilde: float = 2.0
    n_nodes: int = 1024

    def __post_init__(self):
        if not self.b > 0:
            raise ScenarioError(f"eye half-width b must be positive, got {self.b}")
        if self.b_tilde < 0:
            raise ScenarioError("b_tilde must be non-negative")
        if self.n_nodes % 2:
            raise ScenarioError("eye needs an even node count so both corners sit on nodes")


@dataclass(frozen=True)
class PolyEyeParams:
    M: int = 12
    K: int = 4

    def __post_init__(self):
        if self.M <= 0 or self.M % 2:
            raise ScenarioError(f"M must be a positive even integer, got {self.M}")
        if self.K <= 0 or self.M % self.K:
            raise ScenarioError(f"K={self.K} is not a divisor of M={self.M}")
        if self.l <= 1:
            raise ScenarioError("l = M/K must exceed 1")

    @property
    def l(self) -> Fraction:
        return Fraction(self.M, self.K)


@dataclass(frozen=True)
class Perturbation:
    """Seeded band-limited displacement of the pair.

    Mode ``m`` (1..mode_count) carries weight ``2**-(m-1)``, a random phase and
    a random orientation in the (x1, x2) plane; mode 1 lies in the plane at
    ``plane_angle`` from e1. The sum is scaled so its largest in-plane
    displacement equals ``amplitude``.
    """

    mode_count: int = 1
    amplitude: float = 0.0
    seed: int = 0
    plane_angle: float = 0.0


@dataclass(frozen=True)
class PairParams:
    b: float = 0.22
    perturbation: Perturbation = field(default_factory=Perturbation)
    n_nodes: int = 1500
    axis_period: float = TWO_PI

    def __post_init__(self):
        if self.perturbation.amplitude >= self.b:
            raise ScenarioError(
                f"perturbation amplitude {self.perturbation.amplitude} must be below b={self.b}"
            )


def eye_corner_angle(b: float, b_tilde: float) -> float:
    if b <= 0:
        raise ScenarioError(f"b must be positive, got {b}")
    q = 1.0 + b_tilde**2
    return float(np.arccos((q - b**2) / (q + b**2)))


def corner_c0(theta: float) -> float:
    """Self-similarity constant of a corner: ``sin(θ/2) = exp(-π c0² / 2)``."""
    if not 0.0 < theta <= np.pi:
        raise ScenarioError(f"corner angle must lie in (0, π], got {theta}")
    val = -2.0 * np.log(np.sin(0.5 * theta)) / np.pi
    return float(np.sqrt(max(val, 0.0)))


def eye_curve(s: np.ndarray, b: float, b_tilde: float) -> np.ndarray:
    """Unscaled eye on ``s ∈ [0, 2π)``; corners at ``s = 0`` and ``s = π``."""
    s = np.asarray(s, dtype=float)
    first = s <= np.pi
    sn = np.sin(s)
    x2 = np.where(first, s - 0.5 * np.pi, 1.5 * np.pi - s)
    x3 = np.where(first, -b_tilde * sn, b_tilde * sn)
    return np.stack([b * sn, x2, x3], axis=-1)


def make_eye(p: EyeParams) -> Filament:
    """Eye-shaped vortex rescaled to length 2π and sampled at equal arc length.

    Both branches have the same length, so with an even node count the
    corners fall on nodes 0 and n/2.
    """
    c2 = p.b**2 + p.b_tilde**2
    m_ell = c2 / (1.0 + c2)
    root = np.sqrt(1.0 + c2)

    def arc(u):
        # ∫_0^u sqrt(1 + c2 cos² v) dv as an incomplete elliptic integral
        return root * special.ellipeinc(u, m_ell)

    half_len = arc(np.pi)
    m = p.n_nodes // 2
    targets = np.arange(m) * (half_len / m)
    params = targets / half_len * np.pi
    for _ in range(50):
        step = (arc(params) - targets) / np.sqrt(1.0 + c2 * np.cos(params) ** 2)
        params = np.clip(params - step, 0.0, np.pi)
        if np.max(np.abs(step)) < 1e-15:
            break
    # second branch mirrors the first: X(π+u) has the same speed profile
    s_all = np.concatenate([params, np.pi + params])
    nodes = eye_curve(s_all, p.b, p.b_tilde) * (np.pi / half_len)
    return Filament(nodes, PeriodicShift())


def eye_enclosed_area(b: float) -> float:
    """Area of the planar eye (b̃ = 0) before rescaling: 2 ∫_0^π b sin s ds."""
    return 4.0 * b


def make_polygonal_eye(p: PolyEyeParams, nodes_per_side: int = 16) -> tuple[Filament, float]:
    """Two K-side arcs of a regular M-gon joined into an eye of length 2π.

    Returns the filament (node 0 at a junction corner) and the junction
    corner angle ``θ_M = 2π(M - l)/(l M)``.
    """
    M, K = p.M, p.K
    ang = TWO_PI * np.arange(M + 1) / M
    v = np.stack([np.sin(ang), np.cos(ang), np.zeros_like(ang)], axis=1)
    part_a = v[: K + 1]
    part_b = v[M // 2 : M // 2 + K + 1] + (v[K] - v[M // 2])
    verts = np.vstack([part_a[:-1], part_b[:-1]])  # 2K distinct vertices
    side = np.linalg.norm(verts[1] - verts[0])
    verts = verts * ((np.pi / K) / side)

    nxt = np.roll(verts, -1, axis=0)
    t = np.arange(nodes_per_side)[None, :, None] / nodes_per_side
    nodes = (verts[:, None, :] * (1 - t) + nxt[:, None, :] * t).reshape(-1, 3)
    l = M / K
    theta_m = TWO_PI * (M - l) / (l * M)
    return Filament(nodes, PeriodicShift()), float(theta_m)


def regular_polygon_vertices(M: int, length: float = TWO_PI) -> np.ndarray:
    ang = TWO_PI * np.arange(M) / M
    v = np.stack([np.sin(ang), np.cos(ang), np.zeros_like(ang)], axis=1)
    side = np.linalg.norm(v[1] - v[0])
    return v * ((length / M) / side)


def pair_displacement(p: PairParams, s: np.ndarray) -> np.ndarray:
    """In-plane displacement ``(δ1, δ2)`` of the pair perturbation at parameters ``s``."""
    pert = p.perturbation
    if pert.amplitude == 0.0 or pert.mode_count < 1:
        return np.zeros((s.size, 2))
    # peak taken on a fixed fine grid so it does not depend on n_nodes
    fine = np.linspace(0.0, TWO_PI, 8192, endpoint=False)
    peak = np.linalg.norm(_raw_displacement(pert, fine), axis=1).max()
    return _raw_displacement(pert, s) * (pert.amplitude / peak)


def _raw_displacement(pert: Perturbation, s: np.ndarray) -> np.ndarray:
    out = np.zeros((s.size, 2))
    rng = np.random.default_rng(pert.seed)
    for m in range(1, pert.mode_count + 1):
        phase = rng.uniform(0.0, TWO_PI)
        orient = rng.uniform(0.0, np.pi)
        if m == 1:
            orient = pert.plane_angle
        wave = 2.0 ** (-(m - 1)) * np.cos(m * s + phase)
        out[:, 0] += np.cos(orient) * wave
        out[:, 1] += np.sin(orient) * wave
    return out


def make_antiparallel_pair(p: PairParams) -> Filament:
    """Vortex X of the antiparallel pair; its partner is the mirror image in x1 = 0."""
    s = np.arange(p.n_nodes) * (TWO_PI / p.n_nodes)
    d = pair_displacement(p, s)
    nodes = np.stack([p.b + d[:, 0], d[:, 1], p.axis_period * s / TWO_PI], axis=1)
    return Filament(nodes, PeriodicShift((0.0, 0.0, p.axis_period)))


def make_reference(kind: str, n_nodes: int, **params) -> Filament:
    """Analytic test curves: ``circle(R)``, ``line(b)``, ``helix(a, b)``.

    The helix is ``(a cos s, a sin s, b s)`` with axial shift ``2π b``.
    """
    s = np.arange(n_nodes) * (TWO_PI / n_nodes)
    if kind == "circle":
        R = params.get("R", 1.0)
        if R <= 0:
            raise ScenarioError("circle radius must be positive")
        nodes = np.stack([R * np.cos(s), R * np.sin(s), np.zeros_like(s)], axis=1)
        return Filament(nodes, PeriodicShift())
    if kind == "line":
        b = params.get("b", 0.22)
        return make_antiparallel_pair(PairParams(b=b, n_nodes=n_nodes))
    if kind == "helix":
        a = params.get("a", 1.0)
        pitch = params.get("b", 1.0)
        if a <= 0 or pitch <= 0:
            raise ScenarioError("helix parameters must be positive")
        nodes = np.stack([a * np.cos(s), a * np.sin(s), pitch * s], axis=1)
        return Filament(nodes, PeriodicShift((0.0, 0.0, TWO_PI * pitch)))
    raise ScenarioError(f"unknown reference curve {kind!r}")


__all__ = [
    "EyeParams",
    "PolyEyeParams",
    "PairParams",
    "Perturbation",
    "GeometryError",
    "eye_corner_angle",
    "corner_c0",
    "eye_curve",
    "make_eye",
    "make_polygonal_eye",
    "make_antiparallel_pair",
    "make_reference",
]
