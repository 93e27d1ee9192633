"""Closed-form companions of the filament dynamics.

This module holds three pieces of algebra:

* the side-to-side rotation matrices of a skew rhombus, the trace identity
  that enforces closure, and the two conserved forms of the rhombus impulse;
* the theta series that build the polygonal solution, with the phase
  identity behind the revival at ``t = π/2``;
* Riemann's function ``R(t) = Σ e^{itk²}/k²``.

Phases in the series are reduced in units of π (or 2π) before the cosine
is taken, so that the revival phases at ``t = π/2`` come out exactly zero
rather than as ``2π m`` up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class RhombusAngles:
    rho0: float
    theta0: float
    rho1: float
    theta1: float

    def as_arrays(self):
        return tuple(np.asarray(v, dtype=float) for v in (self.rho0, self.theta0, self.rho1, self.theta1))


@dataclass(frozen=True, eq=False)
class SkewPolygon:
    """Unit tangents ``T_0..T_3`` (shape ``(..., 4, 3)``) of sides of length ``side``."""

    tangents: np.ndarray
    side: float = np.pi / 2


@dataclass(frozen=True)
class ThetaSeriesParams:
    K: int
    r: int
    Q: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be positive")
        if not 0 <= self.r < self.K:
            raise ValueError(f"r must lie in [0, {self.K - 1}]")
        if self.Q < 1:
            raise ValueError("truncation Q must be at least 1")


# ---------------------------------------------------------------------------
# rotation matrices and the rhombus


def rotation_matrix(rho, theta) -> np.ndarray:
    """Side-to-side rotation ``M_k``; broadcasts over array inputs (shape ``(..., 3, 3)``)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    cr, sr = np.cos(rho), np.sin(rho)
    ct, st = np.cos(theta), np.sin(theta)
    off = (cr - 1.0) * ct * st
    M = np.empty(np.broadcast(rho, theta).shape + (3, 3))
    M[..., 0, 0] = cr
    M[..., 0, 1] = sr * ct
    M[..., 0, 2] = sr * st
    M[..., 1, 0] = -sr * ct
    M[..., 1, 1] = cr * ct**2 + st**2
    M[..., 1, 2] = off
    M[..., 2, 0] = -sr * st
    M[..., 2, 1] = off
    M[..., 2, 2] = cr * st**2 + ct**2
    return M


def constraint_residual(a: RhombusAngles):
    """``|cos(θ0 - θ1) - cot(ρ0/2) cot(ρ1/2)|``."""
    r0, t0, r1, t1 = a.as_arrays()
    return np.abs(np.cos(t0 - t1) - 1.0 / (np.tan(0.5 * r0) * np.tan(0.5 * r1)))


def sample_constrained(rng: np.random.Generator, size: int) -> RhombusAngles:
    """Random tuples that satisfy the closure constraint.

    ``ρ0, ρ1`` are drawn uniformly in ``(0, π)`` and kept when
    ``|cot(ρ0/2) cot(ρ1/2)| ≤ 1``; then ``θ1 = θ0 - arccos(cot cot)``.
    """
    r0 = np.empty(0)
    r1 = np.empty(0)
    while r0.size < size:
        a = rng.uniform(0.0, np.pi, 2 * size)
        b = rng.uniform(0.0, np.pi, 2 * size)
        c = 1.0 / (np.tan(0.5 * a) * np.tan(0.5 * b))
        ok = np.abs(c) <= 1.0
        r0 = np.concatenate([r0, a[ok]])
        r1 = np.concatenate([r1, b[ok]])
    r0, r1 = r0[:size], r1[:size]
    t0 = rng.uniform(-np.pi, np.pi, size)
    c = 1.0 / (np.tan(0.5 * r0) * np.tan(0.5 * r1))
    t1 = t0 - np.arccos(np.clip(c, -1.0, 1.0))
    return RhombusAngles(r0, t0, r1, t1)


def _tangents(a: RhombusAngles) -> np.ndarray:
    r0, t0, r1, t1 = a.as_arrays()
    M0 = rotation_matrix(r0, t0)
    M1 = rotation_matrix(r1, t1)
    frame = np.broadcast_to(np.eye(3), M0.shape).copy()  # rows T, e1, e2
    out = np.empty(M0.shape[:-2] + (4, 3))
    for k in range(4):
        out[..., k, :] = frame[..., 0, :]
        frame = (M0 if k % 2 == 0 else M1) @ frame
    return out


def build_rhombus(a: RhombusAngles, tol: float = CONSTRAINT_TOL) -> SkewPolygon:
    """Propagate the frame ``(T, e1, e2) = I`` through ``M0, M1, M0``.

    Tuples violating the closure constraint by more than ``tol`` are rejected.
    """
    res = np.max(constraint_residual(a))
    if not res <= tol:
        raise ValueError(f"closure constraint violated: residual {res:.3e} > {tol:.1e}")
    T = _tangents(a)
    gap = np.max(np.abs(T.sum(axis=-2)))
    if gap > 1e-9:
        raise ValueError(f"rhombus does not close: |ΣT| = {gap:.3e}")
    return SkewPolygon(T)


def trace_product(a: RhombusAngles) -> np.ndarray:
    """``trace(M1 M0)`` by explicit multiplication."""
    r0, t0, r1, t1 = a.as_arrays()
    P = rotation_matrix(r1, t1) @ rotation_matrix(r0, t0)
    return np.trace(P, axis1=-2, axis2=-1)


def trace_closed_form(a: RhombusAngles) -> np.ndarray:
    """``-1 + 4 sin²(ρ0/2) sin²(ρ1/2) (cos(θ0-θ1) - cot(ρ0/2) cot(ρ1/2))²``.

    Written with ``sin·cos(θ0-θ1) - cos·cos`` inside the square so it stays
    finite when a half angle is zero.
    """
    r0, t0, r1, t1 = a.as_arrays()
    s0, c0 = np.sin(0.5 * r0), np.cos(0.5 * r0)
    s1, c1 = np.sin(0.5 * r1), np.cos(0.5 * r1)
    inner = s0 * s1 * np.cos(t0 - t1) - c0 * c1
    return -1.0 + 4.0 * inner**2


def rhombus_impulse(p: SkewPolygon, angles: RhombusAngles | None = None, tol: float = 1e-9) -> dict:
    """Impulse ``F = π²/8 (T0∧T1 + T2∧T3)`` of a closed rhombus, with cross-checks.

    Returns a dict with ``F`` (vectors), ``modulus_sq`` (direct ``|F|²``),
    ``f_sq`` (direct ``|f|²``) and ``f_sq_closed`` (``4(1+cos ρ0)(1+cos ρ1)``
    from the side angles). When ``angles`` are supplied it also holds
    ``F_sq_angles`` (``π⁴/16 sin²ρ0 (1 - sin²(ρ1/2) sin²(θ0-θ1))``) and
    ``F_sq_product`` (``π⁴/16 (1+cos ρ0)(1+cos ρ1)``).
    """
    T = np.asarray(p.tangents, dtype=float)
    gap = np.max(np.abs(T.sum(axis=-2)))
    if gap > tol:
        raise ValueError(f"rhombus impulse needs a closed polygon, |ΣT| = {gap:.3e}")
    T0, T1, T2, T3 = (T[..., k, :] for k in range(4))
    f = np.cross(T0, T1) + np.cross(T2, T3)
    F = (np.pi**2 / 8.0) * f
    f_sq = np.einsum("...i,...i->...", f, f)
    cos_r0 = np.einsum("...i,...i->...", T0, T1)
    cos_r1 = np.einsum("...i,...i->...", T1, T2)
    out = {
        "F": F,
        "modulus_sq": np.einsum("...i,...i->...", F, F),
        "f_sq": f_sq,
        "f_sq_closed": 4.0 * (1.0 + cos_r0) * (1.0 + cos_r1),
    }
    if angles is not None:
        r0, t0, r1, t1 = angles.as_arrays()
        c = np.pi**4 / 16.0
        out["F_sq_angles"] = c * np.sin(r0) ** 2 * (1.0 - np.sin(0.5 * r1) ** 2 * np.sin(t0 - t1) ** 2)
        out["F_sq_product"] = c * (1.0 + np.cos(r0)) * (1.0 + np.cos(r1))
    # Without the closure constraint the remaining product reads
    #   T0·T3 = -1 + cos²ρ0 (cos ρ1 + 1) - 2 cos(θ0-θ1) cos ρ0 sin ρ0 sin ρ1
    #           - cos²(θ0-θ1) sin²ρ0 (cos ρ1 - 1);
    # it is kept here for reference only and does not enter the checks.
    return out


# ---------------------------------------------------------------------------
# series


def _cis_pi(x: np.ndarray) -> np.ndarray:
    """``exp(iπx)`` after reducing ``x`` modulo 2."""
    x = np.fmod(x, 2.0)
    return np.cos(np.pi * x) + 1j * np.sin(np.pi * x)


def theta_series(p: ThetaSeriesParams, s, t, with_prefactor: bool = False):
    """Partial sum ``Σ_{|q|≤Q} exp(-4i(Kq+r)² t + 2i(Kq+r) s)``.

    With ``with_prefactor`` the result is multiplied by ``exp(4i r² t)``.
    ``s`` and ``t`` broadcast against each other.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    m = p.K * np.arange(-p.Q, p.Q + 1) + p.r
    m2 = (m * m).astype(float)
    sp = (s / np.pi)[..., None]
    tp = (t / np.pi)[..., None]
    time_phase = np.fmod(-4.0 * m2 * tp, 2.0)
    space_phase = np.fmod(2.0 * m * sp, 2.0)
    val = (_cis_pi(time_phase) * _cis_pi(space_phase)).sum(axis=-1)
    if with_prefactor:
        val = val * _cis_pi(4.0 * p.r**2 * (t / np.pi))
    return val


def riemann_function(t, truncation: int):
    """``Σ_{k=1}^{Q} e^{itk²}/k²``; the truncation error is at most ``1/Q``."""
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    t = np.asarray(t, dtype=float)
    k = np.arange(1, truncation + 1, dtype=float)
    u = (t / (2.0 * np.pi))[..., None]
    frac = np.fmod(u * k * k, 1.0)
    terms = (np.cos(2.0 * np.pi * frac) + 1j * np.sin(2.0 * np.pi * frac)) / (k * k)
    return terms.sum(axis=-1)


def riemann_samples(n_samples: int, truncation: int) -> np.ndarray:
    """``R(t_j)`` at ``t_j = 2πj/N``.

    On the uniform grid the partial sum is a trigonometric polynomial with
    coefficient ``1/k²`` at frequency ``k² mod N``, so it is evaluated by one
    inverse FFT.
    """
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    k = np.arange(1, truncation + 1, dtype=np.int64)
    coef = np.zeros(n_samples, dtype=complex)
    np.add.at(coef, (k * k) % n_samples, 1.0 / (k * k).astype(float))
    return np.fft.ifft(coef) * n_samples


__all__ = [
    "RhombusAngles",
    "SkewPolygon",
    "ThetaSeriesParams",
    "rotation_matrix",
    "constraint_residual",
    "sample_constrained",
    "build_rhombus",
    "trace_product",
    "trace_closed_form",
    "rhombus_impulse",
    "theta_series",
    "riemann_function",
    "riemann_samples",
]
