"""Discrete filaments on a uniform 2π parameter grid.

A filament stores ``n`` nodes ``X(s_j)`` with ``s_j = j h``, ``h = 2π/n``.
The end condition is carried by a :class:`BoundaryMap`:

* ``PeriodicShift``: ``X(s + 2π) = X(s) + shift`` (closed curve when the
  shift is zero, an infinite periodic line otherwise).
* ``MirrorAntisymmetric``: ``X(2π + σ) = D X(σ)`` with ``D = diag(-1, 1, -1)``.
  The segment together with its ``D`` image is a closed loop over ``[0, 4π)``.

Derivatives use centered 8th-order stencils over a ghost-extended array.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi
MIN_NODES = 16
STENCIL_HALF_WIDTH = 4
TORSION_FLOOR = 1e-8

MIRROR = np.array([-1.0, 1.0, -1.0])

# centered 8th-order weights for offsets 1..4 (antisymmetric / symmetric)
D1_WEIGHTS = np.array([4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0])
D2_WEIGHTS = np.array([8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0])
D2_CENTER = -205.0 / 72.0

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


class GeometryError(ValueError):
    """Raised for invalid curves or unsupported boundary requests."""


@dataclass(frozen=True)
class ParamGrid:
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < MIN_NODES:
            raise GeometryError(f"n_nodes must be >= {MIN_NODES}, got {self.n_nodes}")

    @property
    def h(self) -> float:
        return TWO_PI / self.n_nodes

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h


@dataclass(frozen=True)
class PeriodicShift:
    shift: tuple = (0.0, 0.0, 0.0)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.shift, dtype=float)

    @property
    def closed(self) -> bool:
        return not np.any(self.vector)


@dataclass(frozen=True)
class MirrorAntisymmetric:
    pass


BoundaryMap = PeriodicShift | MirrorAntisymmetric


@dataclass(frozen=True, eq=False)
class Filament:
    """Immutable snapshot of a discrete filament.

    ``nodes`` has shape ``(n, 3)``; it is copied and made read-only on
    construction so snapshots can be shared freely.
    """

    nodes: np.ndarray
    boundary: BoundaryMap = field(default_factory=PeriodicShift)
    time: float = 0.0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise GeometryError(f"nodes must have shape (n, 3), got {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise GeometryError("nodes contain non-finite values")
        ParamGrid(nodes.shape[0])
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @property
    def grid(self) -> ParamGrid:
        return ParamGrid(self.nodes.shape[0])

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def h(self) -> float:
        return TWO_PI / self.nodes.shape[0]

    def with_nodes(self, nodes, time=None) -> "Filament":
        return replace(self, nodes=nodes, time=self.time if time is None else time)


@dataclass(frozen=True, eq=False)
class FrenetData:
    X_s: np.ndarray
    X_ss: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    torsion: np.ndarray
    degenerate: np.ndarray  # torsion undefined where curvature < floor


def ghost_extend(f: Filament, width: int) -> np.ndarray:
    """Return nodes padded with ``width`` ghost nodes on each side."""
    return extend_nodes(f.nodes, f.boundary, width)


def extend_nodes(nodes: np.ndarray, boundary: BoundaryMap, width: int) -> np.ndarray:
    n = nodes.shape[0]
    if width < 0 or width > n // 2:
        raise GeometryError(f"ghost width {width} must lie in [0, {n // 2}] for {n} nodes")
    if width == 0:
        return nodes.copy()
    if isinstance(boundary, PeriodicShift):
        shift = boundary.vector
        left = nodes[n - width:] - shift
        right = nodes[:width] + shift
    else:
        # X(-σ) = D X(2π-σ), X(2π+σ) = D X(σ)
        left = nodes[n - width:] * MIRROR
        right = nodes[:width] * MIRROR
    return np.concatenate([left, nodes, right])


def _d1(ext: np.ndarray, h: float, w: int) -> np.ndarray:
    m = ext.shape[0] - 2 * w
    out = np.zeros((m,) + ext.shape[1:])
    for k, c in enumerate(D1_WEIGHTS, start=1):
        out += c * (ext[w + k:w + k + m] - ext[w - k:w - k + m])
    return out / h


def _d2(ext: np.ndarray, h: float, w: int) -> np.ndarray:
    m = ext.shape[0] - 2 * w
    out = D2_CENTER * ext[w:w + m]
    for k, c in enumerate(D2_WEIGHTS, start=1):
        out = out + c * (ext[w + k:w + k + m] + ext[w - k:w - k + m])
    return out / (h * h)


def derivative_fields(f: Filament) -> tuple[np.ndarray, np.ndarray]:
    """8th-order centered ``(X_s, X_ss)`` at every node."""
    w = STENCIL_HALF_WIDTH
    ext = ghost_extend(f, w)
    return _d1(ext, f.h, w), _d2(ext, f.h, w)


def frenet_curvature_torsion(f: Filament, floor: float = TORSION_FLOOR) -> FrenetData:
    """Tangent, curvature and torsion for a general (non arc-length) parametrization.

    Torsion uses ``X_sss`` obtained by differencing ``X_ss``; nodes whose
    curvature falls below ``floor`` report zero torsion and are flagged.
    """
    w = STENCIL_HALF_WIDTH
    ext = ghost_extend(f, 2 * w)
    h = f.h
    xss_ext = _d2(ext, h, w)
    X_s = _d1(ext[w:-w], h, w)
    X_ss = xss_ext[w:-w]
    X_sss = _d1(xss_ext, h, w)

    speed = np.linalg.norm(X_s, axis=1)
    if np.any(speed == 0.0):
        raise GeometryError(f"zero tangent vector at node {int(np.argmin(speed))}")
    tangent = X_s / speed[:, None]
    b = np.cross(X_s, X_ss)
    bnorm = np.linalg.norm(b, axis=1)
    curvature = bnorm / speed**3
    degenerate = curvature < floor
    torsion = np.zeros_like(curvature)
    ok = ~degenerate
    torsion[ok] = np.einsum("ij,ij->i", b[ok], X_sss[ok]) / bnorm[ok] ** 2
    return FrenetData(X_s, X_ss, tangent, curvature, torsion, degenerate)


def hasimoto_psi(f: Filament, frenet: FrenetData | None = None) -> np.ndarray:
    """``ψ(s_j) = κ(s_j) exp(i ∫_0^{s_j} τ dq)`` with a trapezoid phase integral."""
    fr = frenet_curvature_torsion(f) if frenet is None else frenet
    tau = np.where(fr.degenerate, 0.0, fr.torsion)
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (tau[1:] + tau[:-1]))]) * f.h
    return fr.curvature * np.exp(1j * phase)


def tangent_speed(f: Filament) -> np.ndarray:
    X_s, _ = derivative_fields(f)
    return np.linalg.norm(X_s, axis=1)


# ---------------------------------------------------------------------------
# arc-length machinery


class _CurveSpline:
    """Piecewise-cubic interpolant of one period of a filament.

    PeriodicShift curves are interpolated periodically after removing the
    linear drift ``shift * s / 2π``. MirrorAntisymmetric segments are
    interpolated on the closed interval ``[0, 2π]`` with the right end
    ``D X(0)``; the corner at the junction is a spline end, not a knot.
    """

    def __init__(self, f: Filament):
        n = f.n_nodes
        s = np.append(f.grid.s, TWO_PI)
        self.boundary = f.boundary
        if isinstance(f.boundary, PeriodicShift):
            self.drift = f.boundary.vector / TWO_PI
            base = f.nodes - np.outer(s[:n], self.drift)
            data = np.vstack([base, base[:1]])
            self.spline = CubicSpline(s, data, bc_type="periodic", axis=0)
        else:
            self.drift = np.zeros(3)
            data = np.vstack([f.nodes, f.nodes[:1] * MIRROR])
            self.spline = CubicSpline(s, data, bc_type="not-a-knot", axis=0)
        self.dspline = self.spline.derivative()
        self.knots = s

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return self.spline(s) + np.outer(s, self.drift)

    def speed(self, s: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.dspline(s) + self.drift, axis=-1)

    def partial_length(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Gauss-Legendre length of the pieces ``[a_i, b_i]`` (within one knot span)."""
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
        return half * (self.speed(pts.ravel()).reshape(pts.shape) @ _GAUSS_W)

    def cumulative_length(self) -> np.ndarray:
        seg = self.partial_length(self.knots[:-1], self.knots[1:])
        return np.concatenate([[0.0], np.cumsum(seg)])


def curve_length(f: Filament) -> float:
    """Length of one parameter period measured on the cubic interpolant."""
    return float(_CurveSpline(f).cumulative_length()[-1])


def _resample_uniform(f: Filament) -> np.ndarray:
    spl = _CurveSpline(f)
    cum = spl.cumulative_length()
    total = cum[-1]
    n = f.n_nodes
    targets = np.arange(n) * (total / n)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, n - 1)
    lo = spl.knots[idx]
    hi = spl.knots[idx + 1]
    s = lo + (targets - cum[idx]) / (cum[idx + 1] - cum[idx]) * (hi - lo)
    for _ in range(30):
        resid = cum[idx] + spl.partial_length(lo, s) - targets
        step = resid / spl.speed(s)
        s = np.clip(s - step, lo, hi)
        if np.max(np.abs(step)) < 1e-15:
            break
    s[0] = 0.0
    return spl(s)


def arclength_reparametrize(
    f: Filament,
    target_total_length: float | None = None,
    *,
    tol: float = 1e-13,
    max_passes: int = 8,
) -> Filament:
    """Redistribute nodes at equal arc-length stations.

    With ``target_total_length`` set, the curve is additionally scaled about
    the origin so its length becomes the target. Node 0 stays the first
    station. Passes repeat until the interpolant's own node spacing is
    uniform to ``tol``, which makes the operation idempotent.
    """
    length = curve_length(f)
    if not np.isfinite(length) or length < 1e-12:
        raise GeometryError("cannot reparametrize a degenerate curve of near-zero length")
    scale = 1.0 if target_total_length is None else target_total_length / length
    if target_total_length is not None and target_total_length <= 0:
        raise GeometryError("target length must be positive")

    g = f
    if scale != 1.0:
        boundary = f.boundary
        if isinstance(boundary, PeriodicShift):
            boundary = PeriodicShift(tuple(boundary.vector * scale))
        g = replace(f, nodes=f.nodes * scale, boundary=boundary)
    for _ in range(max_passes):
        g = g.with_nodes(_resample_uniform(g))
        spl = _CurveSpline(g)
        seg = np.diff(spl.cumulative_length())
        if np.max(np.abs(seg / seg.mean() - 1.0)) < tol:
            break
    return g


def closed_curve_assemble(f: Filament, tol: float | None = None) -> np.ndarray:
    """Join a mirror-antisymmetric segment with its ``D`` image into a closed loop.

    Returns ``2n`` nodes ordered along ``[0, 4π)``. A warning is emitted if a
    junction gap exceeds ``tol`` (default: twice the largest node spacing).
    """
    if not isinstance(f.boundary, MirrorAntisymmetric):
        raise GeometryError("closed_curve_assemble needs a MirrorAntisymmetric filament")
    loop = np.vstack([f.nodes, f.nodes * MIRROR])
    spacing = np.linalg.norm(np.diff(f.nodes, axis=0), axis=1).max()
    limit = 2.0 * spacing if tol is None else tol
    gaps = junction_gaps(f)
    if gaps.max() > limit:
        warnings.warn(
            f"mirror junction gap {gaps.max():.3e} exceeds tolerance {limit:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return loop


def junction_gaps(f: Filament) -> np.ndarray:
    """Distances across the two junctions of the assembled loop."""
    X = f.nodes
    a = np.linalg.norm(X[-1] - X[0] * MIRROR)  # s=2π-h to s=2π
    b = np.linalg.norm(X[-1] * MIRROR - X[0])  # s=4π-h to s=0
    return np.array([a, b])


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.spatial import cKDTree

    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))
