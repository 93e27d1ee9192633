"""Fluid impulse, sliced impulse profiles, corner tracking, spectra and power-law fits.

The filament impulse is ``F = ½ ∫ X ∧ X_s ds``, which equals ``½ ∫ X ∧ T dσ``
in arc length. All filament integrals use the trapezoid rule on the nodes,
extended to partial cells by integrating the linear interpolant of the
integrand. Bin sums therefore add up exactly to the full-period value.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import (
    MIRROR,
    STENCIL_HALF_WIDTH,
    TWO_PI,
    Filament,
    GeometryError,
    MirrorAntisymmetric,
    _d1,
    extend_nodes,
    frenet_curvature_torsion,
)


# ---------------------------------------------------------------------------
# series containers


@dataclass
class ImpulseSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float).reshape(-1, 3)
        if self.times.shape[0] != self.values.shape[0]:
            raise ValueError("times and values must have equal length")

    @property
    def moduli(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)


@dataclass
class CornerTrack:
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if self.times.shape[0] != self.positions.shape[0]:
            raise ValueError("times and positions must have equal length")

    @property
    def moduli(self) -> np.ndarray:
        return np.linalg.norm(self.positions, axis=1)


@dataclass
class Spectrum:
    k: np.ndarray
    coeff_modulus: np.ndarray
    weighted: np.ndarray

    @property
    def is_square(self) -> np.ndarray:
        r = np.round(np.sqrt(self.k)).astype(int)
        return r * r == self.k


@dataclass
class DominanceReport:
    flags: dict[int, bool]
    fraction: float


# ---------------------------------------------------------------------------
# fluid impulse


def _impulse_density(f: Filament, width: int = 0) -> np.ndarray:
    """``½ X ∧ X_s`` at the nodes plus ``width`` ghost nodes on each side."""
    w = STENCIL_HALF_WIDTH
    ext = extend_nodes(f.nodes, f.boundary, width + w)
    xs = _d1(ext, f.h, w)
    return 0.5 * np.cross(ext[w:ext.shape[0] - w], xs)


class _LinearIntegrand:
    """Piecewise-linear interpolant of ``g`` sampled at ``s0 + j h``, with its primitive."""

    def __init__(self, g: np.ndarray, s0: float, h: float):
        self.g = g
        self.s0 = s0
        self.h = h
        steps = 0.5 * h * (g[1:] + g[:-1])
        self.cum = np.concatenate([np.zeros((1,) + g.shape[1:]), np.cumsum(steps, axis=0)])

    def primitive(self, x: float) -> np.ndarray:
        u = (x - self.s0) / self.h
        j = min(max(int(math.floor(u)), 0), self.g.shape[0] - 2)
        th = u - j
        g = self.g
        return self.cum[j] + self.h * (th * g[j] + 0.5 * th * th * (g[j + 1] - g[j]))

    def integral(self, a: float, b: float) -> np.ndarray:
        return self.primitive(b) - self.primitive(a)


def _density_at(f: Filament, j0: int, j1: int) -> np.ndarray:
    """``½ X ∧ X_s`` at node indices ``j0..j1`` (any integers).

    Indices beyond one period use the boundary map: a period shift ``L``
    adds ``L ∧ X_s``, and for mirror ends ``D`` is a rotation, so the
    density of an image node is ``D`` applied to the node density.
    """
    n = f.n_nodes
    base = _impulse_density(f)
    idx = np.arange(j0, j1 + 1)
    wrap = np.floor_divide(idx, n)
    r = idx - wrap * n
    g = base[r]
    if isinstance(f.boundary, MirrorAntisymmetric):
        g = np.where((wrap % 2 == 1)[:, None], g * MIRROR, g)
    else:
        w = STENCIL_HALF_WIDTH
        xs = _d1(extend_nodes(f.nodes, f.boundary, w), f.h, w)[r]
        g = g + 0.5 * np.cross(np.outer(wrap, f.boundary.vector), xs)
    return g


def fluid_impulse(f: Filament, l: float | None = None, center: float = 0.0) -> np.ndarray:
    """``½ ∫ X ∧ X_s ds`` over ``[center - l/2, center + l/2]``.

    ``l = None`` (or ``l ≥ 2π``) integrates one full parameter period with the
    trapezoid rule. For a mirror-antisymmetric segment this is the segment
    half of the loop; see ``loop_impulse``.
    """
    h = f.h
    if l is None or l >= TWO_PI - 1e-12:
        return h * _impulse_density(f).sum(axis=0)
    if l < 0:
        raise ValueError("window length must be non-negative")
    lo, hi = center - 0.5 * l, center + 0.5 * l
    j0 = int(math.floor(lo / h))
    j1 = max(int(math.ceil(hi / h)), j0 + 1)
    g = _density_at(f, j0, j1)
    return _LinearIntegrand(g, j0 * h, h).integral(lo, hi)


def loop_impulse(f: Filament) -> np.ndarray:
    """Impulse of the closed loop: for mirror segments the ``D`` image is included.

    ``D`` is a rotation (det +1), so the image contributes ``D F_segment``.
    """
    F = fluid_impulse(f)
    if isinstance(f.boundary, MirrorAntisymmetric):
        return F + MIRROR * F
    return F


def sliced_impulse_by_parameter(f: Filament, dq: float) -> tuple[np.ndarray, np.ndarray]:
    """Per parameter-bin impulse vectors on ``[0, 2π)``.

    Returns ``(q_left, vectors)``; the last bin is shorter when ``dq`` does not
    divide ``2π``. Bin vectors sum to ``fluid_impulse(f)``.
    """
    if not 0 < dq <= TWO_PI:
        raise ValueError("dq must lie in (0, 2π]")
    g = _impulse_density(f, 1)[1:]  # nodes 0..n (node n is the ghost at 2π)
    h = f.h
    edges = np.arange(0.0, TWO_PI, dq)
    if TWO_PI - edges[-1] < 1e-12 * dq:
        edges = edges[:-1]
    stops = np.append(edges[1:], TWO_PI)
    lin = _LinearIntegrand(g, 0.0, h)
    vecs = np.array([lin.integral(a, b) for a, b in zip(edges, stops)])
    return edges, vecs


def node_impulse_contributions(f: Filament, include_image: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Node-wise ``½ X ∧ X_s h`` and the node ``x3`` positions.

    For mirror segments the image nodes ``D X`` (with contributions ``D c``)
    are appended when ``include_image`` is set.
    """
    c = f.h * _impulse_density(f)
    z = f.nodes[:, 2]
    if include_image and isinstance(f.boundary, MirrorAntisymmetric):
        c = np.vstack([c, c * MIRROR])
        z = np.concatenate([z, -z])
    return z, c


def sliced_impulse_by_coordinate(
    f: Filament,
    dq: float,
    q_min: float | None = None,
    q_max: float | None = None,
    include_image: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Impulse binned by ``x3``: bins ``[q, q + dq)`` from ``q_min`` to ``q_max``.

    Returns ``(q_left, vectors)``; empty bins hold zero vectors and nodes
    outside the range are dropped.
    """
    if not dq > 0:
        raise ValueError("dq must be positive")
    z, c = node_impulse_contributions(f, include_image)
    lo = math.floor(z.min() / dq) * dq if q_min is None else q_min
    hi = z.max() + dq if q_max is None else q_max
    nb = max(1, int(math.ceil((hi - lo) / dq - 1e-9)))
    edges = lo + dq * np.arange(nb)
    idx = np.floor((z - lo) / dq + 1e-12).astype(int)
    keep = (idx >= 0) & (idx < nb)
    vecs = np.zeros((nb, 3))
    np.add.at(vecs, idx[keep], c[keep])
    return edges, vecs


# ---------------------------------------------------------------------------
# corner and curvature diagnostics


def curvature_mass_fraction(f: Filament, stations: Sequence[float], half_width: float) -> float:
    """Share of ``∫ κ |X_s| ds`` that lies within ``half_width`` of the stations."""
    fr = frenet_curvature_torsion(f)
    mass = fr.curvature * np.linalg.norm(fr.X_s, axis=1)
    s = f.grid.s
    near = np.zeros(s.shape, dtype=bool)
    for st in stations:
        d = np.abs((s - st + np.pi) % TWO_PI - np.pi)
        near |= d <= half_width
    return float(mass[near].sum() / mass.sum())


def window_turning(f: Filament, half_width: float, origin: float = 0.0, edge_chord: float | None = None):
    """Net tangent turning over a partition of the parameter circle.

    The windows have width ``2 half_width`` and the first one is centred on
    ``origin``. The turning of a window is the angle between the tangents at
    its two ends, each estimated by a chord of parameter length
    ``edge_chord`` (default ``half_width / 4``) reaching into the window.
    Pointwise curvature of a discretised corner carries grid-scale ripples
    whose ``∫ κ ds`` swamps the corners; the chord tangents average them
    out, so the turning stays a coarse-grained curvature mass.

    Returns ``(centers, turning)``.
    """
    if not f.boundary.closed:
        raise GeometryError("window turning needs a closed filament")
    n = f.n_nodes
    h = f.h
    nwin = int(round(np.pi / half_width))
    if not math.isclose(nwin * 2 * half_width, TWO_PI, rel_tol=1e-9):
        raise ValueError("2π must be a whole number of windows")
    chord = half_width / 4 if edge_chord is None else edge_chord
    m = int(round(chord / h))
    if m < 1 or 2 * m > round(2 * half_width / h):
        raise ValueError("edge chord must span between one node and half a window")
    centers = origin + 2 * half_width * np.arange(nwin)
    a = np.rint((centers - half_width) / h).astype(int)
    b = np.rint((centers + half_width) / h).astype(int)
    X = f.nodes
    ta = X[(a + m) % n] - X[a % n]
    tb = X[b % n] - X[(b - m) % n]
    cos = np.einsum("ij,ij->i", ta, tb) / (np.linalg.norm(ta, axis=1) * np.linalg.norm(tb, axis=1))
    return centers % TWO_PI, np.arccos(np.clip(cos, -1.0, 1.0))


def corner_turning_fraction(f: Filament, stations: Sequence[float], half_width: float, edge_chord=None) -> float:
    """Share of the window turning held by the windows centred on ``stations``.

    The stations must sit on one partition, i.e. be ``2 half_width`` apart
    up to whole multiples.
    """
    stations = np.asarray(stations, dtype=float)
    centers, turn = window_turning(f, half_width, float(stations[0]), edge_chord)
    pick = []
    for st in stations:
        d = np.abs((centers - st + np.pi) % TWO_PI - np.pi)
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise ValueError(f"station {st} is not a window centre")
        pick.append(j)
    return float(turn[pick].sum() / turn.sum())


def curvature_peak_stations(f: Filament, count: int = 2, min_gap: float = np.pi / 4) -> np.ndarray:
    """Parameters of the ``count`` largest curvature maxima at least ``min_gap`` apart."""
    kappa = frenet_curvature_torsion(f).curvature
    s = f.grid.s
    order = np.argsort(kappa)[::-1]
    picked: list[float] = []
    for j in order:
        if all(abs((s[j] - p + np.pi) % TWO_PI - np.pi) >= min_gap for p in picked):
            picked.append(s[j])
            if len(picked) == count:
                break
    return np.sort(np.array(picked))


# ---------------------------------------------------------------------------
# spectra


def spectrum(samples: np.ndarray, min_samples: int = 64) -> Spectrum:
    """One-sided DFT of the de-meaned samples, ``ĉ(k) = (1/N) Σ f_j e^{-2πi jk/N}``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < min_samples:
        raise ValueError(f"spectrum needs at least {min_samples} uniform samples, got {x.size}")
    c = np.fft.rfft(x - x.mean()) / x.size
    k = np.arange(c.size)
    mod = np.abs(c)
    return Spectrum(k, mod, k * mod)


def square_dominance(sp: Spectrum, n_max: int | None = None) -> DominanceReport:
    """For each ``n ≥ 2``: is ``k·|ĉ(k)|`` at ``k = n²`` above every other ``k`` in
    ``((n-1)², (n+1)²)``? The fraction counts the ``n`` that pass."""
    kmax = int(sp.k[-1])
    limit = int(math.isqrt(kmax + 1)) - 1
    n_max = limit if n_max is None else n_max
    if n_max > limit:
        raise ValueError(f"n_max={n_max} needs k up to {(n_max + 1) ** 2 - 1}, spectrum stops at {kmax}")
    flags = {}
    for n in range(2, n_max + 1):
        ks = np.arange((n - 1) ** 2 + 1, (n + 1) ** 2)
        others = ks[ks != n * n]
        flags[n] = bool(sp.weighted[n * n] > sp.weighted[others].max())
    frac = sum(flags.values()) / len(flags) if flags else float("nan")
    return DominanceReport(flags, frac)


def spectrum_with_square_dominance(samples: np.ndarray, n_max: int | None = None):
    sp = spectrum(samples)
    return sp, square_dominance(sp, n_max)


# ---------------------------------------------------------------------------
# separation rate


@dataclass
class PowerFit:
    alpha: float
    stderr: float
    prefactor: float


def separation_exponent_fit(t, z, t_rec: float = 0.0) -> PowerFit:
    """Least-squares slope of ``log z`` against ``log(t - t_rec)``."""
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    if t.size < 10:
        raise ValueError(f"need at least 10 points, got {t.size}")
    if np.any(t <= t_rec):
        raise ValueError("all times must exceed t_rec")
    if np.any(z <= 0):
        raise ValueError("ordinates must be positive")
    x = np.log(t - t_rec)
    y = np.log(z)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(t.size - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return PowerFit(float(coef[0]), float(np.sqrt(cov[0, 0])), float(np.exp(coef[1])))


def support_halfwidth(q_center, profile, reference, center: float, rel_threshold: float) -> float:
    """Largest ``|q - center|`` where ``|profile - reference|`` exceeds
    ``rel_threshold`` times the largest reference modulus. Returns 0 if none."""
    q_center = np.asarray(q_center)
    dev = np.abs(np.asarray(profile) - np.asarray(reference))
    thr = rel_threshold * np.max(np.abs(reference))
    hit = dev > thr
    if not hit.any():
        return 0.0
    return float(np.max(np.abs(q_center[hit] - center)))


# ---------------------------------------------------------------------------
# vorticity grids


@dataclass(eq=False)
class VorticityGrid:
    """Sampled vorticity; ``omega`` has shape ``(3, nz, ny, nx)`` (x fastest in memory).

    Sample ``(i, j, k)`` sits at ``origin + (i dx, j dy, k dz)`` and stands
    for the cell of volume ``dx dy dz`` centred on it.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    omega: np.ndarray = field(repr=False)

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(self.dims) <= 0 or min(self.spacing) <= 0:
            raise ValueError("grid dims and spacings must be positive")
        om = np.asarray(self.omega, dtype=float)
        if om.size != 3 * nx * ny * nz:
            raise ValueError(f"vorticity has {om.size} values, expected {3 * nx * ny * nz}")
        self.omega = om.reshape(3, nz, ny, nx)

    def axes(self):
        return [o + d * np.arange(n) for o, d, n in zip(self.origin, self.spacing, self.dims)]


def read_vorticity_grid(header_path, data_path=None) -> VorticityGrid:
    """Load a JSON header and the raw little-endian float64 block.

    The data file defaults to the header path with suffix ``.bin``.
    """
    header_path = Path(header_path)
    hdr = json.loads(header_path.read_text())
    if hdr.get("component_order", "x-fastest") != "x-fastest" or hdr.get("scalar", "f64-le") != "f64-le":
        raise ValueError("only x-fastest f64-le vorticity data is supported")
    data_path = header_path.with_suffix(".bin") if data_path is None else Path(data_path)
    raw = np.fromfile(data_path, dtype="<f8")
    return VorticityGrid(
        (int(hdr["nx"]), int(hdr["ny"]), int(hdr["nz"])),
        (float(hdr["dx"]), float(hdr["dy"]), float(hdr["dz"])),
        tuple(float(v) for v in hdr["origin"]),
        raw,
    )


def write_vorticity_grid(g: VorticityGrid, header_path, data_path=None) -> None:
    header_path = Path(header_path)
    data_path = header_path.with_suffix(".bin") if data_path is None else Path(data_path)
    nx, ny, nz = g.dims
    dx, dy, dz = g.spacing
    hdr = {
        "nx": nx, "ny": ny, "nz": nz, "dx": dx, "dy": dy, "dz": dz,
        "origin": list(g.origin), "component_order": "x-fastest", "scalar": "f64-le",
    }
    header_path.write_text(json.dumps(hdr, indent=2) + "\n")
    np.ascontiguousarray(g.omega, dtype="<f8").tofile(data_path)


def grid_impulse(g: VorticityGrid, dz: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-slab ``½ ∭ x ∧ ω dV`` (midpoint rule), slabs of height ``dz`` in z.

    Slabs start half a grid spacing below the lowest sample. Returns
    ``(z_left, vectors)``.
    """
    gx, gy, gz = g.axes()
    if dz < g.spacing[2] * (1 - 1e-12):
        raise ValueError("slab height must be at least the grid spacing in z")
    dV = float(np.prod(g.spacing))
    wx, wy, wz = g.omega
    Y, X = np.meshgrid(gy, gx, indexing="ij")
    # per z-plane integrals of ½ x ∧ ω
    z = gz[:, None, None]
    c1 = 0.5 * dV * (Y * wz - z * wy).sum(axis=(1, 2))
    c2 = 0.5 * dV * (z * wx - X * wz).sum(axis=(1, 2))
    c3 = 0.5 * dV * (X * wy - Y * wx).sum(axis=(1, 2))
    planes = np.stack([c1, c2, c3], axis=1)
    z0 = gz[0] - 0.5 * g.spacing[2]
    top = gz[-1] + 0.5 * g.spacing[2]
    nb = max(1, int(math.ceil((top - z0) / dz - 1e-9)))
    idx = np.minimum(np.floor((gz - z0) / dz).astype(int), nb - 1)
    vecs = np.zeros((nb, 3))
    np.add.at(vecs, idx, planes)
    return z0 + dz * np.arange(nb), vecs


def vortex_ring_grid(
    n: int = 64,
    half_extent: float = 2.0,
    R: float = 1.0,
    gamma: float = 1.0,
    core: float = 0.15,
    center=(0.0, 0.0, 0.0),
    sign: float = 1.0,
) -> VorticityGrid:
    """Thin ring of radius ``R`` about the z axis with a Gaussian core.

    ``ω = sign·Γ/(π a²) exp(-d²/a²) e_φ`` where ``d`` is the distance to the
    core circle; its impulse is ``sign·Γ π R² e_z`` up to ``O(a²)``.
    """
    d = 2.0 * half_extent / n
    ax = -half_extent + d * (np.arange(n) + 0.5)
    Z, Y, X = np.meshgrid(ax, ax, ax, indexing="ij")
    X = X - center[0]
    Y = Y - center[1]
    Z = Z - center[2]
    rho = np.hypot(X, Y)
    amp = sign * gamma / (np.pi * core**2) * np.exp(-((rho - R) ** 2 + Z**2) / core**2)
    safe = np.where(rho > 0, rho, 1.0)
    om = np.stack([-amp * Y / safe, amp * X / safe, np.zeros_like(amp)])
    om[:, rho == 0] = 0.0
    return VorticityGrid((n, n, n), (d, d, d), (ax[0], ax[0], ax[0]), om)


# ---------------------------------------------------------------------------
# observers


def curve_centroid(f: Filament) -> np.ndarray:
    """Arc-length weighted centroid of a closed curve or of the assembled mirror loop."""
    X = f.nodes
    w = np.linalg.norm(_d1(extend_nodes(X, f.boundary, STENCIL_HALF_WIDTH), f.h, STENCIL_HALF_WIDTH), axis=1)
    c = (w[:, None] * X).sum(axis=0) / w.sum()
    if isinstance(f.boundary, MirrorAntisymmetric):
        # the image half D X carries the same weights
        return 0.5 * (c + c * MIRROR)
    if not f.boundary.closed:
        raise GeometryError("the centroid needs a closed curve")
    return c


class CornerRecorder:
    """Records ``X(0, t)``.

    With ``comoving`` the position is taken relative to the curve centroid,
    which removes the uniform translation of the whole curve; a linear drift
    left in the series would spread a ``1/k`` tail over the whole spectrum.
    """

    def __init__(self, comoving: bool = True):
        self.comoving = comoving
        self.times: list[float] = []
        self.positions: list[np.ndarray] = []

    def __call__(self, f: Filament) -> None:
        self.times.append(float(f.time))
        x = f.nodes[0].copy()
        if self.comoving:
            x = x - curve_centroid(f)
        self.positions.append(x)

    def track(self) -> CornerTrack:
        return CornerTrack(np.array(self.times), np.array(self.positions).reshape(-1, 3))


class ImpulseRecorder:
    """Records the impulse over a parameter window of length ``l`` (full period if ``None``)."""

    def __init__(self, l: float | None = None, loop: bool = False):
        self.l = l
        self.loop = loop
        self.times: list[float] = []
        self.values: list[np.ndarray] = []

    def __call__(self, f: Filament) -> None:
        self.times.append(float(f.time))
        F = loop_impulse(f) if self.loop and self.l is None else fluid_impulse(f, self.l)
        self.values.append(F)

    def series(self) -> ImpulseSeries:
        return ImpulseSeries(np.array(self.times), np.array(self.values).reshape(-1, 3))


class SliceRecorder:
    """Records ``|F(q)|`` sliced along ``x3`` (``mode='coordinate'``) or the parameter."""

    def __init__(self, dq: float, mode: str = "coordinate", q_min=None, q_max=None):
        if mode not in ("coordinate", "parameter"):
            raise ValueError(f"unknown slice mode {mode!r}")
        self.dq = dq
        self.mode = mode
        self.q_min = q_min
        self.q_max = q_max
        self.rows: list[tuple[float, np.ndarray, np.ndarray]] = []

    def __call__(self, f: Filament) -> None:
        if self.mode == "coordinate":
            q, v = sliced_impulse_by_coordinate(f, self.dq, self.q_min, self.q_max)
        else:
            q, v = sliced_impulse_by_parameter(f, self.dq)
        self.rows.append((float(f.time), q, np.linalg.norm(v, axis=1)))


# ---------------------------------------------------------------------------
# CSV output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_corner_track(path, track: CornerTrack) -> Path:
    rows = (
        (t, *p, m) for t, p, m in zip(track.times, track.positions, track.moduli)
    )
    return write_csv(path, ["t", "x1", "x2", "x3", "modulus"], rows)


def write_impulse(path, series: ImpulseSeries) -> Path:
    rows = ((t, *v, m) for t, v, m in zip(series.times, series.values, series.moduli))
    return write_csv(path, ["t", "F1", "F2", "F3", "modulus"], rows)


def write_spectrum(path, sp: Spectrum) -> Path:
    rows = zip(sp.k, sp.coeff_modulus, sp.weighted, sp.is_square)
    return write_csv(path, ["k", "coeff_modulus", "weighted", "is_square"], rows)


def write_slices(path, rec: SliceRecorder) -> Path:
    def rows():
        for t, q, F in rec.rows:
            for qi, Fi in zip(q, F):
                yield t, qi, Fi

    return write_csv(path, ["t", "q", "F"], rows())
