"""Reconnection detection and the surgery that turns a touching pair into a mirrored eye.

Two triggers are available. The distance test fires once the smallest
``x1`` over the filament drops below ``th_x1``: the vortex then touches its
mirror partner across ``x1 = 0``. The impulse test watches the modulus of
the fluid impulse, which grows monotonically before reconnection and starts
to oscillate afterwards, and fires at the first sign change of its time
derivative.

The surgery makes three changes. It switches the filament to mirror
antisymmetric ends, it turns the interaction off, and it redistributes the
nodes by arc length.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .evolution import RhsConfig
from .geometry import (
    Filament,
    GeometryError,
    MirrorAntisymmetric,
    PeriodicShift,
    TWO_PI,
    arclength_reparametrize,
)

log = logging.getLogger(__name__)

TH_X1_DEFAULT = 1e-6


class Criterion(str, Enum):
    DISTANCE = "DistanceThreshold"
    IMPULSE_FLIP = "ImpulseFlip"


@dataclass(frozen=True)
class ReconnectionEvent:
    t_rec: float
    node_index: int
    x1_min: float
    criterion: Criterion

    def as_record(self) -> dict:
        return {
            "t_rec": self.t_rec,
            "criterion": self.criterion.value,
            "node_index": self.node_index,
            "x1_min": self.x1_min,
        }


def min_separation(f: Filament) -> tuple[int, float]:
    """Index and value of the smallest ``x1``; ties go to the lowest index."""
    x1 = f.nodes[:, 0]
    idx = int(np.argmin(x1))
    return idx, float(x1[idx])


def distance_check(f: Filament, th_x1: float = TH_X1_DEFAULT) -> ReconnectionEvent | None:
    idx, x1_min = min_separation(f)
    if x1_min <= th_x1:
        return ReconnectionEvent(float(f.time), idx, x1_min, Criterion.DISTANCE)
    return None


def impulse_flip_detect(times, moduli, th_F: float, rtol: float = 1e-6) -> float | None:
    """Earliest sample time where the derivative of ``|F|`` changes sign.

    Backward differences ``D(t_j) = (|F|_j - |F|_{j-1}) / τ`` are formed on
    the uniformly strided series, and the first ``t_j`` with
    ``D(t_j) D(t_{j-1}) <= -th_F`` is returned. ``None`` means no flip, or
    fewer than three samples (logged).
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(moduli, dtype=float)
    if t.shape != m.shape:
        raise ValueError("times and moduli must have equal length")
    if t.size < 3:
        log.warning("impulse flip test needs at least 3 samples, got %d", t.size)
        return None
    dt = np.diff(t)
    tau = dt.mean()
    if not np.allclose(dt, tau, rtol=rtol, atol=0.0):
        raise ValueError("impulse series must be sampled at a uniform stride")
    d = np.diff(m) / tau
    prod = d[1:] * d[:-1]
    hits = np.nonzero(prod <= -th_F)[0]
    if hits.size == 0:
        return None
    return float(t[hits[0] + 2])


@dataclass(frozen=True)
class CornerFit:
    """Window, in axial distance from the touching node, used to rebuild the corner.

    Nodes closer than ``inner`` are replaced; lines are fitted to the nodes
    between ``inner`` and ``outer`` on either side.
    """

    inner: float = 0.2
    outer: float = 0.5


def _arm_line(z: np.ndarray, xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares line ``(x1, x2) = a + b z``."""
    A = np.stack([np.ones_like(z), z], axis=1)
    coef, *_ = np.linalg.lstsq(A, xy, rcond=None)
    return coef[0], coef[1]


def rebuild_corner(nodes: np.ndarray, period: float, fit: CornerFit) -> np.ndarray:
    """Replace the rounded tip around node 0 by two straight arms meeting on ``x1 = 0``.

    ``nodes`` is one period starting at the touching node; the last nodes
    already carry the axial shift ``period``, so the left arm is read from
    the end of the array. The axial coordinate must be monotone near the tip.
    """
    n = nodes.shape[0]
    out = nodes.copy()
    z0 = nodes[0, 2]
    dz_right = nodes[:, 2] - z0
    dz_left = z0 + period - nodes[:, 2]
    right = np.nonzero((dz_right >= fit.inner) & (dz_right <= fit.outer) & (np.arange(n) < n // 2))[0]
    left = np.nonzero((dz_left >= fit.inner) & (dz_left <= fit.outer) & (np.arange(n) >= n // 2))[0]
    if right.size < 3 or left.size < 3:
        raise GeometryError("corner fit window holds fewer than 3 nodes on one side")
    aR, bR = _arm_line(dz_right[right], nodes[right, :2])
    aL, bL = _arm_line(-dz_left[left], nodes[left, :2])
    # arms meet where their x1 agree
    denom = bR[0] - bL[0]
    if abs(denom) < 1e-12:
        raise GeometryError("corner arms are parallel")
    zv = (aL[0] - aR[0]) / denom
    x2v = 0.5 * ((aR[1] + bR[1] * zv) + (aL[1] + bL[1] * zv))
    vertex = np.array([0.0, x2v, z0 + zv])
    iR = right[0]
    iL = left[-1]
    # right arm: nodes 0..iR-1 on the segment vertex -> node iR
    w = np.arange(iR)[:, None] / iR
    out[:iR] = vertex * (1 - w) + nodes[iR] * w
    # left arm: nodes iL+1..n-1 on the segment node iL -> vertex + period
    m = n - iL
    w = np.arange(1, m)[:, None] / m
    top = vertex + np.array([0.0, 0.0, period])
    out[iL + 1:] = nodes[iL] * (1 - w) + top * w
    return out


def perform_reconnection(
    f: Filament,
    event: ReconnectionEvent,
    cfg: RhsConfig,
    *,
    corner: CornerFit | None = CornerFit(),
    time_tol: float = 1e-12,
) -> tuple[Filament, RhsConfig]:
    """Apply the reconnection surgery at the event time.

    The touching node becomes node 0, wrapped nodes picking up the period
    shift. When ``corner`` is given, the rounded tip is replaced by the two
    fitted straight arms meeting on ``x1 = 0`` (see ``rebuild_corner``);
    otherwise only ``x1`` of node 0 is set to 0. A tangential contact left
    as it is would join the mirror image at a zero-angle cusp.

    The curve is then translated along x3 so that ``x3(0) = -L/2`` with
    ``L`` the axial period, which makes ``X(2π) = X(0) + (0, 0, L)``
    coincide with the mirror image ``D X(0)``. ``x2`` is left as it is. The
    boundary becomes ``MirrorAntisymmetric``, the interaction is switched
    off, and the nodes are redistributed at equal arc length with the curve
    scaled about the origin to length 2π, so the assembled loop has length
    4π. ``D`` is linear, so the scaling keeps ``X(2π) = D X(0)``.
    """
    if abs(f.time - event.t_rec) > time_tol:
        raise ValueError(f"stale event: filament at t={f.time}, event at t={event.t_rec}")
    if not isinstance(f.boundary, PeriodicShift):
        raise GeometryError("surgery expects a periodic (shifted) filament")
    shift = f.boundary.vector
    if shift[0] != 0.0 or shift[1] != 0.0:
        log.warning("period shift %s has transverse components; mirror ends will not close", shift)
    n = f.n_nodes
    k = event.node_index % n
    nodes = np.concatenate([f.nodes[k:], f.nodes[:k] + shift])
    if corner is not None:
        nodes = rebuild_corner(nodes, shift[2], corner)
    nodes[0, 0] = 0.0
    nodes[:, 2] -= nodes[0, 2] + 0.5 * shift[2]
    cut = Filament(nodes, MirrorAntisymmetric(), f.time)
    out = arclength_reparametrize(cut, TWO_PI)
    new_cfg = replace(cfg, epsilon=0.0, interaction_enabled=False)
    log.info(
        "reconnection at t=%.6f, node %d, x1_min=%.3e (%s)",
        event.t_rec, event.node_index, event.x1_min, event.criterion.value,
    )
    return out, new_cfg


__all__ = [
    "Criterion",
    "ReconnectionEvent",
    "min_separation",
    "distance_check",
    "impulse_flip_detect",
    "CornerFit",
    "rebuild_corner",
    "perform_reconnection",
]
