import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfelab.evolution import RhsConfig
from vfelab.geometry import (
    MIRROR,
    TWO_PI,
    Filament,
    GeometryError,
    MirrorAntisymmetric,
    PeriodicShift,
    closed_curve_assemble,
    junction_gaps,
)
from vfelab.reconnection import (
    CornerFit,
    Criterion,
    ReconnectionEvent,
    distance_check,
    impulse_flip_detect,
    min_separation,
    perform_reconnection,
    rebuild_corner,
)

CFG = RhsConfig(epsilon=0.05, r_c=0.05, interaction_enabled=True)


def touching_pair(n=256, k0=80, shape="round"):
    """Periodic vortex whose x1 reaches zero at node ``k0``."""
    s = np.arange(n) * TWO_PI / n
    d = (s - s[k0] + np.pi) % TWO_PI - np.pi
    if shape == "round":
        x1 = 0.11 * (1 - np.cos(d))
        x2 = 0.05 * np.sin(s)
    else:
        x1 = 0.3 * np.abs(d)
        x2 = 0.1 * d
    nodes = np.stack([x1, x2, s], axis=1)
    return Filament(nodes, PeriodicShift((0.0, 0.0, TWO_PI)), time=1.25)


def test_min_separation_ties_lowest_index():
    nodes = np.zeros((32, 3))
    nodes[:, 0] = 1.0
    nodes[[5, 9], 0] = 0.1
    nodes[:, 2] = np.arange(32)
    idx, x1 = min_separation(Filament(nodes))
    assert (idx, x1) == (5, 0.1)


def test_distance_check():
    f = touching_pair()
    ev = distance_check(f, 1e-6)
    assert ev is not None
    assert ev.criterion is Criterion.DISTANCE
    assert ev.t_rec == 1.25
    assert f.nodes[ev.node_index, 0] == pytest.approx(0.0, abs=1e-6)
    lifted = f.with_nodes(f.nodes + [0.01, 0.0, 0.0])
    assert distance_check(lifted, 1e-6) is None
    rec = ev.as_record()
    assert rec["criterion"] == "DistanceThreshold"
    assert set(rec) == {"t_rec", "criterion", "node_index", "x1_min"}


# ---------------------------------------------------------------------------
# impulse flip


def test_impulse_flip_fixture():
    t = np.arange(8) * 0.1
    m = np.array([0.0, 1.0, 2.0, 3.0, 2.5, 2.0, 2.2, 2.4])
    # backward differences 10, 10, 10, -5, -5, 2, 2 give successive products
    # 100, 100, -50, 25, -10, 4; the first one below -th_F ends at t[4]
    assert impulse_flip_detect(t, m, 1.0) == pytest.approx(0.4)
    assert impulse_flip_detect(t, m, 60.0) is None


def test_impulse_flip_monotone():
    t = np.linspace(0, 1, 20)
    assert impulse_flip_detect(t, t**2, 1e-6) is None


def test_impulse_flip_short_series(caplog):
    with caplog.at_level(logging.WARNING):
        assert impulse_flip_detect([0.0, 0.1], [1.0, 2.0], 1e-6) is None
    assert "at least 3" in caplog.text


def test_impulse_flip_validation():
    with pytest.raises(ValueError):
        impulse_flip_detect([0.0, 0.1, 0.3], [1.0, 2.0, 1.0], 1e-6)
    with pytest.raises(ValueError):
        impulse_flip_detect([0.0, 0.1, 0.2], [1.0, 2.0], 1e-6)


@given(peak=st.integers(2, 40), slope=st.floats(0.1, 10.0))
def test_impulse_flip_finds_peak(peak, slope):
    t = np.arange(50) * 0.01
    m = slope * (0.01 * peak - np.abs(t - 0.01 * peak))
    hit = impulse_flip_detect(t, m, 1e-9)
    assert hit == pytest.approx(t[peak + 1])


# ---------------------------------------------------------------------------
# surgery


def test_rebuild_corner_keeps_a_sharp_v():
    # node 0 is the tip and the period runs up to the shifted tip at z = 2π
    f = touching_pair(shape="v", k0=0)
    nodes = np.array(f.nodes)
    out = rebuild_corner(nodes, TWO_PI, CornerFit())
    np.testing.assert_allclose(out[:, :2], nodes[:, :2], atol=1e-12)
    np.testing.assert_allclose(out[:, 2], nodes[:, 2], atol=1e-12)


def test_rebuild_corner_vertex_on_plane():
    f = touching_pair(k0=0)
    out = rebuild_corner(np.array(f.nodes), TWO_PI, CornerFit(0.2, 0.5))
    assert out[0, 0] == pytest.approx(0.0, abs=1e-12)
    # the arms are straight lines through the vertex
    right = out[:8]
    d = right[1:] - right[:-1]
    cross = np.cross(d[1:], d[:-1])
    np.testing.assert_allclose(cross, 0.0, atol=1e-12)
    # far nodes are untouched
    np.testing.assert_array_equal(out[20:230], f.nodes[20:230])


def test_rebuild_corner_needs_nodes():
    f = touching_pair(n=32, k0=0)
    with pytest.raises(GeometryError):
        rebuild_corner(np.array(f.nodes), TWO_PI, CornerFit(0.2, 0.25))


@pytest.mark.parametrize("corner", [CornerFit(), None])
def test_surgery_output(corner):
    f = touching_pair(n=256)
    ev = distance_check(f, 1e-6)
    g, cfg = perform_reconnection(f, ev, CFG, corner=corner)
    assert isinstance(g.boundary, MirrorAntisymmetric)
    assert not cfg.active and cfg.epsilon == 0.0
    assert g.time == f.time
    assert g.nodes[0, 0] == pytest.approx(0.0, abs=1e-12)
    # node 0 closes onto the image of the period end
    assert junction_gaps(g).max() < 2 * np.linalg.norm(np.diff(g.nodes, axis=0), axis=1).max()
    loop = closed_curve_assemble(g)
    np.testing.assert_allclose(np.roll(loop * MIRROR, g.n_nodes, axis=0), loop, atol=1e-14)
    seg = np.linalg.norm(np.diff(g.nodes, axis=0), axis=1)
    assert seg.std() / seg.mean() < 1e-3


def test_surgery_rescales_to_two_pi():
    f = touching_pair(n=256)
    g, _ = perform_reconnection(f, distance_check(f, 1e-6), CFG, corner=None)
    chord = np.linalg.norm(np.diff(f.nodes, axis=0), axis=1).sum()
    # one period measured by chords, closed onto the shifted first node
    chord += np.linalg.norm(f.nodes[0] + [0.0, 0.0, TWO_PI] - f.nodes[-1])
    scale = TWO_PI / chord
    # half of a 4π loop; chords undershoot the curve by O(h²)
    seg = np.linalg.norm(np.diff(closed_curve_assemble(g), axis=0, append=g.nodes[:1]), axis=1)
    assert seg.sum() == pytest.approx(2 * TWO_PI, rel=1e-3)
    # x2 is scaled with the curve but not translated
    assert g.nodes[:, 1].max() == pytest.approx(scale * f.nodes[:, 1].max(), abs=1e-3)
    assert g.nodes[0, 2] == pytest.approx(-np.pi * scale, rel=1e-3)
    assert junction_gaps(g).max() < 2 * seg.max()


def test_surgery_rejects_stale_event():
    f = touching_pair()
    ev = ReconnectionEvent(0.5, 10, 0.0, Criterion.DISTANCE)
    with pytest.raises(ValueError):
        perform_reconnection(f, ev, CFG)


def test_surgery_rejects_mirror_input():
    f = touching_pair()
    ev = distance_check(f, 1e-6)
    g = Filament(f.nodes, MirrorAntisymmetric(), f.time)
    with pytest.raises(GeometryError):
        perform_reconnection(g, ev, CFG)
