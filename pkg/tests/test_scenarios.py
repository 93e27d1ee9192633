import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfelab.geometry import TWO_PI, PeriodicShift, frenet_curvature_torsion
from vfelab.scenarios import (
    EyeParams,
    PairParams,
    Perturbation,
    PolyEyeParams,
    ScenarioError,
    corner_c0,
    eye_corner_angle,
    eye_curve,
    eye_enclosed_area,
    make_antiparallel_pair,
    make_eye,
    make_polygonal_eye,
    make_reference,
    pair_displacement,
    regular_polygon_vertices,
)


def tangent_angle(u, v):
    return np.arccos(np.clip(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)), -1, 1))


def test_eye_corner_angle_planar():
    # b = 1, b̃ = 0: the arms meet with tangents (1, 1, 0) and (-1, 1, 0)
    assert eye_corner_angle(1.0, 0.0) == pytest.approx(np.pi / 2)


@given(b=st.floats(0.1, 3.0), bt=st.floats(0.0, 3.0))
def test_eye_corner_angle_from_tangents(b, bt):
    # directions leaving the corner at s = 0 along the two arms
    right = np.array([b, 1.0, -bt])  # X'(0+)
    left = -np.array([b, -1.0, bt])  # -X'(2π-)
    assert eye_corner_angle(b, bt) == pytest.approx(tangent_angle(right, left), abs=1e-9)


def test_corner_c0_values():
    assert corner_c0(np.pi) == pytest.approx(0.0)
    theta = np.pi / 2
    c0 = corner_c0(theta)
    assert np.sin(theta / 2) == pytest.approx(np.exp(-np.pi * c0**2 / 2))


@given(theta=st.floats(0.05, np.pi))
def test_corner_c0_inverts(theta):
    c0 = corner_c0(theta)
    assert np.exp(-np.pi * c0**2 / 2) == pytest.approx(np.sin(theta / 2), rel=1e-12)


def test_corner_c0_rejects_bad_angle():
    with pytest.raises(ScenarioError):
        corner_c0(0.0)
    with pytest.raises(ScenarioError):
        corner_c0(4.0)


def test_eye_curve_corners():
    s = np.array([0.0, np.pi])
    pts = eye_curve(s, 1.0, 2.0)
    np.testing.assert_allclose(pts, [[0, -np.pi / 2, 0], [0, np.pi / 2, 0]], atol=1e-15)


def test_eye_curve_is_closed():
    pts = eye_curve(np.array([0.0, TWO_PI]), 0.7, 1.3)
    np.testing.assert_allclose(pts[0], pts[1], atol=1e-14)


def test_make_eye_length_and_corners():
    f = make_eye(EyeParams(1.0, 2.0, 512))
    assert isinstance(f.boundary, PeriodicShift) and f.boundary.closed
    # corners sit on nodes 0 and n/2 on the x2 axis
    np.testing.assert_allclose(f.nodes[0, [0, 2]], 0.0, atol=1e-15)
    np.testing.assert_allclose(f.nodes[256, [0, 2]], 0.0, atol=1e-15)
    assert f.nodes[256, 1] == pytest.approx(-f.nodes[0, 1])


def test_make_eye_curvature_symmetric():
    # the two branches are congruent, so κ(s + π) = κ(s)
    f = make_eye(EyeParams(1.0, 2.0, 256))
    k = frenet_curvature_torsion(f).curvature
    np.testing.assert_allclose(k[:128], k[128:], rtol=1e-10)


def test_eye_params_validation():
    with pytest.raises(ScenarioError):
        EyeParams(b=0.0)
    with pytest.raises(ScenarioError):
        EyeParams(b_tilde=-1.0)
    with pytest.raises(ScenarioError):
        EyeParams(n_nodes=101)


def test_eye_area_oracle():
    # 2 ∫_0^π b sin s ds by quadrature
    s = np.linspace(0.0, np.pi, 20001)
    quad = 2 * np.trapezoid(1.5 * np.sin(s), s)
    assert eye_enclosed_area(1.5) == pytest.approx(quad, rel=1e-7)


def test_poly_eye_params():
    assert PolyEyeParams(12, 4).l == 3
    for M, K in [(11, 1), (12, 5), (12, 12)]:
        with pytest.raises(ScenarioError):
            PolyEyeParams(M, K)


@pytest.mark.parametrize("M,K", [(12, 4), (8, 2), (120, 40)])
def test_polygonal_eye_geometry(M, K):
    f, theta = make_polygonal_eye(PolyEyeParams(M, K), nodes_per_side=8)
    assert f.n_nodes == 2 * K * 8
    l = M / K
    assert theta == pytest.approx(TWO_PI * (M - l) / (l * M))
    # every side has length π/K, so the perimeter is 2π
    verts = f.nodes[::8]
    sides = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
    np.testing.assert_allclose(sides, np.pi / K, rtol=1e-12)
    # the junction angle between the closing side and the first side
    u = verts[0] - verts[-1]
    v = verts[1] - verts[0]
    assert np.pi - tangent_angle(u, v) == pytest.approx(theta, abs=1e-9)


@given(M=st.integers(3, 40), length=st.floats(0.5, 10.0))
def test_regular_polygon_perimeter(M, length):
    v = regular_polygon_vertices(M, length)
    sides = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    np.testing.assert_allclose(sides.sum(), length, rtol=1e-12)
    np.testing.assert_allclose(sides, sides[0], rtol=1e-12)


def test_unperturbed_pair_is_a_line():
    f = make_antiparallel_pair(PairParams(b=0.22, n_nodes=64))
    np.testing.assert_allclose(f.nodes[:, 0], 0.22)
    np.testing.assert_allclose(f.nodes[:, 1], 0.0)
    np.testing.assert_allclose(f.nodes[:, 2], f.grid.s)
    assert f.boundary.shift == (0.0, 0.0, TWO_PI)


def test_pair_amplitude_must_stay_below_b():
    with pytest.raises(ScenarioError):
        PairParams(b=0.22, perturbation=Perturbation(1, 0.22))


def test_single_mode_displacement():
    p = PairParams(perturbation=Perturbation(1, 0.1, seed=3, plane_angle=np.pi / 2), n_nodes=256)
    s = np.arange(256) * TWO_PI / 256
    d = pair_displacement(p, s)
    # mode 1 in the x2 direction only
    np.testing.assert_allclose(d[:, 0], 0.0, atol=1e-15)
    assert np.abs(d[:, 1]).max() == pytest.approx(0.1, rel=1e-3)
    amp = np.abs(np.fft.rfft(d[:, 1]))
    assert np.argmax(amp) == 1
    assert amp[2:].max() < 1e-10 * amp[1]


@given(seed=st.integers(0, 2**16), modes=st.integers(1, 5), amp=st.floats(0.01, 0.2))
def test_perturbation_is_seeded_and_scaled(seed, modes, amp):
    pert = Perturbation(modes, amp, seed=seed)
    p = PairParams(perturbation=pert, n_nodes=128)
    s = np.arange(128) * TWO_PI / 128
    a = pair_displacement(p, s)
    b = pair_displacement(PairParams(perturbation=pert, n_nodes=128), s)
    np.testing.assert_array_equal(a, b)
    fine = np.linspace(0, TWO_PI, 8192, endpoint=False)
    assert np.linalg.norm(pair_displacement(p, fine), axis=1).max() == pytest.approx(amp)
    assert np.linalg.norm(a, axis=1).max() <= amp * (1 + 1e-12)


def test_reference_curves():
    c = make_reference("circle", 64, R=2.0)
    np.testing.assert_allclose(np.linalg.norm(c.nodes, axis=1), 2.0)
    h = make_reference("helix", 64, a=1.0, b=0.5)
    assert h.boundary.shift == (0.0, 0.0, np.pi)
    with pytest.raises(ScenarioError):
        make_reference("trefoil", 64)
    with pytest.raises(ScenarioError):
        make_reference("circle", 64, R=-1.0)
