import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfelab.geometry import (
    MIRROR,
    TWO_PI,
    Filament,
    GeometryError,
    MirrorAntisymmetric,
    ParamGrid,
    PeriodicShift,
    arclength_reparametrize,
    closed_curve_assemble,
    derivative_fields,
    frenet_curvature_torsion,
    ghost_extend,
    hasimoto_psi,
    hausdorff,
    junction_gaps,
    tangent_speed,
)
from vfelab.scenarios import EyeParams, eye_curve, make_eye, make_reference


def sampled(fn, n, shift=(0.0, 0.0, 0.0)):
    s = np.arange(n) * TWO_PI / n
    return Filament(fn(s), PeriodicShift(shift))


def trig3(s):
    return np.stack([np.cos(3 * s), np.sin(3 * s), 0.3 * np.sin(2 * s)], axis=1)


def trig3_ds(s):
    return np.stack([-3 * np.sin(3 * s), 3 * np.cos(3 * s), 0.6 * np.cos(2 * s)], axis=1)


def half_eye(n, b=1.0, bt=0.0):
    """Half of the eye written on [0, 2π) so that its D image is the other half."""
    sig = np.arange(n) * TWO_PI / n
    u = 0.5 * sig
    nodes = np.stack([b * np.sin(u), -bt * np.sin(u), u - 0.5 * np.pi], axis=1)
    return Filament(nodes, MirrorAntisymmetric())


# ---------------------------------------------------------------------------
# grid and ghosts


def test_grid_spacing():
    g = ParamGrid(64)
    assert g.h == pytest.approx(TWO_PI / 64)
    assert g.s[-1] == pytest.approx(TWO_PI - g.h)


def test_too_few_nodes_rejected():
    with pytest.raises(GeometryError):
        ParamGrid(8)


def test_nodes_are_read_only():
    f = make_reference("circle", 32)
    with pytest.raises(ValueError):
        f.nodes[0, 0] = 1.0


def test_nonfinite_nodes_rejected():
    nodes = np.zeros((32, 3))
    nodes[3, 1] = np.nan
    with pytest.raises(GeometryError):
        Filament(nodes)


def test_circle_ghosts_wrap():
    f = make_reference("circle", 64)
    ext = ghost_extend(f, 4)
    assert ext.shape == (72, 3)
    np.testing.assert_array_equal(ext[-4:], f.nodes[:4])
    np.testing.assert_array_equal(ext[:4], f.nodes[-4:])


def test_line_ghost_carries_shift():
    f = make_reference("line", 64, b=0.22)
    ext = ghost_extend(f, 1)
    np.testing.assert_allclose(ext[-1], [0.22, 0.0, TWO_PI], atol=1e-15)
    np.testing.assert_allclose(ext[0], [0.22, 0.0, -TWO_PI / 64], atol=1e-15)


def test_mirror_ghost_reflects():
    nodes = np.zeros((32, 3))
    nodes[:, 2] = np.linspace(-1, 1, 32)
    nodes[-1] = (0.1, 0.5, 0.2)
    f = Filament(nodes, MirrorAntisymmetric())
    ext = ghost_extend(f, 2)
    # the ghost at -h is D X(2π - h)
    np.testing.assert_allclose(ext[1], [-0.1, 0.5, -0.2])
    np.testing.assert_allclose(ext[-2], nodes[0] * MIRROR)


def test_ghost_width_limit():
    f = make_reference("circle", 32)
    with pytest.raises(GeometryError):
        ghost_extend(f, 17)


@given(width=st.integers(0, 16), n=st.integers(32, 80), mirror=st.booleans())
def test_ghost_restriction_is_identity(width, n, mirror):
    nodes = np.random.default_rng(n).normal(size=(n, 3))
    boundary = MirrorAntisymmetric() if mirror else PeriodicShift((0.0, 0.0, 1.5))
    f = Filament(nodes, boundary)
    ext = ghost_extend(f, width)
    np.testing.assert_array_equal(ext[width:width + n], nodes)


# ---------------------------------------------------------------------------
# derivatives and Frenet data


def test_circle_derivative():
    f = make_reference("circle", 256)
    X_s, X_ss = derivative_fields(f)
    np.testing.assert_allclose(X_s[0], [0.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(X_ss, -f.nodes, atol=1e-12)


def test_line_derivative_exact():
    f = make_reference("line", 64, b=0.3)
    X_s, X_ss = derivative_fields(f)
    np.testing.assert_allclose(X_s, np.tile([0.0, 0.0, 1.0], (64, 1)), atol=1e-13)
    np.testing.assert_allclose(X_ss, 0.0, atol=1e-11)


def test_derivative_order_eight():
    errs = []
    for n in (128, 256):
        f = sampled(trig3, n)
        X_s, _ = derivative_fields(f)
        errs.append(np.abs(X_s - trig3_ds(f.grid.s)).max())
    order = np.log2(errs[0] / errs[1])
    assert 7.5 <= order <= 8.5


def test_circle_frenet():
    f = make_reference("circle", 128, R=2.0)
    fr = frenet_curvature_torsion(f)
    np.testing.assert_allclose(fr.curvature, 0.5, atol=1e-8)
    assert np.all(np.abs(fr.torsion) < 1e-8)


def test_helix_frenet():
    # oracle: κ = a/(a²+b²), τ = b/(a²+b²)
    f = make_reference("helix", 512, a=1.0, b=1.0)
    fr = frenet_curvature_torsion(f)
    np.testing.assert_allclose(fr.curvature, 0.5, atol=1e-10)
    np.testing.assert_allclose(fr.torsion, 0.5, atol=1e-10)


def test_line_torsion_degenerate():
    f = make_reference("line", 64)
    fr = frenet_curvature_torsion(f)
    assert np.all(fr.degenerate)
    assert np.all(fr.torsion == 0.0)
    assert np.all(fr.curvature < 1e-8)


def test_unit_tangent():
    f = sampled(trig3, 96)
    fr = frenet_curvature_torsion(f)
    np.testing.assert_allclose(np.linalg.norm(fr.tangent, axis=1), 1.0, atol=1e-15)


def test_zero_tangent_rejected():
    f = Filament(np.ones((32, 3)))
    with pytest.raises(GeometryError):
        frenet_curvature_torsion(f)


def test_hasimoto_circle():
    np.testing.assert_allclose(hasimoto_psi(make_reference("circle", 64)), 1.0, atol=1e-12)


def test_hasimoto_helix():
    f = make_reference("helix", 512, a=1.0, b=1.0)
    # κ = τ = 1/2 and the phase integral runs over the parameter
    psi = hasimoto_psi(f)
    s = f.grid.s
    np.testing.assert_allclose(psi, 0.5 * np.exp(0.5j * s), atol=1e-9)


def test_hasimoto_planar_eye_is_real():
    f = make_eye(EyeParams(1.0, 0.0, 256))
    psi = hasimoto_psi(f)
    assert np.abs(psi.imag).max() < 1e-12
    np.testing.assert_allclose(psi.real, frenet_curvature_torsion(f).curvature)


# ---------------------------------------------------------------------------
# arc length


def test_reparametrize_uniform_circle_is_identity():
    f = make_reference("circle", 128)
    g = arclength_reparametrize(f, TWO_PI)
    np.testing.assert_allclose(g.nodes, f.nodes, atol=1e-10)


def test_reparametrize_warped_circle():
    n = 256
    s = np.arange(n) * TWO_PI / n
    w = s + 0.3 * np.sin(s)
    f = Filament(np.stack([np.cos(w), np.sin(w), 0 * w], axis=1))
    g = arclength_reparametrize(f, TWO_PI)
    seg = np.linalg.norm(np.diff(np.vstack([g.nodes, g.nodes[:1]]), axis=0), axis=1)
    assert np.abs(seg / seg.mean() - 1).max() < 1e-6
    assert np.abs(np.linalg.norm(g.nodes, axis=1) - 1).max() < 1e-6
    np.testing.assert_allclose(tangent_speed(g), 1.0, rtol=1e-6)
    assert hausdorff(g.nodes, f.nodes) < 10 * f.h


def test_eye_chord_sum_converges_to_two_pi():
    # equal arc-length samples of a length-2π curve: the chord deficit is O(h²)
    deficits = []
    for n in (1024, 2048):
        f = make_eye(EyeParams(1.0, 2.0, n))
        chords = np.linalg.norm(np.diff(np.vstack([f.nodes, f.nodes[:1]]), axis=0), axis=1)
        assert chords.std() / chords.mean() < 1e-5
        deficits.append(TWO_PI - chords.sum())
    assert deficits[1] > 0
    assert np.log2(deficits[0] / deficits[1]) == pytest.approx(2.0, abs=0.1)


def test_reparametrize_rescales():
    f = make_reference("circle", 64, R=2.0)
    g = arclength_reparametrize(f, TWO_PI)
    # the length is taken on the cubic interpolant, accurate to O(h⁴)
    np.testing.assert_allclose(np.linalg.norm(g.nodes, axis=1), 1.0, atol=1e-6)


def test_reparametrize_rejects_degenerate():
    with pytest.raises(GeometryError):
        arclength_reparametrize(Filament(np.zeros((32, 3))), TWO_PI)


@given(amp=st.floats(0.0, 0.4), phase=st.floats(0.0, 6.0))
def test_reparametrize_idempotent(amp, phase):
    n = 64
    s = np.arange(n) * TWO_PI / n
    w = s + amp * np.sin(s + phase)
    f = Filament(np.stack([np.cos(w), 0.5 * np.sin(w), 0.2 * np.sin(2 * w)], axis=1))
    once = arclength_reparametrize(f)
    twice = arclength_reparametrize(once)
    np.testing.assert_allclose(twice.nodes, once.nodes, atol=1e-9)


# ---------------------------------------------------------------------------
# mirror loops


@pytest.mark.parametrize("bt", [0.0, 2.0])
def test_assembled_half_eye_is_the_eye(bt):
    n = 128
    f = half_eye(n, 1.0, bt)
    loop = closed_curve_assemble(f)
    s = np.arange(2 * n) * np.pi / n
    eye = eye_curve(s, 1.0, bt)[:, [0, 2, 1]]  # the eye's plane axis becomes x3
    np.testing.assert_allclose(loop, eye, atol=1e-12)


def test_assemble_rejects_periodic():
    with pytest.raises(GeometryError):
        closed_curve_assemble(make_reference("circle", 32))


def test_assemble_warns_on_gap():
    nodes = np.array(half_eye(64).nodes)
    nodes[:, 0] += 0.5  # x1 no longer vanishes at the junction
    with pytest.warns(RuntimeWarning):
        closed_curve_assemble(Filament(nodes, MirrorAntisymmetric()))


def test_junction_gaps_small_for_half_eye():
    f = half_eye(64)
    spacing = np.linalg.norm(np.diff(f.nodes, axis=0), axis=1).max()
    assert junction_gaps(f).max() <= 2 * spacing
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        closed_curve_assemble(f)


@given(seed=st.integers(0, 1000))
def test_assembled_loop_symmetric(seed):
    nodes = np.random.default_rng(seed).normal(size=(40, 3))
    f = Filament(nodes, MirrorAntisymmetric())
    loop = closed_curve_assemble(f, tol=np.inf)
    mapped = np.roll(loop * MIRROR, 40, axis=0)
    np.testing.assert_allclose(mapped, loop, atol=1e-12)
