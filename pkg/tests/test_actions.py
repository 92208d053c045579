import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from contactred.actions import (LinearAction, conformal_moment_gap, conformal_rescale,
                                generator_field, infinitesimal_equivariance_gap,
                                invariance_residuals, moment_differential_check,
                                moment_image_annihilator, moment_map, reeb_aligned_subspace,
                                reeb_flow, reeb_flow_level_invariance, so3_on_c3,
                                symplectization_moment, torus_action)
from contactred.contact import reeb_field
from contactred.errors import DimensionError, PreconditionError
from contactred.forms import Poly1Form, PolyMap, squared_norm
from contactred.lie import LieAlgebraData, load_catalog
from contactred.manifold import tangent_frame
from contactred.reduction import sample_manifold
from contactred.scenarios import load_scenario, torus_scenario

ALPHA3 = Poly1Form.standard(3)


def test_weighted_circle_generator():
    act = torus_action([[1, -1, -1]])
    assert np.array_equal(generator_field(act, 0, [1, 0, 0, 0, 0, 0]), [0, 1, 0, 0, 0, 0])


def test_generator_vanishes_on_fixed_coordinates():
    act = torus_action([[1, 0, 0]])
    assert np.array_equal(generator_field(act, 0, [0, 0, 1, 0, 0, 0]), np.zeros(6))


def test_generator_index_out_of_range():
    with pytest.raises(IndexError):
        generator_field(torus_action([[1, 1]]), 1, np.zeros(4))


def test_commutator_check_rejects_non_representation():
    so3 = load_catalog()["so3"]
    with pytest.raises(DimensionError):
        LinearAction(so3, [np.zeros((3, 3)), np.zeros((3, 3)), np.eye(3)])


@pytest.mark.parametrize("maker", [lambda: torus_action([[1, 1, 1], [0, 1, -1]]),
                                   lambda: so3_on_c3(load_catalog()["so3"])])
def test_generator_matches_flow_derivative(maker):
    act = maker()
    rng = np.random.default_rng(3)
    x = rng.normal(size=act.ambient_dim)
    h = 1e-5
    for i in range(act.dim):
        a = np.eye(act.dim)[i]
        fd = (expm(h * act.combination(a)) @ x - expm(-h * act.combination(a)) @ x) / (2 * h)
        assert np.allclose(generator_field(act, i, x), fd, atol=1e-8)


def test_so3_generators_represent_brackets():
    so3 = load_catalog()["so3"]
    act = so3_on_c3(so3)
    m = act.matrices
    for i in range(3):
        for j in range(3):
            rhs = np.einsum("k,kab->ab", so3.c[i, j], m)
            assert np.allclose(m[i] @ m[j] - m[j] @ m[i], rhs, atol=1e-12)


# -- moment map ----------------------------------------------------------------

def test_ellipsoid_moment_values():
    for sid in ("E1", "E2"):
        scen = load_scenario(sid)
        assert moment_map(scen.action, scen.form, [1, 0, 0, 0, 0, 0]).coords[0] == pytest.approx(1)
    scen = load_scenario("E2")
    p = scen.witnesses["three_torus"]
    assert scen.manifold.on_manifold(p)
    assert moment_map(scen.action, scen.form, p).coords[0] == pytest.approx(1, abs=1e-14)


@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=6, max_size=6))
def test_moment_is_weighted_norm(x):
    act = torus_action([[1, -1, -1], [2, 0, 3]])
    z2 = np.array(x[0::2]) ** 2 + np.array(x[1::2]) ** 2
    expected = [z2[0] - z2[1] - z2[2], 2 * z2[0] + 3 * z2[2]]
    assert np.allclose(moment_map(act, ALPHA3, x).coords, expected, atol=1e-12)


def test_moment_zero_at_fixed_point():
    act = torus_action([[1, -1, 0]])
    assert moment_map(act, ALPHA3, [0, 0, 0, 0, 0.3, 0.7]).coords[0] == 0


def test_moment_dimension_mismatch():
    with pytest.raises(DimensionError):
        moment_map(torus_action([[1]]), Poly1Form.standard(1), [1, 0, 0])


# -- conformal rescaling and symplectization --------------------------------------

def test_conformal_identity_and_constant():
    scen = load_scenario("E1")
    pts = sample_manifold(scen, 20)
    assert conformal_moment_gap(scen.action, scen.form, PolyMap.constant(6, 1), pts) == 0
    doubled = conformal_rescale(scen.form, PolyMap.constant(6, 2), pts)
    for p in pts:
        assert np.allclose(moment_map(scen.action, doubled, p).coords,
                           2 * moment_map(scen.action, scen.form, p).coords)


def test_conformal_rescale_on_e2_preserves_ray_preimage():
    scen = load_scenario("E2")
    f = 1 + squared_norm(6) * PolyMap.constant(6, "1/4")
    pts = sample_manifold(scen, 100, seed=5)
    assert conformal_moment_gap(scen.action, scen.form, f, pts) < 1e-10
    scaled = conformal_rescale(scen.form, f, pts)
    for p in pts:
        a = moment_map(scen.action, scen.form, p).coords[0]
        b = moment_map(scen.action, scaled, p).coords[0]
        assert (a > 0) == (b > 0)


def test_conformal_rescale_requires_positive_function():
    with pytest.raises(PreconditionError):
        conformal_rescale(ALPHA3, squared_norm(6) - 1, [[0.1, 0, 0, 0, 0, 0]])


def test_symplectization_moment():
    scen = load_scenario("E1")
    p = [1, 0, 0, 0, 0, 0]
    assert np.array_equal(symplectization_moment(scen.action, scen.form, p, 0.0).coords,
                          moment_map(scen.action, scen.form, p).coords)
    assert symplectization_moment(scen.action, scen.form, p, math.log(2)).coords[0] == \
        pytest.approx(2.0)
    rng = np.random.default_rng(8)
    for m in sample_manifold(scen, 100, seed=6):
        t = rng.normal() * 3
        psi = symplectization_moment(scen.action, scen.form, m, t).coords[0]
        phi = moment_map(scen.action, scen.form, m).coords[0]
        assert (psi > 0) == (phi > 0)


# -- differential identities ---------------------------------------------------------

def test_moment_differential_on_e2():
    scen = load_scenario("E2")
    rng = np.random.default_rng(4)
    for x in sample_manifold(scen, 40, seed=7):
        v = tangent_frame(scen.manifold, x).basis @ rng.normal(size=5)
        assert moment_differential_check(scen.action, scen.form, x, v, 0).gap < 1e-10
        along = moment_differential_check(scen.action, scen.form, x,
                                          generator_field(scen.action, 0, x), 0)
        assert abs(along.lhs) < 1e-12 and abs(along.rhs) < 1e-12
        y = reeb_field(scen.manifold, scen.form, x)
        on_reeb = moment_differential_check(scen.action, scen.form, x, y, 0)
        assert abs(on_reeb.lhs) < 1e-10 and abs(on_reeb.rhs) < 1e-10


@pytest.mark.parametrize("sid", ["S5-T2", "S5-T3", "E1", "S5-SO3"])
def test_invariance_is_exact(sid):
    scen = load_scenario(sid)
    assert all(r.is_zero() for r in invariance_residuals(scen.action, scen.form))


@pytest.mark.parametrize("sid", ["S5-T2", "E2"])
def test_abelian_group_equivariance(sid):
    scen = load_scenario(sid)
    rng = np.random.default_rng(2)
    for x in sample_manifold(scen, 15, seed=1):
        base = moment_map(scen.action, scen.form, x).coords
        for s in rng.normal(size=(3, scen.action.dim)) * 2:
            moved = expm(scen.action.combination(s)) @ x
            assert np.allclose(moment_map(scen.action, scen.form, moved).coords, base, atol=1e-8)


def test_so3_infinitesimal_equivariance():
    scen = load_scenario("S5-SO3")
    for x in sample_manifold(scen, 20, seed=2):
        assert infinitesimal_equivariance_gap(scen.action, scen.form, x) < 1e-10


def _zero_level_points(scen, n, rng):
    """Points of the unit sphere where the moment map vanishes, built by hand."""
    out = []
    if scen.id == "S5-SO3":
        for _ in range(n):
            r = rng.normal(size=3)
            r /= np.linalg.norm(r)
            c = rng.normal()
            z = np.exp(1j * c) * r  # complex multiple of a real vector: x parallel to y
            out.append(np.ravel(np.column_stack([z.real, z.imag])))
    else:
        for _ in range(n):
            phases = rng.uniform(0, 2 * np.pi, 3)
            z = np.exp(1j * phases) / np.sqrt(3)
            out.append(np.ravel(np.column_stack([z.real, z.imag])))
    return out


@pytest.mark.parametrize("which", ["torus", "so3"])
def test_zero_level_orbits_are_isotropic(which):
    if which == "so3":
        scen = load_scenario("S5-SO3")
    else:
        scen = torus_scenario("T2-zero", [1, 1, 1], [[1, -1, 0], [0, 1, -1]], [[0, 0]])
    rng = np.random.default_rng(17)
    for x in _zero_level_points(scen, 25, rng):
        assert np.max(np.abs(moment_map(scen.action, scen.form, x).coords)) < 1e-12
        fields = scen.action.fields(x)
        gram = fields.T @ scen.form.d.matrix(x) @ fields
        assert np.max(np.abs(gram)) < 1e-10


@pytest.mark.parametrize("sid", ["S3", "S5-T2", "S5-T3", "E2", "S5-SO3"])
def test_reeb_aligned_equals_image_annihilator(sid):
    scen = load_scenario(sid)
    for x in sample_manifold(scen, 15, seed=12):
        a = reeb_aligned_subspace(scen.action, scen.form, scen.manifold, x)
        b = moment_image_annihilator(scen.action, scen.form, scen.manifold, x)
        assert a.equals(b, tol=1e-8)
    if sid == "S3":
        # the Hopf action is generated by the Reeb field itself
        assert a.dim == 1


# -- Reeb flow -------------------------------------------------------------------------

def test_reeb_flow_trivial_on_darboux():
    scen = load_scenario("R3-darboux")
    dev = reeb_flow_level_invariance(scen.action, scen.form, scen.manifold, [0.1, 0.2, 0.3], 1.0)
    assert dev == 0.0


def test_hopf_orbit_closes():
    scen = load_scenario("S3")
    x = np.array([0.6, 0.0, 0.0, 0.8])
    traj = reeb_flow(scen.manifold, scen.form, x, 2 * np.pi)
    mm = np.array([moment_map(scen.action, scen.form, p).coords[0] for p in traj[::50]])
    assert np.max(np.abs(mm - 1)) < 1e-8
    assert np.linalg.norm(traj[-1] - x) < 1e-8


def test_reeb_flow_preserves_e2_level():
    scen = load_scenario("E2")
    for x in sample_manifold(scen, 3, seed=20):
        assert reeb_flow_level_invariance(scen.action, scen.form, scen.manifold, x, 1.0) < 1e-6
