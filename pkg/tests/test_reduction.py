import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import null_space as scipy_null_space
from scipy.linalg import subspace_angles

from contactred.actions import moment_map, symplectization_moment
from contactred.contact import reeb_field
from contactred.errors import NonRegularValueError, NotTorusError, PreconditionError, ScenarioError
from contactred.forms import PolyMap, squared_norm
from contactred.lie import kernel_algebra
from contactred.manifold import tangent_frame
from contactred.reduction import (albert_generators, albert_reduce, bookkeeping_quotient,
                                  fixed_point_manifold, gs_dimension_report, isotropy_label,
                                  locally_free_check, measure_quotient, orbit_type_partition,
                                  quotient_dimension, ray_membership, ray_tangent,
                                  reduced_kernel_check, sample_level, sample_level_ray,
                                  sample_strata, transversality_check)
from contactred.contact import contact_check
from contactred.scenarios import load_scenario


@pytest.fixture(scope="module")
def t2():
    return load_scenario("S5-T2")


@pytest.fixture(scope="module")
def t2_samples(t2):
    return sample_level_ray(t2, (2, 1), 50, seed=0)


# -- sampling ----------------------------------------------------------------

def test_samples_satisfy_ray_equations(t2, t2_samples):
    assert len(t2_samples) == 50
    for x, s in zip(t2_samples.points, t2_samples.ray_parameters):
        assert t2.manifold.residual(x) < 1e-8
        phi = moment_map(t2.action, t2.form, x).coords
        assert s > 0 and np.linalg.norm(phi - s * np.array([2, 1])) < 1e-8
    d = np.linalg.norm(t2_samples.points[:, None] - t2_samples.points[None], axis=-1)
    assert np.min(d + np.eye(len(d))) > 1e-6


def test_ray_on_sphere_has_four_dimensions(t2, t2_samples):
    for x in t2_samples.points[:20]:
        tz, regular = ray_tangent(t2, (2, 1), x)
        assert regular and tz.shape[1] == 4


def test_sign_obstruction_gives_empty_set():
    scen = load_scenario("S3")
    out = sample_level_ray(scen, (-1,), 20)
    assert len(out) == 0 and out.diagnostic


def test_e1_ray_is_the_positive_region_and_level_is_the_circle():
    scen = load_scenario("E1")
    ray = sample_level_ray(scen, (1,), 30, seed=1)
    assert len(ray) == 30
    assert all(moment_map(scen.action, scen.form, x).coords[0] > 0 for x in ray.points)
    level = sample_level(scen, (1,), 30, seed=1)
    assert len(level) > 0
    for z in level:
        assert np.hypot(z[2], z[3]) < 1e-6 and np.hypot(z[4], z[5]) < 1e-6
        assert np.hypot(z[0], z[1]) == pytest.approx(1, abs=1e-9)


def test_sampling_is_deterministic_across_workers(t2):
    a = sample_level_ray(t2, (2, 1), 25, seed=4)
    b = sample_level_ray(t2, (2, 1), 25, seed=4, workers=3)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.seed_indices, b.seed_indices)


def test_bookkeeping_scenarios_cannot_be_sampled():
    with pytest.raises(ScenarioError):
        sample_level_ray(load_scenario("SL2-bookkeeping"), (0, 0, 1), 5)


def test_gamma_graph_identity(t2, t2_samples):
    mu = np.array([2.0, 1.0])
    for x, s in zip(t2_samples.points, t2_samples.ray_parameters):
        tm = math.log(s)
        for t in (-1.0, 0.0, 0.7):
            psi = symplectization_moment(t2.action, t2.form, x, t - tm).coords
            assert np.allclose(psi, math.exp(t) * mu, atol=1e-10, rtol=0)


# -- transversality and local freeness ------------------------------------------

def test_circle_is_always_transverse():
    scen = load_scenario("E2")
    for x in sample_level_ray(scen, (1,), 20).points:
        assert transversality_check(scen, (1,), x)


def test_axis_point_is_not_transverse(t2):
    x = np.array([0, 0, 0, 0, 1.0, 0])
    assert not transversality_check(t2, (1, 0), x)
    assert not locally_free_check(t2, (1, 0), [1.0, 0, 0, 0, 0, 0])


def test_kernel_generator_never_vanishes_for_2_1(t2, t2_samples):
    k = kernel_algebra(t2.algebra, (2, 1))
    assert k.dim == 1
    assert abs(k.basis[:, 0] @ np.array([2, 1])) < 1e-12  # k_mu is spanned by e1 - 2 e2
    for x in t2_samples.points:
        assert locally_free_check(t2, (2, 1), x)
        assert transversality_check(t2, (2, 1), x)
        # weights (1,-1,3) of e1 - 2 e2: |field| >= min |w_j| |z| = 1 on the sphere
        field = t2.action.fields(x) @ np.array([1, -2])
        assert np.linalg.norm(field) >= 1 - 1e-12


def test_trivial_kernel_is_locally_free():
    scen = load_scenario("E2")
    x = sample_level_ray(scen, (1,), 1).points[0]
    assert locally_free_check(scen, (1,), x)


@pytest.mark.parametrize("sid,mu", [("S5-T2", (1, 0)), ("S5-T3", (1, 0, 0)),
                                    ("S5-T2", (2, 1)), ("S5-T3", (1, 1, 1))])
def test_transversality_equals_local_freeness(sid, mu):
    scen = load_scenario(sid)
    pts = sample_strata(scen, mu, 10, seed=2)
    assert len(pts) >= 10
    for x in pts.points:
        assert transversality_check(scen, mu, x) == locally_free_check(scen, mu, x)


# -- reduced kernel -------------------------------------------------------------

def _brute_reduced_kernel(scen, mu, x):
    """Independent recomputation: W = T_zZ cap ker alpha, Gram nullspace, orbit angle."""
    tz, _ = ray_tangent(scen, mu, x)
    a = scen.form.at(x)
    w = tz @ scipy_null_space((a @ tz)[None, :])
    gram = w.T @ scen.form.d.matrix(x) @ w
    u, s, vt = np.linalg.svd(gram)
    rank = int(np.sum(s > 1e-9 * np.linalg.norm(scen.form.d.matrix(x), 2)))
    return w @ vt[rank:].T


def test_reduced_kernel_on_t2(t2, t2_samples):
    k = kernel_algebra(t2.algebra, (2, 1))
    for x in t2_samples.points:
        rk = reduced_kernel_check(t2, (2, 1), x)
        assert rk.ok and rk.kernel_dim == 1 == rk.orbit_dim and rk.principal_angle < 1e-6
        n = _brute_reduced_kernel(t2, (2, 1), x)
        orbit = t2.action.fields(x) @ k.basis
        assert n.shape[1] == 1
        assert np.max(subspace_angles(n, orbit)) < 1e-6


def test_reduced_kernel_for_circle_is_contact():
    scen = load_scenario("E2")
    for x in sample_level_ray(scen, (1,), 10).points:
        rk = reduced_kernel_check(scen, (1,), x)
        assert rk.ok and rk.kernel_dim == 0 and rk.orbit_dim == 0


def test_reduced_kernel_requires_preconditions(t2):
    with pytest.raises(PreconditionError):
        reduced_kernel_check(t2, (1, 0), np.array([1.0, 0, 0, 0, 0, 0]))


def test_parity_when_ok(t2, t2_samples):
    dims = measure_quotient(t2, (2, 1), t2_samples)
    assert all(reduced_kernel_check(t2, (2, 1), x).ok for x in t2_samples.points)
    assert dims.quotient_dim % 2 == 1


# -- quotient dimensions ------------------------------------------------------------

def test_quotient_dimensions():
    assert quotient_dimension(load_scenario("SL2-bookkeeping"), (0, 0, 1)) == 4
    assert quotient_dimension(load_scenario("S5-T2"), (2, 1)) == 3
    assert quotient_dimension(load_scenario("E2"), (1,)) == 5
    book = bookkeeping_quotient(load_scenario("SL2-bookkeeping"), (0, 0, 1))
    assert (book.z_dim, book.orbit_dim) == (5, 1)


def test_conformal_stability(t2):
    n = t2.manifold.ambient_dim
    f = 1 + squared_norm(n) * PolyMap.constant(n, "1/4")
    scaled = t2.with_form(t2.form * f, "-scaled")
    mu = (2, 1)
    a = sample_level_ray(t2, mu, 30, seed=3)
    b = sample_level_ray(scaled, mu, 30, seed=3)
    for x in a.points:
        assert ray_membership(scaled, mu, x)
        assert transversality_check(t2, mu, x) == transversality_check(scaled, mu, x)
        assert locally_free_check(t2, mu, x) == locally_free_check(scaled, mu, x)
    for x in b.points:
        assert ray_membership(t2, mu, x)
    assert measure_quotient(t2, mu, a) == measure_quotient(scaled, mu, b)


# -- orbit types --------------------------------------------------------------------

def test_single_free_stratum_on_s3():
    scen = load_scenario("S3")
    strata = orbit_type_partition(scen, (1,), sample_strata(scen, (1,), 15))
    assert len(strata) == 1
    assert strata[0].isotropy_label.isotropy == "trivial"
    assert strata[0].contact_on_stratum and strata[0].quotient_dim == 3


def _realizable_t3(mu):
    # |z_j|^2 = s mu_j with s > 0 on the unit sphere: zero pattern P is realizable iff
    # mu_j = 0 exactly on P
    return {tuple(j for j in range(3) if mu[j] == 0)}


def test_t3_strata_match_combinatorics():
    scen = load_scenario("S5-T3")
    for mu in [(1, 1, 1), (1, 0, 0), (1, 1, 0)]:
        samples = sample_strata(scen, mu, 6, seed=1)
        strata = orbit_type_partition(scen, mu, samples)
        patterns = {s.isotropy_label.zero_coords for s in strata}
        assert patterns == _realizable_t3(mu)
        for s in strata:
            zeros = len(s.isotropy_label.zero_coords)
            assert s.isotropy_label.isotropy == {0: "trivial", 1: "T^1", 2: "T^2"}[zeros]
            assert s.contact_on_stratum and s.quotient_dim % 2 == 1


def test_partition_is_disjoint_and_exhaustive(t2):
    samples = sample_strata(t2, (2, 1), 10, seed=5)
    strata = orbit_type_partition(t2, (2, 1), samples)
    seen = sorted(i for s in strata for i in s.sample_indices)
    assert seen == list(range(len(samples)))
    labels = [s.isotropy_label.key() for s in strata]
    assert len(set(labels)) == len(labels)


def test_partition_needs_torus():
    scen = load_scenario("S5-SO3")
    with pytest.raises(NotTorusError):
        orbit_type_partition(scen, (0, 0, 1), sample_level_ray(scen, (0, 0, 1), 3))


def test_e2_axis_has_trivial_isotropy():
    # z1 carries weight 1, so no circle element fixes (z1, 0, 0): M_H is all of E2
    scen = load_scenario("E2")
    z = np.array([math.sqrt(2), 0, 0, 0, 0, 0])
    lab = isotropy_label(scen, z)
    assert lab.isotropy == "trivial" and lab.zero_coords == ()
    assert fixed_point_manifold(scen, lab, z).expected_dim == 5


def test_e2_z1_ellipse_is_contact():
    scen = load_scenario("E2")
    z = np.array([math.sqrt(2), 0, 0, 0, 0, 0])
    extra = [PolyMap.coordinate(6, i) for i in range(2, 6)]
    ellipse = scen.manifold.with_constraints(extra, 1)
    assert contact_check(ellipse, scen.form, z).is_contact
    # alpha on the unit tangent (0, 1, 0, ...) at (sqrt 2, 0, ...) equals x1 = sqrt 2
    e = tangent_frame(ellipse, z).basis[:, 0]
    assert abs(scen.form(z, e)) == pytest.approx(math.sqrt(2))


def test_equal_isotropy_merges_patterns():
    # z1 = 0 is realizable on S3 but still has trivial isotropy: one stratum only
    scen = load_scenario("S3")
    assert isotropy_label(scen, np.array([0, 0, 1.0, 0])).key() == \
        isotropy_label(scen, np.array([0.6, 0, 0.8, 0])).key()


def test_z2_isotropy_stratum_on_t2(t2):
    strata = orbit_type_partition(t2, (2, 1), sample_strata(t2, (2, 1), 10, seed=5))
    types = {s.isotropy_label.zero_coords: s.isotropy_label.isotropy for s in strata}
    # z1 = 0 leaves weight columns (1,1),(1,-1) of determinant -2; z3 = 0 leaves a
    # unimodular pair, so those points join the generic stratum
    assert types == {(): "trivial", (0,): "Z/2"}


# -- Albert reduction ---------------------------------------------------------------

def test_albert_e1():
    rec = albert_reduce(load_scenario("E1"), (1,), n_samples=20)
    assert (rec.level_dim, rec.albert_orbit_dim, rec.albert_quotient_dim) == (1, 0, 1)


def test_albert_e2_with_torus_point():
    scen = load_scenario("E2")
    p = scen.witnesses["three_torus"]
    rec = albert_reduce(scen, (1,), n_samples=20)
    assert (rec.level_dim, rec.albert_orbit_dim, rec.albert_quotient_dim) == (4, 1, 3)
    assert rec.level_regular
    assert scen.manifold.residual(p) < 1e-10
    assert abs(moment_map(scen.action, scen.form, p).coords[0] - 1) < 1e-10


def test_albert_s3_generator_vanishes():
    scen = load_scenario("S3")
    rec = albert_reduce(scen, (1,), n_samples=10)
    assert rec.albert_quotient_dim == 3 and rec.albert_orbit_dim == 0
    for x in sample_level(scen, (1,), 10):
        assert np.max(np.abs(albert_generators(scen, (1,), x))) < 1e-10


def test_albert_empty_level_raises():
    with pytest.raises(NonRegularValueError):
        albert_reduce(load_scenario("S3"), (-1,), n_samples=5)


# -- GS bookkeeping -------------------------------------------------------------------

def test_gs_reports():
    e2 = load_scenario("E2")
    rep = gs_dimension_report(e2, (1,), fiber_dim=5)
    assert rep.integral and rep.orbit_dim == 0 and rep.gs_total_dim == 5
    assert gs_dimension_report(e2, (math.sqrt(2),), fiber_dim=5).integral is False
    so3 = load_scenario("S5-SO3")
    rep = gs_dimension_report(so3, (0, 0, 1), fiber_dim=3)
    assert rep.orbit_dim == 2 and rep.gs_total_dim == 5 and rep.integral is None
