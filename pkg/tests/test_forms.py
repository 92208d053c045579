import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import naive_eval, one_forms, polymaps
from contactred.forms import (Poly1Form, Poly2Form, PolyMap, PolyStack, eval_1form,
                              exterior_derivative, lie_derivative_linear, squared_norm)

coords = st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3)


def test_zero_coefficients_are_dropped():
    p = PolyMap(2, {(1, 0): 1, (0, 1): 0, (2, 0): Fraction(0)})
    assert p.terms == {(1, 0): Fraction(1)}
    assert (p - p).is_zero()


def test_multi_index_length_is_checked():
    with pytest.raises(ValueError):
        PolyMap(2, {(1, 0, 0): 1})


def test_parse_keeps_exact_rationals():
    p = PolyMap.parse("x^2 + 1/2*y^2 - 1", ["x", "y"])
    assert p.terms == {(2, 0): 1, (0, 2): Fraction(1, 2), (0, 0): -1}
    assert p.is_exact()


def test_standard_form_on_dy1():
    alpha = Poly1Form.standard(3)
    assert eval_1form(alpha, [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]) == 1.0


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=6, max_size=6))
def test_standard_form_kills_radial_vector(p):
    assert abs(eval_1form(Poly1Form.standard(3), p, p)) < 1e-12


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_1form(Poly1Form.standard(1), [1, 0], [1, 0, 0])


@given(one_forms(3), coords, coords)
def test_eval_matches_naive_evaluator(form, x, v):
    expected = sum(naive_eval(c, x) * vi for c, vi in zip(form.coefficients, v))
    got = eval_1form(form, x, v)
    assert math.isclose(got, expected, rel_tol=1e-10, abs_tol=1e-10)


@given(polymaps(4, max_terms=6, max_deg=4), polymaps(4, max_terms=6, max_deg=4))
def test_stack_batch_matches_naive(p, q):
    pts = np.random.default_rng(0).normal(size=(5, 4))
    vals = PolyStack([p, q], 4)(pts)
    for row, x in zip(vals, pts):
        assert row[0] == pytest.approx(naive_eval(p, x), rel=1e-10, abs=1e-10)
        assert row[1] == pytest.approx(naive_eval(q, x), rel=1e-10, abs=1e-10)


def test_d_standard_pair():
    d = exterior_derivative(Poly1Form.standard(1))
    assert d == Poly2Form(2, {(0, 1): PolyMap.constant(2, 2)})


def test_d_x_squared_dy():
    x = PolyMap.coordinate(2, 0)
    d = exterior_derivative(Poly1Form(2, (PolyMap.zero(2), x * x)))
    assert d.coefficients == {(0, 1): 2 * x}


@given(one_forms(3), one_forms(3), st.integers(-3, 3), st.integers(-3, 3))
def test_d_is_linear(a, b, s, t):
    lhs = exterior_derivative(s * a + t * b)
    rhs = exterior_derivative(a) * s + exterior_derivative(b) * t
    assert lhs == rhs


@given(polymaps(3))
def test_d_of_exact_form_vanishes(f):
    assert exterior_derivative(f.differential()).is_zero()


def _circulation(form, x, u, v, h):
    # line integral of alpha around the parallelogram x, x+hu, x+hu+hv, x+hv; Simpson per
    # edge is exact because the coefficients have degree <= 3 along each edge
    corners = [x, x + h * u, x + h * u + h * v, x + h * v, x]
    total = 0.0
    for p, q in zip(corners[:-1], corners[1:]):
        step = q - p
        vals = [eval_1form(form, p + s * step, step) for s in (0.0, 0.5, 1.0)]
        total += (vals[0] + 4 * vals[1] + vals[2]) / 6
    return total / h ** 2


def _random_form(rng):
    return Poly1Form(3, tuple(
        PolyMap(3, {tuple(rng.integers(0, 2, 3)) + (): int(rng.integers(-4, 5))
                    for _ in range(3)}) * PolyMap.coordinate(3, int(rng.integers(0, 3)))
        for _ in range(3)))


@pytest.mark.parametrize("trial", range(10))
def test_stokes_circulation_converges_quadratically(trial):
    rng = np.random.default_rng(100 + trial)
    form = _random_form(rng)
    x, u, v = rng.normal(size=(3, 3)) * 0.5
    d = exterior_derivative(form)
    # circulation / h^2 tends to d alpha(u, v) at the base point with O(h) error;
    # referencing the parallelogram centre makes the error O(h^2)
    errs = []
    for h in (2e-2, 1e-2):
        errs.append(abs(_circulation(form, x, u, v, h) - d(x + 0.5 * h * (u + v), u, v)))
    assert abs(_circulation(form, x, u, v, 1e-3) - d(x, u, v)) < 1e-2 * (1 + abs(d(x, u, v)))
    if errs[0] > 1e-10:
        assert 3.0 < errs[0] / max(errs[1], 1e-300) < 5.0


def test_two_form_matrix_is_antisymmetric(rng):
    d = exterior_derivative(Poly1Form.standard(2) * squared_norm(4))
    m = d.matrix(rng.normal(size=4))
    assert np.allclose(m, -m.T)


def test_rotation_preserves_standard_form():
    gen = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    assert lie_derivative_linear(Poly1Form.standard(2), gen).is_zero()
