"""Contact condition and Reeb field of a polynomial 1-form on an embedded manifold."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ReebError, UnsupportedDimensionError
from .forms import Poly1Form
from .linalg import RANK_RTOL
from .manifold import EmbeddedManifold, tangent_frame

MAX_CONTACT_DIM = 7
CONTACT_RTOL = 1e-9
REEB_RESIDUAL_TOL = 1e-9


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian by expansion along the first row over all perfect matchings."""
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    rest = list(range(1, n))
    for k, j in enumerate(rest):
        if a[0, j] == 0.0:
            continue
        keep = [i for i in rest if i != j]
        total += (-1) ** k * a[0, j] * pfaffian(a[np.ix_(keep, keep)])
    return total


def top_form_value(a: np.ndarray, omega: np.ndarray) -> float:
    """(alpha ^ (d alpha)^n)(e_1, ..., e_{2n+1}) from frame data.

    ``a[i] = alpha(e_i)`` and ``omega[i, j] = d alpha(e_i, e_j)``.  Uses the
    determinant convention for wedge products, under which the full
    antisymmetrization collapses to n! * sum_i (-1)^i a_i Pf(omega without i).
    """
    m = a.shape[0]
    n = (m - 1) // 2
    total = 0.0
    for i in range(m):
        if a[i] == 0.0:
            continue
        keep = [k for k in range(m) if k != i]
        total += (-1) ** i * a[i] * pfaffian(omega[np.ix_(keep, keep)])
    return math.factorial(n) * total


@dataclass(frozen=True)
class ContactCheck:
    volume: float
    is_contact: bool


def frame_data(manifold: EmbeddedManifold, form: Poly1Form, point):
    frame = tangent_frame(manifold, point)
    e = frame.basis
    a = form.at(frame.point) @ e
    omega = e.T @ form.d.matrix(frame.point) @ e
    return frame, a, omega


def contact_check(manifold: EmbeddedManifold, form: Poly1Form, point) -> ContactCheck:
    dim = manifold.expected_dim
    if dim % 2 == 0:
        raise UnsupportedDimensionError(f"contact condition needs odd dimension, got {dim}")
    if dim > MAX_CONTACT_DIM:
        raise UnsupportedDimensionError(f"dimension {dim} exceeds supported maximum 7")
    _, a, omega = frame_data(manifold, form, point)
    n = (dim - 1) // 2
    vol = top_form_value(a, omega)
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(omega))) ** (n + 1)
    return ContactCheck(float(vol), bool(scale > 0 and abs(vol) > CONTACT_RTOL * scale))


def reeb_field(manifold: EmbeddedManifold, form: Poly1Form, point) -> np.ndarray:
    """Unique tangent Y with alpha(Y) = 1 and d alpha(Y, .) = 0 on T_pM."""
    frame, a, omega = frame_data(manifold, form, point)
    return _solve_reeb(frame.basis, a, omega)


def _solve_reeb(e: np.ndarray, a: np.ndarray, omega: np.ndarray) -> np.ndarray:
    k = e.shape[1]
    system = np.vstack([a[None, :], omega])
    rhs = np.zeros(k + 1)
    rhs[0] = 1.0
    coeffs, _, _, sv = np.linalg.lstsq(system, rhs, rcond=None)
    if sv.size < k or sv[0] == 0.0 or np.sum(sv > RANK_RTOL * sv[0]) < k:
        raise ReebError("Reeb system is singular; the contact condition fails here")
    resid = float(np.max(np.abs(system @ coeffs - rhs)))
    if resid > REEB_RESIDUAL_TOL:
        raise ReebError(f"Reeb residual {resid:.3e} exceeds {REEB_RESIDUAL_TOL:.0e}")
    return e @ coeffs


class ReebEvaluator:
    """Fast repeated Reeb-field evaluation without the on-manifold check.

    Used inside flow integration where points are re-projected separately.
    """

    def __init__(self, manifold: EmbeddedManifold, form: Poly1Form):
        self.manifold = manifold
        self.form = form
        self._n = manifold.ambient_dim
        self._codim = self._n - manifold.expected_dim

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.manifold.constraints:
            jac = self.manifold.jacobian(x)
            _, _, vt = np.linalg.svd(jac, full_matrices=True)
            e = vt[self._codim:].T
        else:
            e = np.eye(self._n)
        a = self.form.at(x) @ e
        omega = e.T @ self.form.d.matrix(x) @ e
        return _solve_reeb(e, a, omega)
