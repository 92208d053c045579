import os

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import settings, strategies as st

from contactred.forms import Poly1Form, PolyMap

settings.register_profile("default", deadline=None, max_examples=40)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def polymaps(draw, n, max_terms=4, max_deg=3):
    k = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(k):
        exps = tuple(draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n)))
        num = draw(st.integers(-5, 5))
        den = draw(st.integers(1, 4))
        terms[exps] = Fraction(num, den)
    return PolyMap(n, terms)


@st.composite
def one_forms(draw, n, **kw):
    return Poly1Form(n, tuple(draw(polymaps(n, **kw)) for _ in range(n)))


def naive_eval(poly: PolyMap, x) -> float:
    """Term-by-term evaluation in plain Python, independent of the compiled table."""
    total = 0.0
    for exps, c in poly.terms.items():
        mono = 1.0
        for xi, e in zip(x, exps):
            mono *= float(xi) ** e
        total += float(c) * mono
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
