import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from iterint import (
    BasisSystem,
    DomainError,
    TimeInterval,
    WeightFunction,
    eval_basis,
    gram_matrix,
    inner_product,
    weight_eval,
)
from iterint.basis import adaptive_gauss_legendre, legendre_table
from iterint.basis import QuadratureError


def test_interval_requires_positive_length():
    with pytest.raises(ValueError):
        TimeInterval(1.0, 1.0)
    with pytest.raises(ValueError):
        TimeInterval(2.0, 1.0)
    assert TimeInterval(-1.0, 3.0).delta == 4.0


@pytest.mark.parametrize("kind,j,offset,expected", [
    ("legendre", 0, 0.37, 1.0),
    ("legendre", 1, 1.0, math.sqrt(3)),
    ("trigonometric", 1, 0.25, math.sqrt(2)),
])
def test_eval_basis_examples(kind, j, offset, expected):
    iv = TimeInterval(2.0, 3.0)
    assert eval_basis(BasisSystem(kind, iv), j, 2.0 + offset) == pytest.approx(expected, abs=1e-14)


def test_eval_basis_outside_interval():
    b = BasisSystem("legendre", TimeInterval(0.0, 1.0))
    with pytest.raises(DomainError):
        eval_basis(b, 0, 1.5)
    with pytest.raises(DomainError):
        b.values(3, np.array([0.2, -0.1]))


@pytest.mark.parametrize("kind,j1,j2,expected", [
    ("legendre", 3, 3, 1.0),
    ("legendre", 2, 5, 0.0),
    ("trigonometric", 1, 2, 0.0),
    ("trigonometric", 7, 7, 1.0),
])
def test_inner_product_examples(kind, j1, j2, expected):
    b = BasisSystem(kind, TimeInterval(-1.0, 2.5))
    assert abs(inner_product(b, j1, j2) - expected) <= 1e-10


@pytest.mark.parametrize("w,tau,expected", [
    (WeightFunction.one(), 0.7, 1.0),
    (WeightFunction.power(1), 0.5, -0.5),
    (WeightFunction.power(2), 0.5, 0.25),
    (WeightFunction.power_from_left(1), 0.5, 0.5),
])
def test_weight_eval_examples(w, tau, expected):
    assert weight_eval(w, TimeInterval(0.0, 1.0), tau) == pytest.approx(expected)


def test_weight_products_stay_in_family():
    p1, l1 = WeightFunction.power(1), WeightFunction.power_from_left(1)
    assert WeightFunction.one() * p1 == p1
    assert p1 * WeightFunction.power(2) == WeightFunction.power(3)
    # (t - s)(s - t) = -(s - t)^2 is not representable
    with pytest.raises(ValueError):
        p1 * l1
    # (t - s)^2 (s - t) = (s - t)^3
    assert WeightFunction.power(2) * l1 == WeightFunction.power_from_left(3)
    with pytest.raises(ValueError):
        WeightFunction.power(-1)


@pytest.mark.parametrize("kind", ["legendre", "trigonometric"])
def test_gram_matrix_identity(kind):
    g = gram_matrix(BasisSystem(kind, TimeInterval(0.25, 1.75)), 30)
    assert np.max(np.abs(g - np.eye(31))) <= 1e-10


def test_legendre_recurrence_matches_reference_at_chebyshev_nodes():
    n = 60
    y = np.cos(np.pi * (np.arange(200) + 0.5) / 200)
    ours = legendre_table(n, y)
    for j in range(n + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        assert np.max(np.abs(ours[:, j] - npleg.legval(y, c))) <= 1e-13


def test_legendre_exact_degree():
    # finite differences of order j+1 of a degree-j polynomial vanish
    b = BasisSystem("legendre", TimeInterval(0.0, 1.0))
    x = np.linspace(0, 1, 12)
    vals = b.values(6, x)
    for j in range(7):
        assert np.max(np.abs(np.diff(vals[:, j], j + 1))) < 1e-9
        assert np.max(np.abs(np.diff(vals[:, j], j))) > 1e-6


@settings(max_examples=40, deadline=None)
@given(
    t0=st.floats(-5, 5),
    delta=st.floats(0.05, 20),
    x=st.floats(0, 1),
    kind=st.sampled_from(["legendre", "trigonometric"]),
)
def test_scaling_covariance(t0, delta, x, kind):
    iv = TimeInterval(t0, t0 + delta)
    b = BasisSystem(kind, iv)
    s = min(max(t0 + delta * x, iv.t_start), iv.t_end)
    lhs = b.values(8, s)
    rhs = b.unit_values(8, iv.to_unit(s)) / math.sqrt(delta)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_integrals_of_basis():
    for kind in ("legendre", "trigonometric"):
        b = BasisSystem(kind, TimeInterval(1.0, 5.0))
        direct = [adaptive_gauss_legendre(lambda s, j=j: b.values(j, s)[..., j], 1.0, 5.0)[0] for j in range(6)]
        assert np.allclose(direct, b.integrals(5), atol=1e-12)


def test_adaptive_quadrature_reports_failure():
    with pytest.raises(QuadratureError) as err:
        adaptive_gauss_legendre(lambda s: np.sign(s - 0.3337), 0.0, 1.0, max_level=3)
    assert err.value.achieved > 0
