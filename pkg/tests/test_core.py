import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.core import (
    Decay,
    FracOrder,
    GeomConstants,
    InvalidDimensionError,
    Polynomial,
    QuadratureSpec,
    SingularFitError,
    geom_constants,
    multi_indices,
    poly_fit,
    sphere_surface_area,
)


def test_sphere_surface_area_oracle():
    # closed forms 2, 2*pi, 4*pi, 2*pi^2 for d = 1..4
    assert sphere_surface_area(1) == pytest.approx(2.0)
    assert sphere_surface_area(2) == pytest.approx(2 * math.pi)
    assert sphere_surface_area(3) == pytest.approx(4 * math.pi)
    assert sphere_surface_area(4) == pytest.approx(2 * math.pi**2)


def test_geom_constants_gamma():
    assert geom_constants(1).gamma_n == pytest.approx(math.pi)
    assert geom_constants(3).gamma_n == pytest.approx(2 * math.pi**2)
    assert geom_constants(3).ball_volume == pytest.approx(4 * math.pi / 3)


def test_frac_order_splits():
    s = FracOrder.half_dim(3)
    assert s.integer_part == 1 and s.frac_part == 0.5 and s.total == 1.5
    assert FracOrder.from_total(0.5) == FracOrder(0, 0.5)
    with pytest.raises(InvalidDimensionError):
        FracOrder.half_dim(2)
    with pytest.raises(ValueError):
        FracOrder(0, 1.5)


def test_decay_effective_power():
    assert Decay.schwartz().effective_power == math.inf
    assert Decay.power(4.0).effective_power == 4.0
    assert Decay.log_growth().effective_power == 0.0
    assert Decay.poly_growth(2.0).effective_power == -2.0
    assert Decay.none().effective_power is None


def test_multi_indices_graded():
    idx = multi_indices(2, 2)
    assert idx[0] == (0, 0)
    assert set(idx) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    totals = [sum(a) for a in idx]
    assert totals == sorted(totals)


def test_polynomial_eval_and_json():
    p = Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    pts = np.array([[1.0, 2.0], [0.0, 0.0]])
    assert np.allclose(p(pts), [1 - 1 - 4, 1.0])
    blob = json.loads(p.to_json())
    assert blob["dim"] == 2
    # canonical ordering is reproducible
    assert p.to_json() == Polynomial(2, dict(p.coeffs)).to_json()


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
@settings(max_examples=30, deadline=None)
def test_poly_fit_recovers_quadratic(coeffs):
    a, b, c = coeffs
    xs = np.linspace(-2, 2, 9)
    samples = [((x,), a + b * x + c * x * x) for x in xs]
    fit = poly_fit(samples, 2)
    assert fit.max_residual < 1e-8
    assert fit.polynomial.coefficient((2,)) == pytest.approx(c, abs=1e-8)


def test_poly_fit_degenerate_geometry():
    samples = [((0.0, float(i)), float(i)) for i in range(8)]  # collinear
    with pytest.raises(SingularFitError):
        poly_fit(samples, 2)


def test_quadrature_spec_mapping_roundtrip():
    spec = QuadratureSpec(truncation_radius=32.0, seed=7)
    again = QuadratureSpec.from_mapping(spec.to_mapping())
    assert again == spec
    with pytest.raises(ValueError):
        QuadratureSpec.from_mapping({"not_a_field": 1})
