import math

import numpy as np
import pytest

from fraclab.core import InvalidDimensionError, QuadratureSpec, sphere_surface_area
from fraclab.fields import field_scale, gaussian
from fraclab.solutions import (
    SphericalSolution,
    pde_residual,
    qcurvature_density,
    volume_and_alpha,
)

SPEC = QuadratureSpec()


def test_spherical_solution_validation():
    with pytest.raises(ValueError):
        SphericalSolution(lam=-1.0, center=(0.0,), dim=1)
    with pytest.raises(InvalidDimensionError):
        SphericalSolution(lam=1.0, center=(0.0, 0.0), dim=2)


def test_spherical_solution_field_closed_form():
    sol = SphericalSolution(lam=2.0, center=(1.0,), dim=1)
    u = sol.field()
    assert u.at([1.5]) == pytest.approx(math.log(4.0 / (1.0 + 4.0 * 0.25)))
    d = sol.density()
    assert d.at([1.5]) == pytest.approx(math.exp(u.at([1.5])))


def test_pde_residual_explicit_solution():
    u = SphericalSolution(lam=1.0, center=(0.0,), dim=1).field()
    rows = pde_residual(u, [[0.0], [1.0], [3.0]], SPEC)
    for row in rows:
        assert row["residual"] < 1e-6
        assert row["rhs"] == pytest.approx(math.exp(u.at(row["point"])))


def test_volume_and_alpha_lambda_invariance():
    # conformal volume is a scale invariant: V = |S^n| and alpha = 2 for
    # every member of the explicit family
    for lam in (0.5, 1.0, 3.0):
        sol = SphericalSolution(lam=lam, center=(0.0,), dim=1)
        V, alpha = volume_and_alpha(sol.field(), SPEC, density=sol.density())
        assert V == pytest.approx(sphere_surface_area(2), rel=1e-8)
        assert alpha == pytest.approx(2.0, rel=1e-8)


def test_volume_and_alpha_center_invariance():
    a = SphericalSolution(lam=1.0, center=(0.0,), dim=1)
    b = SphericalSolution(lam=1.0, center=(2.5,), dim=1)
    Va, _ = volume_and_alpha(a.field(), SPEC, density=a.density())
    Vb, _ = volume_and_alpha(b.field(), SPEC, density=b.density())
    assert Va == pytest.approx(Vb, rel=1e-8)


def test_qcurvature_density_from_solution_field():
    u = SphericalSolution(lam=1.0, center=(0.0,), dim=3).field()
    d = qcurvature_density(u)
    x = np.array([0.4, 0.0, -0.3])
    assert d.at(x) == pytest.approx(2.0 * math.exp(3.0 * u.at(x)), rel=1e-12)
    # the tag records the |x|^(-2n) density decay
    assert d.decay.kind == "power" and d.decay.rate == pytest.approx(6.0)


def test_qcurvature_density_validation():
    with pytest.raises(InvalidDimensionError):
        qcurvature_density(gaussian(1))  # wrong decay class
    shifted = field_scale(gaussian(1), 1.0)
    with pytest.raises(InvalidDimensionError):
        qcurvature_density(shifted)


def test_volume_scaling_under_dilation():
    # u_t(x) = u(t x) + log t solves the same equation; its density
    # integrates to the same volume
    lam, t = 1.0, 2.0
    base = SphericalSolution(lam=lam, center=(0.0,), dim=1)
    dilated = SphericalSolution(lam=lam * t, center=(0.0,), dim=1)
    Vb, ab = volume_and_alpha(base.field(), SPEC, density=base.density())
    Vd, ad = volume_and_alpha(dilated.field(), SPEC, density=dilated.density())
    assert Vd == pytest.approx(Vb, rel=1e-8)
    assert ad == pytest.approx(ab, rel=1e-8)
