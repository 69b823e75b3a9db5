import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fraclab.core import (
    FracOrder,
    InvalidDimensionError,
    QuadratureSpec,
    geom_constants,
    sphere_surface_area,
)
from fraclab.fields import constant_field
from fraclab.fraclap import FracLapOperator, frac_lap
from fraclab.greens import (
    _profile_F,
    g1_eval,
    g2_bound_report,
    g2_constant,
    g2_kernel_unnormalized,
    g2_solve,
    green_derivative_bound_check,
    iterated_green,
    navier_representation,
    poisson_extension_halflap,
    poisson_halflap_constant,
    torsion_constant,
    torsion_field,
)

SPEC = QuadratureSpec()


def _interior_pair(rng, n, r):
    while True:
        x = rng.uniform(-r, r, n)
        y = rng.uniform(-r, r, n)
        if (np.linalg.norm(x) < 0.95 * r and np.linalg.norm(y) < 0.95 * r
                and np.linalg.norm(x - y) > 1e-3):
            return x, y


def test_g1_center_closed_form():
    # G1(0, y) = (|y|^{2-n} - r^{2-n}) / (n (n-2) |B_1|)
    c = 1.0 / (3 * 1 * geom_constants(3).ball_volume)
    v = g1_eval(1.0, [0.0, 0.0, 0.0], [0.5, 0.0, 0.0])
    assert v == pytest.approx(c * (2.0 - 1.0), rel=1e-14)


def test_g1_input_validation():
    with pytest.raises(InvalidDimensionError):
        g1_eval(1.0, [0.1], [0.5])
    with pytest.raises(ValueError):
        g1_eval(1.0, [1.2, 0.0, 0.0], [0.1, 0.0, 0.0])
    with pytest.raises(ValueError):
        g1_eval(1.0, [0.1, 0.0, 0.0], [0.1, 0.0, 0.0])


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_g1_symmetry_and_positivity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    if n % 2 == 0:
        n += 1
    x, y = _interior_pair(rng, n, 1.0)
    a = g1_eval(1.0, x, y)
    b = g1_eval(1.0, y, x)
    assert a == pytest.approx(b, rel=1e-9)
    assert a > 0.0


def test_g1_vanishes_toward_boundary():
    vals = [g1_eval(1.0, [0.2, 0.0, 0.0], [t, 0.0, 0.0]) for t in (0.9, 0.99, 0.999)]
    assert vals[0] > vals[1] > vals[2] > 0.0
    assert vals[2] < 1e-3


def test_iterated_green_zero_folds_is_exact():
    x = np.array([0.2, -0.1, 0.3])
    y = np.array([-0.4, 0.2, 0.0])
    v, se = iterated_green(1.0, 0, x, y, SPEC)
    assert se == 0.0
    assert v == g1_eval(1.0, x, y)
    # n = 5, top index j = 1 also collapses to G1
    x5, y5 = np.zeros(5), np.array([0.4, 0.0, 0.0, 0.0, 0.0])
    v5, se5 = iterated_green(1.0, 1, x5, y5, SPEC)
    assert se5 == 0.0 and v5 == g1_eval(1.0, x5, y5)


def test_iterated_green_rejects_bad_order():
    with pytest.raises(ValueError):
        iterated_green(1.0, 1, np.zeros(3), np.array([0.4, 0.0, 0.0]), SPEC)


def test_iterated_green_one_fold_against_shell_oracle():
    # x at the center makes both factors spherically reducible:
    # mean of G1(z, y) over |z| = a is c (max(a,|y|)^{2-n} - r^{2-n})
    n, b = 5, 0.4
    c = 1.0 / (n * (n - 2) * geom_constants(n).ball_volume)
    surf = sphere_surface_area(n)
    oracle, _ = quad(
        lambda a: c * (a ** (2 - n) - 1.0) * c * (max(a, b) ** (2 - n) - 1.0)
        * surf * a ** (n - 1), 0, 1, points=[b], limit=200)
    y = np.zeros(n)
    y[0] = b
    spec = replace(SPEC, mc_samples=40000)
    v, se = iterated_green(1.0, 0, np.zeros(n), y, spec)
    assert se > 0.0
    assert abs(v - oracle) < 4.0 * se


def test_green_derivative_bound_near_field_slope():
    # |grad_y G1| ~ |x-y|^{-(n-1)} as the pair collapses (n = 3 -> slope -2)
    pairs = [((0.0, 0.0, 0.0), (t, 0.0, 0.0)) for t in (0.01, 0.02, 0.04, 0.08)]
    rep = green_derivative_bound_check(1.0, 0, pairs, SPEC)
    assert rep["fitted_exponent"] == pytest.approx(-2.0, rel=0.05)
    assert math.isfinite(rep["bound_constant"])


def test_navier_reproduces_harmonic_polynomials():
    x = np.array([0.25, 0.1, -0.2])
    probes = [(lambda y: np.ones(len(y)), 1.0),
              (lambda y: y[:, 0], x[0]),
              (lambda y: y[:, 0] * y[:, 1], x[0] * x[1]),
              (lambda y: y[:, 0] * y[:, 1] * y[:, 2], x[0] * x[1] * x[2])]
    for f, exact in probes:
        v, e = navier_representation(1.0, [f], x, SPEC)
        assert v == pytest.approx(exact, abs=1e-9)


def test_navier_validation():
    with pytest.raises(InvalidDimensionError):
        navier_representation(1.0, [lambda y: np.ones(len(y))], [0.1], SPEC)
    with pytest.raises(ValueError):
        navier_representation(1.0, [lambda y: y, lambda y: y], [0.1, 0.0, 0.0], SPEC)
    with pytest.raises(ValueError):
        navier_representation(1.0, [lambda y: np.ones(len(y))], [1.5, 0.0, 0.0], SPEC)


def test_poisson_constant_closed_form():
    # unit mass at the center forces C = 2 / (pi |S^{n-1}|)
    for n in (1, 3, 5):
        assert poisson_halflap_constant(n, 1.0) == pytest.approx(
            2.0 / (math.pi * sphere_surface_area(n)), rel=1e-12)


def test_poisson_reproduces_constants_off_center():
    for n, s in [(1, 0.0), (1, 0.6), (3, 0.0), (3, 0.5)]:
        x = [s] + [0.0] * (n - 1)
        v, e = poisson_extension_halflap(1.0, constant_field(1.0, n), x, SPEC)
        assert v == pytest.approx(1.0, abs=1e-9)


def test_poisson_rejects_point_outside():
    with pytest.raises(ValueError):
        poisson_extension_halflap(1.0, constant_field(1.0, 1), [1.5], SPEC)


def test_profile_closed_forms_match_quadrature():
    # F(w) = int_0^w t^{-1/2} (1+t)^{-n/2} dt
    for n in (1, 3, 5):
        F = _profile_F(n)
        for w in (0.3, 2.0, 25.0):
            with mpmath.workdps(25):
                oracle = float(mpmath.quad(
                    lambda t: 1 / (mpmath.sqrt(t) * (1 + t) ** (mpmath.mpf(n) / 2)),
                    [0, w]))
            assert float(F(w)) == pytest.approx(oracle, rel=1e-12)
    with pytest.raises(InvalidDimensionError):
        _profile_F(2)


def test_torsion_constant_gamma_oracle():
    # (-lap)^{1/2} (r^2-|x|^2)^{1/2} = Gamma(n/2+1/2) Gamma(3/2) / Gamma(n/2),
    # scale-free in r
    for n in (1, 3, 5):
        oracle = 2 * math.gamma(n / 2 + 0.5) * math.gamma(1.5) / math.gamma(n / 2)
        assert torsion_constant(n, 1.0) == pytest.approx(oracle, rel=1e-5)
    assert torsion_constant(1, 2.0) == pytest.approx(torsion_constant(1, 1.0), rel=1e-5)


def test_torsion_residual_constant_off_center():
    # the same profile under the operator at off-center points: the residual
    # identity that pins the G2 constant holds across the ball
    op = FracLapOperator.make(1, FracOrder(0, 0.5))
    w = torsion_field(1, 1.0)
    L = torsion_constant(1, 1.0)
    for s in (0.3, 0.6):
        v, e = frac_lap(op, w, np.array([s]), SPEC)
        assert v == pytest.approx(L, rel=1e-5)


def test_g2_solve_matches_torsion_shape():
    # rhs = 1 must produce sqrt(r^2 - s^2) / L
    for n in (1, 3):
        L = torsion_constant(n, 1.0)
        for s in (0.0, 0.5):
            h, err = g2_solve(1.0, constant_field(1.0, n), (s,) + (0.0,) * (n - 1), SPEC)
            assert h == pytest.approx(math.sqrt(1.0 - s * s) / L, rel=1e-6)


def test_g2_solve_rejects_bad_inputs():
    with pytest.raises(ValueError):
        g2_solve(1.0, constant_field(1.0, 1), [1.2], SPEC)


def test_g2_kernel_positive_and_symmetric():
    rng = np.random.default_rng(7)
    n = 3
    xs, ys = [], []
    for _ in range(1000):
        x, y = _interior_pair(rng, n, 1.0)
        xs.append(x)
        ys.append(y)
    xs, ys = np.array(xs), np.array(ys)
    vals = g2_kernel_unnormalized(n, 1.0, xs, ys)
    assert np.all(vals > 0.0)  # maximum principle: the kernel is positive
    np.testing.assert_allclose(vals, g2_kernel_unnormalized(n, 1.0, ys, xs),
                               rtol=1e-12)


def test_g2_bound_report_finite():
    rng = np.random.default_rng(11)
    pairs = [_interior_pair(rng, 3, 1.0) for _ in range(100)]
    rep = g2_bound_report(3, 1.0, pairs)
    assert rep["count"] == 100
    assert 0.0 < rep["max_ratio"] < math.inf
    # the normalized kernel stays below a modest constant for n = 3
    assert rep["max_ratio"] < 10.0 * abs(g2_constant(3, 1.0))
