import math

import mpmath
import numpy as np
import pytest

from fraclab.core import Decay, InvalidDimensionError, QuadratureSpec, ScalarField, geom_constants
from fraclab.fields import bump, gaussian
from fraclab.potentials import (
    FundamentalSolution,
    LogPotential,
    exp_integrability_bound,
    exp_integrability_report,
    fundamental_convolve,
    log_potential_derivative,
    log_potential_eval,
)

SPEC = QuadratureSpec()


def test_log_potential_gaussian_mpmath_oracle():
    # v(x) = (1/gamma_1) int (log(1+|y|) - log|x-y|) e^{-y^2} dy, independent
    # integrator with the singularity as an explicit split point
    x = 0.6
    g1 = geom_constants(1).gamma_n
    with mpmath.workdps(25):
        oracle = float(mpmath.quad(
            lambda y: mpmath.e ** (-(y**2))
            * (mpmath.log(1 + abs(y)) - mpmath.log(abs(x - y))),
            [-mpmath.inf, 0, x, mpmath.inf]) / g1)
    lp = LogPotential(density=gaussian(1), dim=1)
    v, err = log_potential_eval(lp, [x])
    assert v == pytest.approx(oracle, abs=1e-10)
    assert err < 1e-8


def test_log_potential_radial_symmetry():
    lp = LogPotential(density=gaussian(3), dim=3)
    a, _ = log_potential_eval(lp, [0.9, 0.0, 0.0])
    b, _ = log_potential_eval(lp, [0.0, 0.9 / math.sqrt(2), -0.9 / math.sqrt(2)])
    assert a == pytest.approx(b, rel=1e-9)


def test_radial_value_matches_pointwise_eval():
    lp = LogPotential(density=gaussian(3), dim=3)
    v, e = lp.radial_value(1.3)
    w, f = log_potential_eval(lp, [1.3, 0.0, 0.0])
    assert (v, e) == (w, f)
    # memoized: identical object on repeat
    assert lp.radial_value(1.3) == (v, e)


def test_log_potential_derivative_two_routes_agree():
    # radial-profile finite differences vs the differentiated-kernel shells;
    # hiding the profile forces the generic route
    lp = LogPotential(density=gaussian(3), dim=3)
    hidden = ScalarField(eval=lambda p: np.exp(-np.sum(p**2, axis=1)), dim=3,
                         decay=Decay.schwartz())
    lph = LogPotential(density=hidden, dim=3)
    x = [0.8, 0.3, 0.0]
    for alpha in [(1, 0, 0), (0, 1, 0), (2, 0, 0), (1, 1, 0)]:
        a, _ = log_potential_derivative(lp, x, alpha)
        b, _ = log_potential_derivative(lph, x, alpha)
        assert a == pytest.approx(b, abs=1e-6)


def test_log_potential_derivative_order_validation():
    lp = LogPotential(density=gaussian(3), dim=3)
    with pytest.raises(ValueError):
        log_potential_derivative(lp, [1.0, 0.0, 0.0], (0, 0, 0))
    with pytest.raises(ValueError):
        log_potential_derivative(lp, [1.0, 0.0, 0.0], (2, 1, 0))
    # n = 1 admits no locally integrable kernel derivative at all
    lp1 = LogPotential(density=gaussian(1), dim=1)
    with pytest.raises(ValueError):
        log_potential_derivative(lp1, [0.5], (1,))


def test_fundamental_solution_constants():
    # n=3 closed forms: Phi = |x|^-2/(2 pi^2), Psi = |x|^-1/(4 pi)
    phi = FundamentalSolution("HalfLap", 3)
    psi = FundamentalSolution("PolyHarm", 3)
    assert phi.constant == pytest.approx(1 / (2 * math.pi**2), rel=1e-14)
    assert psi.constant == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    assert phi.homogeneity == -2.0 and psi.homogeneity == -1.0
    z = np.array([[0.0, 2.0, 0.0]])
    assert phi(z)[0] == pytest.approx(1 / (8 * math.pi**2))


def test_fundamental_solution_rejects_bad_dims():
    for n in (1, 2, 4):
        with pytest.raises(InvalidDimensionError):
            FundamentalSolution("HalfLap", n)
    with pytest.raises(ValueError):
        FundamentalSolution("Log", 3)


def test_halflap_convolution_spherical_mean_oracle():
    # the mean of |x-y|^-2 over |y| = a is log((s+a)/|s-a|)/(2as), so the
    # convolution with a radial density reduces to a 1-d mpmath integral
    fs = FundamentalSolution("HalfLap", 3)
    s, c = 1.1, fs.constant
    with mpmath.workdps(25):
        oracle = float(2 * mpmath.pi * c / s * mpmath.quad(
            lambda a: mpmath.e ** (-(a**2)) * a * mpmath.log((s + a) / abs(s - a)),
            [0, s, mpmath.inf]))
    v, err = fundamental_convolve(fs, gaussian(3), [s, 0.0, 0.0], SPEC)
    assert v == pytest.approx(oracle, abs=1e-9)


def test_polyharm_convolution_shell_theorem():
    # Psi is the Newtonian kernel in R^3: outside the support the potential
    # of a mass-M ball equals M/(4 pi s)
    fs = FundamentalSolution("PolyHarm", 3)
    f = bump(3, radius=0.5, mass=2.5)
    for s in (1.0, 2.0):
        v, err = fundamental_convolve(fs, f, [0.0, s, 0.0], SPEC)
        assert v == pytest.approx(2.5 / (4 * math.pi * s), rel=1e-6)


def test_exp_integrability_dichotomy():
    f = bump(1, radius=0.25, mass=0.5)
    cache = {}
    small = exp_integrability_report(f, 0.5, 2.0, SPEC, levels=3, u2_cache=cache)
    assert small.admissible
    assert small.verdict == "converged"
    assert math.isfinite(small.jensen_bound)
    assert small.integral <= small.jensen_bound
    big = exp_integrability_report(f, 5 * small.threshold, 2.0, SPEC, levels=3,
                                   u2_cache=cache)
    assert not big.admissible
    assert big.jensen_bound == math.inf


def test_exp_integrability_threshold_scaling():
    # threshold = gamma_n / mass
    f = bump(1, radius=0.25, mass=0.5)
    rep = exp_integrability_report(f, 0.5, 2.0, SPEC, levels=2)
    assert rep.threshold == pytest.approx(geom_constants(1).gamma_n / 0.5, rel=1e-8)


def test_exp_integrability_bound_tuple():
    f = bump(1, radius=0.25, mass=0.5)
    integral, jensen, admissible = exp_integrability_bound(f, 0.5, 2.0, SPEC)
    assert admissible and integral <= jensen


def test_exp_integrability_rejects_bad_p():
    with pytest.raises(ValueError):
        exp_integrability_report(bump(1, radius=0.25, mass=0.5), -1.0, 2.0, SPEC)
