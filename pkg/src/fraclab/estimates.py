"""Fit-and-compare validators for kernel decay estimates.

Each check evaluates an operator on a built-in family over a radius window,
fits the decay exponent by least squares in log-log coordinates, and
compares against the predicted exponent.  The reports embed the raw samples
so a failed fit is diagnosable without rerunning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .core import (
    Decay,
    FracOrder,
    QuadratureSpec,
    ScalarField,
    fsum,
    sphere_surface_area,
)
from .fields import gaussian, hermite_moment_field
from .fraclap import FracLapOperator, frac_lap
from .quad import RadialKernel, radial_pair_integral


@dataclass
class DecayReport:
    """Outcome of a decay-exponent fit over a radius window."""

    fitted_exponent: float
    predicted_exponent: float
    window: tuple
    max_ratio: float  # largest sampled |value| * r^predicted
    passed: bool
    tolerance: float
    samples: list = field(default_factory=list)  # (radius, value, err_est)

    def to_mapping(self) -> dict:
        return {
            "fitted_exponent": self.fitted_exponent,
            "predicted_exponent": self.predicted_exponent,
            "window": list(self.window),
            "max_ratio": self.max_ratio,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "samples": [list(s) for s in self.samples],
        }


def loglog_slope(radii: Sequence[float], values: Sequence[float]) -> float:
    """OLS slope of log|value| against log(radius), intercept included."""
    r = np.asarray(radii, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if np.any(v == 0.0):
        raise ValueError("zero values cannot be fitted in log coordinates")
    A = np.stack([np.ones_like(r), np.log(r)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
    return float(coef[1])


def window_radii(window, per_decade: int = 6) -> np.ndarray:
    lo, hi = float(window[0]), float(window[1])
    if hi < 8.0 * lo:  # must span (essentially) a decade for a stable slope
        raise ValueError("fit window too narrow for a stable exponent fit")
    decades = math.log10(hi / lo)
    count = max(int(math.ceil(per_decade * decades)) + 1, 7)
    return np.geomspace(lo, hi, count)


def _fit_report(samples, predicted: float, window, tolerance: float) -> DecayReport:
    radii = [s[0] for s in samples]
    values = [s[1] for s in samples]
    fitted = loglog_slope(radii, values)
    ratios = [abs(v) * r ** (-predicted) for r, v in zip(radii, values)]
    max_ratio = max(ratios)
    ok = (abs(fitted - predicted) <= tolerance * abs(predicted)
          and math.isfinite(max_ratio))
    return DecayReport(fitted_exponent=fitted, predicted_exponent=predicted,
                       window=(float(window[0]), float(window[1])),
                       max_ratio=max_ratio, passed=ok, tolerance=tolerance,
                       samples=samples)


def schwartz_decay_check(phi: ScalarField, s: FracOrder, window,
                         spec: QuadratureSpec, tolerance: float = 0.10) -> DecayReport:
    """Fitted decay of |(-Delta)^s phi| against the predicted -(n + 2s)
    for rapidly decaying phi."""
    n = phi.dim
    op = FracLapOperator.make(n, s)
    samples = []
    for r in window_radii(window):
        x = np.zeros(n)
        x[0] = r
        v, e = frac_lap(op, phi, x, spec)
        samples.append((float(r), float(v), float(e)))
    return _fit_report(samples, -(n + 2.0 * s.total), window, tolerance)


def verify_vanishing_moments(phi: ScalarField, k: int, tol: float = 1e-10) -> list:
    """Moments of orders 0..k of a one-dimensional field; raises if any
    exceeds tol in magnitude."""
    moments = []
    for j in range(k + 1):
        val, _ = integrate.quad(lambda t, j=j: t**j * phi.at([t]),
                                -np.inf, np.inf, limit=200)
        moments.append(val)
        if abs(val) > tol:
            raise ValueError(f"moment of order {j} is {val:.3e}, not zero")
    return moments


def moment_decay_check(k: int, sigma: float, window, spec: QuadratureSpec,
                       tolerance: float = 0.10) -> DecayReport:
    """Improved decay n + 2*sigma + k + 1 of the sigma-order operator on the
    one-dimensional moment-vanishing family (moments through order k are
    re-verified before fitting); k = -1 is the plain rapid-decay case."""
    if k < 0:
        return schwartz_decay_check(gaussian(1), FracOrder(0, sigma), window,
                                    spec, tolerance)
    phi = hermite_moment_field(k)
    verify_vanishing_moments(phi, k)
    op = FracLapOperator.make(1, FracOrder(0, sigma))
    samples = []
    for r in window_radii(window):
        v, e = frac_lap(op, phi, np.array([r]), spec)
        samples.append((float(r), float(v), float(e)))
    return _fit_report(samples, -(1 + 2.0 * sigma + k + 1), window, tolerance)


def riesz_composition_check(n: int, p: float, q: float,
                            separations: Sequence[float],
                            spec: QuadratureSpec,
                            ball_radius: Optional[float] = None,
                            tolerance: float = 0.15) -> dict:
    """Two-kernel composition integral at each separation.

    Full space (p + q > n): the scaling identity makes value * sep^(p+q-n)
    constant; the report carries the spread and the combined quadrature
    error.  On a ball with p + q = n the growth is affine in log(1/sep)
    with slope the sphere area; the fitted slope is reported.
    """
    if p >= n or q >= n:
        raise ValueError("kernel exponents must be below the dimension")
    on_ball = ball_radius is not None
    if on_ball:
        if abs(p + q - n) > 1e-12:
            raise ValueError("the ball log case needs p + q = n")
    elif p + q <= n:
        raise ValueError("full-space composition needs p + q > n")

    g = RadialKernel(lambda r: r ** (-p), sing_power=p,
                     decay=Decay.power(p), support=ball_radius)
    h = RadialKernel(lambda r: r ** (-q), sing_power=q, decay=Decay.power(q))
    rows = []
    for s in separations:
        v, e = radial_pair_integral(g, h, float(s), n, spec,
                                    certify=not on_ball)
        rows.append({"separation": float(s), "value": float(v),
                     "err_est": float(e)})

    report = {"n": n, "p": p, "q": q, "rows": rows,
              "mode": "ball_log" if on_ball else "full_space"}
    if on_ball:
        seps = np.array([r["separation"] for r in rows])
        vals = np.array([r["value"] for r in rows])
        A = np.stack([np.ones_like(seps), -np.log(seps)], axis=1)
        coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
        predicted = sphere_surface_area(n)
        report.update(fitted_log_slope=float(coef[1]),
                      predicted_log_slope=predicted,
                      passed=abs(coef[1] - predicted) <= tolerance * predicted)
    else:
        power = p + q - n
        scaled = [r["value"] * r["separation"] ** power for r in rows]
        errs = [r["err_est"] * r["separation"] ** power for r in rows]
        spread = max(scaled) - min(scaled)
        combined = fsum(sorted(errs))
        report.update(scaled_values=scaled, spread=float(spread),
                      combined_err=float(combined),
                      rel_spread=float(spread / max(abs(v) for v in scaled)),
                      passed=spread <= 3.0 * combined)
    return report


def support_decay_check(phi: ScalarField, s: float,
                        distances: Sequence[float], spec: QuadratureSpec,
                        holder_order: float = 2.0,
                        tolerance: float = 0.10) -> DecayReport:
    """Decay of the sigma-order operator outside the support of phi.

    Far from the support the value decays like dist^-(n+2s); near the
    boundary the bound is max(1, dist^(-2s + holder_order)), which for
    holder_order > 2s means no blow-up.  The far-field exponent is fitted
    against delta = dist(x, support); near-field samples ride along in the
    report (their boundedness is the checkable content there).
    """
    if phi.support_radius is None:
        raise ValueError("phi must declare a support radius")
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    n = phi.dim
    r0 = phi.support_radius
    op = FracLapOperator.make(n, FracOrder(0, s))
    near, far = [], []
    for d in sorted(float(d) for d in distances):
        if d <= 0:
            raise ValueError("distances must be positive")
        x = np.zeros(n)
        x[0] = r0 + d
        v, e = frac_lap(op, phi, x, spec)
        (far if d >= 1.0 else near).append((d, float(v), float(e)))
    if len(far) < 4:
        raise ValueError("need at least 4 far-field distances (>= 1)")
    window = (far[0][0], far[-1][0])
    rep = _fit_report(far, -(n + 2.0 * s), window, tolerance)
    rep.samples = near + far
    if near and holder_order > 2.0 * s:
        near_max = max(abs(v) for _, v, _ in near)
        far_max = max(abs(v) for _, v, _ in far)
        # bounded near regime: no blow-up relative to the O(1) scale
        rep.passed = rep.passed and near_max < 1e3 * max(far_max, 1.0)
    return rep
