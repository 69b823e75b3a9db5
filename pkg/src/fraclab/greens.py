"""Ball kernels and boundary representations.

Covers the Laplacian Green's function G1 on a ball (closed form, with the
center limit), the iterated polyharmonic Green's function (nested G1
chains, Monte Carlo beyond one fold), the Poisson boundary integral, the
half-Laplacian Poisson kernel for exterior data, and the half-Laplacian
Green's kernel G2 with its calibrated constant.

Both unspecified kernel constants are pinned numerically: the exterior
Poisson kernel by unit mass at the center, and G2 by requiring that the
solution of (-Delta)^(n/2) h = 1 has the exact residual 1 at the center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    FracOrder,
    InvalidDimensionError,
    QuadratureSpec,
    ScalarField,
    as_coords,
    fsum,
    geom_constants,
    sphere_surface_area,
)
from .quad import (
    Ball,
    _ring_integral_u,
    geometric_edges,
    integrate_panels,
    nested_mc_integral,
    sphere_rule,
)

# ---------------------------------------------------------------------------
# G1: the Laplacian Green's function of a ball (n >= 3)


def g1_eval(r: float, x, y) -> float:
    """Green's function of -Delta on the ball of radius r, zero boundary data.

    Closed form with the Kelvin image point; at x = 0 the image term
    degenerates and the removable-limit formula is used.
    """
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    n = len(xv)
    if n < 3:
        raise InvalidDimensionError("G1 closed form requires n >= 3")
    ax, ay = np.linalg.norm(xv), np.linalg.norm(yv)
    if ax >= r or ay >= r:
        raise ValueError("both points must lie in the open ball")
    d = np.linalg.norm(xv - yv)
    if d == 0.0:
        raise ValueError("coincident points")
    c = 1.0 / (n * (n - 2) * geom_constants(n).ball_volume)
    if ax == 0.0:
        return c * (ay ** (2 - n) - r ** (2 - n))
    image = np.linalg.norm(ax * (yv - r**2 * xv / ax**2))
    return c * (d ** (2 - n) - (r / image) ** (n - 2))


def _g1_batch(r: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized G1 over row-paired points (used by the Monte Carlo chain)."""
    n = x.shape[1]
    c = 1.0 / (n * (n - 2) * geom_constants(n).ball_volume)
    d = np.linalg.norm(x - y, axis=1)
    ax = np.linalg.norm(x, axis=1)
    safe = np.maximum(ax, 1e-150)  # keeps safe**2 away from underflow
    image = np.linalg.norm(safe[:, None] * (y - r**2 * x / safe[:, None] ** 2), axis=1)
    image = np.where(ax > 0, image, r * np.ones_like(image))  # center limit
    # at the center the image term collapses to r^(2-n), independent of y
    img = np.where(ax > 0, (r / image) ** (n - 2), r ** (2.0 - n))
    return c * (d ** (2.0 - n) - img)


def iterated_green(r: float, j: int, x, y, spec: QuadratureSpec):
    """(-Delta)^j of the polyharmonic Green's function of order (n-1)/2.

    The representation is an ((n-3)/2 - j)-fold chain of G1 kernels over the
    ball; zero folds give G1 itself (exact, stderr 0), deeper folds go
    through seeded Monte Carlo.  Returns (value, stderr).
    """
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    n = len(xv)
    top = (n - 3) // 2
    if not 0 <= j <= top:
        raise ValueError(f"j must lie in [0, {top}] for n = {n}")
    folds = top - j
    if folds == 0:
        return g1_eval(r, xv, yv), 0.0
    kernel = lambda a, b: _g1_batch(r, a, b)
    chain = [kernel] * (folds + 1)
    return nested_mc_integral(chain, (xv, yv), Ball((0.0,) * n, r),
                              spec.mc_samples, spec.seed)


def green_derivative_bound_check(r: float, j: int, pairs: Sequence[tuple],
                                 spec: QuadratureSpec, fd_step: float = 1e-5) -> dict:
    """Estimate |grad_y of (-Delta)^j G| at each pair by central differences
    and fit the log-log slope against the separation |x - y|.

    The singularity bound predicts exponent -(2 + 2j) in the scaling
    |derivative| <= C |x-y|^(-2-2j) normalized by |x-y|^(n-1-...); what is
    fitted is the raw derivative magnitude, whose near-field slope for
    G1 (n = 3, j = 0) is -(n - 1).
    """
    samples = []
    for xv, yv in pairs:
        xv = np.asarray(xv, dtype=float).ravel()
        yv = np.asarray(yv, dtype=float).ravel()
        n = len(xv)
        grad = np.zeros(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = fd_step
            up, _ = iterated_green(r, j, xv, yv + e, spec)
            dn, _ = iterated_green(r, j, xv, yv - e, spec)
            grad[i] = (up - dn) / (2 * fd_step)
        sep = float(np.linalg.norm(xv - yv))
        samples.append((sep, float(np.linalg.norm(grad))))
    seps = np.array([s for s, _ in samples])
    mags = np.array([m for _, m in samples])
    A = np.stack([np.ones_like(seps), np.log(seps)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(np.maximum(mags, 1e-300)), rcond=None)
    bound_ratio = float(np.max(mags * seps ** (2.0 + 2.0 * j)))
    return {"r": r, "j": j, "fitted_exponent": float(coef[1]),
            "fitted_log_constant": float(coef[0]),
            "bound_constant": bound_ratio,
            "samples": [{"separation": s, "derivative": m} for s, m in samples]}


# ---------------------------------------------------------------------------
# Navier boundary representation (n = 3: classical Poisson integral)


def navier_representation(r: float, boundary_data: Sequence, x,
                          spec: QuadratureSpec):
    """Harmonic extension of boundary data into the ball via the Poisson
    kernel P(x,y) = (r^2 - |x|^2) / (|S^(n-1)| r |x-y|^n).

    Implemented for n = 3, where the polyharmonic boundary sum collapses to
    the single classical term.  Returns (value, err_est).
    """
    xv = np.asarray(x, dtype=float).ravel()
    n = len(xv)
    if n != 3:
        raise InvalidDimensionError(
            "the boundary representation is implemented for n = 3 (single-term case)")
    if len(boundary_data) != 1:
        raise ValueError("n = 3 takes exactly one boundary datum")
    ax = np.linalg.norm(xv)
    if ax >= r:
        raise ValueError("evaluation point must lie in the open ball")
    f0 = boundary_data[0]
    surf = sphere_surface_area(n)

    def value_with(order: int) -> float:
        pts, wts = sphere_rule(n, order)
        y = r * pts
        d = np.linalg.norm(y - xv[None, :], axis=1)
        kern = (r**2 - ax**2) / (surf * r * d**n)
        return fsum(f0(y) * kern * wts) * r ** (n - 1)

    order = max(spec.angular_order, 32)
    v1 = value_with(order)
    v2 = value_with(order + 8)
    return v2, abs(v1 - v2)


# ---------------------------------------------------------------------------
# half-Laplacian Poisson kernel for exterior data


@lru_cache(maxsize=None)
def poisson_halflap_constant(n: int, r: float) -> float:
    """Normalizer of P(x,y) = C ((r^2-|x|^2)/(|y|^2-r^2))^(1/2) |x-y|^(-n),
    calibrated so the kernel has unit mass at x = 0."""
    # mass at x=0 with C=1 reduces, under rho = r cosh(tau), to
    # |S^(n-1)| integral of sech(tau); the r factors cancel
    edges = [0.0] + geometric_edges(0.25, 48.0, ratio=1.4)
    val, _ = integrate_panels(lambda t: 1.0 / np.cosh(t), edges, order=14,
                              tol=1e-14, max_splits=200)
    return 1.0 / (sphere_surface_area(n) * val)


def poisson_extension_halflap(r: float, exterior_data: ScalarField, x,
                              spec: QuadratureSpec):
    """Evaluate the exterior-data Poisson integral for the half-Laplacian:
    the integral over |y| > r of P(x,y) g(y) dy.  Returns (value, err_est).

    n = 1 integrates both branches jointly (each alone can diverge for
    growing data); n >= 3 requires radial data.
    """
    g = exterior_data
    n = g.dim
    xv = as_coords(x, n)
    ax = float(np.linalg.norm(xv))
    if ax >= r:
        raise ValueError("evaluation point must lie inside the ball")
    C = poisson_halflap_constant(n, r)
    front = C * math.sqrt(r**2 - ax**2)

    if n == 1:
        s = xv[0]

        def fn(tau):
            rho = r * np.cosh(tau)
            pts_p = rho[:, None]
            pts_m = -rho[:, None]
            return (g(pts_p) / np.abs(s - rho) ** n + g(pts_m) / np.abs(s + rho) ** n)
    else:
        if not g.is_radial or not np.allclose(g.center, 0.0):
            raise InvalidDimensionError(
                "exterior data must be radial about the origin for n >= 3")
        prof = g.radial_profile

        def fn(tau):
            # rho = r cosh(tau): the edge factor and the jacobian cancel
            rho = r * np.cosh(tau)
            kern = _ring_integral_u(lambda u: u ** (-n / 2.0), rho, ax, n, 24, 10)
            return np.asarray(prof(rho), dtype=float) * kern * rho ** (n - 1)

    power = g.decay.effective_power
    if power is None:
        raise InvalidDimensionError(f"exterior data decay {g.decay} not certifiable")
    # integrand decays like exp(-tau (1 + power)) in tau; extend until settled
    edges = [0.0] + geometric_edges(0.25, 64.0, ratio=1.5)
    value, err = integrate_panels(fn, edges, order=14, tol=spec.abs_tol,
                                  max_splits=2 * spec.max_subdivisions)
    return front * value, front * err + abs(front) * 1e-13


# ---------------------------------------------------------------------------
# G2: the half-Laplacian Green's kernel of a ball


def _profile_F(n: int):
    """F(w) = integral from 0 to w of t^(-1/2) (1+t)^(-n/2) dt, closed form."""
    if n == 1:
        return lambda w: 2.0 * np.arcsinh(np.sqrt(w))
    if n == 3:
        return lambda w: 2.0 * np.sqrt(w / (1.0 + w))
    if n == 5:
        return lambda w: 2.0 * np.sqrt(w) * (2.0 * w + 3.0) / (3.0 * (1.0 + w) ** 1.5)
    raise InvalidDimensionError("G2 profile implemented for n in {1,3,5}")


def g2_kernel_unnormalized(n: int, r: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|x-y|^(1-n) F(r0) with r0 = (r^2-|x|^2)(r^2-|y|^2)/|x-y|^2, C = 1."""
    F = _profile_F(n)
    d2 = np.sum((x - y) ** 2, axis=1)
    ax2 = np.sum(x**2, axis=1)
    ay2 = np.sum(y**2, axis=1)
    r0 = (r**2 - ax2) * (r**2 - ay2) / d2
    return d2 ** ((1.0 - n) / 2.0) * F(r0)


def _g2_integral_unnormalized(n: int, r: float, s: float,
                              rhs_profile: Callable[[np.ndarray], np.ndarray],
                              spec: QuadratureSpec,
                              rhs_breaks=()) -> float:
    """Integral over B_r of |x-y|^(1-n) F(r0) rhs(|y|) dy at |x| = s, C = 1."""
    F = _profile_F(n)
    cx = r**2 - s**2

    def outer(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        for i, p in enumerate(rho):
            cy = cx * (r**2 - p**2)

            def h_u(u):
                return u ** ((1.0 - n) / 2.0) * F(cy / u)

            out[i] = _ring_integral_u(h_u, np.array([p]), s, n, 26, 10)[0]
        return out * np.asarray(rhs_profile(rho), dtype=float) * rho ** (n - 1)

    lo = r * 2.0 ** (-spec.max_subdivisions)
    edges = set(geometric_edges(lo, r, ratio=1.6))
    # grade toward rho = s (kernel singularity) and toward the boundary
    for jj in range(1, 40):
        step = 0.5**jj
        if lo < s - s * step < r:
            edges.add(s - s * step)
        if lo < s + s * step < r:
            edges.add(s + s * step)
        if lo < r - (r - s) * step < r:
            edges.add(r - (r - s) * step)
        edges.add(r - r * step)
    for b in rhs_breaks:
        if lo < b < r:
            edges.add(b)
    value, err = integrate_panels(outer, sorted(edges), order=12,
                                  tol=spec.abs_tol, max_splits=4 * spec.max_subdivisions)
    return value, err


@lru_cache(maxsize=None)
def torsion_field(n: int, r: float) -> ScalarField:
    """(r^2 - |x|^2)^(1/2) on the ball, zero outside: the shape of the
    half-Laplacian rhs = 1 solution, up to the constant the operator itself
    determines."""
    from .fields import radial_field

    expr = f"({r * r} - r**2)**0.5"
    return radial_field(expr, n, support_radius=r, profile_breaks=(r,))


@lru_cache(maxsize=None)
def torsion_constant(n: int, r: float) -> float:
    """L with (-Delta)^(1/2) (r^2-|x|^2)^(1/2) = L on the ball, measured at
    the center by the operator (certifiably constant; see the residual
    checks)."""
    from .fraclap import FracLapOperator, frac_lap

    op = FracLapOperator.make(n, FracOrder(0, 0.5))
    val, _ = frac_lap(op, torsion_field(n, r), np.zeros(n), QuadratureSpec())
    return val


@lru_cache(maxsize=None)
def g2_constant(n: int, r: float) -> float:
    """Calibrated constant of G2: fixed by the residual identity
    (-Delta)^(1/2) h = 1 at the ball center for the rhs = 1 solution, whose
    center value the operator pins through the torsion profile."""
    base0, _ = _g2_integral_unnormalized(n, r, 0.0,
                                         lambda rho: np.ones_like(rho),
                                         QuadratureSpec(max_subdivisions=30))
    h0 = r / torsion_constant(n, r)
    return h0 / base0


def g2_solve(r: float, rhs: ScalarField, x, spec: QuadratureSpec,
             constant: Optional[float] = None):
    """h(x) = integral over B_r of G2(x,y) rhs(y) dy; returns (value, err_est).

    rhs must be radial about the origin (the supported ball geometry)."""
    n = rhs.dim
    xv = as_coords(x, n)
    s = float(np.linalg.norm(xv))
    if s >= r:
        raise ValueError("evaluation point must lie in the open ball")
    if not rhs.is_radial or not np.allclose(rhs.center, 0.0):
        raise InvalidDimensionError("rhs must be radial about the ball center")
    C = g2_constant(n, r) if constant is None else constant
    val, err = _g2_integral_unnormalized(n, r, s, rhs.radial_profile, spec,
                                         rhs_breaks=tuple(rhs.profile_breaks))
    return C * val, abs(C) * err


def g2_bound_report(n: int, r: float, pairs: Sequence[tuple]) -> dict:
    """max over sample pairs of |G2(x,y)| * |x-y|^(n-1) (the kernel bound
    constant; finite on any sample set, uniformly bounded for n >= 3)."""
    C = g2_constant(n, r)
    ratios = []
    for xv, yv in pairs:
        xv = np.atleast_2d(np.asarray(xv, dtype=float))
        yv = np.atleast_2d(np.asarray(yv, dtype=float))
        val = C * g2_kernel_unnormalized(n, r, xv, yv)[0]
        d = float(np.linalg.norm(xv - yv))
        ratios.append(abs(val) * d ** (n - 1))
    return {"n": n, "r": r, "max_ratio": max(ratios), "count": len(ratios)}
