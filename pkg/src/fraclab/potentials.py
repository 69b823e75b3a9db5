"""Log-potentials, fundamental solutions and exponential integrability.

The log-potential of an integrable density f is

    v(x) = (1/gamma_n) * integral of log((1+|y|)/|x-y|) f(y) dy.

The kernel splits into an x-independent part log(1+|y|) (computed once and
cached) and the convolution against log|x-y|, which for radial densities
goes through the two-center radial reduction and for general densities
through singularity-centered shells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import sympy as sp

from .core import (
    Decay,
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
    FullSpace,
    RadialKernel,
    effective_angular_order,
    geometric_edges,
    integrate_panels,
    radial_pair_integral,
    sphere_rule,
    truncated_integral,
)


@dataclass
class LogPotential:
    """v = (1/gamma_n) * (log(1+|y|) - log|x-y|) convolved with the density."""

    density: ScalarField
    dim: int
    gamma_n: float = 0.0
    spec: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if self.gamma_n == 0.0:
            self.gamma_n = geom_constants(self.dim).gamma_n
        self._const_part: Optional[tuple] = None
        self._profile_cache: dict = {}

    def radial_value(self, r: float) -> tuple:
        """(v, err) at distance r from the density center (radial densities
        make v radial, so finite-difference stencils share these values)."""
        key = float(r)
        if key not in self._profile_cache:
            z = np.array(self.density.center, dtype=float)
            z[0] += key
            self._profile_cache[key] = log_potential_eval(self, z)
        return self._profile_cache[key]

    def const_part(self) -> tuple:
        """(value, err) of the x-independent integral of log(1+|y|) f(y)."""
        if self._const_part is None:
            f = self.density
            w = ScalarField(
                eval=lambda p: f(p) * np.log1p(np.linalg.norm(p, axis=1)),
                dim=self.dim, decay=_shave(f.decay),
                radial_profile=(lambda r: np.asarray(f.radial_profile(r), dtype=float) * np.log1p(r))
                if f.is_radial and np.allclose(f.center, 0.0) else None,
                radial_center=(0.0,) * self.dim if f.is_radial and np.allclose(f.center, 0.0) else None,
                support_radius=f.support_radius, profile_breaks=f.profile_breaks)
            self._const_part = truncated_integral(w, FullSpace(), self.spec)
        return self._const_part


def _shave(decay: Decay) -> Decay:
    """Decay hint after multiplying by a logarithm: half a power weaker."""
    if decay.kind == "power":
        return Decay.power(decay.rate - 0.5)
    return decay


def _log_convolution(f: ScalarField, x: np.ndarray, spec: QuadratureSpec):
    """(value, err) of the integral of log|x-y| f(y) dy."""
    n = f.dim
    if f.is_radial:
        s = float(np.linalg.norm(x - f.center))
        breaks = tuple(b for b in set(f.profile_breaks) if b)
        gk = RadialKernel(fn=lambda r: np.asarray(f.radial_profile(r), dtype=float),
                          decay=f.decay, support=f.support_radius, breaks=breaks)
        hk = RadialKernel(fn=lambda r: np.log(np.maximum(r, 1e-300)),
                          log_sing=True, decay=Decay.log_growth())
        return radial_pair_integral(gk, hk, s, n, spec)
    # generic: shells centered at the kernel singularity x
    pts, wts = sphere_rule(n, effective_angular_order(n, spec.angular_order))

    def radial_fn(rho):
        rho = np.asarray(rho, dtype=float)
        y = x[None, None, :] + rho[:, None, None] * pts[None, :, :]
        vals = f(y.reshape(-1, n)).reshape(len(rho), -1)
        return (vals @ wts) * rho ** (n - 1) * np.log(rho)

    lo = 2.0 ** (-spec.max_subdivisions)
    hi = spec.truncation_radius + float(np.linalg.norm(x))
    if f.support_radius is not None:
        hi = f.support_radius + float(np.linalg.norm(x - f.center)) + 1.0
    edges = geometric_edges(lo, hi, ratio=1.5)
    value, err = integrate_panels(radial_fn, edges, order=12, tol=spec.abs_tol,
                                  max_splits=4 * spec.max_subdivisions)
    # omitted core around the singularity: f bounded, kernel log-integrable
    fmax = float(np.max(np.abs(f(x[None, :] + lo * pts))))
    err += fmax * sphere_surface_area(n) * lo**n * (1 + abs(math.log(lo))) / n
    if f.support_radius is None:
        power = f.decay.effective_power
        if power is None or power <= n:
            raise InvalidDimensionError("density tail not certifiable for log convolution")
        samp = float(np.max(np.abs(f(x[None, :] + hi * pts))))
        if samp > 0.0:
            p = min(power, 100.0)  # finite cap keeps the bound overflow-free
            err += 4.0 * samp * (1 + hi) ** p * sphere_surface_area(n) * \
                (1 + math.log(hi)) * (1 + hi) ** (n - p) / (p - n)
    return value, err


def log_potential_eval(lp: LogPotential, x) -> tuple:
    xv = as_coords(x, lp.dim)
    a, ea = lp.const_part()
    b, eb = _log_convolution(lp.density, xv, lp.spec)
    return (a - b) / lp.gamma_n, (ea + eb) / lp.gamma_n


# ---------------------------------------------------------------------------
# kernel derivatives


@lru_cache(maxsize=None)
def _log_kernel_derivative(n: int, alpha: tuple):
    """Vectorized D^alpha_z of log(1/|z|) in R^n (note the sign: this is the
    x-derivative of -log|x-y| at z = x-y)."""
    zs = sp.symbols(f"z0:{n}", real=True)
    expr = -sp.log(sp.sqrt(sum(z**2 for z in zs)))
    for i, p in enumerate(alpha):
        for _ in range(p):
            expr = sp.diff(expr, zs[i])
    fn = sp.lambdify(zs, sp.simplify(expr), modules="numpy")

    def ev(z: np.ndarray) -> np.ndarray:
        return np.asarray(fn(*[z[:, i] for i in range(n)]), dtype=float)

    return ev


def log_potential_derivative(lp: LogPotential, x, alpha, spec: QuadratureSpec = None):
    """D^alpha v(x) for 1 <= |alpha| <= n-1.

    For radial densities up to second order the radial profile of v is
    certified to near machine accuracy, so the derivative is taken by
    central differences of that profile (the chain rule through |x| is
    exact).  Otherwise the differentiated kernel O(|x-y|^(-|alpha|)) is
    integrated on singularity-centered shells.
    """
    spec = spec or lp.spec
    n = lp.dim
    alpha = tuple(int(a) for a in alpha)
    order = sum(alpha)
    if not 1 <= order <= n - 1:
        raise ValueError("kernel derivative is locally integrable only for 1 <= |alpha| <= n-1")
    xv = as_coords(x, n)
    f = lp.density
    if f.is_radial and order <= 2:
        return _radial_profile_derivative(lp, xv, alpha, spec)
    kern = _log_kernel_derivative(n, alpha)
    pts, wts = sphere_rule(n, effective_angular_order(n, spec.angular_order))

    def radial_fn(rho):
        rho = np.asarray(rho, dtype=float)
        y = xv[None, None, :] + rho[:, None, None] * pts[None, :, :]
        flat = y.reshape(-1, n)
        vals = f(flat) * kern(xv[None, :] - flat)
        return (vals.reshape(len(rho), -1) @ wts) * rho ** (n - 1)

    lo = 2.0 ** (-spec.max_subdivisions)
    s = float(np.linalg.norm(xv - f.center))
    hi = spec.truncation_radius + float(np.linalg.norm(xv))
    if f.support_radius is not None:
        hi = f.support_radius + s + 1.0
    edges = set(geometric_edges(lo, hi, ratio=1.5))
    for b in set(f.profile_breaks) | {s}:
        for e in (abs(s - b) if b != s else s, s + b):
            if lo < e < hi:
                edges.add(e)
    value, err = integrate_panels(radial_fn, sorted(edges), order=12,
                                  tol=spec.abs_tol, max_splits=4 * spec.max_subdivisions)
    fmax = float(np.max(np.abs(f(xv[None, :] + lo * pts))))
    err += fmax * sphere_surface_area(n) * lo ** (n - order) / max(n - order, 1)
    if f.support_radius is None:
        power = f.decay.effective_power
        if power is None or power + order <= n:
            raise InvalidDimensionError("density tail not certifiable for kernel derivative")
        samp = float(np.max(np.abs(f(xv[None, :] + hi * pts))))
        if samp > 0.0:
            p = min(power, 100.0)  # finite cap keeps the bound overflow-free
            err += 4.0 * samp * (1 + hi) ** p * sphere_surface_area(n) * \
                hi ** (n - order - p) / (p + order - n)
    return value / lp.gamma_n, err / lp.gamma_n


def _radial_profile_derivative(lp: LogPotential, xv: np.ndarray, alpha: tuple,
                               spec: QuadratureSpec):
    """D^alpha of v(x) = V(|x - c|) by central differences of the certified
    radial profile V."""
    c = lp.density.center
    s = float(np.linalg.norm(xv - c))
    h = max(1e-3, 1e-4 * s)

    def V(r: float) -> tuple:
        return lp.radial_value(r)

    order = sum(alpha)
    if s < 10.0 * h:
        # near the center use coordinate-aligned stencils on the full field
        def g(pt):
            return log_potential_eval(lp, pt)[0]
        return _fd_multivariate(g, xv, alpha, h), 1e-4
    v0, e0 = V(s)
    vp, ep = V(s + h)
    vm, em = V(s - h)
    d1 = (vp - vm) / (2 * h)
    d2 = (vp - 2 * v0 + vm) / h**2
    err = (ep + em + e0) / h**2 + abs(d2) * h**2
    u = (xv - c) / s
    if order == 1:
        i = alpha.index(1)
        return d1 * u[i], err * h
    if sum(1 for a in alpha if a == 2) == 1:
        i = alpha.index(2)
        return d2 * u[i] ** 2 + d1 / s * (1 - u[i] ** 2), err
    i, j = [k for k, a in enumerate(alpha) if a == 1]
    return (d2 - d1 / s) * u[i] * u[j], err


def _fd_multivariate(g, xv: np.ndarray, alpha: tuple, h: float) -> float:
    idx = [k for k, a in enumerate(alpha) for _ in range(a)]
    if len(idx) == 1:
        e = np.zeros_like(xv); e[idx[0]] = h
        return (g(xv + e) - g(xv - e)) / (2 * h)
    i, j = idx
    ei = np.zeros_like(xv); ei[i] = h
    ej = np.zeros_like(xv); ej[j] = h
    if i == j:
        return (g(xv + ei) - 2 * g(xv) + g(xv - ei)) / h**2
    return (g(xv + ei + ej) - g(xv + ei - ej) - g(xv - ei + ej) + g(xv - ei - ej)) / (4 * h**2)


# ---------------------------------------------------------------------------
# fundamental solutions


@dataclass(frozen=True)
class FundamentalSolution:
    """HalfLap: Phi(x) = c_n |x|^(1-n), the kernel inverting (-Delta)^(1/2);
    PolyHarm: Psi(x) = c_n' |x|^(-1), inverting (-Delta)^((n-1)/2) against
    Phi.  Defined for odd n >= 3."""

    kind: str  # "HalfLap" or "PolyHarm"
    dim: int

    def __post_init__(self):
        if self.dim < 3 or self.dim % 2 == 0:
            raise InvalidDimensionError("fundamental solutions require odd n >= 3")
        if self.kind not in ("HalfLap", "PolyHarm"):
            raise ValueError("kind must be HalfLap or PolyHarm")

    @property
    def constant(self) -> float:
        n = self.dim
        if self.kind == "HalfLap":
            return math.factorial((n - 3) // 2) / (2.0 * math.pi ** ((n + 1) / 2))
        b1 = geom_constants(n).ball_volume
        return math.gamma(0.5) / (n * 2 ** (n - 2) * b1 * math.gamma(n / 2)
                                  * math.factorial((n - 3) // 2))

    @property
    def homogeneity(self) -> float:
        return 1.0 - self.dim if self.kind == "HalfLap" else -1.0

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        r = np.linalg.norm(z, axis=1)
        return self.constant * r ** self.homogeneity


def fundamental_convolve(fs: FundamentalSolution, f: ScalarField, x,
                         spec: QuadratureSpec):
    """(Phi * f)(x) or (Psi * f)(x); the kernel singularity is integrable."""
    n = fs.dim
    if f.dim != n:
        raise InvalidDimensionError("field dimension mismatch")
    xv = as_coords(x, n)
    sing = -fs.homogeneity
    if f.is_radial:
        s = float(np.linalg.norm(xv - f.center))
        gk = RadialKernel(fn=lambda r: np.asarray(f.radial_profile(r), dtype=float),
                          decay=f.decay, support=f.support_radius,
                          breaks=tuple(b for b in f.profile_breaks if b))
        hk = RadialKernel(fn=lambda r: fs.constant * np.maximum(r, 1e-300) ** fs.homogeneity,
                          sing_power=sing, decay=Decay.power(sing))
        return radial_pair_integral(gk, hk, s, n, spec)
    pts, wts = sphere_rule(n, effective_angular_order(n, spec.angular_order))

    def radial_fn(rho):
        rho = np.asarray(rho, dtype=float)
        y = xv[None, None, :] + rho[:, None, None] * pts[None, :, :]
        vals = f(y.reshape(-1, n)).reshape(len(rho), -1)
        return (vals @ wts) * fs.constant * rho ** (n - 1 + fs.homogeneity)

    lo = 2.0 ** (-spec.max_subdivisions)
    hi = (f.support_radius + float(np.linalg.norm(xv - f.center)) + 1.0
          if f.support_radius is not None else spec.truncation_radius)
    value, err = integrate_panels(radial_fn, geometric_edges(lo, hi, 1.5),
                                  order=12, tol=spec.abs_tol,
                                  max_splits=4 * spec.max_subdivisions)
    fmax = float(np.max(np.abs(f(xv[None, :] + lo * pts))))
    err += fmax * fs.constant * sphere_surface_area(n) * lo ** (n - sing) / (n - sing)
    return value, err


# ---------------------------------------------------------------------------
# exponential integrability (Brezis-Merle)


@dataclass(frozen=True)
class ExpIntegrabilityReport:
    integral: float
    jensen_bound: float
    admissible: bool
    threshold: float
    ratios: tuple
    verdict: str  # "converged" / "diverged" / "inconclusive"
    levels: tuple


def _midpoint_grid(n: int, R: float, level: int) -> tuple:
    """Deterministic midpoint product grid on [-R, R]^n clipped to B_R."""
    m = 16 * 2**level
    axis = -R + (2.0 * R) * (np.arange(m) + 0.5) / m
    if n == 1:
        pts = axis[:, None]
    else:
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    cell = (2.0 * R / m) ** n
    inside = np.linalg.norm(pts, axis=1) <= R
    return pts[inside], cell


def exp_integrability_report(f: ScalarField, p: float, R: float,
                             spec: QuadratureSpec, levels: int = 4,
                             u2_cache: Optional[dict] = None) -> ExpIntegrabilityReport:
    """Evaluate the integral over B_R of exp(n p |u2|) on refining midpoint
    grids, where u2 is the log-potential of f, and classify the refinement
    trend.  The admissibility threshold is gamma_n / ||f||_1."""
    if p <= 0:
        raise ValueError("p must be positive")
    n = f.dim
    gc = geom_constants(n)
    mass, _ = truncated_integral(_abs_field(f), FullSpace(), spec)
    threshold = gc.gamma_n / mass if mass > 0 else math.inf
    admissible = p < threshold

    lp = LogPotential(density=f, dim=n, spec=spec)
    vals_per_level = []
    for lv in range(levels + 1):
        key = (n, R, lv)
        if u2_cache is not None and key in u2_cache:
            pts, cell, u2 = u2_cache[key]
        else:
            pts, cell = _midpoint_grid(n, R, lv)
            u2 = np.array([log_potential_eval(lp, pt)[0] for pt in pts])
            if u2_cache is not None:
                u2_cache[key] = (pts, cell, u2)
        vals_per_level.append(cell * fsum(np.exp(n * p * np.abs(u2))))

    ratios = tuple(vals_per_level[i + 1] / vals_per_level[i]
                   for i in range(len(vals_per_level) - 1))
    tail3 = ratios[-3:]
    if all(abs(r - 1.0) <= 0.05 for r in tail3):
        verdict = "converged"
    elif all(r >= 1.2 for r in tail3):
        verdict = "diverged"
    else:
        verdict = "inconclusive"

    jensen = _jensen_bound(f, p, R, mass, gc.gamma_n, spec)
    return ExpIntegrabilityReport(integral=vals_per_level[-1], jensen_bound=jensen,
                                  admissible=admissible, threshold=threshold,
                                  ratios=ratios, verdict=verdict,
                                  levels=tuple(vals_per_level))


def exp_integrability_bound(f: ScalarField, p: float, R: float,
                            spec: QuadratureSpec) -> tuple:
    rep = exp_integrability_report(f, p, R, spec)
    return rep.integral, rep.jensen_bound, rep.admissible


def _abs_field(f: ScalarField) -> ScalarField:
    return ScalarField(eval=lambda pts: np.abs(f(pts)), dim=f.dim, decay=f.decay,
                       radial_profile=(lambda r: np.abs(np.asarray(f.radial_profile(r), dtype=float)))
                       if f.is_radial else None,
                       radial_center=tuple(f.center) if f.is_radial else None,
                       support_radius=f.support_radius,
                       profile_breaks=f.profile_breaks)


def _jensen_bound(f: ScalarField, p: float, R: float, mass: float,
                  gamma_n: float, spec: QuadratureSpec) -> float:
    """Jensen-inequality overestimate of the exponential integral: push the
    exponential inside the density-weighted average; the inner x-integral of
    the kernel power |x-y|^(-q) is bounded in closed form."""
    n = f.dim
    if mass <= 0:
        return geom_constants(n).ball_volume * R**n
    q = n * p * mass / gamma_n
    if q >= n:
        return math.inf
    surf = sphere_surface_area(n)
    ball_vol = geom_constants(n).ball_volume * R**n

    def weight(pts):
        ay = np.linalg.norm(pts, axis=1)
        near = (1.0 + ay) ** q * surf * (2.0 * R) ** (n - q) / (n - q)
        far = ball_vol * ((R + ay + 1.0) / (1.0 + ay)) ** q
        return np.abs(f(pts)) * (near + far)

    w = ScalarField(eval=weight, dim=n, decay=f.decay,
                    support_radius=f.support_radius,
                    profile_breaks=f.profile_breaks)
    val, _ = truncated_integral(w, FullSpace(), spec)
    return val / mass
