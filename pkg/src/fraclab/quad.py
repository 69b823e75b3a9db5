"""Quadrature engines.

Everything here is deterministic: panels are processed in a fixed order and
reduced with compensated summation, so identical inputs give bitwise
identical results.  The building blocks are

* product rules on spheres (Gauss-Gegenbauer in the polar angles, uniform
  trapezoid in azimuth),
* adaptive 1-D panel integration with dyadic grading toward integrable
  singularities,
* a two-center radial reduction for integrals of g(|z|) h(|z - x|) dz,
* symmetrized principal-value integrals over dyadic shells,
* truncated full-space integrals with certified tail bounds, and
* seeded (counter-based) Monte Carlo for nested ball integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_gegenbauer

from .core import (
    Decay,
    QuadratureSpec,
    ScalarField,
    TailNotCertifiableError,
    fsum,
    sphere_surface_area,
)

# ---------------------------------------------------------------------------
# sphere rules


_SPHERE_CACHE: dict = {}


def effective_angular_order(n: int, order: int) -> int:
    """Per-level polar order; product rules in high dimension are throttled
    so node counts stay within desk scale."""
    if n >= 5:
        return max(6, order // 3)
    return order


def _polar_nodes(d: int, order: int):
    """Nodes/weights for the polar-angle weight (1-t^2)^((d-3)/2) in R^d."""
    alpha = (d - 2) / 2.0  # Gegenbauer alpha with weight (1-t^2)^(alpha-1/2)
    t, w = roots_gegenbauer(order, alpha)
    return np.asarray(t, dtype=float), np.asarray(w, dtype=float)


def sphere_rule(n: int, order: int):
    """Quadrature nodes on S^(n-1) in R^n with weights summing to |S^(n-1)|.

    The rule is antipodally symmetric, which makes odd angular moments
    vanish exactly.
    """
    key = (n, order)
    if key in _SPHERE_CACHE:
        return _SPHERE_CACHE[key]
    if n == 1:
        pts = np.array([[1.0], [-1.0]])
        wts = np.array([1.0, 1.0])
    elif n == 2:
        m = 2 * max(order, 2)
        phi = 2.0 * np.pi * np.arange(m) / m
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        wts = np.full(m, 2.0 * np.pi / m)
    else:
        t, wt = _polar_nodes(n, order)
        sub_order = order if n - 1 > 2 else order
        sub_pts, sub_wts = sphere_rule(n - 1, sub_order)
        s = np.sqrt(np.clip(1.0 - t**2, 0.0, None))
        pts = np.concatenate(
            [np.repeat(t, len(sub_pts))[:, None],
             (s[:, None, None] * sub_pts[None, :, :]).reshape(-1, n - 1)],
            axis=1)
        wts = (wt[:, None] * sub_wts[None, :]).ravel()
    # normalize away the residual of the polar-weight rule
    wts = wts * (sphere_surface_area(n) / fsum(wts))
    pts.setflags(write=False)
    wts.setflags(write=False)
    _SPHERE_CACHE[key] = (pts, wts)
    return pts, wts


# ---------------------------------------------------------------------------
# 1-D panel integration

_GAUSS_CACHE: dict = {}


def _gauss(order: int):
    if order not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = (x, w)
    return _GAUSS_CACHE[order]


def panel_nodes(edges: np.ndarray, order: int):
    """Gauss-Legendre nodes/weights on each panel [edges[i], edges[i+1]]."""
    x, w = _gauss(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes, weights


def integrate_panels(fn: Callable[[np.ndarray], np.ndarray], edges,
                     order: int = 12, tol: float = 0.0, max_splits: int = 200):
    """Integrate a vectorized 1-D function over a panel partition.

    Each panel carries a two-order error estimate; the worst panels are
    bisected until the summed estimate drops below ``tol`` or the split
    budget runs out.  Returns (value, err_est).
    """
    edges = np.asarray(sorted(set(float(e) for e in edges)), dtype=float)
    if len(edges) < 2:
        return 0.0, 0.0
    panels = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    def eval_panel(a, b):
        x_hi, w_hi = _gauss(order)
        x_lo, w_lo = _gauss(max(2, order // 2))
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        hi = half * fsum(w_hi * fn(mid + half * x_hi))
        lo = half * fsum(w_lo * fn(mid + half * x_lo))
        return hi, abs(hi - lo)

    results = {p: eval_panel(*p) for p in panels}
    splits = 0
    while tol > 0.0 and splits < max_splits:
        total_err = fsum([r[1] for r in results.values()])
        if total_err <= tol:
            break
        worst = max(results, key=lambda p: results[p][1])
        if results[worst][1] <= tol / max(len(results), 1):
            break
        a, b = worst
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        del results[worst]
        results[(a, m)] = eval_panel(a, m)
        results[(m, b)] = eval_panel(m, b)
        splits += 1
    ordered = sorted(results.keys())
    value = fsum([results[p][0] for p in ordered])
    err = fsum([results[p][1] for p in ordered])
    return value, err


def graded_edges_toward(a: float, b: float, target: float, levels: int):
    """Panel edges on [a, b] dyadically graded toward ``target`` (= a or b)."""
    length = b - a
    if length <= 0:
        return []
    out = [a, b]
    for j in range(1, levels + 1):
        step = length * 0.5**j
        out.append(target + step if target == a else target - step)
    return [e for e in out if a <= e <= b]


def geometric_edges(a: float, b: float, ratio: float = 2.0):
    """Geometric panel edges from a to b (a > 0)."""
    out = [a]
    x = a
    while x * ratio < b:
        x *= ratio
        out.append(x)
    out.append(b)
    return out


# ---------------------------------------------------------------------------
# radial kernels and the two-center reduction


@dataclass(frozen=True)
class RadialKernel:
    """A function of the radius with metadata for grading and tails.

    ``sing_power`` p declares |k(r)| <~ r^-p as r -> 0 (p = 0 for bounded
    kernels, and set ``log_sing`` for logarithmic blow-up).  ``decay``
    describes the behavior at infinity, ``support`` truncates hard, and
    ``breaks`` lists radii where k is not smooth.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    sing_power: float = 0.0
    log_sing: bool = False
    decay: Decay = field(default_factory=Decay.none)
    support: Optional[float] = None
    breaks: tuple = ()

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        vals = np.asarray(self.fn(r), dtype=float)
        if self.support is not None:
            vals = np.where(r <= self.support, vals, 0.0)
        return vals


def _pair_outer_edges(g: RadialKernel, h: RadialKernel, s: float, n: int,
                      spec: QuadratureSpec):
    """Outer radial panel edges for integral of g(rho) * (ring integral of h)."""
    deep = spec.max_subdivisions
    tiny = 2.0 ** (-deep)
    edges = set()
    hi_candidates = [2.0 * max(s, 1.0), spec.truncation_radius]
    if g.support is not None:
        hi_candidates = [g.support]
    hi = max(hi_candidates)
    scale = max(s, 1.0)
    # grade toward 0 when g is singular there (always safe to grade a little)
    lo = scale * tiny
    edges.update(geometric_edges(lo, min(scale, hi)))
    if min(scale, hi) < hi:
        edges.update(geometric_edges(min(scale, hi), hi, ratio=1.5))
    # grade toward rho = s where the inner integral can be (log-)singular
    if s > 0 and (h.sing_power > 0 or h.log_sing or h.breaks):
        for j in range(1, 44):
            step = s * 0.5**j
            if s - step > lo:
                edges.add(s - step)
            if s + step < hi:
                edges.add(s + step)
    for b in g.breaks:
        if lo < b < hi:
            edges.add(b)
    # h breaks show up at |rho - s| = b and rho + s = b
    for b in h.breaks:
        for e in (s - b, s + b, b - s):
            if lo < e < hi:
                edges.add(e)
    edges.add(lo)
    edges.add(hi)
    return np.asarray(sorted(edges)), lo, hi


def _ring_integral(h: RadialKernel, rho: np.ndarray, s: float, n: int,
                   panels: int, order: int) -> np.ndarray:
    """J(rho) = integral over S^(n-1) of h(|rho*w - s*e1|) dw for each rho.

    Uses the substitution u = |rho*w - s*e1|^2, under which the angular
    measure becomes an explicit algebraic weight; panels are log-spaced in
    u so power-law kernels are resolved to near machine accuracy.
    """
    return _ring_integral_u(lambda u: h(np.sqrt(u)), rho, s, n, panels, order,
                            breaks=h.breaks)


def _ring_integral_u(h_u, rho: np.ndarray, s: float, n: int,
                     panels: int, order: int, breaks=()) -> np.ndarray:
    """Same ring integral with the kernel given as a function of the squared
    chord distance u = |rho*w - s*e1|^2 (some ball kernels are naturally
    functions of u)."""
    rho = np.asarray(rho, dtype=float)
    if n == 1:
        return h_u((rho - s) ** 2) + h_u((rho + s) ** 2)
    if s == 0.0:
        return h_u(rho**2) * sphere_surface_area(n)
    out = np.empty_like(rho)
    x, w = _gauss(order)
    ex = (n - 3) / 2.0
    snm2 = sphere_surface_area(n - 1)
    for i, r in enumerate(rho):
        u_lo = (r - s) ** 2
        u_hi = (r + s) ** 2
        if u_hi <= 0.0:
            out[i] = h_u(np.array([s**2]))[0] * sphere_surface_area(n)
            continue
        u_lo = max(u_lo, u_hi * 1e-30)
        edges = np.geomspace(u_lo, u_hi, panels + 1)
        if breaks:
            extra = [b * b for b in breaks if u_lo < b * b < u_hi]
            if extra:
                edges = np.asarray(sorted(set(edges.tolist() + extra)))
        a, b = edges[:-1][:, None], edges[1:][:, None]
        u = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
        wu = 0.5 * (b - a) * w[None, :]
        if ex != 0.0:
            base = (u_hi - u) * np.clip(u - (r - s) ** 2, 0.0, None)
            # rounding can land a node exactly on the chord-interval edge;
            # its measure is zero, so drop it instead of dividing by zero
            weight = np.where(base > 0.0, base, 1.0) ** ex
            weight = np.where(base > 0.0, weight, 0.0)
        else:
            weight = 1.0
        vals = np.asarray(h_u(u.ravel()), dtype=float).reshape(u.shape)
        integ = vals * wu * weight
        # J = snm2 / (2 rho s)^(n-2) * integral  [one factor 1/(2 rho s) from dt,
        # (n-3) factors from the angular weight]
        out[i] = fsum(integ) * snm2 / (2.0 * r * s) ** (n - 2)
    return out


def radial_pair_integral(g: RadialKernel, h: RadialKernel, s: float, n: int,
                         spec: QuadratureSpec, certify: bool = True):
    """Integral over R^n of g(|z|) * h(|z - x|) dz with |x| = s.

    Handles integrable singularities of g at 0 and of h at its own center,
    plus declared breakpoints of either factor.  Returns (value, err_est);
    err_est combines a two-resolution quadrature estimate with a certified
    bound on the part of the tail that is never sampled.
    """
    s = float(s)
    edges, lo, hi = _pair_outer_edges(g, h, s, n, spec)

    def make_fn(panels: int, order: int):
        def fn(rho):
            ring = _ring_integral(h, rho, s, n, panels, order)
            return g(rho) * rho ** (n - 1) * ring
        return fn

    fine = make_fn(26, 10)
    coarse = make_fn(17, 7)
    tol = max(spec.abs_tol, 0.0)
    value, err_outer = integrate_panels(fine, edges, order=12, tol=tol * 0.25,
                                        max_splits=4 * spec.max_subdivisions)
    check, _ = integrate_panels(coarse, edges, order=8, tol=0.0)
    err = err_outer + abs(value - check)

    # tail beyond hi: extend with geometric shells until contributions settle
    tail_val = 0.0
    tail_bound = 0.0
    if g.support is None:
        hints_ok = False
        pg = g.decay.effective_power
        ph = h.decay.effective_power
        if pg is not None and ph is not None and pg + ph > n:
            hints_ok = True
        a = hi
        last = math.inf
        growing = 0
        for _ in range(64):
            b = a * 2.0
            piece, _ = integrate_panels(fine, geometric_edges(a, b, 1.4), order=12)
            tail_val += piece
            growing = growing + 1 if abs(piece) >= abs(last) else 0
            if certify and not hints_ok and growing >= 3:
                raise TailNotCertifiableError(
                    "pair-integral tail shells keep growing and the decay "
                    "hints do not certify integrability")
            if abs(piece) < 0.05 * max(tol, 1e-300) and abs(piece) <= abs(last):
                # geometric extrapolation of the remaining shells
                q = abs(piece) / abs(last) if last not in (0.0, math.inf) else 0.5
                q = min(q, 0.9)
                tail_bound = 4.0 * abs(piece) * q / (1.0 - q)
                break
            last = piece
            a = b
        else:
            if certify:
                pg = g.decay.effective_power
                ph = h.decay.effective_power
                ok = (pg is not None and ph is not None and pg + ph > n)
                if not ok:
                    raise TailNotCertifiableError(
                        "radial pair integral tail did not settle and decay hints "
                        "do not certify integrability")
            tail_bound = abs(last)
    return value + tail_val, err + tail_bound


# ---------------------------------------------------------------------------
# principal-value integrals


@dataclass(frozen=True)
class PVIntegrand:
    """Symmetrized PV integrand about ``center``: the map
    y -> f(x+y) + f(x-y) - 2 f(x), together with the kernel exponent n+2s."""

    center: np.ndarray
    second_difference: Callable[[np.ndarray], np.ndarray]
    singular_exponent: float
    dim: int


@dataclass(frozen=True)
class TailBound:
    """Certified handling of the region beyond the truncation radius.

    ``value_correction`` is an analytically computed part of the omitted
    tail (added to the value); ``bound`` certifies what is left.
    """

    radius: float
    bound: float
    method: str = "PowerDecayFormula"  # or "UserSupplied" / "None"
    value_correction: float = 0.0


def second_difference_of(f: ScalarField, x: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    x = np.asarray(x, dtype=float)
    fx = float(f(x))

    def sd(y: np.ndarray) -> np.ndarray:
        return f(x + y) + f(x - y) - 2.0 * fx

    return sd


def pv_integral(integrand: PVIntegrand, spec: QuadratureSpec,
                refine_radii: Sequence[float] = (),
                tail: Optional[TailBound] = None,
                certified: bool = True):
    """Integral over B_R of sd(y) / |y|^(n+2s) dy plus the supplied tail.

    The removable singularity at the origin is handled by dyadic shells;
    extra dyadic grading is inserted around each radius in ``refine_radii``
    (e.g. where the underlying field peaks).  Returns (value, err_est).
    """
    n = integrand.dim
    R = spec.truncation_radius if tail is None else tail.radius
    expo = integrand.singular_exponent
    sd = integrand.second_difference

    edges = set()
    r_core = R * 2.0 ** (-spec.max_subdivisions)
    edges.update(R * 2.0 ** (-np.arange(spec.max_subdivisions + 1, dtype=float)))
    for r0 in refine_radii:
        if not (r_core < r0 < R):
            continue
        for j in range(1, 30):
            step = r0 * 0.5**j
            if r0 - step > r_core:
                edges.add(r0 - step)
            if r0 + step < R:
                edges.add(r0 + step)
        edges.add(r0)
    edges = np.asarray(sorted(edges))

    pts, wts = sphere_rule(n, effective_angular_order(n, spec.angular_order))

    def radial_fn(rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        y = rho[:, None, None] * pts[None, :, :]
        vals = sd(y.reshape(-1, n)).reshape(len(rho), -1)
        ang = vals @ wts
        return ang * rho ** (n - 1 - expo)

    tol = max(spec.abs_tol, spec.rel_tol * 0.0)
    value, err = integrate_panels(radial_fn, edges, order=12, tol=tol,
                                  max_splits=6 * spec.max_subdivisions)

    # omitted core: |sd| <= C2 rho^2 near 0, estimated on the innermost shell
    probe = np.array([r_core * 1.5])
    y = probe[:, None, None] * pts[None, :, :]
    sd_probe = np.max(np.abs(sd(y.reshape(-1, n)))) if len(pts) else 0.0
    c2 = sd_probe / probe[0] ** 2
    core_exp = n + 2.0 - expo  # rho^(n-1+2-expo) integrated
    if core_exp > 0:
        err += c2 * sphere_surface_area(n) * r_core**core_exp / core_exp
    else:
        err += math.inf if c2 > 0 else 0.0

    if tail is not None:
        value += tail.value_correction
        if tail.method == "None" and certified:
            raise TailNotCertifiableError("PV tail beyond truncation radius is not certified")
        err += tail.bound
    return value, err


# ---------------------------------------------------------------------------
# domains and truncated integrals


@dataclass(frozen=True)
class FullSpace:
    pass


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Annulus:
    center: tuple
    r_in: float
    r_out: float


@dataclass(frozen=True)
class SphereSurface:
    center: tuple
    radius: float


def _radial_shells_value(f: ScalarField, center: np.ndarray, r_in: float,
                         r_out: float, spec: QuadratureSpec):
    """Integral of f over the annulus r_in <= |x - center| <= r_out."""
    n = f.dim
    aligned = f.is_radial and np.allclose(center, f.center)
    edges = set(geometric_edges(max(r_in, r_out * 2.0 ** (-spec.max_subdivisions)),
                                r_out, ratio=1.6))
    if r_in > 0:
        edges.add(r_in)
    for b in f.profile_breaks:
        if r_in < b < r_out:
            edges.add(b)
    if f.support_radius is not None and r_in < f.support_radius < r_out:
        edges.add(f.support_radius)
    edges = np.asarray(sorted(edges))

    if aligned:
        prof = f.radial_profile

        def radial_fn(rho):
            rho = np.asarray(rho, dtype=float)
            return np.asarray(prof(rho), dtype=float) * rho ** (n - 1) * sphere_surface_area(n)
    else:
        pts, wts = sphere_rule(n, effective_angular_order(n, spec.angular_order))

        def radial_fn(rho):
            rho = np.asarray(rho, dtype=float)
            y = center[None, None, :] + rho[:, None, None] * pts[None, :, :]
            vals = f(y.reshape(-1, n)).reshape(len(rho), -1)
            return (vals @ wts) * rho ** (n - 1)

    return integrate_panels(radial_fn, edges, order=12, tol=spec.abs_tol,
                            max_splits=4 * spec.max_subdivisions)


def truncated_integral(f: ScalarField, domain, spec: QuadratureSpec,
                       certified: bool = True):
    """Deterministic integral of f over the given domain: (value, err_est)."""
    n = f.dim
    if isinstance(domain, SphereSurface):
        center = np.asarray(domain.center, dtype=float)
        R = domain.radius
        q = effective_angular_order(n, spec.angular_order)
        pts, wts = sphere_rule(n, q)
        pts2, wts2 = sphere_rule(n, q + 4)
        v1 = fsum(f(center[None, :] + R * pts) * wts) * R ** (n - 1)
        v2 = fsum(f(center[None, :] + R * pts2) * wts2) * R ** (n - 1)
        return v2, abs(v1 - v2)
    if isinstance(domain, Ball):
        center = np.asarray(domain.center, dtype=float)
        return _radial_shells_value(f, center, 0.0, domain.radius, spec)
    if isinstance(domain, Annulus):
        center = np.asarray(domain.center, dtype=float)
        return _radial_shells_value(f, center, domain.r_in, domain.r_out, spec)
    if not isinstance(domain, FullSpace):
        raise TypeError(f"unsupported domain {domain!r}")

    center = f.center if f.is_radial else np.zeros(n)
    R = spec.truncation_radius
    if f.support_radius is not None:
        val, err = _radial_shells_value(f, center, 0.0, f.support_radius, spec)
        return val, err
    value, err = _radial_shells_value(f, center, 0.0, R, spec)

    power = f.decay.integrable_power
    if power is None or power <= n:
        if certified:
            raise TailNotCertifiableError(
                f"decay hint {f.decay} cannot certify a full-space integral in dim {n}")
        power = None

    a = R
    last = math.inf
    tail_bound = 0.0
    for _ in range(64):
        b = 2.0 * a
        piece, piece_err = _radial_shells_value(f, center, a, b, spec)
        value += piece
        err += piece_err
        settled = abs(piece) < 0.1 * max(spec.abs_tol, abs(value) * spec.rel_tol)
        if settled and abs(piece) <= abs(last):
            break
        last = piece
        a = b
    R_far = 2.0 * a

    if power is not None and power is not math.inf:
        # certified remainder from the declared power decay, with the constant
        # estimated on the last sampled sphere and a safety factor of 4
        pts, _ = sphere_rule(n, effective_angular_order(n, spec.angular_order))
        samp = np.max(np.abs(f(center[None, :] + R_far * pts)))
        c_est = 4.0 * samp * (1.0 + R_far) ** power
        rem = c_est * sphere_surface_area(n) * (1.0 + R_far) ** (n - power) / (power - n)
        tail_bound = rem
    elif power is math.inf:
        pts, _ = sphere_rule(n, effective_angular_order(n, spec.angular_order))
        samp = np.max(np.abs(f(center[None, :] + R_far * pts)))
        tail_bound = 4.0 * samp * sphere_surface_area(n) * R_far ** n
    return value, err + tail_bound


# ---------------------------------------------------------------------------
# seeded nested Monte Carlo


def sample_ball(rng: np.random.Generator, m: int, center: np.ndarray,
                radius: float) -> np.ndarray:
    n = len(center)
    g = rng.standard_normal((m, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    u = rng.random(m) ** (1.0 / n)
    return center[None, :] + radius * u[:, None] * g / norms


def nested_mc_integral(kernel_chain: Sequence[Callable[[np.ndarray, np.ndarray], np.ndarray]],
                       endpoints, domain: Ball, samples: int, seed: int):
    """Monte Carlo value of the chained ball integral

        int ... int k1(x, z1) k2(z1, z2) ... km(z_{m-1}, y) dz1 ... dz_{m-1}

    over the given ball.  A chain of length 1 is the pointwise kernel value.
    Counter-based (Philox) seeding makes the stream reproducible and
    splittable.  Returns (value, stderr).
    """
    if not kernel_chain:
        raise ValueError("kernel_chain must contain at least one kernel")
    x = np.asarray(endpoints[0], dtype=float)
    y = np.asarray(endpoints[1], dtype=float)
    m = len(kernel_chain)
    if m == 1:
        return float(kernel_chain[0](x[None, :], y[None, :])[0]), 0.0
    if samples <= 0:
        raise ValueError("samples must be positive for a nontrivial chain")

    center = np.asarray(domain.center, dtype=float)
    n = len(center)
    vol = sphere_surface_area(n) / n * domain.radius**n
    rng = np.random.Generator(np.random.Philox(seed))

    zs = [sample_ball(rng, samples, center, domain.radius) for _ in range(m - 1)]
    stations = [np.broadcast_to(x, (samples, n))] + zs + [np.broadcast_to(y, (samples, n))]

    # resample any exactly coincident consecutive points (measure zero)
    resampled = 0
    for i in range(1, m):
        for neighbor in (stations[i - 1], stations[i + 1]):
            for _ in range(16):
                d = np.linalg.norm(stations[i] - neighbor, axis=1)
                bad = d < 1e-13
                if not bad.any():
                    break
                resampled += int(bad.sum())
                fresh = sample_ball(rng, int(bad.sum()), center, domain.radius)
                zi = np.array(stations[i])
                zi[bad] = fresh
                stations[i] = zi

    prod = np.ones(samples)
    for i, k in enumerate(kernel_chain):
        prod = prod * np.asarray(k(stations[i], stations[i + 1]), dtype=float)
    vals = prod * vol ** (m - 1)
    value = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return value, stderr
