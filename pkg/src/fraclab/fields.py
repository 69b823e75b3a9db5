"""Built-in scalar fields with analytic metadata.

Each constructor returns a ScalarField whose optional closures (radial
profile, iterated Laplacians, support radius, decay hints) are filled in
analytically, so the operators can take exact fast paths.  Iterated
Laplacians of radial profiles are derived symbolically once and cached.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .core import Decay, InvalidDimensionError, ScalarField, Smoothness, decay_after_lap

_R = sp.Symbol("r", positive=True)


def _lambdify_radial(expr) -> Callable[[np.ndarray], np.ndarray]:
    fn = sp.lambdify(_R, expr, modules="numpy")

    def profile(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        # clip away r = 0 where simplified expressions may be 0/0
        rr = np.maximum(r, 1e-9)
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(fn(rr), dtype=float), rr.shape).copy()

    return profile


def _masked_profile(profile, support: float):
    def prof(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = r < support
        if inside.any():
            out[inside] = profile(r[inside])
        return out

    return prof


def _radial_to_eval(profile, center: np.ndarray):
    def ev(pts: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(pts - center[None, :], axis=1)
        return profile(d)

    return ev


@lru_cache(maxsize=None)
def _neg_lap_exprs(expr_str: str, n: int, depth: int):
    """Symbolic iterated negative Laplacians of a radial profile."""
    expr = sp.sympify(expr_str, locals={"r": _R})
    out = []
    e = expr
    for _ in range(depth):
        e = -(sp.diff(e, _R, 2) + (n - 1) / _R * sp.diff(e, _R))
        e = sp.simplify(sp.together(e))
        out.append(e)
    return tuple(out)


def radial_field(expr_str: str, n: int, *, center=None, decay: Decay = None,
                 smoothness: Smoothness = Smoothness.SMOOTH, lap_depth: int = 0,
                 support_radius: Optional[float] = None,
                 profile_breaks: tuple = ()) -> ScalarField:
    """A radial field from a sympy expression in r, with ``lap_depth``
    analytic iterated negative Laplacians attached."""
    if center is None:
        center = (0.0,) * n
    c = np.asarray(center, dtype=float)
    decay = decay or Decay.none()
    chain = _neg_lap_exprs(expr_str, n, lap_depth)

    def build(expr, sub_chain, dec):
        profile = _lambdify_radial(expr)
        if support_radius is not None:
            profile = _masked_profile(profile, support_radius)
        nl = build(sub_chain[0], sub_chain[1:], decay_after_lap(dec)) if sub_chain else None
        return ScalarField(
            eval=_radial_to_eval(profile, c), dim=n, smoothness=smoothness,
            decay=dec, radial_profile=profile, radial_center=tuple(c),
            neg_lap=nl, support_radius=support_radius,
            profile_breaks=profile_breaks)

    return build(sp.sympify(expr_str, locals={"r": _R}), chain, decay)


# ---------------------------------------------------------------------------
# concrete families


def gaussian(n: int, lap_depth: int = 2) -> ScalarField:
    return radial_field("exp(-r**2)", n, decay=Decay.schwartz(), lap_depth=lap_depth)


def bump(n: int, center=None, radius: float = 1.0, mass: Optional[float] = None,
         lap_depth: int = 0) -> ScalarField:
    """Smooth bump supported on the ball of the given radius.

    With ``mass`` set, the bump is scaled so its full-space integral equals
    ``mass`` exactly (the normalization integral is precomputed to high
    accuracy per dimension).
    """
    if center is None:
        center = (0.0,) * n
    amp = 1.0
    if mass is not None:
        unit = _unit_bump_mass(n) * radius**n
        amp = mass / unit
    expr = f"{amp!r}*exp(-1/(1 - (r/{radius!r})**2))"
    f = radial_field(expr, n, center=center, decay=Decay.schwartz(),
                     lap_depth=lap_depth, support_radius=radius,
                     profile_breaks=(radius,))
    return f


@lru_cache(maxsize=None)
def _unit_bump_mass(n: int) -> float:
    """Integral over R^n of exp(-1/(1-|x|^2)) chi_{|x|<1}."""
    import mpmath

    mpmath.mp.dps = 30
    surf = 2 * mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2)
    val = mpmath.quad(lambda r: surf * r ** (n - 1) * mpmath.e ** (-1 / (1 - r**2)),
                      [0, 1])
    return float(val)


def c2_bump(n: int) -> ScalarField:
    """(1 - |x|^2)^2 on the unit ball, extended by zero: C^{1,1} across the
    boundary, so its fractional-Laplacian decay saturates at order 2."""
    return radial_field("(1 - r**2)**2", n, decay=Decay.schwartz(),
                        smoothness=Smoothness.C2, support_radius=1.0,
                        profile_breaks=(1.0,))


def hermite_moment_field(k: int) -> ScalarField:
    """H_{k+1}(x) exp(-x^2) on R: all moments of order <= k vanish."""
    h = sp.hermite(k + 1, _R)
    expr = str(h * sp.exp(-_R**2))
    poly = sp.lambdify(_R, sp.hermite(k + 1, sp.Symbol("r")), modules="numpy")

    def ev(pts: np.ndarray) -> np.ndarray:
        x = pts[:, 0]
        return poly(x) * np.exp(-x**2)

    return ScalarField(eval=ev, dim=1, smoothness=Smoothness.SMOOTH,
                       decay=Decay.schwartz())


def spherical_solution(n: int, lam: float = 1.0, center=None) -> ScalarField:
    """u(x) = log(2 lam / (1 + lam^2 |x - x0|^2)), with analytic iterated
    Laplacians through order (n-1)/2."""
    if n % 2 == 0 or n < 1:
        raise InvalidDimensionError("spherical solutions are built for odd n")
    depth = (n - 1) // 2
    expr = f"log(2*{lam!r}/(1 + {lam!r}**2*r**2))"
    return radial_field(expr, n, center=center, decay=Decay.log_growth(),
                        lap_depth=max(depth, 1))


def spherical_density(n: int, lam: float = 1.0, center=None) -> ScalarField:
    """(n-1)! e^{n u} for the spherical solution: decays like |x|^{-2n}."""
    fact = math.factorial(n - 1)
    expr = f"{fact}*(2*{lam!r}/(1 + {lam!r}**2*r**2))**{n}"
    return radial_field(expr, n, center=center, decay=Decay.power(2 * n))


def polynomial_field(coeffs: dict, n: int) -> ScalarField:
    """Radial polynomial sum c_k r^k from {power: coeff} (even powers give
    smooth fields)."""
    expr = " + ".join(f"{c!r}*r**{k}" for k, c in sorted(coeffs.items()))
    deg = max(coeffs) if coeffs else 0
    return radial_field(expr, n, decay=Decay.poly_growth(deg),
                        lap_depth=(n - 1) // 2 if n % 2 else 0)


def constant_field(value: float, n: int) -> ScalarField:
    return ScalarField(eval=lambda p: np.full(p.shape[0], float(value)), dim=n,
                       decay=Decay.poly_growth(0.0),
                       radial_profile=lambda r: np.full_like(np.asarray(r, dtype=float), float(value)),
                       radial_center=(0.0,) * n)


def zero_field(n: int) -> ScalarField:
    f = constant_field(0.0, n)
    return ScalarField(eval=f.eval, dim=n, decay=Decay.schwartz(),
                       radial_profile=f.radial_profile, radial_center=(0.0,) * n,
                       support_radius=0.0)


# ---------------------------------------------------------------------------
# combinators


def field_sum(*fields: ScalarField) -> ScalarField:
    n = fields[0].dim
    if any(f.dim != n for f in fields):
        raise InvalidDimensionError("summands must share a dimension")

    def ev(pts):
        acc = np.zeros(pts.shape[0])
        for f in fields:
            acc = acc + f(pts)
        return acc

    radial = all(f.is_radial for f in fields) and all(
        np.allclose(f.center, fields[0].center) for f in fields)
    prof = None
    if radial:
        def prof(r):
            r = np.asarray(r, dtype=float)
            acc = np.zeros_like(r)
            for f in fields:
                acc = acc + np.asarray(f.radial_profile(r), dtype=float)
            return acc
    neg_lap = None
    if all(f.neg_lap is not None for f in fields):
        neg_lap = field_sum(*[f.neg_lap for f in fields])
    breaks = tuple(sorted({b for f in fields for b in f.profile_breaks}))
    supports = [f.support_radius for f in fields]
    support = max(supports) if all(s is not None for s in supports) else None
    decay = _combine_decay([f.decay for f in fields])
    smooth = min((f.smoothness for f in fields), key=lambda s: s.value)
    return ScalarField(eval=ev, dim=n, smoothness=smooth, decay=decay,
                       radial_profile=prof,
                       radial_center=tuple(fields[0].center) if radial else None,
                       neg_lap=neg_lap, support_radius=support,
                       profile_breaks=breaks)


def field_scale(f: ScalarField, a: float) -> ScalarField:
    a = float(a)

    def ev(pts):
        return a * f(pts)

    prof = (lambda r: a * np.asarray(f.radial_profile(r), dtype=float)) if f.is_radial else None
    nl = field_scale(f.neg_lap, a) if f.neg_lap is not None else None
    return ScalarField(eval=ev, dim=f.dim, smoothness=f.smoothness, decay=f.decay,
                       radial_profile=prof,
                       radial_center=tuple(f.center) if f.is_radial else None,
                       neg_lap=nl, support_radius=f.support_radius,
                       profile_breaks=f.profile_breaks)


def _combine_decay(decays: Sequence[Decay]) -> Decay:
    kinds = {d.kind for d in decays}
    if kinds <= {"schwartz"}:
        return Decay.schwartz()
    if kinds <= {"schwartz", "power"}:
        return Decay.power(min(d.rate for d in decays if d.kind == "power"))
    if "poly_growth" in kinds:
        return Decay.poly_growth(max((d.rate for d in decays if d.kind == "poly_growth"),
                                     default=0.0))
    if "log_growth" in kinds:
        return Decay.log_growth()
    return Decay.none()


# ---------------------------------------------------------------------------
# tabulated radial fields


def radial_spline_field(radii: np.ndarray, values: np.ndarray, n: int, *,
                        decay: Decay = None,
                        far_model: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                        lap_depth: int = 0,
                        profile_breaks: tuple = (),
                        support_radius: Optional[float] = None) -> ScalarField:
    """A radial field interpolated from profile samples.

    Beyond the last sample the ``far_model`` (if given) takes over; this is
    how tabulated potentials keep their exact asymptotics.  ``lap_depth``
    Laplacians are taken from spline derivatives, so keep the sample grid
    fine when you need them.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    spline = CubicSpline(radii, values)
    r_max = radii[-1]
    decay = decay or Decay.none()

    def profile(r):
        r = np.asarray(r, dtype=float)
        out = spline(np.clip(r, radii[0], r_max))
        if far_model is not None:
            far = r > r_max
            if np.any(far):
                out = np.where(far, 0.0, out)
                out[far] = far_model(r[far])
        if support_radius is not None:
            out = np.where(r > support_radius, 0.0, out)
        return out

    nl = None
    if lap_depth > 0:
        d1 = spline.derivative(1)
        d2 = spline.derivative(2)

        def lap_values(r):
            return -(d2(r) + (n - 1) / r * d1(r))

        inner = radii[1:-1]
        nl = radial_spline_field(inner, lap_values(inner), n, decay=Decay.none(),
                                 lap_depth=lap_depth - 1,
                                 profile_breaks=profile_breaks,
                                 support_radius=support_radius)
    center = np.zeros(n)
    return ScalarField(eval=_radial_to_eval(profile, center), dim=n,
                       smoothness=Smoothness.C2, decay=decay,
                       radial_profile=profile, radial_center=tuple(center),
                       neg_lap=nl, support_radius=support_radius,
                       profile_breaks=tuple(sorted(set(profile_breaks) | {r_max})))
