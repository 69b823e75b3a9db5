"""Shared domain types: points, operator orders, scalar fields, polynomials,
quadrature configuration and the dimension-dependent geometric constants."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

SUPPORTED_DIMS = (1, 3, 5)


class InvalidDimensionError(ValueError):
    """Raised for dimensions outside the supported odd range."""


class SingularFitError(ValueError):
    """Raised when a least-squares design matrix is rank deficient."""


class TailNotCertifiableError(RuntimeError):
    """Raised when a full-space integral cannot bound its truncation tail."""


class BudgetExhaustedError(RuntimeError):
    """Raised when adaptive subdivision hits its budget before the tolerance."""


def as_coords(x, dim: int) -> np.ndarray:
    """Coerce a Point / sequence / array to a float vector of length ``dim``."""
    if isinstance(x, Point):
        if x.dim != dim:
            raise InvalidDimensionError(f"point has dim {x.dim}, expected {dim}")
        return np.asarray(x.coords, dtype=float)
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (dim,):
        raise InvalidDimensionError(f"expected coordinate vector of length {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]
    dim: int = 0

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.dim == 0:
            object.__setattr__(self, "dim", len(coords))
        if self.dim < 1 or self.dim != len(coords):
            raise InvalidDimensionError("dim must be >= 1 and match len(coords)")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))


@dataclass(frozen=True)
class FracOrder:
    """Operator order s = k + sigma with integer part k and sigma in [0, 1)."""

    integer_part: int
    frac_part: float

    def __post_init__(self):
        if self.integer_part < 0:
            raise ValueError("integer_part must be nonnegative")
        if not 0.0 <= self.frac_part < 1.0:
            raise ValueError("frac_part must lie in [0, 1)")

    @property
    def total(self) -> float:
        return self.integer_part + self.frac_part

    @classmethod
    def from_total(cls, s: float) -> "FracOrder":
        k = int(math.floor(s))
        sigma = s - k
        if abs(sigma - 1.0) < 1e-15:  # guard against float roundup
            k, sigma = k + 1, 0.0
        return cls(k, sigma)

    @classmethod
    def half_dim(cls, n: int) -> "FracOrder":
        """The order n/2 of the main operator, split as ((n-1)/2, 1/2) for odd n."""
        if n % 2 == 0:
            raise InvalidDimensionError("half_dim order is for odd n")
        return cls((n - 1) // 2, 0.5)


class Smoothness(Enum):
    C0 = 0
    C2 = 2
    SMOOTH = 99

    def at_least(self, other: "Smoothness") -> bool:
        return self.value >= other.value


@dataclass(frozen=True)
class Decay:
    """Declared behavior of |f| at infinity, used only for tail certification.

    kind is one of "schwartz", "power", "log_growth", "poly_growth", "none";
    rate is the power-decay exponent r (|f| <= C (1+|x|)^-r) or the growth
    degree for poly_growth.
    """

    kind: str
    rate: float = 0.0

    @classmethod
    def schwartz(cls):
        return cls("schwartz")

    @classmethod
    def power(cls, rate: float):
        return cls("power", float(rate))

    @classmethod
    def log_growth(cls):
        return cls("log_growth")

    @classmethod
    def poly_growth(cls, degree: float):
        return cls("poly_growth", float(degree))

    @classmethod
    def none(cls):
        return cls("none")

    @property
    def integrable_power(self) -> Optional[float]:
        """Effective power-decay exponent, or None when not certifiable."""
        if self.kind == "schwartz":
            return math.inf
        if self.kind == "power":
            return self.rate
        return None

    @property
    def effective_power(self) -> Optional[float]:
        """Power exponent usable in strict-inequality tail tests: log growth
        counts as 0 (it is below every positive power), polynomial growth as
        minus its degree."""
        if self.kind == "log_growth":
            return 0.0
        if self.kind == "poly_growth":
            return -self.rate
        return self.integrable_power


def decay_after_lap(decay: Decay) -> Decay:
    """Decay hint for the Laplacian of a field with the given hint (valid
    for the rational/logarithmic radial profiles used here)."""
    if decay.kind == "schwartz":
        return Decay.schwartz()
    if decay.kind == "power":
        return Decay.power(decay.rate + 2.0)
    if decay.kind == "log_growth":
        return Decay.power(2.0)
    if decay.kind == "poly_growth":
        return Decay.poly_growth(max(decay.rate - 2.0, 0.0))
    return Decay.none()


@dataclass(frozen=True)
class ScalarField:
    """An evaluable function on R^n.

    ``eval`` must be vectorized: it maps an (m, n) array of points to an
    (m,) array of values, deterministically.  The optional closures (radial
    profile, analytic Laplacians, partial derivatives) let operators pick
    exact fast paths instead of finite differences.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    dim: int
    smoothness: Smoothness = Smoothness.SMOOTH
    decay: Decay = field(default_factory=Decay.none)
    radial_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    radial_center: Optional[tuple[float, ...]] = None
    neg_lap: Optional["ScalarField"] = None
    partials: Optional[tuple["ScalarField", ...]] = None
    support_radius: Optional[float] = None  # field vanishes outside this ball (centered at radial_center or 0)
    profile_breaks: tuple[float, ...] = ()  # radii where the radial profile is not smooth

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        if squeeze:
            pts = pts[None, :]
        vals = np.asarray(self.eval(pts), dtype=float)
        return vals[0] if squeeze else vals

    def at(self, x) -> float:
        return float(self(as_coords(x, self.dim)))

    @property
    def is_radial(self) -> bool:
        return self.radial_profile is not None

    @property
    def center(self) -> np.ndarray:
        if self.radial_center is not None:
            return np.asarray(self.radial_center, dtype=float)
        return np.zeros(self.dim)

    def with_decay(self, decay: Decay) -> "ScalarField":
        return replace(self, decay=decay)


def multi_indices(dim: int, max_degree: int) -> list[tuple[int, ...]]:
    """All multi-indices with |alpha| <= max_degree, in graded lexicographic order."""
    out: list[tuple[int, ...]] = []
    for total in range(max_degree + 1):
        level: list[tuple[int, ...]] = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for head in range(remaining, -1, -1):
                rec(prefix + (head,), remaining - head, slots - 1)

        rec((), total, dim)
        out.extend(sorted(level, reverse=True))
    return out


@dataclass(frozen=True)
class Polynomial:
    """A polynomial on R^n stored as {multi-index: coefficient}."""

    dim: int
    coeffs: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        cleaned = {tuple(int(i) for i in a): float(c) for a, c in self.coeffs.items() if c != 0.0}
        for a in cleaned:
            if len(a) != self.dim or any(i < 0 for i in a):
                raise ValueError(f"bad multi-index {a} for dim {self.dim}")
        object.__setattr__(self, "coeffs", cleaned)

    def degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(a) for a in self.coeffs)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        squeeze = pts.ndim == 1
        if squeeze:
            pts = pts[None, :]
        vals = np.zeros(pts.shape[0])
        for alpha, c in self.coeffs.items():
            term = np.full(pts.shape[0], c)
            for i, p in enumerate(alpha):
                if p:
                    term = term * pts[:, i] ** p
            vals += term
        return vals[0] if squeeze else vals

    def coefficient(self, alpha: Sequence[int]) -> float:
        return self.coeffs.get(tuple(int(i) for i in alpha), 0.0)

    def to_json(self) -> str:
        """Canonical JSON: graded-lex sorted multi-indices, 17 significant digits."""
        order = multi_indices(self.dim, self.degree())
        items = [["".join(str(i) for i in a) if self.dim > 1 else str(a[0]), f"{self.coeffs[a]:.17g}"]
                 for a in order if a in self.coeffs]
        return json.dumps({"dim": self.dim, "coeffs": items}, separators=(",", ":"))


@dataclass(frozen=True)
class QuadratureSpec:
    """Everything the analysis leaves implicit in 'integrate': truncation,
    tolerances, subdivision budgets, angular order and the Monte Carlo seed.

    Identical spec + identical inputs give bitwise-identical results: all
    reductions happen in a fixed order via compensated summation.
    """

    truncation_radius: float = 64.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 48
    angular_order: int = 24
    mc_samples: int = 20000
    seed: int = 20230515

    def __post_init__(self):
        if self.truncation_radius <= 0 or self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("truncation_radius, rel_tol, abs_tol must be positive")
        if self.max_subdivisions < 1 or self.angular_order < 1:
            raise ValueError("max_subdivisions and angular_order must be positive")
        if self.mc_samples < 0 or self.seed < 0 or self.seed >= 2**64:
            raise ValueError("mc_samples must be >= 0 and seed a 64-bit unsigned integer")

    @classmethod
    def from_mapping(cls, m: Mapping) -> "QuadratureSpec":
        fields = ("truncation_radius", "rel_tol", "abs_tol", "max_subdivisions",
                  "angular_order", "mc_samples", "seed")
        unknown = set(m) - set(fields)
        if unknown:
            raise ValueError(f"unknown quadrature settings: {sorted(unknown)}")
        return cls(**{k: m[k] for k in fields if k in m})

    def to_mapping(self) -> dict:
        return {
            "truncation_radius": self.truncation_radius,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_subdivisions": self.max_subdivisions,
            "angular_order": self.angular_order,
            "mc_samples": self.mc_samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GeomConstants:
    dim: int
    sphere_area: float  # |S^n|, area of the unit n-sphere in R^(n+1)
    ball_volume: float  # |B_1| in R^n
    gamma_n: float      # (n-1)!/2 * |S^n|

    def to_json(self) -> str:
        return json.dumps(
            {"dim": self.dim, "sphere_area": f"{self.sphere_area:.17g}",
             "ball_volume": f"{self.ball_volume:.17g}", "gamma_n": f"{self.gamma_n:.17g}"},
            separators=(",", ":"), sort_keys=True)


def sphere_surface_area(d: int) -> float:
    """Surface area |S^(d-1)| of the unit sphere in R^d."""
    if d < 1:
        raise InvalidDimensionError("ambient dimension must be >= 1")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def geom_constants(n: int) -> GeomConstants:
    if n < 1:
        raise InvalidDimensionError("dimension must be a positive integer")
    sphere_area = sphere_surface_area(n + 1)           # |S^n| lives in R^(n+1)
    ball_volume = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
    gamma_n = math.factorial(n - 1) / 2.0 * sphere_area
    return GeomConstants(dim=n, sphere_area=sphere_area, ball_volume=ball_volume, gamma_n=gamma_n)


@dataclass(frozen=True)
class PolyFit:
    polynomial: Polynomial
    max_residual: float


def poly_fit(samples: Sequence[tuple], max_degree: int) -> PolyFit:
    """Least-squares polynomial of degree <= max_degree through point samples.

    samples: iterable of (point, value) pairs; points may be Point objects,
    sequences or arrays.  Raises SingularFitError on degenerate geometry.
    """
    if not samples:
        raise ValueError("need at least one sample")
    first = samples[0][0]
    dim = first.dim if isinstance(first, Point) else len(np.atleast_1d(first))
    pts = np.array([as_coords(p, dim) for p, _ in samples])
    vals = np.array([float(v) for _, v in samples])
    alphas = multi_indices(dim, max_degree)
    if len(samples) < len(alphas):
        raise ValueError(f"need >= {len(alphas)} samples for degree {max_degree} in dim {dim}")
    design = np.empty((len(samples), len(alphas)))
    for j, alpha in enumerate(alphas):
        col = np.ones(len(samples))
        for i, p in enumerate(alpha):
            if p:
                col = col * pts[:, i] ** p
        design[:, j] = col
    # column scaling keeps the rank test meaningful across wildly mixed scales
    scale = np.linalg.norm(design, axis=0)
    scale[scale == 0.0] = 1.0
    coeffs_scaled, _, rank, _ = np.linalg.lstsq(design / scale, vals, rcond=None)
    if rank < len(alphas):
        raise SingularFitError("sample geometry is degenerate for the requested degree")
    coeffs = coeffs_scaled / scale
    poly = Polynomial(dim, dict(zip(alphas, coeffs)))
    residual = float(np.max(np.abs(design @ coeffs - vals))) if len(vals) else 0.0
    return PolyFit(polynomial=poly, max_residual=residual)


def fsum(values) -> float:
    """Compensated sum with a fixed reduction order."""
    return math.fsum(float(v) for v in np.asarray(values, dtype=float).ravel())
