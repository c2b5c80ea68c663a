"""Numerical oracle layer for the weighted integral functionals and their
projection lower bounds.

The functional under study is

    J(f) = int_a^b ((s - a)/(b - a))**m  f(s)^T W f(s) ds,   W > 0,

together with two families of certified lower bounds obtained by projecting
f (or f') onto the first few weighted orthogonal polynomials.  This module
evaluates both sides so the bound inequalities can be certified numerically, and
implements the competing first-order bound they are compared against.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .polynomials import RationalPolynomial, rodrigues_poly
from .projection import derivative_moment_map, weighted_moment_map
from .quadrature import adaptive_quadrature, nested_integral

__all__ = [
    "FunctionalSpec",
    "VectorFunction",
    "PolynomialVectorFunction",
    "CallableVectorFunction",
    "functional_value",
    "functional_value_nested",
    "moments",
    "lower_bound_values",
    "lower_bound_derivative",
    "competitor_bound",
    "competitor_statistics",
    "dump_gap_sweep",
]


@dataclass(frozen=True)
class FunctionalSpec:
    """Weight matrix, weight exponent and interval defining the functional."""

    weight: np.ndarray
    m: int
    a: float
    b: float

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        object.__setattr__(self, "weight", w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight must be a square matrix")
        if not np.allclose(w, w.T, atol=1e-12):
            raise ValueError("weight must be symmetric")
        eigs = np.linalg.eigvalsh(w)
        if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
            raise ValueError("weight must be positive definite")
        if self.m < 0:
            raise ValueError("weight exponent m must be >= 0")
        if not self.b > self.a:
            raise ValueError("interval must satisfy b > a")

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    @property
    def width(self) -> float:
        return self.b - self.a


class VectorFunction:
    """Continuous vector-valued test function on an interval.

    Subclasses provide ``__call__``; polynomial test functions additionally
    expose exact moments and exact functional values, which the evaluators
    prefer over quadrature.
    """

    dim: int

    def __call__(self, s: float) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def has_exact(self) -> bool:
        return False


class CallableVectorFunction(VectorFunction):
    def __init__(self, func: Callable[[float], Sequence[float]], dim: int):
        self._func = func
        self.dim = dim

    def __call__(self, s: float) -> np.ndarray:
        return np.asarray(self._func(s), dtype=float)


class PolynomialVectorFunction(VectorFunction):
    """Vector of exact rational polynomials in s, on an exact interval.

    When the interval endpoints are rationals, every moment and functional
    value reduces to exact polynomial integration on [0, 1].
    """

    def __init__(
        self,
        components: Sequence[RationalPolynomial],
        a: int | Fraction,
        b: int | Fraction,
    ):
        self.components = list(components)
        self.dim = len(self.components)
        self.a = Fraction(a)
        self.b = Fraction(b)
        if not self.b > self.a:
            raise ValueError("interval must satisfy b > a")
        width = self.b - self.a
        # components composed to live on [0, 1]
        self._unit = [c.compose_affine(self.a, width) for c in self.components]

    def __call__(self, s: float) -> np.ndarray:
        return np.array([c.eval_float(s) for c in self.components])

    def has_exact(self) -> bool:
        return True

    def derivative(self) -> "PolynomialVectorFunction":
        return PolynomialVectorFunction(
            [c.derivative() for c in self.components], self.a, self.b
        )

    def exact_moment(self, l: int) -> np.ndarray:
        """int_a^b R(0,l)((s-a)/width) f(s) ds, exact, returned as floats."""
        width = self.b - self.a
        basis = rodrigues_poly(0, l)
        return np.array(
            [float(width * (basis * g).integral()) for g in self._unit]
        )

    def exact_functional(self, weight: np.ndarray, m: int) -> float:
        """Exact weighted quadratic functional against an arbitrary W."""
        width = self.b - self.a
        n = self.dim
        gram = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                val = (self._unit[i] * self._unit[j]).shift_exponents(m).integral()
                gram[i, j] = gram[j, i] = float(val)
        return float(width * np.sum(np.asarray(weight) * gram))

    def endpoint_values(self) -> tuple[np.ndarray, np.ndarray]:
        f_a = np.array([float(c.eval(self.a)) for c in self.components])
        f_b = np.array([float(c.eval(self.b)) for c in self.components])
        return f_a, f_b


def functional_value(spec: FunctionalSpec, f: VectorFunction) -> float:
    """J(f) by adaptive quadrature, or exactly for polynomial test functions."""
    if isinstance(f, PolynomialVectorFunction) and f.has_exact():
        if (float(f.a), float(f.b)) != (spec.a, spec.b):
            raise ValueError("function interval does not match the spec interval")
        return f.exact_functional(spec.weight, spec.m)
    w = spec.weight
    a, b, m = spec.a, spec.b, spec.m
    inv_width = 1.0 / (b - a)

    def integrand(s: float) -> float:
        v = f(s)
        return ((s - a) * inv_width) ** m * float(v @ w @ v)

    return float(adaptive_quadrature(integrand, a, b, tol=1e-10))


def functional_value_nested(spec: FunctionalSpec, f: VectorFunction) -> float:
    """J(f) via the literal repeated-integral form (independent oracle).

    Cost grows exponentially in m; only supported for m <= 3.
    """
    if spec.m > 3:
        raise ValueError("nested evaluation supported for m <= 3 only")
    w = spec.weight

    def g(s: float) -> float:
        v = f(s)
        return float(v @ w @ v)

    raw = nested_integral(g, spec.a, spec.b, folds=spec.m)
    return math.factorial(spec.m) / spec.width**spec.m * raw


def moments(f: VectorFunction, a: float, b: float, big_m: int) -> np.ndarray:
    """Legendre moment vectors phi_l, l = 0..M-1, stacked as an (M, n) array."""
    if big_m < 1:
        raise ValueError("at least one moment is required")
    if isinstance(f, PolynomialVectorFunction) and f.has_exact():
        if (float(f.a), float(f.b)) != (a, b):
            raise ValueError("function interval does not match [a, b]")
        return np.vstack([f.exact_moment(l) for l in range(big_m)])
    width = b - a
    basis = [rodrigues_poly(0, l) for l in range(big_m)]

    def integrand(s: float) -> np.ndarray:
        x = (s - a) / width
        vals = f(s)
        return np.array([p.eval_float(x) for p in basis])[:, None] * vals[None, :]

    return np.asarray(adaptive_quadrature(integrand, a, b, tol=1e-10))


def _weight_block(m: int, nu: int, weight: np.ndarray) -> np.ndarray:
    """diag{(m+1) W, (m+3) W, ..., (m+2 nu+1) W}."""
    factors = np.arange(m + 1, m + 2 * nu + 2, 2, dtype=float)
    return np.kron(np.diag(factors), weight)


def lower_bound_values(
    spec: FunctionalSpec, phi: np.ndarray, nu: int, big_m: int
) -> float:
    """Projection lower bound for J(f) from the first M Legendre moments."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (big_m, spec.dim):
        raise ValueError(f"moment array must have shape ({big_m}, {spec.dim})")
    xi = weighted_moment_map(spec.m, nu, big_m).as_array()
    stacked = phi.reshape(-1)  # already (M, n) row-major = kron layout
    proj = np.kron(xi, np.eye(spec.dim)) @ stacked
    wm = _weight_block(spec.m, nu, spec.weight)
    return float(proj @ wm @ proj) / spec.width


def lower_bound_derivative(
    spec: FunctionalSpec,
    f_a: np.ndarray,
    f_b: np.ndarray,
    phi: np.ndarray | None,
    nu: int,
    big_m: int,
) -> float:
    """Projection lower bound for J(f') from boundary values and moments."""
    f_a = np.asarray(f_a, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    if f_a.shape != (spec.dim,) or f_b.shape != (spec.dim,):
        raise ValueError("boundary values must be vectors of the weight dimension")
    if big_m == 0:
        stacked = np.concatenate([f_b, f_a])
    else:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (big_m, spec.dim):
            raise ValueError(f"moment array must have shape ({big_m}, {spec.dim})")
        stacked = np.concatenate([f_b, f_a, phi.reshape(-1) / spec.width])
    z = derivative_moment_map(spec.m, nu, big_m).as_array()
    proj = np.kron(z, np.eye(spec.dim)) @ stacked
    wm = _weight_block(spec.m, nu, spec.weight)
    return float(proj @ wm @ proj) / spec.width


def competitor_statistics(
    spec: FunctionalSpec, f: VectorFunction
) -> tuple[np.ndarray, np.ndarray]:
    """The competing bound's statistics, recovered from weighted moments.

    With l = spec.m, the identities are
        w_{l,0} =  l!       / (b-a)**l * g_l
        w_{l,1} = -(l+1)! / (b-a)**l * Upsilon_l.
    """
    l = spec.m
    big_m = l + 2  # enough span for the two weighted moments
    phi = moments(f, spec.a, spec.b, big_m)
    xi = weighted_moment_map(l, 1, big_m).as_array()
    w_moms = xi @ phi  # rows: w_{l,0}, w_{l,1}
    width = spec.width
    g_l = width**l / math.factorial(l) * w_moms[0]
    upsilon_l = -(width**l) / math.factorial(l + 1) * w_moms[1]
    return g_l, upsilon_l


def competitor_bound(
    spec: FunctionalSpec, g_l: np.ndarray, upsilon_l: np.ndarray
) -> float:
    """Competing first-order lower bound for J(f).

    Identical first term to the two-term projection bound, but the second
    term carries coefficient 1 where the projection bound has (l+1)**2.
    """
    l = spec.m
    w = spec.weight
    g_l = np.asarray(g_l, dtype=float)
    upsilon_l = np.asarray(upsilon_l, dtype=float)
    fact2 = math.factorial(l) ** 2
    denom = spec.width ** (2 * l + 1)
    first = (l + 1) * fact2 / denom * float(g_l @ w @ g_l)
    second = (l + 3) * fact2 / denom * float(upsilon_l @ w @ upsilon_l)
    return first + second


def dump_gap_sweep(
    path: str,
    rows: Sequence[tuple[float, float, float]],
    header: tuple[str, str, str] = ("bound", "value", "gap"),
) -> None:
    """Write (bound, value, gap) sweep rows to CSV for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
