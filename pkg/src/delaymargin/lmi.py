"""Assembly of the delay-stability LMI conditions.

For a linear delay system

    x'(t) = A x(t) + A_d1 x(t - tau) + A_d2 * integral_{t-tau}^t x(s) ds

the stability certificate is a pair of matrix inequalities over an augmented
variable built from x(t), x(t - tau) and the first M Legendre moments of the
state history:

* a positivity block (the augmented quadratic form plus projection terms in
  the Q variables must be positive definite), and
* a derivative block (the time derivative of the functional, upper-bounded
  through the projection inequalities, must be negative definite),

together with positivity of the individual Q and R variables.  A delay-range
variant replaces the single-delay derivative block by its Schur-complement
form, affine in tau, checked at both interval endpoints.

All blocks are affine in the decision variables, so each constraint is
extracted once into a constant part plus one coefficient matrix per scalar
decision variable (symmetric matrices are vectorized with sqrt(2) scaling on
off-diagonal entries so flat inner products match trace inner products).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .projection import (
    derivative_moment_map,
    legendre_derivative_map,
    weighted_moment_map,
)

__all__ = [
    "DelaySystem",
    "HierarchyParams",
    "DecisionVariables",
    "VariableLayout",
    "LmiConstraint",
    "LmiProblem",
    "assemble_stability_lmis",
    "assemble_delay_range_lmis",
    "nodv",
    "positivity_block",
    "derivative_block",
    "range_derivative_block",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DelaySystem:
    """Constant-coefficient delay system matrices."""

    a: np.ndarray
    a_d1: np.ndarray
    a_d2: np.ndarray
    name: str = "system"

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        d1 = np.atleast_2d(np.asarray(self.a_d1, dtype=float))
        d2 = np.atleast_2d(np.asarray(self.a_d2, dtype=float))
        for label, m in (("A", a), ("A_d1", d1), ("A_d2", d2)):
            if m.shape != a.shape or m.shape[0] != m.shape[1]:
                raise ValueError(f"{label} must be square and match A's shape")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{label} contains non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_d1", d1)
        object.__setattr__(self, "a_d2", d2)

    @staticmethod
    def from_matrices(a, a_d1, a_d2=None, name: str = "system") -> "DelaySystem":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a_d2 is None:
            a_d2 = np.zeros_like(a)
        return DelaySystem(a, a_d1, a_d2, name)

    @property
    def n_x(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class HierarchyParams:
    """Moment order M and weight depth m of the condition family.

    Derived counts: m1 = m weighted history terms (Q_0..Q_m1), m2 = m + 1
    derivative terms (R_1..R_m2).  Projection orders are nu1(j) = M - j - 1
    and nu2(j) = M - j; any projection term whose order would be negative is
    omitted (its trivial nonnegativity bound is used instead), which keeps
    the condition sound for every m >= 0.
    """

    big_m: int
    m: int

    def __post_init__(self):
        if self.big_m < 1:
            raise ValueError("M must be >= 1")
        if self.m < 0:
            raise ValueError("m must be >= 0")

    @property
    def m1(self) -> int:
        return self.m

    @property
    def m2(self) -> int:
        return self.m + 1

    def nu1(self, j: int) -> int:
        return self.big_m - j - 1

    def nu2(self, j: int) -> int:
        return self.big_m - j


@dataclass
class DecisionVariables:
    """Symmetric decision matrices: augmented P, history Qs, derivative Rs.

    ``qs[j]`` is Q_j for j = 0..m1; ``rs[j-1]`` is R_j for j = 1..m2.
    P may be indefinite; positivity of Q/R is imposed as constraints.
    """

    p: np.ndarray
    qs: list[np.ndarray]
    rs: list[np.ndarray]

    def copy(self) -> "DecisionVariables":
        return DecisionVariables(
            self.p.copy(), [q.copy() for q in self.qs], [r.copy() for r in self.rs]
        )


class VariableLayout:
    """Flat svec packing of (P, Q_0..Q_m1, R_1..R_m2)."""

    def __init__(self, n_x: int, params: HierarchyParams):
        self.n_x = n_x
        self.params = params
        self.p_size = n_x * (params.big_m + 1)
        self.sizes = [self.p_size] + [n_x] * (params.m1 + 1) + [n_x] * params.m2
        self.groups = (
            ["P"]
            + [f"Q{j}" for j in range(params.m1 + 1)]
            + [f"R{j}" for j in range(1, params.m2 + 1)]
        )
        self.offsets = []
        off = 0
        for s in self.sizes:
            self.offsets.append(off)
            off += s * (s + 1) // 2
        self.dim = off

    def zero_vars(self) -> DecisionVariables:
        n = self.n_x
        return DecisionVariables(
            np.zeros((self.p_size, self.p_size)),
            [np.zeros((n, n)) for _ in range(self.params.m1 + 1)],
            [np.zeros((n, n)) for _ in range(self.params.m2)],
        )

    def _mats(self, dv: DecisionVariables) -> list[np.ndarray]:
        return [dv.p] + dv.qs + dv.rs

    def pack(self, dv: DecisionVariables) -> np.ndarray:
        y = np.empty(self.dim)
        pos = 0
        for mat, size in zip(self._mats(dv), self.sizes):
            for i in range(size):
                y[pos] = mat[i, i]
                pos += 1
                for j in range(i + 1, size):
                    y[pos] = mat[i, j] * _SQRT2
                    pos += 1
        return y

    def unpack(self, y: np.ndarray) -> DecisionVariables:
        dv = self.zero_vars()
        pos = 0
        for mat, size in zip(self._mats(dv), self.sizes):
            for i in range(size):
                mat[i, i] = y[pos]
                pos += 1
                for j in range(i + 1, size):
                    mat[i, j] = mat[j, i] = y[pos] / _SQRT2
                    pos += 1
        return dv

    def basis_elements(self):
        """Yield (flat index, group name, DecisionVariables with one svec
        coordinate set to 1)."""
        idx = 0
        for mat_index, (group, size) in enumerate(zip(self.groups, self.sizes)):
            for i in range(size):
                for j in range(i, size):
                    dv = self.zero_vars()
                    mat = self._mats(dv)[mat_index]
                    if i == j:
                        mat[i, i] = 1.0
                    else:
                        mat[i, j] = mat[j, i] = 1.0 / _SQRT2
                    yield idx, group, dv
                    idx += 1


# ---------------------------------------------------------------------------
# Cached float projection matrices.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _xi_array(m: int, nu: int, big_m: int) -> np.ndarray:
    arr = weighted_moment_map(m, nu, big_m).as_array()
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _z_array(m: int, nu: int, big_m: int) -> np.ndarray:
    arr = derivative_moment_map(m, nu, big_m).as_array()
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _legendre_derivative_array(big_m: int) -> np.ndarray:
    arr = legendre_derivative_map(big_m).as_array()
    arr.setflags(write=False)
    return arr


def _weighted_congruence(proj: np.ndarray, start: int, mat: np.ndarray) -> np.ndarray:
    """(proj x I)^T  diag{(start+1)M, (start+3)M, ...}  (proj x I)."""
    rows = proj.shape[0]
    factors = np.arange(start + 1, start + 2 * rows + 1, 2, dtype=float)
    u = np.kron(proj, np.eye(mat.shape[0]))
    w = np.kron(np.diag(factors), mat)
    return u.T @ w @ u


# ---------------------------------------------------------------------------
# Structural blocks.
# ---------------------------------------------------------------------------


def _state_row(sys: DelaySystem, tau: float, big_m: int) -> np.ndarray:
    """Row mapping the stacked probe vector to x'(t)."""
    n = sys.n_x
    out = np.zeros((n, n * (big_m + 2)))
    out[:, :n] = sys.a
    out[:, n : 2 * n] = sys.a_d1
    out[:, 2 * n : 3 * n] = tau * sys.a_d2
    return out


def positivity_block(
    sys: DelaySystem,
    params: HierarchyParams,
    tau: float,
    p: np.ndarray,
    qs: Sequence[np.ndarray],
) -> np.ndarray:
    """tau P plus the history projection terms; must be positive definite."""
    n = sys.n_x
    big_m = params.big_m
    out = tau * np.asarray(p, dtype=float).copy()
    for j in range(params.m1 + 1):
        nu = params.nu1(j)
        if nu < 0:
            continue  # no valid projection order; trivial bound suffices
        xi = _xi_array(j, nu, big_m)
        out[n:, n:] += _weighted_congruence(xi, j, np.asarray(qs[j], dtype=float))
    return out


def _energy_rate(
    sys: DelaySystem, params: HierarchyParams, tau: float, p: np.ndarray
) -> np.ndarray:
    """Derivative of the augmented quadratic form on the probe space."""
    n = sys.n_x
    big_m = params.big_m
    lam = np.vstack(
        [_state_row(sys, tau, big_m), np.kron(_legendre_derivative_array(big_m), np.eye(n))]
    )
    pattern = np.zeros((big_m + 1, big_m + 2))
    pattern[0, 0] = 1.0
    for i in range(big_m):
        pattern[1 + i, 2 + i] = tau
    gam = np.kron(pattern, np.eye(n))
    pl = gam.T @ p @ lam
    return pl + pl.T


def _history_rate(
    n: int, params: HierarchyParams, qs: Sequence[np.ndarray]
) -> np.ndarray:
    """Derivative contribution of the weighted history terms."""
    big_m = params.big_m
    size = n * (big_m + 2)
    out = np.zeros((size, size))
    out[:n, :n] = sum(np.asarray(q, dtype=float) for q in qs)
    out[n : 2 * n, n : 2 * n] = -np.asarray(qs[0], dtype=float)
    for j in range(1, params.m1 + 1):
        nu = params.nu1(j - 1)
        if nu < 0:
            continue
        xi = _xi_array(j - 1, nu, big_m)
        out[2 * n :, 2 * n :] -= j * _weighted_congruence(
            xi, j - 1, np.asarray(qs[j], dtype=float)
        )
    return out


def _dissipation_energy(
    sys: DelaySystem,
    params: HierarchyParams,
    tau: float,
    rs: Sequence[np.ndarray],
    tau_power: int = 1,
) -> np.ndarray:
    row = _state_row(sys, tau, params.big_m)
    rsum = sum(np.asarray(r, dtype=float) for r in rs)
    return tau**tau_power * row.T @ rsum @ row


def _derivative_projection(
    n: int,
    params: HierarchyParams,
    tau: float,
    rs: Sequence[np.ndarray],
    over_tau: bool = True,
) -> np.ndarray:
    """Projection lower bound of the derivative terms (subtracted)."""
    big_m = params.big_m
    size = n * (big_m + 2)
    out = np.zeros((size, size))
    for j in range(1, params.m2 + 1):
        nu = params.nu2(j - 1)
        if nu < 0:
            continue
        z = _z_array(j - 1, nu, big_m)
        out += j * _weighted_congruence(z, j - 1, np.asarray(rs[j - 1], dtype=float))
    return out / tau if over_tau else out


def derivative_block(
    sys: DelaySystem,
    params: HierarchyParams,
    tau: float,
    p: np.ndarray,
    qs: Sequence[np.ndarray],
    rs: Sequence[np.ndarray],
    projection_over_tau: bool = True,
) -> np.ndarray:
    """Full derivative condition; must be negative definite.

    ``projection_over_tau`` keeps the 1/tau factor on the projection term
    that the derivation produces (switchable for experimentation only).
    """
    return (
        _energy_rate(sys, params, tau, p)
        + _history_rate(sys.n_x, params, qs)
        + _dissipation_energy(sys, params, tau, rs)
        - _derivative_projection(sys.n_x, params, tau, rs, over_tau=projection_over_tau)
    )


def range_derivative_block(
    sys: DelaySystem,
    params: HierarchyParams,
    tau: float,
    p: np.ndarray,
    qs: Sequence[np.ndarray],
    rs: Sequence[np.ndarray],
) -> np.ndarray:
    """Schur form of the derivative condition used for delay ranges.

    Affine in tau when A_d2 = 0, so checking both interval endpoints
    certifies the whole range.  The derivative functional here carries a
    tau**2 multiplier, which removes the 1/tau from the projection term and
    produces the extra negative corner block.
    """
    n = sys.n_x
    big_m = params.big_m
    core = (
        _energy_rate(sys, params, tau, p)
        + _history_rate(n, params, qs)
        - _derivative_projection(n, params, tau, rs, over_tau=False)
    )
    rsum = sum(np.asarray(r, dtype=float) for r in rs)
    row = _state_row(sys, tau, big_m)
    off = tau * row.T @ rsum
    size = n * (big_m + 3)
    out = np.zeros((size, size))
    out[: n * (big_m + 2), : n * (big_m + 2)] = core
    out[: n * (big_m + 2), n * (big_m + 2) :] = off
    out[n * (big_m + 2) :, : n * (big_m + 2)] = off.T
    out[n * (big_m + 2) :, n * (big_m + 2) :] = -rsum
    return out


# ---------------------------------------------------------------------------
# Problem extraction.
# ---------------------------------------------------------------------------


@dataclass
class LmiConstraint:
    """One affine matrix constraint: sense * (f0 + sum_i y_i coeffs[i]) > 0."""

    name: str
    sense: int  # +1: positive definite, -1: negative definite
    f0: np.ndarray
    coeffs: np.ndarray  # (dim, d, d)

    @property
    def size(self) -> int:
        return self.f0.shape[0]

    def value(self, y: np.ndarray) -> np.ndarray:
        mat = self.f0 + np.tensordot(y, self.coeffs, axes=1)
        return 0.5 * (mat + mat.T)


@dataclass
class LmiProblem:
    """Immutable bundle of affine matrix constraints plus the variable layout."""

    constraints: list[LmiConstraint]
    layout: VariableLayout
    tau: float
    params: HierarchyParams
    system: DelaySystem
    description: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def evaluate_at(self, dv: DecisionVariables) -> list[tuple[str, int, np.ndarray]]:
        """Numeric constraint matrices at the given decision variables."""
        y = self.layout.pack(dv)
        return [(c.name, c.sense, c.value(y)) for c in self.constraints]


def _extract_constraints(
    layout: VariableLayout,
    builders: Iterable[tuple[str, int, Callable[[DecisionVariables], np.ndarray], set[str]]],
) -> list[LmiConstraint]:
    builders = list(builders)
    zero = layout.zero_vars()
    f0s = [np.asarray(fn(zero), dtype=float) for _, _, fn, _ in builders]
    stacks = [
        np.zeros((layout.dim, f0.shape[0], f0.shape[0])) for f0 in f0s
    ]
    for idx, group, dv in layout.basis_elements():
        for b, (name, sense, fn, groups) in enumerate(builders):
            if group not in groups:
                continue
            stacks[b][idx] = fn(dv) - f0s[b]
    constraints = []
    for (name, sense, fn, _), f0, stack in zip(builders, f0s, stacks):
        f0 = 0.5 * (f0 + f0.T)
        stack = 0.5 * (stack + np.transpose(stack, (0, 2, 1)))
        constraints.append(LmiConstraint(name, sense, f0, stack))
    return constraints


def _positivity_builders(layout: VariableLayout):
    params = layout.params
    out = []
    for j in range(params.m1 + 1):
        out.append(
            (f"Q{j} positive", 1, (lambda dv, j=j: dv.qs[j]), {f"Q{j}"})
        )
    for j in range(1, params.m2 + 1):
        out.append(
            (f"R{j} positive", 1, (lambda dv, j=j: dv.rs[j - 1]), {f"R{j}"})
        )
    return out


def assemble_stability_lmis(
    sys: DelaySystem,
    params: HierarchyParams,
    tau: float,
    projection_over_tau: bool = True,
) -> LmiProblem:
    """Single-delay stability LMIs at delay tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    layout = VariableLayout(sys.n_x, params)
    q_groups = {f"Q{j}" for j in range(params.m1 + 1)}
    r_groups = {f"R{j}" for j in range(1, params.m2 + 1)}
    builders = [
        (
            "positivity",
            1,
            lambda dv: positivity_block(sys, params, tau, dv.p, dv.qs),
            {"P"} | q_groups,
        ),
        (
            "derivative",
            -1,
            lambda dv: derivative_block(
                sys, params, tau, dv.p, dv.qs, dv.rs, projection_over_tau
            ),
            {"P"} | q_groups | r_groups,
        ),
    ] + _positivity_builders(layout)
    constraints = _extract_constraints(layout, builders)
    return LmiProblem(
        constraints,
        layout,
        tau,
        params,
        sys,
        description=f"{sys.name}: single delay tau={tau:.6g}, M={params.big_m}, m={params.m}",
    )


def assemble_delay_range_lmis(
    sys: DelaySystem,
    params: HierarchyParams,
    tau_low: float,
    tau_up: float,
) -> LmiProblem:
    """Delay-range stability LMIs for tau in [tau_low, tau_up].

    Endpoint checks certify the range because every block is affine in tau
    when A_d2 = 0; with A_d2 != 0 the endpoint reduction is heuristic (tau**2
    terms enter the energy-rate block) and callers should treat the result
    as a pointwise check only.
    """
    if not 0 < tau_low <= tau_up:
        raise ValueError("need 0 < tau_low <= tau_up")
    layout = VariableLayout(sys.n_x, params)
    q_groups = {f"Q{j}" for j in range(params.m1 + 1)}
    r_groups = {f"R{j}" for j in range(1, params.m2 + 1)}
    all_groups = {"P"} | q_groups | r_groups
    builders = [
        (
            "positivity at upper endpoint",
            1,
            lambda dv: positivity_block(sys, params, tau_up, dv.p, dv.qs),
            {"P"} | q_groups,
        ),
        (
            "derivative at lower endpoint",
            -1,
            lambda dv: range_derivative_block(
                sys, params, tau_low, dv.p, dv.qs, dv.rs
            ),
            all_groups,
        ),
        (
            "derivative at upper endpoint",
            -1,
            lambda dv: range_derivative_block(sys, params, tau_up, dv.p, dv.qs, dv.rs),
            all_groups,
        ),
    ] + _positivity_builders(layout)
    constraints = _extract_constraints(layout, builders)
    return LmiProblem(
        constraints,
        layout,
        tau_up,
        params,
        sys,
        description=(
            f"{sys.name}: delay range [{tau_low:.6g}, {tau_up:.6g}], "
            f"M={params.big_m}, m={params.m}"
        ),
        meta={"tau_low": tau_low, "tau_up": tau_up},
    )


def nodv(params: HierarchyParams, n_x: int) -> int:
    """Number of scalar decision variables (triangular counts of P, Qs, Rs)."""

    def tri(k: int) -> int:
        return k * (k + 1) // 2

    return (
        tri(n_x * (params.big_m + 1))
        + (params.m1 + 1) * tri(n_x)
        + params.m2 * tri(n_x)
    )
