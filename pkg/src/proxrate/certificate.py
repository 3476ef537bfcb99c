"""Mechanical verification of the one-step rate proofs in Gram space.

Every proof is a weighted sum of pairwise constraints whose quadratic
parts live over the vector symbols (x1 - xstar, g1, g2, s2); the second
iterate never appears because x2 = x1 - gamma*(g1 + s2) is substituted
everywhere, and optimal-point gradients are eliminated by g* + s* = 0.
A certificate stores the closed-form multipliers and the expected
remainder; verification checks, per gamma,

    objective - rho*gap - sum(multiplier_i * constraint_i) == remainder,

multiplier nonnegativity, and nonpositivity of the remainder form.
Coefficient formulas are rational in (L, mu, gamma), so an exact mode
re-runs the identity in Fraction arithmetic at rational parameter values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

import math

import numpy as np

from .errors import DomainError, VerificationError

VECTOR_SYMBOLS = ("x1", "g1", "g2", "s2")
SCALAR_SYMBOLS = ("f1", "f2", "h1", "h2", "Fstar")
_NV = len(VECTOR_SYMBOLS)
_NS = len(SCALAR_SYMBOLS)
_VIDX = {s: i for i, s in enumerate(VECTOR_SYMBOLS)}
_SIDX = {s: i for i, s in enumerate(SCALAR_SYMBOLS)}

CONSTRAINT_NAMES = ("A12", "A21", "B12", "B21", "C12", "D2", "E1", "E2", "Eprime1")

IDENTITY_TOL = 1e-11
MULTIPLIER_TOL = 1e-14
EIGENVALUE_TOL = 1e-10


def _is_exact(*values) -> bool:
    return any(isinstance(v, Fraction) for v in values)


def _zero_array(shape, exact):
    # exact-mode arrays must carry Fraction(0), not int 0: an int zero
    # turns into float 0.0 under /2 and would poison later sums
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape, dtype=float)


@dataclass
class GramExpression:
    """Quadratic-plus-linear expression over the fixed symbol bases.

    Q is (..., 4, 4) symmetric over VECTOR_SYMBOLS, c is (..., 5) over
    SCALAR_SYMBOLS, k a (...) constant. Arithmetic broadcasts, so one
    expression can carry a whole gamma grid; dtype=object carries exact
    Fractions through the same code paths.
    """

    Q: np.ndarray
    c: np.ndarray
    k: np.ndarray

    def __add__(self, other):
        return GramExpression(self.Q + other.Q, self.c + other.c, self.k + other.k)

    def __sub__(self, other):
        return GramExpression(self.Q - other.Q, self.c - other.c, self.k - other.k)

    def __neg__(self):
        return GramExpression(-self.Q, -self.c, -self.k)

    def scaled(self, w):
        w = np.asarray(w) if not isinstance(w, Fraction) else w
        if isinstance(w, Fraction) or w.ndim == 0:
            return GramExpression(self.Q * w, self.c * w, self.k * w)
        return GramExpression(self.Q * w[..., None, None], self.c * w[..., None], self.k * w)

    def evaluate(self, gram, scalars):
        """Value on a concrete Gram matrix and scalar assignment."""
        gram = np.asarray(gram)
        scalars = np.asarray(scalars)
        return (self.Q * gram).sum((-1, -2)) + (self.c * scalars).sum(-1) + self.k

    def max_abs(self):
        """Largest coefficient magnitude, reduced over the symbol axes."""
        q = np.abs(self.Q).max((-1, -2))
        c = np.abs(self.c).max(-1)
        return np.maximum(np.maximum(q, c), np.abs(self.k))


def _expression(batch, exact, quad=None, lin=None, const=None):
    Q = _zero_array(batch + (_NV, _NV), exact) if quad is None else quad
    c = _zero_array(batch + (_NS,), exact)
    k = _zero_array(batch, exact) if batch else (Fraction(0) if exact else 0.0)
    if lin:
        for sym, w in lin.items():
            c[..., _SIDX[sym]] = c[..., _SIDX[sym]] + w
    if const is not None:
        k = k + const
    return GramExpression(np.asarray(Q), np.asarray(c), np.asarray(k))


def _coeff_vector(weights: Mapping[str, object], batch, exact):
    v = _zero_array(batch + (_NV,), exact)
    for sym, w in weights.items():
        v[..., _VIDX[sym]] = v[..., _VIDX[sym]] + w
    return v


def _sym_outer(a, b):
    P = a[..., :, None] * b[..., None, :]
    Pt = np.swapaxes(P, -1, -2)
    return (P + Pt) / 2


def _inner(a, b):
    """Q-matrix of the inner product of two symbol combinations."""
    return _sym_outer(a, b)


def _sqnorm(a):
    return _sym_outer(a, a)


def _batch_of(*params):
    shapes = [np.shape(p) for p in params if not isinstance(p, Fraction)]
    batch = ()
    for s in shapes:
        if len(s) > len(batch):
            batch = s
    return batch


def build_constraint(name: str, L, mu, gamma) -> GramExpression:
    """Named constraint as a Gram expression, with x2 substituted out.

    The residual-form constraints E1/Eprime1 and E2 encode the squared
    norms ||g1+s2||^2 and ||g2+s2||^2 respectively; for E2 this uses that
    the residual norm at the second point is dominated by the certified
    subgradient norm there.
    """
    exact = _is_exact(L, mu, gamma)
    batch = _batch_of(L, mu, gamma)
    if not exact:
        L = np.asarray(L, dtype=float) if np.shape(L) else float(L)
        mu = np.asarray(mu, dtype=float) if np.shape(mu) else float(mu)
        gamma = np.asarray(gamma, dtype=float) if np.shape(gamma) else float(gamma)

    def vec(**weights):
        return _coeff_vector(weights, batch, exact)

    one = Fraction(1) if exact else 1.0
    half = one / 2
    g1 = vec(g1=one)
    g2 = vec(g2=one)
    s2 = vec(s2=one)
    # x1 - x2 = gamma*(g1 + s2); x1 itself cancels from every constraint
    x1mx2 = _coeff_vector({"g1": gamma, "s2": gamma}, batch, exact)

    if name == "A12":
        Q = (
            -(L / 4) * _sqnorm(x1mx2)
            + half * _inner(g1 + g2, x1mx2)
            + (one / (4 * L)) * _sqnorm(g1 - g2)
        )
        return _expression(batch, exact, quad=Q, lin={"f2": one, "f1": -one})
    if name == "A21":
        Q = (
            -(L / 4) * _sqnorm(x1mx2)
            - half * _inner(g1 + g2, x1mx2)
            + (one / (4 * L)) * _sqnorm(g1 - g2)
        )
        return _expression(batch, exact, quad=Q, lin={"f1": one, "f2": -one})
    if name == "B12":
        Q = _inner(g2, x1mx2) + (one / (2 * L)) * _sqnorm(g1 - g2)
        return _expression(batch, exact, quad=Q, lin={"f2": one, "f1": -one})
    if name == "B21":
        Q = -_inner(g1, x1mx2) + (one / (2 * L)) * _sqnorm(g1 - g2)
        return _expression(batch, exact, quad=Q, lin={"f1": one, "f2": -one})
    if name == "C12":
        Q = _inner(s2, x1mx2)
        return _expression(batch, exact, quad=Q, lin={"h2": one, "h1": -one})
    if name in ("D2", "E2"):
        Q = -(one / (2 * mu)) * _sqnorm(g2 + s2)
        return _expression(batch, exact, quad=Q, lin={"f2": one, "h2": one, "Fstar": -one})
    if name in ("E1", "Eprime1"):
        Q = -(one / (2 * mu)) * _sqnorm(g1 + s2)
        return _expression(batch, exact, quad=Q, lin={"f1": one, "h1": one, "Fstar": -one})
    raise DomainError(f"unknown constraint name {name!r}")


def objective_gap_expression(which: str, batch=(), exact=False) -> GramExpression:
    """F(x2)-F* for which='final', F(x1)-F* for which='initial'."""
    one = Fraction(1) if exact else 1.0
    if which == "final":
        return _expression(batch, exact, lin={"f2": one, "h2": one, "Fstar": -one})
    if which == "initial":
        return _expression(batch, exact, lin={"f1": one, "h1": one, "Fstar": -one})
    raise DomainError(f"unknown objective selector {which!r}")


# ---------------------------------------------------------------------------
# the eight certificates


@dataclass(frozen=True)
class Certificate:
    """One theorem case: multipliers, rate, remainder, and gamma interval."""

    case_id: str
    fn_class: str
    ineq: str
    # (constraint name, multiplier label, multiplier formula)
    multipliers: tuple
    rate: Callable
    # remainder = coeff * ||sum_w w_sym * sym||^2; None means identically zero
    remainder_coeff: Optional[Callable]
    remainder_weights: Optional[Callable]
    interval: Callable  # L -> (lo, hi, lo_closed, hi_closed)
    check_kind: str  # "equality" | "inequality-chain"

    def gamma_in_interval(self, L, gamma) -> np.ndarray:
        lo, hi, lo_closed, hi_closed = self.interval(float(L))
        g = np.asarray(gamma, dtype=float)
        tol = 1e-12
        if lo_closed and lo > 0:
            above = g >= lo * (1 - tol)
        elif lo > 0:
            above = g > lo * (1 + tol)
        else:
            above = g > 0
        below = g <= hi * (1 + tol) if hi_closed else g < hi * (1 - tol)
        return above & below

    def remainder_expression(self, L, mu, gamma) -> GramExpression:
        exact = _is_exact(L, mu, gamma)
        batch = _batch_of(L, mu, gamma)
        if self.remainder_coeff is None:
            return _expression(batch, exact)
        coeff = self.remainder_coeff(L, mu, gamma)
        weights = self.remainder_weights(L, mu, gamma)
        v = _coeff_vector(weights, batch, exact)
        Q = _sqnorm(v)
        if isinstance(coeff, Fraction) or np.ndim(coeff) == 0:
            Q = Q * coeff
        else:
            Q = Q * np.asarray(coeff)[..., None, None]
        return _expression(batch, exact, quad=Q)

    def weighted_combination(self, L, mu, gamma) -> GramExpression:
        """objective - rho*gap - sum(multiplier * constraint)."""
        expr = objective_gap_expression("final", _batch_of(L, mu, gamma), _is_exact(L, mu, gamma))
        expr = expr - objective_gap_expression(
            "initial", _batch_of(L, mu, gamma), _is_exact(L, mu, gamma)
        ).scaled(self.rate(L, mu, gamma))
        for cname, _label, formula in self.multipliers:
            expr = expr - build_constraint(cname, L, mu, gamma).scaled(formula(L, mu, gamma))
        return expr


def _den31_1(L, mu, g):
    return (L * g + 1) ** 2 + L * g**2 * mu + 2 * g * mu


def _den_large(L, mu, g):
    return (L * g - 1) ** 2 - L * g**2 * mu + 2 * g * mu


def _interval(lo_fn, hi_fn, lo_closed, hi_closed):
    return lambda L: (lo_fn(L), hi_fn(L), lo_closed, hi_closed)


_SQRT3 = math.sqrt(3.0)


def certificate_catalog() -> list[Certificate]:
    """All eight theorem-case certificates, in theorem order."""
    cat = []

    cat.append(
        Certificate(
            case_id="Thm3.1-case1",
            fn_class="nonconvex",
            ineq="pl",
            multipliers=(
                ("A12", "alpha1", lambda L, m, g: (L**2 * g**2 + 3 * L * g + 2) / _den31_1(L, m, g)),
                ("A21", "alpha2", lambda L, m, g: (L * g + 1) / _den31_1(L, m, g)),
                ("C12", "beta1", lambda L, m, g: (L * g + 1) ** 2 / _den31_1(L, m, g)),
                ("D2", "lambda1", lambda L, m, g: (L * g**2 * m + 2 * g * m) / _den31_1(L, m, g)),
            ),
            rate=lambda L, m, g: (L * g + 1) ** 2 / _den31_1(L, m, g),
            remainder_coeff=lambda L, m, g: (L**2 * g**2 - 3) / (4 * L * _den31_1(L, m, g)),
            remainder_weights=lambda L, m, g: {"g1": L * g + 1, "s2": L * g, "g2": -(g * 0 + 1)},
            interval=_interval(lambda L: 0.0, lambda L: _SQRT3 / L, False, True),
            check_kind="equality",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm3.1-case2",
            fn_class="nonconvex",
            ineq="pl",
            multipliers=(
                ("A12", "alpha1", lambda L, m, g: (L * g - 1) / _den_large(L, m, g)),
                ("A21", "alpha2", lambda L, m, g: (-(L**2) * g**2 + 3 * L * g - 2) / _den_large(L, m, g)),
                ("C12", "beta1", lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g)),
                ("D2", "lambda1", lambda L, m, g: (-L * g**2 * m + 2 * g * m) / _den_large(L, m, g)),
            ),
            rate=lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g),
            remainder_coeff=lambda L, m, g: (3 - L**2 * g**2) / (4 * L * _den_large(L, m, g)),
            remainder_weights=lambda L, m, g: {"g1": L * g - 1, "s2": L * g, "g2": g * 0 + 1},
            interval=_interval(lambda L: _SQRT3 / L, lambda L: 2.0 / L, False, False),
            check_kind="equality",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm3.2-case1",
            fn_class="convex",
            ineq="pl",
            multipliers=(
                ("B12", "alpha1", lambda L, m, g: 2 / (2 * g * m + 1)),
                ("B21", "alpha2", lambda L, m, g: 1 / (2 * g * m + 1)),
                ("C12", "beta1", lambda L, m, g: 1 / (2 * g * m + 1)),
                ("D2", "lambda1", lambda L, m, g: 2 * g * m / (2 * g * m + 1)),
            ),
            rate=lambda L, m, g: 1 / (2 * g * m + 1),
            remainder_coeff=lambda L, m, g: (2 * L * g - 3) / (2 * L * (2 * g * m + 1)),
            remainder_weights=lambda L, m, g: {"g1": g * 0 + 1, "g2": -(g * 0 + 1)},
            interval=_interval(lambda L: 0.0, lambda L: 1.5 / L, False, True),
            check_kind="equality",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm3.2-case2",
            fn_class="convex",
            ineq="pl",
            multipliers=(
                ("B12", "alpha1", lambda L, m, g: (L * g - 1) / _den_large(L, m, g)),
                ("B21", "alpha2", lambda L, m, g: (-(L**2) * g**2 + 3 * L * g - 2) / _den_large(L, m, g)),
                ("C12", "beta1", lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g)),
                ("D2", "lambda1", lambda L, m, g: (-L * g**2 * m + 2 * g * m) / _den_large(L, m, g)),
            ),
            rate=lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g),
            remainder_coeff=lambda L, m, g: (3 - 2 * L * g) / (2 * L * _den_large(L, m, g)),
            remainder_weights=lambda L, m, g: {"g1": L * g - 1, "s2": L * g, "g2": g * 0 + 1},
            interval=_interval(lambda L: 1.5 / L, lambda L: 2.0 / L, False, False),
            check_kind="equality",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm4.1",
            fn_class="nonconvex",
            ineq="rpl",
            multipliers=(
                ("A12", "alpha1", lambda L, m, g: g * 0 + 1),
                ("C12", "beta1", lambda L, m, g: g * 0 + 1),
                ("Eprime1", "lambda1", lambda L, m, g: (m - m * (L * g - 1) ** 2) / L),
            ),
            rate=lambda L, m, g: (L + m * (L * g - 1) ** 2 - m) / L,
            remainder_coeff=lambda L, m, g: -1 / (4 * L) + g * 0,
            remainder_weights=lambda L, m, g: {"g1": L * g - 1, "s2": L * g, "g2": g * 0 + 1},
            interval=_interval(lambda L: 0.0, lambda L: 2.0 / L, False, False),
            check_kind="equality",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm4.2-case1",
            fn_class="convex",
            ineq="rpl",
            multipliers=(
                ("B12", "alpha1", lambda L, m, g: 1 / (1 + g * m)),
                ("C12", "beta1", lambda L, m, g: 1 / (1 + g * m)),
                ("E1", "lambda1", lambda L, m, g: g * m / (1 + g * m)),
                ("E2", "lambda2", lambda L, m, g: g * m / (1 + g * m)),
            ),
            rate=lambda L, m, g: (1 - g * m) / (1 + g * m),
            remainder_coeff=lambda L, m, g: (L * g - 1) / (2 * L * (1 + g * m)),
            remainder_weights=lambda L, m, g: {"g1": g * 0 + 1, "g2": -(g * 0 + 1)},
            interval=_interval(lambda L: 0.0, lambda L: 1.0 / L, False, True),
            check_kind="inequality-chain",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm4.2-case2",
            fn_class="convex",
            ineq="rpl",
            multipliers=(
                ("B12", "alpha1", lambda L, m, g: 1 / (-L * g + g * m + 2)),
                ("B21", "alpha2", lambda L, m, g: (L * g - 1) / (-L * g + g * m + 2)),
                ("C12", "beta1", lambda L, m, g: (-L * g + 2) / (-L * g + g * m + 2)),
                ("E1", "lambda1", lambda L, m, g: g * m * (-2 * L * g + 3) / (-L * g + g * m + 2)),
                ("E2", "lambda2", lambda L, m, g: g * m / (-L * g + g * m + 2)),
            ),
            rate=lambda L, m, g: (2 * L * g**2 * m - L * g - 3 * g * m + 2) / (-L * g + g * m + 2),
            remainder_coeff=None,
            remainder_weights=None,
            interval=_interval(lambda L: 1.0 / L, lambda L: 1.5 / L, False, True),
            check_kind="inequality-chain",
        )
    )

    cat.append(
        Certificate(
            case_id="Thm4.2-case3",
            fn_class="convex",
            ineq="rpl",
            multipliers=(
                ("B12", "alpha1", lambda L, m, g: (L * g - 1) / _den_large(L, m, g)),
                ("B21", "alpha2", lambda L, m, g: (-(L**2) * g**2 + 3 * L * g - 2) / _den_large(L, m, g)),
                ("C12", "beta1", lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g)),
                ("E2", "lambda1", lambda L, m, g: (-L * g**2 * m + 2 * g * m) / _den_large(L, m, g)),
            ),
            rate=lambda L, m, g: (L * g - 1) ** 2 / _den_large(L, m, g),
            remainder_coeff=lambda L, m, g: (3 - 2 * L * g) / (2 * L * _den_large(L, m, g)),
            remainder_weights=lambda L, m, g: {"g1": L * g - 1, "s2": L * g, "g2": g * 0 + 1},
            interval=_interval(lambda L: 1.5 / L, lambda L: 2.0 / L, False, False),
            check_kind="inequality-chain",
        )
    )

    return cat


_CATALOG = {c.case_id: c for c in certificate_catalog()}


def certificate_for(case_id: str) -> Certificate:
    try:
        return _CATALOG[case_id]
    except KeyError:
        raise DomainError(f"unknown certificate case {case_id!r}") from None


# ---------------------------------------------------------------------------
# verification


@dataclass
class CertificateCheck:
    """Verification report for one case over one gamma (or a gamma grid)."""

    case_id: str
    check_kind: str
    gamma: np.ndarray
    multipliers: dict
    min_multiplier: float
    identity_residual: float  # relative to the largest term in the sum
    remainder_coefficient: Optional[np.ndarray]
    remainder_max_eigenvalue: float
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_certificate(
    cert: Certificate,
    L,
    mu,
    gamma,
    identity_tol: float = IDENTITY_TOL,
    multiplier_tol: float = MULTIPLIER_TOL,
    eigenvalue_tol: float = EIGENVALUE_TOL,
    exact: bool = False,
) -> CertificateCheck:
    """Check one certificate at (L, mu) over a gamma point or grid.

    In exact mode the parameters are converted to Fractions (binary
    floats are exact rationals) and the identity must vanish identically;
    interval membership is still decided in floating point.
    """
    gamma_arr = np.atleast_1d(np.asarray(gamma, dtype=float))
    inside = cert.gamma_in_interval(L, gamma_arr)
    if not np.all(inside):
        bad = gamma_arr[~inside]
        raise DomainError(f"gamma {bad[0]!r} outside interval of {cert.case_id}")

    if exact:
        Lx, mux = Fraction(float(L)), Fraction(float(mu))
        gx = (
            np.array([Fraction(float(g)) for g in gamma_arr], dtype=object)
            if gamma_arr.size > 1
            else Fraction(float(gamma_arr[0]))
        )
    else:
        Lx, mux = float(L), float(mu)
        gx = gamma_arr if np.ndim(gamma) else float(gamma)

    failures = []

    mults = {}
    min_mult = np.inf
    for _cname, label, formula in cert.multipliers:
        val = formula(Lx, mux, gx)
        arr = np.atleast_1d(np.asarray(val, dtype=float))
        mults[label] = arr if arr.size > 1 else float(arr[0])
        min_mult = min(min_mult, float(arr.min()))
    if min_mult < -multiplier_tol:
        failures.append(f"negative multiplier {min_mult:.3e}")

    combo = cert.weighted_combination(Lx, mux, gx)
    remainder = cert.remainder_expression(Lx, mux, gx)
    residual = combo - remainder

    if exact:
        exact_zero = (
            all(v == 0 for v in np.atleast_1d(residual.Q).ravel())
            and all(v == 0 for v in np.atleast_1d(residual.c).ravel())
            and np.all(np.atleast_1d(residual.k) == 0)
        )
        rel_residual = 0.0 if exact_zero else np.inf
        if not exact_zero:
            failures.append("identity does not vanish in exact arithmetic")
        rem_Q = np.asarray(remainder.Q, dtype=float)
    else:
        scale = np.maximum(combo.max_abs(), remainder.max_abs())
        rel_residual = float(np.max(residual.max_abs() / np.maximum(scale, 1.0)))
        if rel_residual > identity_tol:
            failures.append(f"identity residual {rel_residual:.3e} exceeds {identity_tol:.1e}")
        rem_Q = np.asarray(remainder.Q, dtype=float)

    # remainder nonpositivity: eigenvalue check of the quadratic form,
    # plus the scalar coefficient where the form is an explicit square
    if rem_Q.ndim == 2:
        rem_Q = rem_Q[None, ...]
    eigs = np.linalg.eigvalsh(rem_Q)
    max_eig = float(eigs.max())
    if max_eig > eigenvalue_tol:
        failures.append(f"remainder not negative semidefinite: max eig {max_eig:.3e}")

    rem_coeff = None
    if cert.remainder_coeff is not None:
        rem_coeff = np.atleast_1d(np.asarray(cert.remainder_coeff(float(L), float(mu), gamma_arr), dtype=float))
        if float(rem_coeff.max()) > eigenvalue_tol:
            failures.append(f"remainder coefficient positive: {float(rem_coeff.max()):.3e}")
        if rem_coeff.size == 1:
            rem_coeff = float(rem_coeff[0])

    return CertificateCheck(
        case_id=cert.case_id,
        check_kind=cert.check_kind,
        gamma=gamma_arr,
        multipliers=mults,
        min_multiplier=min_mult,
        identity_residual=rel_residual,
        remainder_coefficient=rem_coeff,
        remainder_max_eigenvalue=max_eig,
        failures=failures,
    )


@dataclass
class SweepSummary:
    case_id: str
    n_points: int
    worst_identity_residual: float
    min_multiplier: float
    max_remainder_eigenvalue: float


def sweep_verify(case_id: str, L, mu, gamma_grid, **tols) -> SweepSummary:
    """verify_certificate across a grid; raises on the first failing point."""
    cert = certificate_for(case_id)
    grid = np.asarray(gamma_grid, dtype=float)
    if grid.size == 0:
        return SweepSummary(case_id, 0, 0.0, np.inf, -np.inf)
    inside = cert.gamma_in_interval(L, grid)
    if not np.all(inside):
        raise DomainError(
            f"grid point {grid[~inside][0]!r} outside interval of {case_id}"
        )
    check = verify_certificate(cert, L, mu, grid, **tols)
    if not check.ok:
        # locate the offending gamma for the error message
        per_point = [
            verify_certificate(cert, L, mu, float(g), **tols) for g in grid
        ]
        for g, c in zip(grid, per_point):
            if not c.ok:
                raise VerificationError(f"{case_id} fails at gamma={g!r}: {c.failures}")
        raise VerificationError(f"{case_id} fails on the grid: {check.failures}")
    return SweepSummary(
        case_id=case_id,
        n_points=int(grid.size),
        worst_identity_residual=check.identity_residual,
        min_multiplier=check.min_multiplier,
        max_remainder_eigenvalue=check.remainder_max_eigenvalue,
    )


def interval_grid(cert: Certificate, L: float, n: int, margin: float = 1e-6) -> np.ndarray:
    """n gammas spanning the case interval, shrunk by a relative margin at
    open endpoints (closed endpoints are included exactly)."""
    lo, hi, lo_closed, hi_closed = cert.interval(L)
    span = hi - lo
    a = lo if lo_closed and lo > 0 else lo + margin * span
    b = hi if hi_closed else hi - margin * span
    return np.linspace(a, b, n)
