"""Scalar slacks of the pairwise interpolation and PL-type conditions.

Each condition returns a signed slack that is nonpositive exactly when
the sampled first-order data is consistent with the stated function
class, so the same expressions double as trace validators and as the
constraint vocabulary of the certificate layer. Violation thresholds are
the caller's business; nothing here raises on a positive slack.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .pgm import Trace
from .problem import CompositeProblem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Triple:
    """A point with a (sub)gradient and the function value there."""

    x: np.ndarray
    g: np.ndarray
    fv: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "g", np.atleast_1d(np.asarray(self.g, dtype=float)))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.g)) and np.isfinite(self.fv)):
            raise DomainError("triple entries must be finite")


@dataclass(frozen=True)
class TriplePair:
    """Smooth-part and convex-part triples taken at the same point."""

    f: Triple
    h: Triple

    def __post_init__(self):
        if self.f.x.shape != self.h.x.shape or not np.array_equal(self.f.x, self.h.x):
            raise DomainError("f and h triples must share the same point")

    @property
    def x(self) -> np.ndarray:
        return self.f.x

    @property
    def total_value(self) -> float:
        return self.f.fv + self.h.fv


def cond_A(i: Triple, j: Triple, L: float) -> float:
    """Slack of the two-point consistency test for L-smooth functions.

    f_j - f_i - (L/4)||x_i-x_j||^2 + (1/2)<g_i+g_j, x_i-x_j>
        + (1/4L)||g_i-g_j||^2,
    nonpositive iff some function with L-Lipschitz gradient (no convexity
    required) takes these values and gradients at the two points. Tight
    on +-(L/2)||x||^2.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    dx = i.x - j.x
    dg = i.g - j.g
    return float(
        j.fv - i.fv
        - 0.25 * L * (dx @ dx)
        + 0.5 * ((i.g + j.g) @ dx)
        + 0.25 / L * (dg @ dg)
    )


def cond_B(i: Triple, j: Triple, L: float) -> float:
    """Slack of the two-point consistency test for L-smooth convex functions.

    f_j - f_i + <g_j, x_i-x_j> + (1/2L)||g_i-g_j||^2, nonpositive iff some
    L-smooth convex function interpolates the two triples.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    dg = i.g - j.g
    return float(j.fv - i.fv + j.g @ (i.x - j.x) + 0.5 / L * (dg @ dg))


def cond_C(i: Triple, j: Triple) -> float:
    """Slack of the subgradient inequality for closed proper convex functions.

    h_j - h_i + <s_j, x_i-x_j>, nonpositive iff consistent with convexity.
    """
    return float(j.fv - i.fv + j.g @ (i.x - j.x))


def cond_D(i: TriplePair, fstar: float, mu: float) -> float:
    """Slack of the discretized gradient-domination inequality at a point:
    F_i - F* - (1/2mu)||g_i + s_i||^2 with s_i a subgradient of h at x_i."""
    if not mu > 0:
        raise DomainError("mu must be positive")
    v = i.f.g + i.h.g
    return float(i.total_value - fstar - 0.5 / mu * (v @ v))


def cond_E(i: TriplePair, fstar: float, mu: float, residual_norm: float) -> float:
    """Slack of the residual-based domination inequality:
    F_i - F* - (1/2mu)*||G_gamma(x_i)||^2."""
    if not mu > 0:
        raise DomainError("mu must be positive")
    return float(i.total_value - fstar - 0.5 / mu * residual_norm**2)


def cond_E_prime(i: TriplePair, s_next, fstar: float, mu: float) -> float:
    """cond_E with the residual expanded as g_i + s_{i+1}, where s_{i+1}
    is the prox-certified subgradient at the next iterate. On exact
    iterates the two slacks coincide to roundoff."""
    if not mu > 0:
        raise DomainError("mu must be positive")
    v = i.f.g + np.asarray(s_next, dtype=float)
    return float(i.total_value - fstar - 0.5 / mu * (v @ v))


# ---------------------------------------------------------------------------
# trace validation


@dataclass
class TraceValidation:
    """Worst-case deviations of a trace from the identities it must obey."""

    max_iteration_identity_error: float
    max_residual_identity_error: float
    max_lemma_violation: float  # ||G_i|| - ||g_i + s_i||, should be <= tol
    max_D_slack: Optional[float]
    max_E_slack: Optional[float]
    skipped_indices: np.ndarray

    def ok(self, tol: float = 1e-10, identity_tol: float = 1e-12) -> bool:
        checks = [
            self.max_iteration_identity_error <= identity_tol,
            self.max_residual_identity_error <= identity_tol,
            self.max_lemma_violation <= tol,
        ]
        if self.max_D_slack is not None:
            checks.append(self.max_D_slack <= tol)
        if self.max_E_slack is not None:
            checks.append(self.max_E_slack <= tol)
        return all(checks)


def validate_trace(
    problem: CompositeProblem,
    trace: Trace,
    fstar: Optional[float] = None,
    mu: Optional[float] = None,
) -> TraceValidation:
    """Check a recorded run against the identities and inequalities above.

    The iteration identity x_{i+1} = x_i - gamma*(g_i + s_{i+1}) and the
    residual factorization gamma*G_i = x_i - x_{i+1} are checked in
    relative terms. When fstar and mu are given, the D/E slacks are
    evaluated at every iterate except those where the objective went up
    (domination inequalities are only assumed on the initial sublevel
    set); skipped iterates are logged and reported.
    """
    if trace.subgradients is None:
        raise DomainError("trace was recorded without subgradients")
    gamma = trace.gamma
    n = len(trace.points)

    it_err = 0.0
    res_err = 0.0
    for i in range(n - 1):
        x, xn = trace.points[i], trace.points[i + 1]
        step = x - gamma * (trace.gradients[i] + trace.subgradients[i])
        scale = max(1.0, float(np.linalg.norm(xn)))
        it_err = max(it_err, float(np.linalg.norm(step - xn)) / scale)
        G = trace.gradients[i] + trace.subgradients[i]
        res_err = max(
            res_err, float(np.linalg.norm(gamma * G - (x - xn))) / max(1.0, gamma * float(np.linalg.norm(G)))
        )

    # residual norm never exceeds the certified subgradient distance
    lemma = -np.inf
    for i in range(1, n):
        s_here = trace.subgradients[i - 1]  # certified at x_i by the previous prox
        v = trace.gradients[i] + s_here
        lemma = max(lemma, trace.residual_norms[i] - float(np.linalg.norm(v)))

    max_D = max_E = None
    skipped = np.empty(0, dtype=int)
    if fstar is not None and mu is not None:
        increased = set(int(k) for k in trace.increase_indices)
        skip = []
        d_slacks, e_slacks = [], []
        for i in range(n):
            if i in increased:
                skip.append(i)
                continue
            gap = trace.F_vals[i] - fstar
            e_slacks.append(gap - 0.5 / mu * trace.residual_norms[i] ** 2)
            if i >= 1:
                v = trace.gradients[i] + trace.subgradients[i - 1]
                d_slacks.append(gap - 0.5 / mu * float(v @ v))
        if skip:
            log.info("skipped D/E checks at %d iterates where F increased", len(skip))
        skipped = np.asarray(skip, dtype=int)
        max_D = float(max(d_slacks)) if d_slacks else None
        max_E = float(max(e_slacks)) if e_slacks else None

    return TraceValidation(
        max_iteration_identity_error=it_err,
        max_residual_identity_error=res_err,
        max_lemma_violation=float(lemma) if np.isfinite(lemma) else 0.0,
        max_D_slack=max_D,
        max_E_slack=max_E,
        skipped_indices=skipped,
    )
