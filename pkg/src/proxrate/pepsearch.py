"""Empirical worst-case search over small Gram factorizations.

For fixed (function class, inequality, L, mu, gamma) this maximizes the
one-step objective gap F(x2) - F* over instances encoded by a Gram
factor V (Gram = V V^T is PSD by construction) and the scalar values
(f1, f2, h1, h2), normalized to F* = 0 and F(x1) - F* = 1, subject to
the same constraint set the corresponding proof uses. Feasible maxima
are lower bounds on the worst case, so they must never exceed the
analytic rate; how closely they approach it measures tightness.

Method: multistart ascent on a quadratic-penalty objective with the
penalty weight escalated geometrically, numerical central-difference
gradients, and per-restart adaptive step sizes. All restarts advance in
lockstep as one batched state, which keeps the search pure numpy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certificate import VECTOR_SYMBOLS, build_constraint
from .errors import DomainError, VerificationError
from .rates import rate_formula

_NV = len(VECTOR_SYMBOLS)

CONSTRAINT_SETS = {
    ("nonconvex", "pl"): ("A12", "A21", "C12", "D2"),
    ("convex", "pl"): ("B12", "B21", "C12", "D2"),
    ("nonconvex", "rpl"): ("A12", "C12", "Eprime1"),
    ("convex", "rpl"): ("B12", "B21", "C12", "E1", "E2"),
}

SOUNDNESS_SLACK = 1e-6


@dataclass(frozen=True)
class SearchParams:
    fn_class: str
    ineq: str
    L: float
    mu: float
    gamma: float
    rank: int = _NV
    feasibility_tol: float = 1e-8

    def __post_init__(self):
        if (self.fn_class, self.ineq) not in CONSTRAINT_SETS:
            raise DomainError(f"unknown class/inequality pair ({self.fn_class!r}, {self.ineq!r})")
        if not 0 < self.gamma < 2.0 / self.L:
            raise DomainError(f"gamma out of (0, 2/L): gamma={self.gamma!r}, L={self.L!r}")
        if not (1 <= self.rank <= _NV):
            raise DomainError(f"rank must be in 1..{_NV}")

    @property
    def constraint_names(self):
        return CONSTRAINT_SETS[(self.fn_class, self.ineq)]


@dataclass
class SearchInstance:
    """A concrete candidate: Gram factor, scalar values, and its slacks."""

    params: SearchParams
    V: np.ndarray  # (4, rank)
    f1: float
    f2: float
    h1: float
    h2: float

    @property
    def gram(self) -> np.ndarray:
        return self.V @ self.V.T

    @property
    def scalars(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.h1, self.h2, 0.0])

    @property
    def ratio(self) -> float:
        return self.f2 + self.h2

    def slacks(self) -> dict:
        """Constraint slacks re-evaluated from the Gram matrix directly."""
        p = self.params
        out = {}
        for name in p.constraint_names:
            expr = build_constraint(name, p.L, p.mu, p.gamma)
            out[name] = float(expr.evaluate(self.gram, self.scalars))
        return out

    @property
    def feasible(self) -> bool:
        return max(self.slacks().values()) <= self.params.feasibility_tol


@dataclass
class SearchResult:
    params: SearchParams
    best_ratio: float
    instance: SearchInstance
    analytic_rate: float
    gap: float
    restarts_used: int
    max_slack: float


class _PenaltyProblem:
    """Batched penalized objective over restart states."""

    def __init__(self, params: SearchParams):
        self.params = params
        exprs = [build_constraint(n, params.L, params.mu, params.gamma) for n in params.constraint_names]
        self.Qs = np.stack([np.asarray(e.Q, dtype=float) for e in exprs])
        self.cs = np.stack([np.asarray(e.c, dtype=float) for e in exprs])
        self.ks = np.array([float(e.k) for e in exprs])
        self.rank = params.rank
        self.dim = _NV * self.rank + 3  # V entries + (f1, f2, h2); h1 = 1 - f1

    def unpack(self, theta):
        R = theta.shape[0]
        V = theta[:, : _NV * self.rank].reshape(R, _NV, self.rank)
        f1 = theta[:, -3]
        f2 = theta[:, -2]
        h2 = theta[:, -1]
        return V, f1, f2, h2

    def slacks(self, theta):
        V, f1, f2, h2 = self.unpack(theta)
        G = np.einsum("rik,rjk->rij", V, V)
        svec = np.stack([f1, f2, 1.0 - f1, h2, np.zeros_like(f1)], axis=1)
        return np.einsum("mij,rij->rm", self.Qs, G) + svec @ self.cs.T + self.ks

    def penalized(self, theta, weight):
        _, _, f2, h2 = self.unpack(theta)
        viol = np.maximum(self.slacks(theta), 0.0)
        return f2 + h2 - weight * (viol * viol).sum(axis=1)

    def slack_jacobian(self, theta_row):
        """Exact Jacobian of the slacks for one restart state (m, dim)."""
        V, _f1, _f2, _h2 = self.unpack(theta_row[None])
        V = V[0]
        m = self.Qs.shape[0]
        J = np.empty((m, self.dim))
        for i in range(m):
            J[i, : _NV * self.rank] = (2.0 * self.Qs[i] @ V).ravel()
            J[i, -3] = self.cs[i, 0] - self.cs[i, 2]  # f1 enters as f1 and 1-f1
            J[i, -2] = self.cs[i, 1]
            J[i, -1] = self.cs[i, 3]
        return J


def _ascend(problem, theta, weight, active, max_iters, step0=0.1):
    """Adaptive-step gradient ascent on the penalized objective, batched
    over restarts; `active` masks frozen coordinates (low-rank columns)."""
    R, D = theta.shape
    eta = np.full(R, step0)
    value = problem.penalized(theta, weight)
    for _ in range(max_iters):
        grad = np.empty_like(theta)
        for d in range(D):
            h = 1e-6 * (1.0 + np.abs(theta[:, d]))
            tp = theta.copy()
            tp[:, d] += h
            tm = theta.copy()
            tm[:, d] -= h
            grad[:, d] = (problem.penalized(tp, weight) - problem.penalized(tm, weight)) / (2.0 * h)
        grad *= active
        norms = np.linalg.norm(grad, axis=1)
        direction = grad / np.maximum(norms, 1e-300)[:, None]
        proposal = theta + eta[:, None] * direction
        new = problem.penalized(proposal, weight)
        accept = new > value
        theta[accept] = proposal[accept]
        value[accept] = new[accept]
        eta[accept] *= 1.5
        eta[~accept] *= 0.5
        if float(eta.max()) < 1e-11:
            break
    return theta, value


def _polish(problem, theta, active, feas_tol, iters=160):
    """Working-set refinement of one near-optimal restart state.

    Penalty ascent stalls within ~1e-2 of the optimum (the penalized
    surface has curvature proportional to the weight), so this finishes
    the job as a small active-set method: composite steps move along the
    objective direction projected on the tangent space of the currently
    tight constraints, Newton-restoration pins those slacks just inside
    the feasible side, and a constraint whose least-squares multiplier
    turns negative is released. Constraints outside the working set only
    need to stay feasible; they join the set when a step drives them up
    to the boundary.
    """
    theta = theta.copy()
    m = problem.Qs.shape[0]
    obj = np.zeros_like(theta)
    obj[-2:] = 1.0
    obj *= active
    inward = 0.25 * feas_tol

    def slacks(t):
        return problem.slacks(t[None])[0]

    def restore(t, working, newton_iters=4):
        if not working:
            return t
        idx = sorted(working)
        for _ in range(newton_iters):
            s = slacks(t)[idx]
            if float(np.abs(s + inward).max()) <= 0.5 * inward:
                break
            J = problem.slack_jacobian(t)[idx] * active
            t = t - np.linalg.pinv(J, rcond=1e-12) @ (s + inward)
        return t

    working = {i for i, s in enumerate(slacks(theta)) if s >= -1e-6}
    theta = restore(theta, working)
    ratio = float(theta[-2] + theta[-1])
    trust = 0.05
    for _ in range(iters):
        working |= {i for i, s in enumerate(slacks(theta)) if s >= -1e-7}
        J_all = problem.slack_jacobian(theta) * active
        if working:
            idx = sorted(working)
            J = J_all[idx]
            Jp = np.linalg.pinv(J, rcond=1e-12)
            tangent = obj - Jp @ (J @ obj)
        else:
            tangent = obj.copy()
        tnorm = float(np.linalg.norm(tangent))
        if tnorm < 1e-9:
            # stationary on the current face: release a constraint whose
            # multiplier is negative, otherwise this is a KKT point
            if not working:
                break
            idx = sorted(working)
            lam, *_ = np.linalg.lstsq(J_all[idx].T, obj, rcond=None)
            worst = int(np.argmin(lam))
            if lam[worst] < -1e-7:
                working.discard(idx[worst])
                continue
            break
        tangent /= tnorm
        cand = restore(theta + trust * tangent, working)
        cand_slack = float(slacks(cand).max())
        cand_ratio = float(cand[-2] + cand[-1])
        if cand_ratio > ratio and cand_slack <= 0.5 * feas_tol:
            theta, ratio = cand, cand_ratio
            trust *= 1.4
        else:
            trust *= 0.5
            if trust < 1e-10:
                break
    return restore(theta, working)


def search_worst_case(
    params: SearchParams,
    restarts: int = 64,
    budget: int = 120,
    seed: int = 0,
    warm_starts: Sequence[SearchInstance] = (),
) -> SearchResult:
    """Best feasible gap ratio found over `restarts` penalty ascents.

    Restart r draws its start from a child seed of `seed` indexed by r,
    so results are reproducible and independent of scheduling. A quarter
    of the restarts run at ranks 1 and 2 (worst cases of one-step
    problems are often low-dimensional). Warm starts join the batch as
    extra rows. Raises if no restart reaches feasibility, and raises if a
    feasible ratio exceeds the analytic rate beyond tolerance (that would
    mean the constraint encoding and the certificates disagree).
    """
    p = params
    problem = _PenaltyProblem(p)
    R = int(restarts)
    if R < 1:
        raise DomainError("restarts must be positive")

    seeds = np.random.SeedSequence(seed).spawn(R)
    thetas = np.empty((R, problem.dim))
    ranks = np.empty(R, dtype=int)
    for r in range(R):
        gen = np.random.Generator(np.random.PCG64(seeds[r]))
        # low-rank restarts: r=1,2 for a quarter of the batch each
        if r % 4 == 2:
            ranks[r] = 1
        elif r % 4 == 3:
            ranks[r] = 2
        else:
            ranks[r] = p.rank
        scale = 0.5 * np.sqrt(p.L) * float(np.exp(gen.uniform(-2.0, 0.7)))
        V = gen.normal(0.0, scale, size=(_NV, p.rank))
        V[:, ranks[r] :] = 0.0
        f1 = gen.uniform(0.0, 1.0)
        f2 = gen.uniform(0.0, 1.0)
        h2 = gen.uniform(-0.2, 0.2)
        thetas[r] = np.concatenate([V.ravel(), [f1, f2, h2]])

    warm_rows = []
    for inst in warm_starts:
        V = np.zeros((_NV, p.rank))
        k = min(p.rank, inst.V.shape[1])
        V[:, :k] = inst.V[:, :k]
        warm_rows.append(np.concatenate([V.ravel(), [inst.f1, inst.f2, inst.h2]]))
    if warm_rows:
        thetas = np.vstack([thetas, np.array(warm_rows)])
        ranks = np.concatenate([ranks, np.full(len(warm_rows), p.rank, dtype=int)])

    active = np.ones_like(thetas)
    for r, rk in enumerate(ranks):
        mask = np.zeros((_NV, p.rank))
        mask[:, :rk] = 1.0
        active[r, : _NV * p.rank] = mask.ravel()

    weight = 1e2
    while True:
        thetas, values = _ascend(problem, thetas, weight, active, budget)
        if weight >= 1e8:
            break
        weight *= 10.0

    # refine every restart on the active-constraint manifold
    for r in range(thetas.shape[0]):
        thetas[r] = _polish(problem, thetas[r], active[r], p.feasibility_tol)

    slacks = problem.slacks(thetas)
    max_slack = slacks.max(axis=1)
    ratios = thetas[:, -2] + thetas[:, -1]
    feasible = max_slack <= p.feasibility_tol
    analytic = rate_formula(p.fn_class, p.ineq, p.L, p.mu, p.gamma).rho

    if not feasible.any():
        raise VerificationError(
            f"no feasible instance found for {p.fn_class}/{p.ineq} at gamma={p.gamma!r} "
            f"(min max-slack {float(max_slack.min()):.3e}, tol {p.feasibility_tol:.1e})"
        )
    masked = np.where(feasible, ratios, -np.inf)
    best = int(np.argmax(masked))
    V, f1, f2, h2 = problem.unpack(thetas[best : best + 1])
    instance = SearchInstance(p, V[0].copy(), float(f1[0]), float(f2[0]), float(1.0 - f1[0]), float(h2[0]))
    best_ratio = float(ratios[best])

    if best_ratio > analytic + SOUNDNESS_SLACK:
        raise VerificationError(
            f"searched ratio {best_ratio!r} exceeds analytic rate {analytic!r} "
            f"for {p.fn_class}/{p.ineq} at gamma={p.gamma!r}"
        )
    return SearchResult(
        params=p,
        best_ratio=best_ratio,
        instance=instance,
        analytic_rate=analytic,
        gap=analytic - best_ratio,
        restarts_used=int(thetas.shape[0]),
        max_slack=float(max_slack[best]),
    )


@dataclass(frozen=True)
class TightnessRow:
    gamma: float
    analytic_rate: float
    searched_ratio: float
    gap: float
    restarts_used: int


def tightness_curve(
    fn_class: str,
    ineq: str,
    L: float,
    mu: float,
    gamma_grid: Sequence[float],
    restarts: int = 64,
    budget: int = 120,
    seed: int = 0,
    rank: int = _NV,
    feasibility_tol: float = 1e-8,
) -> list[TightnessRow]:
    """Search along a gamma grid, warm-starting each point from the last.

    Gaps above the reporting tolerance are findings, not failures; only
    soundness violations raise.
    """
    rows = []
    last: Optional[SearchInstance] = None
    for i, g in enumerate(np.asarray(gamma_grid, dtype=float)):
        params = SearchParams(fn_class, ineq, L, mu, float(g), rank=rank, feasibility_tol=feasibility_tol)
        result = search_worst_case(
            params,
            restarts=restarts,
            budget=budget,
            seed=seed + i,
            warm_starts=[last] if last is not None else (),
        )
        last = result.instance
        rows.append(
            TightnessRow(float(g), result.analytic_rate, result.best_ratio, result.gap, result.restarts_used)
        )
    return rows


def write_tightness_csv(path, rows: Sequence[TightnessRow]):
    from .tableio import write_csv

    write_csv(
        path,
        ["gamma", "analytic_rate", "searched_ratio", "gap", "restarts_used"],
        [[r.gamma, r.analytic_rate, r.searched_ratio, r.gap, r.restarts_used] for r in rows],
    )
