"""Step-size comparison experiments on the three instance families.

Each experiment generates a seeded random instance, computes a reference
objective value from a long run at step 1/L, then runs one trace per
step policy from a shared start (the origin) and tabulates iterations to
a target gap, observed contraction factors, and, where a domination
modulus is known, the analytic worst-case bound.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rates
from .errors import DomainError
from .pgm import PgmConfig, Trace, estimate_fstar, run_pgm
from .problem import ProblemData, generate_instance

GAP_TOL = 1e-8

DEFAULT_POLICIES = {
    # srlr: tested fixed steps span (0, sqrt3/L]; with the conservative
    # L = 2*lambda_max bound, steps beyond sqrt3/L keep gaining on this
    # family empirically, so larger probes would change the winner
    "srlr": ("0.5/L", "1/L", "1.3/L", "sqrt3/L"),
    "lasso": ("0.5/L", "1/L", "1.5/L", "1.9/L"),
    "elastic_net": ("1/L", "optimal", "1.9/L"),
}

_PROBLEM_SETTING = {
    "srlr": ("nonconvex", "pl"),
    "lasso": ("convex", "pl"),
    "elastic_net": ("convex", "rpl"),
}


@dataclass(frozen=True)
class StepPolicy:
    """A rule mapping an instance to a concrete step size."""

    label: str
    kind: str  # "multiple" | "absolute" | "optimal"
    value: Optional[float] = None

    def resolve(self, problem_kind: str, L: float, mu: Optional[float]) -> tuple[float, str]:
        """Return (gamma, branch label) for a realized instance."""
        if self.kind == "multiple":
            return self.value / L, self.label
        if self.kind == "absolute":
            return float(self.value), self.label
        fn_class, ineq = _PROBLEM_SETTING[problem_kind]
        if problem_kind == "elastic_net":
            if mu is None:
                raise DomainError("optimal policy for elastic_net needs mu")
            # a modulus at or above L still certifies every weaker one, and
            # the step-selection rule needs mu strictly below L
            mu_eff = mu if mu < L else L * (1.0 - 1e-12)
            step = rates.optimal_step(fn_class, ineq, L, mu_eff)
            return step.gamma_star, step.branch
        if problem_kind == "srlr":
            return math.sqrt(3.0) / L, "Prop3.1"
        return 1.5 / L, "Prop3.2"


def parse_policy(text) -> StepPolicy:
    """Parse 'optimal', '1.5/L', 'sqrt3/L', or an absolute gamma value."""
    if isinstance(text, StepPolicy):
        return text
    if isinstance(text, (int, float)):
        return StepPolicy(label=f"gamma={float(text):g}", kind="absolute", value=float(text))
    s = str(text).strip()
    if s == "optimal":
        return StepPolicy(label="optimal", kind="optimal")
    if s.endswith("/L"):
        head = s[: -len("/L")]
        mult = math.sqrt(3.0) if head == "sqrt3" else float(head)
        return StepPolicy(label=s, kind="multiple", value=mult)
    return StepPolicy(label=f"gamma={float(s):g}", kind="absolute", value=float(s))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    n: int = 200
    d: int = 20
    lam: float = 0.1
    delta: Optional[float] = None
    seed: int = 0
    step_policies: Optional[Sequence] = None
    budget: int = 50_000
    gap_tol: float = GAP_TOL
    report_quantity: str = ""  # label only; defaults per kind

    def __post_init__(self):
        if self.kind not in DEFAULT_POLICIES:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise DomainError("n and d must be positive")
        if (self.delta is not None) != (self.kind == "elastic_net"):
            raise DomainError("delta must be present exactly for elastic_net")
        if not self.report_quantity:
            object.__setattr__(
                self,
                "report_quantity",
                "gap_to_Fstar" if self.kind == "elastic_net" else "gap_to_Fhat",
            )

    def policies(self) -> list[StepPolicy]:
        raw = self.step_policies or DEFAULT_POLICIES[self.kind]
        return [parse_policy(p) for p in raw]


@dataclass
class PolicyRun:
    policy: StepPolicy
    gamma: float
    branch: str
    trace: Trace
    iterations_to_tol: Optional[int]
    max_contraction: Optional[float]
    tail_geomean: Optional[float]
    analytic_bound: Optional[float]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    data: ProblemData
    L: float
    mu: Optional[float]
    fhat: float
    fhat_stale: bool
    runs: list[PolicyRun] = field(default_factory=list)

    def summary_rows(self):
        rows = []
        for r in self.runs:
            rows.append(
                [
                    r.policy.label,
                    r.gamma,
                    "" if r.iterations_to_tol is None else r.iterations_to_tol,
                    "" if r.max_contraction is None else r.max_contraction,
                    "" if r.analytic_bound is None else r.analytic_bound,
                ]
            )
        return rows

    def write_csvs(self, outdir):
        from .tableio import write_csv

        os.makedirs(outdir, exist_ok=True)
        for r in self.runs:
            safe = r.policy.label.replace("/", "_per_").replace("=", "")
            r.trace.to_csv(os.path.join(outdir, f"trace_{safe}.csv"), fstar=self.fhat)
        write_csv(
            os.path.join(outdir, "summary.csv"),
            ["policy", "gamma", "iterations_to_tol", "max_contraction", "analytic_bound"],
            self.summary_rows(),
        )


def empirical_contraction(trace: Trace, fstar: float):
    """Max significant per-step gap ratio and the full filtered list."""
    if len(trace.points) == 0:
        raise DomainError("empty trace")
    factors = trace.contraction_factors(fstar)
    if factors.size == 0:
        return None, factors
    return float(factors.max()), factors


def tail_geometric_mean(factors: np.ndarray, max_window: int = 100) -> Optional[float]:
    """Geometric mean of the last max(10, len//4) factors (capped)."""
    if factors.size == 0:
        return None
    k = min(factors.size, max(10, min(max_window, factors.size // 4)))
    tail = factors[-k:]
    tail = tail[tail > 0]
    if tail.size == 0:
        return None
    return float(np.exp(np.mean(np.log(tail))))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Generate the instance, run every policy from the origin, tabulate.

    The reference value is the best objective seen anywhere: a long run
    at 1/L with tight residual tolerance, then lowered further if some
    policy's trace ends below it (policies can reach different basins on
    the nonconvex family).
    """
    data = generate_instance(spec.kind, spec.n, spec.d, spec.lam, spec.seed, spec.delta)
    problem = data.problem()
    L = problem.f.lipschitz
    mu = problem.mu
    x0 = np.zeros(spec.d)

    reference = estimate_fstar(problem, x0, max_iters=max(200_000, spec.budget), stop_tol=1e-13)

    traces = []
    for policy in spec.policies():
        gamma, branch = policy.resolve(spec.kind, L, mu)
        config = PgmConfig(step=gamma, max_iters=spec.budget, stop_tol=1e-14)
        traces.append((policy, gamma, branch, run_pgm(problem, config, x0)))

    fhat = min(reference.value, min(float(t.F_vals.min()) for (_, _, _, t) in traces))

    result = ExperimentResult(
        spec=spec,
        data=data,
        L=L,
        mu=mu,
        fhat=fhat,
        fhat_stale=reference.stale,
    )
    for policy, gamma, branch, trace in traces:
        gaps = trace.F_vals - fhat
        hit = np.nonzero(gaps <= spec.gap_tol)[0]
        iters_to_tol = int(hit[0]) if hit.size else None
        max_fac, factors = empirical_contraction(trace, fhat)
        bound = None
        if spec.kind == "elastic_net" and mu is not None and mu < L:
            # left blank when mu >= L: the claimed modulus saturates the
            # smoothness constant and certifies nothing meaningful there
            bound = rates.rate(rates.RateQuery("convex", "rpl", L, mu, gamma)).rho
        result.runs.append(
            PolicyRun(
                policy=policy,
                gamma=gamma,
                branch=branch,
                trace=trace,
                iterations_to_tol=iters_to_tol,
                max_contraction=max_fac,
                tail_geomean=tail_geometric_mean(factors),
                analytic_bound=bound,
            )
        )
    return result
