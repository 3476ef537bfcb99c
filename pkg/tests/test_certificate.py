import math
from fractions import Fraction

import numpy as np
import pytest

from proxrate import certificate as cm
from proxrate.errors import DomainError
from proxrate.interp import Triple, TriplePair, cond_A, cond_B, cond_C, cond_D, cond_E_prime
from proxrate.pgm import PgmConfig, estimate_fstar, run_pgm
from proxrate.problem import generate_instance
from proxrate.rates import RateQuery, rate


def random_assignment(rng, gamma, dim=6):
    x1, g1, g2, s2 = (rng.standard_normal(dim) for _ in range(4))
    x2 = x1 - gamma * (g1 + s2)
    vs = [x1, g1, g2, s2]
    gram = np.array([[a @ b for b in vs] for a in vs])
    scalars = rng.standard_normal(5)
    return x1, x2, g1, g2, s2, gram, scalars


class TestCatalog:
    def test_eight_cases(self):
        assert len(cm.certificate_catalog()) == 8

    def test_case_ids_unique_and_resolvable(self):
        ids = [c.case_id for c in cm.certificate_catalog()]
        assert len(set(ids)) == 8
        for cid in ids:
            assert cm.certificate_for(cid).case_id == cid
        with pytest.raises(DomainError):
            cm.certificate_for("Thm9.9")

    def test_first_nonconvex_multiplier_values(self):
        cert = cm.certificate_for("Thm3.1-case1")
        L, mu, g = 1.0, 0.1, 1.0
        values = {label: fn(L, mu, g) for (_, label, fn) in cert.multipliers}
        assert values["alpha1"] == pytest.approx(6.0 / 4.3, rel=1e-15)
        assert values["alpha2"] == pytest.approx(2.0 / 4.3, rel=1e-15)
        assert values["beta1"] == pytest.approx(4.0 / 4.3, rel=1e-15)
        assert values["lambda1"] == pytest.approx(0.3 / 4.3, rel=1e-14)
        coeff = cert.remainder_coeff(L, mu, g)
        assert coeff == pytest.approx((1.0 - 3.0) / (4.0 * 4.3), rel=1e-14)

    def test_nonconvex_rpl_unit_multipliers(self, rng):
        cert = cm.certificate_for("Thm4.1")
        for _ in range(20):
            L = float(np.exp(rng.uniform(-2, 2)))
            mu = L * float(rng.uniform(0.05, 0.95))
            g = float(rng.uniform(1e-3, 2 - 1e-3)) / L
            values = {label: fn(L, mu, g) for (_, label, fn) in cert.multipliers}
            assert values["alpha1"] == 1.0 and values["beta1"] == 1.0
            assert cert.remainder_coeff(L, mu, g) == pytest.approx(-1.0 / (4.0 * L), rel=1e-15)
            chk = cm.verify_certificate(cert, L, mu, g)
            assert chk.identity_residual <= 1e-12

    def test_remainder_vanishes_at_sqrt3_boundary(self):
        cert = cm.certificate_for("Thm3.1-case1")
        L = 1.0
        g = math.sqrt(3.0) / L
        assert cert.remainder_coeff(L, 0.3, g) == pytest.approx(0.0, abs=1e-15)

    def test_mid_interval_rpl_multipliers(self):
        cert = cm.certificate_for("Thm4.2-case2")
        values = {label: fn(1.0, 0.1, 1.25) for (_, label, fn) in cert.multipliers}
        assert values["alpha1"] == pytest.approx(1.0 / 0.875, rel=1e-15)
        assert values["lambda1"] == pytest.approx(0.125 * 0.5 / 0.875, rel=1e-14)

    def test_large_step_cases_share_multipliers(self, rng):
        a = cm.certificate_for("Thm3.2-case2")
        b = cm.certificate_for("Thm4.2-case3")
        for _ in range(30):
            L = float(np.exp(rng.uniform(-2, 2)))
            mu = L * float(rng.uniform(0.05, 0.95))
            g = float(rng.uniform(1.5 + 1e-6, 2 - 1e-6)) / L
            va = sorted(fn(L, mu, g) for (_, _, fn) in a.multipliers)
            vb = sorted(fn(L, mu, g) for (_, _, fn) in b.multipliers)
            assert np.allclose(va, vb, rtol=1e-15)

    def test_rate_matches_rates_module(self, rng):
        for cert in cm.certificate_catalog():
            for _ in range(10):
                L = float(np.exp(rng.uniform(-1, 2)))
                mu = L * float(rng.uniform(0.05, 0.95))
                grid = cm.interval_grid(cert, L, 7)
                g = float(grid[3])
                assert cert.rate(L, mu, g) == pytest.approx(
                    rate(RateQuery(cert.fn_class, cert.ineq, L, mu, g)).rho, rel=1e-13
                )


class TestBuildConstraint:
    def test_unknown_name(self):
        with pytest.raises(DomainError):
            cm.build_constraint("Z99", 1.0, 0.1, 1.0)

    def test_c12_structure(self):
        expr = cm.build_constraint("C12", 1.0, 0.1, 0.7)
        assert np.allclose(expr.c, [0.0, 0.0, -1.0, 1.0, 0.0])
        g1_row = np.asarray(expr.Q)[1]
        # the only coupling of g1 enters through the x2 substitution
        assert g1_row[3] != 0.0
        assert g1_row[0] == 0.0 and g1_row[1] == 0.0 and g1_row[2] == 0.0

    @pytest.mark.parametrize("gamma", [0.3, 0.9, 1.7])
    def test_matches_scalar_conditions(self, rng, gamma):
        L, mu, fstar_idx = 1.3, 0.21, 4
        for _ in range(25):
            x1, x2, g1, g2, s2, gram, scal = random_assignment(rng, gamma)
            f1v, f2v, h1v, h2v, fsv = scal
            tf1 = Triple(x1, g1, f1v)
            tf2 = Triple(x2, g2, f2v)
            th2 = Triple(x2, s2, h2v)
            pair2 = TriplePair(tf2, th2)
            pair1 = TriplePair(tf1, Triple(x1, np.zeros_like(x1), h1v))
            expected = {
                "A12": cond_A(tf1, tf2, L),
                "A21": cond_A(tf2, tf1, L),
                "B12": cond_B(tf1, tf2, L),
                "B21": cond_B(tf2, tf1, L),
                "C12": cond_C(Triple(x1, np.zeros_like(x1), h1v), th2),
                "D2": cond_D(pair2, fsv, mu),
                "E2": cond_D(pair2, fsv, mu),
                "E1": cond_E_prime(pair1, s2, fsv, mu),
                "Eprime1": cond_E_prime(pair1, s2, fsv, mu),
            }
            for name, want in expected.items():
                expr = cm.build_constraint(name, L, mu, gamma)
                got = float(expr.evaluate(gram, scal))
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12), name

    def test_d2_zero_at_stationary_optimal_assignment(self, rng):
        gamma, L, mu = 0.8, 1.0, 0.4
        x1 = rng.standard_normal(6)
        g1 = rng.standard_normal(6)
        s2 = rng.standard_normal(6)
        g2 = -s2  # g2 + s2 = 0
        vs = [x1, g1, g2, s2]
        gram = np.array([[a @ b for b in vs] for a in vs])
        scal = np.array([0.3, 0.2, 0.1, 0.5, 0.7])  # f2 + h2 = Fstar
        expr = cm.build_constraint("D2", L, mu, gamma)
        assert float(expr.evaluate(gram, scal)) == pytest.approx(0.0, abs=1e-14)

    def test_batched_matches_pointwise(self):
        grid = np.linspace(0.1, 1.4, 9)
        batched = cm.build_constraint("B12", 1.0, 0.1, grid)
        for i, g in enumerate(grid):
            single = cm.build_constraint("B12", 1.0, 0.1, float(g))
            assert np.allclose(np.asarray(batched.Q)[i], np.asarray(single.Q))


class TestVerification:
    def test_all_cases_random_parameters(self, rng):
        for cert in cm.certificate_catalog():
            for _ in range(10):
                L = float(np.exp(rng.uniform(-2, 3)))
                mu = L * float(rng.uniform(0.01, 0.99))
                grid = cm.interval_grid(cert, L, 100)
                chk = cm.verify_certificate(cert, L, mu, grid)
                assert chk.ok, (cert.case_id, chk.failures)
                assert chk.identity_residual <= 1e-11
                assert chk.min_multiplier >= -1e-14
                assert chk.remainder_max_eigenvalue <= 1e-10

    def test_equality_case_combination_is_identically_zero(self, rng):
        cert = cm.certificate_for("Thm4.2-case2")
        for _ in range(20):
            L = float(np.exp(rng.uniform(-1, 2)))
            mu = L * float(rng.uniform(0.05, 0.95))
            grid = cm.interval_grid(cert, L, 50)
            combo = cert.weighted_combination(L, mu, grid)
            assert float(np.abs(np.asarray(combo.Q)).max()) <= 1e-13
            assert float(np.abs(np.asarray(combo.c)).max()) <= 1e-13

    def test_exact_mode_all_cases(self, rng):
        for cert in cm.certificate_catalog():
            L = float(np.exp(rng.uniform(-1, 1)))
            mu = L * float(rng.uniform(0.1, 0.9))
            grid = cm.interval_grid(cert, L, 9)
            chk = cm.verify_certificate(cert, L, mu, grid, exact=True)
            assert chk.ok and chk.identity_residual == 0.0

    def test_exact_mode_catches_tampering(self):
        cert = cm.certificate_for("Thm4.1")
        bad = cm.Certificate(
            case_id=cert.case_id,
            fn_class=cert.fn_class,
            ineq=cert.ineq,
            multipliers=cert.multipliers,
            rate=lambda L, m, g: cert.rate(L, m, g) * Fraction(1001, 1000)
            if isinstance(g, Fraction)
            else cert.rate(L, m, g) * 1.001,
            remainder_coeff=cert.remainder_coeff,
            remainder_weights=cert.remainder_weights,
            interval=cert.interval,
            check_kind=cert.check_kind,
        )
        chk = cm.verify_certificate(bad, 1.0, 0.1, 0.9)
        assert not chk.ok
        assert any("identity residual" in f for f in chk.failures)
        chk_exact = cm.verify_certificate(bad, 1.0, 0.1, 0.9, exact=True)
        assert not chk_exact.ok

    def test_gamma_outside_interval_rejected(self):
        cert = cm.certificate_for("Thm3.2-case1")
        with pytest.raises(DomainError):
            cm.verify_certificate(cert, 1.0, 0.1, 1.7)

    def test_negative_multiplier_reported(self):
        cert = cm.certificate_for("Thm3.2-case1")
        bad = cm.Certificate(
            case_id=cert.case_id,
            fn_class=cert.fn_class,
            ineq=cert.ineq,
            multipliers=tuple(
                (cname, label, (lambda L, m, g: -1e-6) if label == "alpha2" else fn)
                for (cname, label, fn) in cert.multipliers
            ),
            rate=cert.rate,
            remainder_coeff=cert.remainder_coeff,
            remainder_weights=cert.remainder_weights,
            interval=cert.interval,
            check_kind=cert.check_kind,
        )
        chk = cm.verify_certificate(bad, 1.0, 0.1, 0.9)
        assert any("negative multiplier" in f for f in chk.failures)


class TestSweep:
    def test_summary_fields(self):
        s = cm.sweep_verify("Thm3.2-case1", 1.0, 0.1, np.linspace(0.01, 1.5, 200))
        assert s.n_points == 200
        assert s.worst_identity_residual <= 1e-11
        assert s.min_multiplier >= 0.0

    @pytest.mark.parametrize("mu", [0.01, 0.1, 0.5])
    def test_convex_pl_cases_across_moduli(self, mu):
        for case in ("Thm3.2-case1", "Thm3.2-case2"):
            cert = cm.certificate_for(case)
            s = cm.sweep_verify(case, 1.0, mu, cm.interval_grid(cert, 1.0, 200))
            assert s.worst_identity_residual <= 1e-11

    def test_empty_grid(self):
        s = cm.sweep_verify("Thm3.2-case1", 1.0, 0.1, [])
        assert s.n_points == 0

    def test_point_outside_interval_names_it(self):
        with pytest.raises(DomainError) as err:
            cm.sweep_verify("Thm3.2-case1", 1.0, 0.1, [0.5, 1.7])
        assert "1.7" in str(err.value)


class TestConsequenceOnTraces:
    def test_one_step_gap_bounded_by_certificate_rate(self):
        data = generate_instance("elastic_net", 200, 20, 0.1, seed=0, delta=0.01)
        problem = data.problem()
        L, mu = problem.f.lipschitz, problem.mu
        fstar = estimate_fstar(problem, np.zeros(20)).value
        gen = np.random.default_rng(99)
        for cert in cm.certificate_catalog():
            if (cert.fn_class, cert.ineq) != ("convex", "rpl"):
                continue
            grid = cm.interval_grid(cert, L, 5)
            g = float(grid[2])
            tau = cert.rate(L, mu, g)
            for _ in range(20):
                x1 = gen.standard_normal(20) * gen.uniform(0.1, 5.0)
                tr = run_pgm(problem, PgmConfig(step=g, max_iters=1), x1)
                gap1 = tr.F_vals[0] - fstar
                gap2 = problem.objective(tr.final_point) - fstar
                assert gap2 <= tau * gap1 + 1e-9
