import numpy as np
import pytest
import scipy.sparse as sp

from midkit import DataError, NumericalError
from midkit.design import LinearSystem
from midkit.solver import (
    SolverConfig,
    solve,
    solve_normal_cholesky,
    solve_nullspace,
    solve_penalty,
)

from _systems import kkt_is_nonsingular, kkt_oracle, projector_pinv_oracle, random_tiny_system


def bare_system(design, constraints=None, terms=None):
    design = np.asarray(design, dtype=np.float64)
    n, m = design.shape
    constraints = (
        np.zeros((0, m)) if constraints is None else np.asarray(constraints, dtype=np.float64)
    )
    return LinearSystem(
        design=sp.csr_matrix(design),
        constraints=constraints,
        delta=design.sum(axis=0),
        terms=terms or [(0,)],
        layout=[slice(0, m)],
        n_rows=n,
    )


class TestNullspace:
    def test_duplicate_columns_split_equally(self):
        design = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
        system = bare_system(design)
        report = solve_nullspace(system, np.array([2.0, 2.0, 0.0]))
        assert report.coefficients[0] == pytest.approx(report.coefficients[1], abs=1e-12)
        assert report.coefficients[0] == pytest.approx(1.0, abs=1e-10)
        assert report.residual_ss <= 1e-20

    def test_tiny_system_matches_kkt_oracle(self, rng):
        design = rng.random((6, 4))
        constraints = design.sum(axis=0, keepdims=True)
        system = bare_system(design, constraints)
        y = np.arange(6) - 2.5
        report = solve_nullspace(system, y)
        oracle = kkt_oracle(system, y)
        assert np.max(np.abs(report.coefficients - oracle)) <= 1e-10

    def test_unconstrained_matches_normal_equations(self, rng):
        design = rng.random((12, 5)) + 0.1
        y = rng.standard_normal(12)
        system = bare_system(design)
        report = solve_nullspace(system, y)
        oracle = np.linalg.solve(design.T @ design, design.T @ y)
        assert np.max(np.abs(report.coefficients - oracle)) <= 1e-10

    def test_randomized_systems_match_oracles(self):
        rng = np.random.default_rng(7)
        checked = 0
        for i in range(60):
            kind = i % 3
            system, y = random_tiny_system(
                rng,
                duplicate_feature=(kind == 1),
                structured_missing=(kind == 2),
            )
            report = solve_nullspace(system, y)
            # feasibility in all cases
            if system.constraints.shape[0]:
                scale = max(1.0, np.abs(report.coefficients).max() * system.delta.max())
                assert report.constraint_violation <= 1e-8 * scale
            if kkt_is_nonsingular(system):
                oracle = kkt_oracle(system, y)
                assert np.max(np.abs(report.coefficients - oracle)) <= 1e-8
            pinv_beta = projector_pinv_oracle(system, y)
            assert np.max(np.abs(report.coefficients - pinv_beta)) <= 1e-8
            checked += 1
        assert checked >= 50

    def test_min_norm_dominates_perturbed_feasible_solutions(self):
        rng = np.random.default_rng(21)
        found = 0
        for _ in range(30):
            system, y = random_tiny_system(rng, duplicate_feature=True)
            report = solve_nullspace(system, y)
            live = np.flatnonzero(system.live)
            scale = 1.0 / np.sqrt(system.delta[live])
            x = system.design.toarray()[:, live] * scale
            m = system.constraints[:, live] * scale
            stack = np.vstack([x, m]) if m.size else x
            _, s, vt = np.linalg.svd(stack)
            null_dims = vt[np.sum(s > s[0] * 1e-10) :]
            if null_dims.shape[0] == 0:
                continue
            found += 1
            base_norm = np.linalg.norm(np.sqrt(system.delta) * report.coefficients)
            for direction in null_dims[:3]:
                other = report.coefficients.copy()
                other[live] += scale * direction
                resid_other = y - system.design @ other
                resid_base = y - system.design @ report.coefficients
                assert resid_other @ resid_other == pytest.approx(
                    resid_base @ resid_base, rel=1e-8, abs=1e-10
                )
                other_norm = np.linalg.norm(np.sqrt(system.delta) * other)
                assert base_norm <= other_norm + 1e-9
        assert found >= 5

    def test_feasible_subspace_stationarity(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            system, y = random_tiny_system(rng)
            report = solve_nullspace(system, y)
            live = np.flatnonzero(system.live)
            scale = 1.0 / np.sqrt(system.delta[live])
            x = system.design.toarray()[:, live] * scale
            m = system.constraints[:, live] * scale
            if m.shape[0]:
                m = m[np.abs(m).max(axis=1) > 0]
                _, s, vt = np.linalg.svd(m, full_matrices=True)
                r = int(np.sum(s > s[0] * max(m.shape) * np.finfo(float).eps))
                z = vt[r:].T
            else:
                z = np.eye(x.shape[1])
            gamma = report.coefficients[live] / scale
            grad = z.T @ (x.T @ (y - x @ gamma))
            assert np.linalg.norm(grad) <= 1e-8 * max(np.linalg.norm(x.T @ y), 1e-12)

    def test_rejects_bad_inputs(self, rng):
        system = bare_system(rng.random((5, 3)))
        with pytest.raises(NumericalError, match="non-finite"):
            solve_nullspace(system, np.array([1.0, 2.0, np.nan, 0.0, 1.0]))
        dead = bare_system(np.zeros((4, 2)))
        with pytest.raises(NumericalError, match="dead"):
            solve_nullspace(dead, np.zeros(4))

    def test_deterministic(self, rng):
        system, y = random_tiny_system(np.random.default_rng(5))
        a = solve_nullspace(system, y).coefficients
        b = solve_nullspace(system, y).coefficients
        assert np.array_equal(a, b)


class TestPenalty:
    def test_empty_constraints_kappa_irrelevant(self, rng):
        design = rng.random((10, 4)) + 0.05
        y = rng.standard_normal(10)
        system = bare_system(design)
        a = solve_penalty(system, y, SolverConfig(method="penalty", kappa=10.0))
        b = solve_penalty(system, y, SolverConfig(method="penalty", kappa=1e8))
        assert np.allclose(a.coefficients, b.coefficients, atol=1e-12)
        exact = solve_nullspace(system, y)
        assert np.allclose(a.coefficients, exact.coefficients, atol=1e-9)

    @staticmethod
    def binding_system():
        # the unconstrained optimum (1, 1) conflicts with the constraint
        # beta1 + beta2 = 0, so the penalty violation genuinely scales in kappa
        return bare_system(np.eye(2), constraints=[[1.0, 1.0]]), np.array([1.0, 1.0])

    def test_violation_shrinks_quadratically_in_kappa(self):
        system, y = self.binding_system()
        v1 = solve_penalty(system, y, SolverConfig(method="penalty", kappa=1e3)).constraint_violation
        v2 = solve_penalty(system, y, SolverConfig(method="penalty", kappa=1e4)).constraint_violation
        assert v1 > 0 and v2 > 0
        ratio = v1 / v2
        assert 50.0 <= ratio <= 200.0

    def test_violation_monotone_in_kappa(self):
        system, y = self.binding_system()
        violations = [
            solve_penalty(system, y, SolverConfig(method="penalty", kappa=k)).constraint_violation
            for k in (1e2, 1e3, 1e4)
        ]
        assert violations[0] > violations[1] > violations[2]

    def test_agrees_with_nullspace(self):
        system, y = random_tiny_system(np.random.default_rng(17))
        exact = solve_nullspace(system, y)
        approx = solve_penalty(system, y, SolverConfig(method="penalty", kappa=1e4))
        scale = float(y.max() - y.min())
        fitted_diff = system.design @ (exact.coefficients - approx.coefficients)
        assert np.max(np.abs(fitted_diff)) <= 1e-3 * scale

    def test_kappa_validation(self):
        with pytest.raises(DataError, match="kappa"):
            SolverConfig(method="penalty", kappa=0.5)


class TestNormalCholesky:
    def test_matches_penalty_when_well_conditioned(self):
        system, y = random_tiny_system(np.random.default_rng(19))
        a = solve_penalty(system, y, SolverConfig(method="penalty", kappa=1e4))
        b = solve_normal_cholesky(system, y, SolverConfig(method="normal_cholesky", kappa=1e4))
        assert np.max(np.abs(a.coefficients - b.coefficients)) <= 1e-8
        assert b.rank is None

    def test_rank_deficient_triggers_ridge(self):
        design = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
        system = bare_system(design)
        report = solve_normal_cholesky(system, np.array([1.0, 1.0, 2.0]))
        assert report.ridge_applied
        assert report.method_used == "normal_cholesky"

    def test_deterministic(self):
        system, y = random_tiny_system(np.random.default_rng(23))
        a = solve_normal_cholesky(system, y).coefficients
        b = solve_normal_cholesky(system, y).coefficients
        assert np.array_equal(a, b)


class TestDispatch:
    def test_solve_routes_by_method(self):
        system, y = random_tiny_system(np.random.default_rng(29))
        for method in ("nullspace_svd", "penalty", "normal_cholesky"):
            report = solve(system, y, SolverConfig(method=method))
            assert report.method_used == method
            assert report.residual_ss >= 0.0

    def test_unknown_method_rejected(self):
        with pytest.raises(DataError, match="unknown solver method"):
            SolverConfig(method="qr")

    def test_report_fields(self):
        system, y = random_tiny_system(np.random.default_rng(31))
        report = solve(system, y)
        assert report.elapsed >= 0.0
        assert report.constraint_violation >= 0.0
        assert report.coefficients.shape == (system.n_cols,)
