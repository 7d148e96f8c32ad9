"""Chebyshev projection, warm start, coupled residual/Jacobian, and Newton."""

import numpy as np
import pytest

from conftest import constant_problem, linear_problem

from eigenpath import (
    ChebRequest,
    cheb_expand_all,
    eigen_all,
    eval_cheb_u,
    expansion_series,
    jordan_eigenvalues,
    make_spring_chain,
    make_torus_kernel,
)
from eigenpath.chebyshev import (
    _detect_collisions,
    cheb_jacobian,
    cheb_residual,
    degree_pairs,
    gauss_chebyshev_u,
    newton_refine,
    pack_unknowns,
    project_matrix_coeffs,
    unpack_unknowns,
    warm_start,
)
from eigenpath.errors import NewtonDivergenceError
from eigenpath.series import u_product_degrees, u_values


def galerkin_coefficients(lams, vs, a_list, p):
    """Symbolic product oracle: U-coefficients 0..p of A v - lam v and of
    v^T v - 1, built from the full product rule and then truncated."""
    n = vs.shape[1]
    vec = [np.zeros(n, dtype=complex) for _ in range(p + 1)]
    nrm = [(-1.0 + 0j) if k == 0 else 0j for k in range(p + 1)]
    for i in range(p + 1):
        for j in range(p + 1):
            for k in u_product_degrees(i, j):
                if k <= p:
                    vec[k] += a_list[i] @ vs[j] - lams[i] * vs[j]
                    nrm[k] += vs[i] @ vs[j]
    return nrm, vec


class TestQuadrature:
    def test_orthonormality(self):
        s, w = gauss_chebyshev_u(64)
        table = u_values(s, 12)
        gram = (2.0 / np.pi) * (table * w) @ table.T
        assert np.max(np.abs(gram - np.eye(13))) <= 1e-12

    def test_weights_integrate_weight_function(self):
        # integral of sqrt(1-s^2) over [-1,1] is pi/2
        _, w = gauss_chebyshev_u(32)
        assert np.sum(w) == pytest.approx(np.pi / 2, abs=1e-13)


class TestProjection:
    def test_identity_map_on_reference_interval(self):
        ms = project_matrix_coeffs(linear_problem(), (-1.0, 1.0), 3)
        got = [ms.coeffs[k][0, 0].real for k in range(4)]
        np.testing.assert_allclose(got, [0.0, 0.5, 0.0, 0.0], atol=1e-14)

    def test_identity_map_affine_interval(self):
        mu1, mu2 = 0.3, 0.9
        ms = project_matrix_coeffs(linear_problem(), (mu1, mu2), 3, m=128)
        assert ms.coeffs[0][0, 0].real == pytest.approx((mu1 + mu2) / 2, abs=1e-14)
        assert ms.coeffs[1][0, 0].real == pytest.approx((mu2 - mu1) / 4, abs=1e-14)

    def test_basis_function_reproduction(self):
        from eigenpath import ParametricProblem
        from eigenpath.series import SeriesBasis

        basis = SeriesBasis.chebyshev(0.2, 1.4)
        problem = ParametricProblem(
            name="u2",
            n=1,
            eval_at=lambda mu: np.array([[u_values(basis.affine(mu), 2)[2]]]),
            derivs_at=lambda mu0, p: None,
        )
        ms = project_matrix_coeffs(problem, (0.2, 1.4), 4, m=256)
        coeffs = np.array([ms.coeffs[k][0, 0].real for k in range(5)])
        assert coeffs[2] == pytest.approx(1.0, abs=1e-13)
        others = np.delete(coeffs, 2)
        np.testing.assert_allclose(others, 0.0, atol=1e-14)

    def test_quadrature_convergence(self):
        for problem in (make_torus_kernel(8), make_spring_chain(8)):
            interval = (0.25, 1.0) if problem.hermitian else (0.5, 1.0)
            a = project_matrix_coeffs(problem, interval, 20, m=96)
            b = project_matrix_coeffs(problem, interval, 20, m=192)
            assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-12

    def test_quadrature_margin_enforced(self):
        with pytest.raises(ValueError):
            project_matrix_coeffs(linear_problem(), (0.0, 1.0), 8, m=16)

    def test_nonfinite_sample_reported(self):
        from eigenpath import NumericalError, ParametricProblem

        problem = ParametricProblem(
            name="bad", n=1,
            eval_at=lambda mu: np.array([[np.nan if mu > 0.5 else 1.0]]),
            derivs_at=lambda mu0, p: None,
        )
        with pytest.raises(NumericalError) as err:
            project_matrix_coeffs(problem, (0.0, 1.0), 2, m=65)
        assert "node" in str(err.value)


class TestDegreePairs:
    def test_matches_product_rule(self):
        p = 6
        for k in range(p + 1):
            expected = [
                (i, j)
                for i in range(p + 1)
                for j in range(p + 1)
                if k in u_product_degrees(i, j)
            ]
            assert degree_pairs(k, p) == expected


class TestWarmStart:
    def test_constant_problem(self):
        rng = np.random.default_rng(2)
        a0 = rng.normal(size=(4, 4))
        a0 = a0 + a0.T
        coeffs = project_matrix_coeffs(constant_problem(a0), (0.0, 1.0), 3, m=64)
        x0 = warm_start(coeffs, 1)
        lams, vs = unpack_unknowns(x0, 4)
        d = eigen_all(a0 + 0j)
        assert lams[0] == pytest.approx(complex(d.values[1]), abs=1e-10)
        np.testing.assert_allclose(lams[1:], 0.0, atol=1e-10)
        np.testing.assert_allclose(vs[1:], 0.0, atol=1e-10)
        assert vs[0] @ vs[0] == pytest.approx(1.0, abs=1e-12)

    def test_scalar_linear_hand_elimination(self):
        coeffs = project_matrix_coeffs(linear_problem(), (-1.0, 1.0), 2)
        x0 = warm_start(coeffs, 0)
        # blocks solve exactly: lam = (0, 1/2, 0), v = ([1], [0], [0])
        np.testing.assert_allclose(
            x0.real, [0.0, 1.0, 0.5, 0.0, 0.0, 0.0], atol=1e-12
        )
        np.testing.assert_allclose(x0.imag, 0.0, atol=1e-14)

    def test_seed_quality_example1(self, torus8):
        coeffs = project_matrix_coeffs(torus8, (0.25, 1.0), 6)
        grid = np.linspace(0.25, 1.0, 16)
        direct = [eigen_all(torus8.eval_at(mu), hermitian=True).values for mu in grid]
        for index in range(8):
            lams, _ = unpack_unknowns(warm_start(coeffs, index), 8)
            from eigenpath.series import ScalarSeries

            lam_series = ScalarSeries(coeffs.basis, lams)
            for mu, dvals in zip(grid, direct):
                err = np.min(np.abs(eval_cheb_u(lam_series, mu) - dvals))
                assert err <= 0.5


class TestResidual:
    def test_zero_at_exact_constant_solution(self):
        rng = np.random.default_rng(3)
        a0 = rng.normal(size=(5, 5))
        a0 = a0 + a0.T
        coeffs = project_matrix_coeffs(constant_problem(a0), (0.0, 1.0), 3, m=64)
        d = eigen_all(a0 + 0j)
        v0 = d.vectors[:, 2].copy()
        v0 = v0 / np.sqrt(v0 @ v0)
        lams = np.zeros(4, dtype=complex)
        vs = np.zeros((4, 5), dtype=complex)
        lams[0] = d.values[2]
        vs[0] = v0
        r = cheb_residual(pack_unknowns(lams, vs), coeffs)
        assert np.max(np.abs(r)) <= 1e-13 * (1 + np.abs(d.values[2]))

    def test_matches_symbolic_product_oracle(self, torus8):
        coeffs = project_matrix_coeffs(torus8, (0.25, 1.0), 5)
        rng = np.random.default_rng(4)
        size = 6 * 9
        x = rng.normal(size=size) + 1j * rng.normal(size=size)
        lams, vs = unpack_unknowns(x, 8)
        nrm, vec = galerkin_coefficients(lams, vs, coeffs.coeffs, 5)
        r = cheb_residual(x, coeffs)
        for k in range(6):
            base = k * 9
            assert abs(r[base] - nrm[k]) <= 1e-12 * max(1.0, abs(nrm[k]))
            np.testing.assert_allclose(r[base + 1 : base + 9], vec[k], rtol=1e-12, atol=1e-12)


class TestJacobian:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(7)

        from eigenpath import ParametricProblem

        a_fixed = rng.normal(size=(4, 4))
        b_fixed = rng.normal(size=(4, 4))
        problem = ParametricProblem(
            name="rnd", n=4,
            eval_at=lambda mu: a_fixed + mu * b_fixed + 0.3 * np.sin(mu) * np.eye(4),
            derivs_at=lambda mu0, p: None,
        )
        coeffs = project_matrix_coeffs(problem, (0.0, 1.0), 3)
        size = 4 * 5
        x = rng.normal(size=size) + 1j * rng.normal(size=size)
        jac = cheb_jacobian(x, coeffs)
        h = 1e-7
        fd = np.zeros_like(jac)
        for col in range(size):
            step = np.zeros(size, dtype=complex)
            step[col] = h
            fd[:, col] = (cheb_residual(x + step, coeffs) - cheb_residual(x - step, coeffs)) / (
                2 * h
            )
        scale = 1.0 + np.max(np.abs(jac))
        assert np.max(np.abs(jac - fd)) <= 1e-6 * scale

    def test_dimension(self, torus8):
        coeffs = project_matrix_coeffs(torus8, (0.25, 1.0), 3)
        x = np.zeros(4 * 9, dtype=complex)
        assert cheb_jacobian(x, coeffs).shape == (36, 36)

    def test_block_structure_constant_problem(self):
        # at the exact solution of a constant problem, off-diagonal blocks of
        # even block distance vanish and block (0,0) is bordered-shaped
        rng = np.random.default_rng(8)
        a0 = rng.normal(size=(3, 3))
        a0 = a0 + a0.T
        coeffs = project_matrix_coeffs(constant_problem(a0), (0.0, 1.0), 2, m=64)
        d = eigen_all(a0 + 0j)
        v0 = d.vectors[:, 0].copy()
        v0 = v0 / np.sqrt(v0 @ v0)
        lams = np.zeros(3, dtype=complex)
        vs = np.zeros((3, 3), dtype=complex)
        lams[0], vs[0] = d.values[0], v0
        jac = cheb_jacobian(pack_unknowns(lams, vs), coeffs)
        # scalar row: 2 v0^T; lambda column: -v0; core: A0 - lam0 I
        block = jac[:4, :4]
        np.testing.assert_allclose(block[0, 1:], 2 * v0, atol=1e-10)
        np.testing.assert_allclose(block[1:, 0], -v0, atol=1e-10)
        np.testing.assert_allclose(
            block[1:, 1:], coeffs.coeffs[0] - lams[0] * np.eye(3), atol=1e-10
        )
        assert block[0, 0] == 0.0

    def test_printed_system_coupling(self, torus8):
        # block row 0 couples to (lam_1, v_1) through A_1 and v_1 terms
        coeffs = project_matrix_coeffs(torus8, (0.25, 1.0), 3)
        rng = np.random.default_rng(9)
        x = rng.normal(size=4 * 9) + 1j * rng.normal(size=4 * 9)
        lams, vs = unpack_unknowns(x, 8)
        jac = cheb_jacobian(x, coeffs)
        block01 = jac[0:9, 9:18]
        np.testing.assert_allclose(block01[0, 1:], 2 * vs[1], rtol=1e-13)
        np.testing.assert_allclose(block01[1:, 0], -vs[1], rtol=1e-13)
        np.testing.assert_allclose(
            block01[1:, 1:], coeffs.coeffs[1] - lams[1] * np.eye(8), rtol=1e-13
        )


class TestNewton:
    def test_exact_start_converges_immediately(self):
        rng = np.random.default_rng(11)
        a0 = rng.normal(size=(4, 4))
        a0 = a0 + a0.T
        coeffs = project_matrix_coeffs(constant_problem(a0), (0.0, 1.0), 2, m=64)
        d = eigen_all(a0 + 0j)
        v0 = d.vectors[:, 1].copy()
        v0 = v0 / np.sqrt(v0 @ v0)
        lams = np.zeros(3, dtype=complex)
        vs = np.zeros((3, 4), dtype=complex)
        lams[0], vs[0] = d.values[1], v0
        pair = newton_refine(pack_unknowns(lams, vs), coeffs)
        assert pair.diagnostics["newton_iterations"] <= 1

    def test_scalar_linear_unique_solution(self):
        coeffs = project_matrix_coeffs(linear_problem(), (-1.0, 1.0), 2)
        pair = newton_refine(warm_start(coeffs, 0), coeffs)
        lam = pair.lam.coeffs.real
        vec = pair.vec.coeffs.real
        sign = np.sign(vec[0, 0])
        np.testing.assert_allclose(lam, [0.0, 0.5, 0.0], atol=1e-12)
        np.testing.assert_allclose(sign * vec[:, 0], [1.0, 0.0, 0.0], atol=1e-12)

    def test_example1_iteration_budget(self, cheb_e1_p10):
        assert len(cheb_e1_p10) == 8
        for pair in cheb_e1_p10:
            assert pair.diagnostics["newton_iterations"] <= 10

    def test_quadratic_tail(self, torus8):
        # when >= 3 iterations happen, the last two residuals contract
        # quadratically: r_k <= C r_{k-1}^2 with C <= 1e6
        request = ChebRequest(torus8, (0.25, 1.0), 16)
        series = expansion_series(cheb_expand_all(request))
        checked = 0
        for pair in series:
            history = pair.diagnostics["residual_history"]
            if len(history) >= 4:  # initial residual + >= 3 iterations
                checked += 1
                assert history[-1] <= 1e6 * history[-2] ** 2
        if checked == 0:
            pytest.skip("all Example 1 pairs converged in fewer than 3 iterations")

    def test_divergence_carries_best_iterate(self):
        coeffs = project_matrix_coeffs(linear_problem(), (-1.0, 1.0), 2)
        bad = np.full(6, 40.0, dtype=complex)
        with pytest.raises(NewtonDivergenceError) as err:
            newton_refine(bad, coeffs, tol=1e-16, max_iter=2)
        assert err.value.best_x is not None
        assert err.value.best_residual > 0


class TestGalerkinConsistency:
    def test_accepted_solutions_satisfy_truncated_system(self, cheb_e1_p20, torus8):
        coeffs = project_matrix_coeffs(torus8, (0.25, 1.0), 20)
        tol = 1e-12 * (1.0 + max(np.linalg.norm(a) for a in coeffs.coeffs))
        for pair in cheb_e1_p20:
            nrm, vec = galerkin_coefficients(
                pair.lam.coeffs, pair.vec.coeffs, coeffs.coeffs, 20
            )
            assert max(abs(v) for v in nrm) <= tol
            assert max(np.max(np.abs(v)) for v in vec) <= tol

    def test_truncated_normalization(self, cheb_e1_p20):
        for pair in cheb_e1_p20:
            vs = pair.vec.coeffs
            p = pair.order
            norm_coeffs = np.zeros(p + 1, dtype=complex)
            for i in range(p + 1):
                for j in range(p + 1):
                    for k in u_product_degrees(i, j):
                        if k <= p:
                            norm_coeffs[k] += vs[i] @ vs[j]
            assert abs(norm_coeffs[0] - 1.0) <= 1e-10
            assert np.max(np.abs(norm_coeffs[1:])) <= 1e-10


class TestExpandAll:
    def test_constant_problem_exact(self):
        rng = np.random.default_rng(13)
        a0 = rng.normal(size=(4, 4))
        a0 = a0 + a0.T
        results = cheb_expand_all(ChebRequest(constant_problem(a0), (0.0, 1.0), 3, quad_m=64))
        series = expansion_series(results)
        assert len(series) == 4
        d = eigen_all(a0 + 0j)
        got = sorted(pair.lam.coeffs[0].real for pair in series)
        np.testing.assert_allclose(got, sorted(d.values.real), atol=1e-10)
        for pair in series:
            np.testing.assert_allclose(pair.lam.coeffs[1:], 0.0, atol=1e-10)
            np.testing.assert_allclose(pair.vec.coeffs[1:], 0.0, atol=1e-10)

    def test_jordan_matches_analytic_roots(self, jordan8):
        series = expansion_series(cheb_expand_all(ChebRequest(jordan8, (0.10, 0.50), 20)))
        assert len(series) == 8
        for mu in np.linspace(0.10, 0.50, 21)[1:-1]:
            oracle = jordan_eigenvalues(8, mu)
            for pair in series:
                lam = eval_cheb_u(pair.lam, mu)
                assert np.min(np.abs(oracle - lam)) <= 1e-6

    def test_collision_detection_flags_duplicates(self, cheb_e1_p10):
        duplicated = [cheb_e1_p10[0], cheb_e1_p10[0], cheb_e1_p10[1]]
        pairs = [type(p)(p.lam, p.vec, dict(p.diagnostics)) for p in duplicated]
        with pytest.warns(UserWarning):
            collisions = _detect_collisions(pairs, pairs[0].basis)
        assert (0, 1) in collisions
        assert 1 in pairs[0].diagnostics["collisions"]

    def test_no_collisions_on_example1(self, cheb_e1_p10):
        for pair in cheb_e1_p10:
            assert "collisions" not in pair.diagnostics


class TestRequestValidation:
    def test_interval_and_order(self, torus8):
        with pytest.raises(ValueError):
            ChebRequest(torus8, (1.0, 0.5), 4)
        with pytest.raises(ValueError):
            ChebRequest(torus8, (0.0, 1.0), -1)
        with pytest.raises(ValueError):
            ChebRequest(torus8, (0.0, 1.0), 8, quad_m=16)
