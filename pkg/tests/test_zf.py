import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seekcert.zf import (
    BETA,
    bank_input_column,
    bank_state_matrix,
    build_multiplier,
    build_variable_constraints,
    filter_bank_realization,
    iqc_residual,
)


def random_feasible_weights(rng, nu, slack=0.5):
    """Entrywise-positive bank weights are always admissible; H covers the row."""
    P1 = rng.uniform(0.1, 1.0, nu)
    P3 = rng.uniform(0.1, 1.0, nu)
    H = float(np.sum(P1) + np.sum(P3) + slack * rng.uniform(0.0, 1.0))
    return H, P1, P3


def quadratic_pair(rng, d, m, L, n, dt, curvature=None):
    """Sampled (y~, u~) with u~ = grad f(y~ + y*) for a random quadratic f."""
    ts = dt * np.arange(n)
    if d == 1:
        Q = np.array([[curvature if curvature is not None else rng.uniform(m, L)]])
    else:
        V, _ = np.linalg.qr(rng.normal(size=(d, d)))
        eigs = rng.uniform(m, L, d)
        eigs[0], eigs[-1] = m, L
        Q = V @ np.diag(eigs) @ V.T
    decay = rng.uniform(0.2, 0.8)
    freqs = rng.uniform(0.5, 3.0, d)
    amps = rng.normal(size=d)
    y = np.stack([amps[j] * np.exp(-decay * ts) * np.sin(freqs[j] * ts + rng.uniform(0, 3)) for j in range(d)], axis=1)
    u = y @ Q.T  # grad of 0.5 (y-y*)^T Q (y-y*) shifted to deviation coordinates
    return y, u


class TestBankMatrices:
    def test_bank_matrix_structure(self):
        A = bank_state_matrix(4)
        assert np.all(np.diag(A) == BETA)
        assert np.all(np.diag(A, -1) == 1.0)
        assert np.count_nonzero(A) == 4 + 3

    def test_bank_eigenvalues_all_at_beta(self):
        for nu in (1, 2, 5):
            A = bank_state_matrix(nu)
            # lower triangular: spectrum is the diagonal, exactly
            assert np.all(np.linalg.eigvals(A) == BETA)
            Aa = A - 2 * 0.25 * np.eye(nu)
            assert np.all(np.linalg.eigvals(Aa) == BETA - 0.5)

    def test_closed_form_inverse_action(self):
        for nu in (1, 2, 3, 6):
            x = np.linalg.solve(bank_state_matrix(nu), bank_input_column(nu)).ravel()
            np.testing.assert_allclose(x, -np.ones(nu), atol=1e-12)


class TestBuildMultiplier:
    def test_order1_realization_entries(self):
        mult = build_multiplier(1, 0.0, 1.0, 10.0, 1)
        np.testing.assert_array_equal(mult.sys.A, np.diag([-1.0, -1.0]))
        np.testing.assert_array_equal(mult.sys.B, [[-1.0, 1.0], [10.0, -1.0]])
        np.testing.assert_array_equal(mult.sys.C, [[0, 0], [1, 0], [0, 0], [0, 1]])
        np.testing.assert_array_equal(mult.sys.D, [[-1.0, 1.0], [0, 0], [10.0, -1.0], [0, 0]])

    def test_alpha_shift_and_collapsed_sector(self):
        mult = build_multiplier(1, 0.5, 1.0, 1.0, 1)
        np.testing.assert_array_equal(mult.sys.A, np.diag([-2.0, -2.0]))
        np.testing.assert_array_equal(mult.sys.B, [[-1.0, 1.0], [1.0, -1.0]])

    def test_order2_dimensions(self):
        mult = build_multiplier(2, 0.0, 1.0, 10.0, 1)
        assert mult.sys.A.shape == (4, 4)
        assert mult.sys.C.shape == (6, 4)

    @given(nu=st.integers(1, 4), d=st.integers(1, 3))
    @settings(max_examples=20, deadline=None)
    def test_dimension_identities(self, nu, d):
        mult = build_multiplier(nu, 0.1, 1.0, 5.0, d)
        assert mult.sys.A.shape == (2 * nu * d, 2 * nu * d)
        assert mult.sys.B.shape == (2 * nu * d, 2 * d)
        assert mult.sys.C.shape == (2 * (nu + 1) * d, 2 * nu * d)
        assert mult.sys.D.shape == (2 * (nu + 1) * d, 2 * d)

    def test_sector_violations_rejected(self):
        with pytest.raises(ValueError, match="sector"):
            build_multiplier(1, 0.0, 10.0, 1.0, 1)
        with pytest.raises(ValueError, match="sector"):
            build_multiplier(1, 0.0, 0.0, 1.0, 1)
        with pytest.raises(ValueError, match="nu"):
            build_multiplier(0, 0.0, 1.0, 1.0, 1)


class TestFilterBank:
    @pytest.mark.parametrize("nu", [1, 2, 3, 5])
    def test_frequency_response_matches_transfer_vector(self, nu):
        bank = filter_bank_realization(nu)
        for w in (0.0, 0.3, 1.7, 10.0):
            s = 1j * w
            n = bank.A.shape[0]
            if n:
                G = bank.C @ np.linalg.solve(s * np.eye(n) - bank.A, bank.B) + bank.D
            else:
                G = bank.D.astype(complex)
            expected = np.array([1.0] + [s**k / (s - BETA) ** (nu - 1) for k in range(1, nu)]).reshape(-1, 1)
            np.testing.assert_allclose(G, expected, atol=1e-10)


class TestVariableSet:
    def test_order1_row_reads_h_minus_sums(self):
        vs = build_variable_constraints(1)
        assert vs.l1_margin(2.0, [1.0], [1.0]) == pytest.approx(0.0)
        assert vs.l1_margin(3.0, [1.0], [1.0]) == pytest.approx(1.0)

    def test_order2_row_coefficients(self):
        vs = build_variable_constraints(2)
        np.testing.assert_allclose(vs.a_inv_b, [-1.0, -1.0])
        assert vs.l1_margin(5.0, [1.0, 2.0], [0.5, 0.5]) == pytest.approx(5.0 - 4.0)

    def test_assembled_p_order1_example(self):
        vs = build_variable_constraints(1)
        P = vs.p_matrix(2.0, [1.0], [1.0])
        np.testing.assert_array_equal(
            P, [[0, 0, 2, -1], [0, 0, -1, 0], [2, -1, 0, 0], [-1, 0, 0, 0]]
        )

    def test_p_structure_zero_diagonal_blocks(self):
        rng = np.random.default_rng(0)
        for nu in (1, 2, 4):
            vs = build_variable_constraints(nu)
            H, P1, P3 = random_feasible_weights(rng, nu)
            P = vs.p_matrix(H, P1, P3)
            k = nu + 1
            assert np.array_equal(P, P.T)
            assert not P[:k, :k].any()
            assert not P[k:, k:].any()

    def test_membership_order1(self):
        vs = build_variable_constraints(1)
        assert vs.contains(2.0, [1.0], [1.0])
        assert not vs.contains(1.0, [1.0], [1.0])   # row negative
        assert not vs.contains(2.0, [-1.0], [1.0])  # bank weight negative

    def test_positive_weights_admit_certificates(self):
        # entrywise-positive weights satisfy the bank positivity LMIs; exhibit
        # the certificate by solving the (small) feasibility problem
        import cvxpy as cp

        rng = np.random.default_rng(1)
        for nu in (2, 3):
            vs = build_variable_constraints(nu)
            _, P1, _ = random_feasible_weights(rng, nu)
            X = cp.Variable((nu - 1, nu - 1), symmetric=True)
            # affine combination of basis evaluations of the numeric builder
            n = nu - 1
            const = vs.positivity_block(np.zeros((n, n)), P1)
            expr = cp.Constant(const)
            for i in range(n):
                for j in range(i, n):
                    E = np.zeros((n, n))
                    E[i, j] = E[j, i] = 1.0
                    basis = vs.positivity_block(E, np.zeros(nu))
                    expr = expr + X[i, j] * basis
            prob = cp.Problem(cp.Minimize(0), [expr >> 1e-7 * np.eye(n + 1)])
            prob.solve(solver="CLARABEL")
            assert prob.status == "optimal"
            assert vs.contains(float(np.sum(P1)) * 2 + 1.0, P1, P1, X1=X.value, X3=X.value)

    def test_beta_not_tunable(self):
        with pytest.raises(ValueError, match="fixed"):
            build_variable_constraints(2, beta=-2.0)


class TestIqcResidual:
    def test_zero_signals_zero_residual(self):
        mult = build_multiplier(1, 0.0, 1.0, 10.0, 1)
        vs = build_variable_constraints(1)
        P = vs.p_matrix(2.0, [1.0], [1.0])
        y = np.zeros((100, 1))
        assert iqc_residual(mult, P, y, y, dt=0.01) == 0.0

    def test_scaling_p_scales_residual(self):
        rng = np.random.default_rng(5)
        mult = build_multiplier(2, 0.05, 1.0, 10.0, 1)
        vs = build_variable_constraints(2)
        H, P1, P3 = random_feasible_weights(rng, 2)
        P = vs.p_matrix(H, P1, P3)
        y, u = quadratic_pair(rng, 1, 1.0, 10.0, 2000, 5e-3)
        r1 = iqc_residual(mult, P, y, u, dt=5e-3)
        r2 = iqc_residual(mult, 2.0 * P, y, u, dt=5e-3)
        assert r2 == pytest.approx(2.0 * r1, rel=1e-12)

    def test_mismatched_grids_rejected(self):
        mult = build_multiplier(1, 0.0, 1.0, 10.0, 1)
        P = build_variable_constraints(1).p_matrix(2.0, [1.0], [1.0])
        with pytest.raises(ValueError, match="grid"):
            iqc_residual(mult, P, np.zeros((10, 1)), np.zeros((9, 1)), dt=0.01)
        with pytest.raises(ValueError, match="horizon"):
            iqc_residual(mult, P, np.zeros((10, 1)), np.zeros((10, 1)), dt=0.01, T=5.0)

    def test_weight_matrix_file_replay(self, tmp_path):
        # admissible weight samples round-trip through the matrix file exactly
        from seekcert.statespace import load_matrix, save_matrix

        rng = np.random.default_rng(8)
        vs = build_variable_constraints(3)
        H, P1, P3 = random_feasible_weights(rng, 3)
        P = vs.p_matrix(H, P1, P3)
        path = tmp_path / "weights.txt"
        save_matrix(P, path)
        np.testing.assert_array_equal(load_matrix(path), P)

    def test_decaying_exponential_residual_nonnegative_under_refinement(self):
        # oracle run at two step sizes: the residual floor shrinks with dt
        rng = np.random.default_rng(11)
        mult = build_multiplier(1, 0.0, 1.0, 10.0, 1)
        vs = build_variable_constraints(1)
        H, P1, P3 = random_feasible_weights(rng, 1)
        P = vs.p_matrix(H, P1, P3)
        for dt in (2e-3, 1e-3):
            ts = dt * np.arange(int(10.0 / dt) + 1)
            y = np.exp(-0.4 * ts).reshape(-1, 1)
            u = 1.0 * y  # f = m/2 y^2 at the sector floor
            res = iqc_residual(mult, P, y, u, dt=dt)
            assert res >= -1e-8

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=15, deadline=None)
    def test_residual_nonnegative_random_quadratics(self, seed):
        rng = np.random.default_rng(seed)
        nu = int(rng.integers(1, 3))
        d = int(rng.integers(1, 3))
        alpha = float(rng.choice([0.0, 0.05]))
        mult = build_multiplier(nu, alpha, 1.0, 10.0, d)
        vs = build_variable_constraints(nu)
        H, P1, P3 = random_feasible_weights(rng, nu)
        P = vs.p_matrix(H, P1, P3)
        dt = 2e-3
        y, u = quadratic_pair(rng, d, 1.0, 10.0, int(12.0 / dt) + 1, dt)
        res = iqc_residual(mult, P, y, u, dt=dt)
        scale = float(np.sum(y * y) * dt) + 1.0
        assert res >= -1e-6 * scale
