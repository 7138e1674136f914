"""Tests for the compact S-BFGS-Plus representation and its solves."""

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose
from structqn_core.errors import (
    InitNotPDError,
    RegularizationFailedError,
    SingularMiddleMatrixError,
)
from structqn_core.models.config import DeltaMode
from structqn_core.operators import DenseOp, DiagonalOp, ScaledIdentityOp, SparseOp
from structqn_solvers.qn_history import QnHistory
from structqn_solvers.reference_oracles import DenseQnMatrix, OracleKind, sbfgs_plus_update
from structqn_solvers.sbfgs_minus import MinusState, OperatorInit, dense_B_minus
from structqn_solvers.sbfgs_plus import (
    PlusState,
    apply_A_plus,
    apply_plus_system,
    cheap_delta,
    dense_A_plus,
    ensure_positive_definite,
    pd_probe_plus,
    solve_plus,
    solve_plus_dense,
)


def _trajectory(rng: np.random.Generator, n: int, k: int, sigma: float, C: np.ndarray):
    """
    Push k random pairs with vᵢ = Kᵢ₊₁sᵢ for fresh diagonal Kᵢ₊₁ and run the
    recursive update alongside.

    Returns the history, the recursive A and the smallest relative sᵀB̂s seen.
    """
    history = QnHistory(n, max(k, 1), track_v=True)
    A = DenseQnMatrix(sigma * np.eye(n), OracleKind.SBFGS_PLUS)
    worst = np.inf
    for _ in range(k):
        s = rng.standard_normal(n)
        K_next = np.diag(rng.uniform(0.5, 2.0, n))
        b_hat = A.B + K_next
        worst = min(worst, abs(s @ b_hat @ s) / (np.linalg.norm(b_hat, 2) * (s @ s)))
        A = sbfgs_plus_update(A, K_next, s, C @ s)
        history.push_pair(s, C @ s, K_next @ s)
    return history, A.B, worst


def _laplacian(side: int) -> sp.csr_matrix:
    """Five-point Laplacian on a side×side grid with unit spacing."""
    tri = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(side, side))
    eye = sp.identity(side)
    return sp.csr_matrix(sp.kron(eye, tri) + sp.kron(tri, eye))


class TestPlusState:
    """Test cases for PlusState."""

    def test_needs_tracked_v(self):
        """A history without V cannot back the Plus form."""
        with pytest.raises(ValueError):
            PlusState(QnHistory(3, 2), 1.0, ScaledIdentityOp(3))

    def test_q_matches_v_plus_sigma_s(self, make_history):
        """Q stays equal to V + σS across pushes, evictions and σ changes."""
        h = make_history(7, 3, 2, seed=1, track_v=True)
        st = PlusState(h, 2.0, ScaledIdentityOp(7))
        rng = np.random.default_rng(2)
        for step in range(5):
            s = rng.standard_normal(7)
            h.push_pair(s, 3.0 * s, 1.5 * s)
            if step == 3:
                st.refresh(0.5, ScaledIdentityOp(7))
            assert_allclose(st.Q, h.V + st.sigma * h.S, rtol=1e-12, atol=1e-12)

    def test_middle_lower_block_is_negative_diagonal(self, make_history):
        """The (2,2) block of M is −Dᵁ with negative entries."""
        h = make_history(6, 4, 3, seed=3, track_v=True)
        st = PlusState(h, 1.0, ScaledIdentityOp(6))
        block = st.middle()[3:, 3:]
        assert_allclose(block, -h.d_u)
        assert np.all(np.diag(block) < 0.0)

    def test_refresh_clears_delta(self):
        """Moving to a new iterate drops the previous shift."""
        st = PlusState(QnHistory(2, 2, track_v=True), 1.0, ScaledIdentityOp(2), delta=10.0)
        st.refresh(1.0, ScaledIdentityOp(2))
        assert st.delta == 0.0


class TestApplyAPlus:
    """Test cases for apply_A_plus."""

    def test_empty_history_is_sigma_identity(self):
        """With no pairs Aᴾ = σI."""
        st = PlusState(QnHistory(3, 2, track_v=True), 3.0, ScaledIdentityOp(3))
        x = np.array([1.0, -2.0, 0.5])
        assert_allclose(apply_A_plus(st, x), 3.0 * x)

    def test_first_pair_is_rank_two_update(self):
        """One pair gives σI − qqᵀ/(sᵀv + σsᵀs) + uuᵀ/(sᵀu) with q = v + σs."""
        rng = np.random.default_rng(4)
        n, sigma = 4, 1.5
        s = rng.standard_normal(n)
        u = 2.0 * s + 0.1 * rng.standard_normal(n)
        v = rng.uniform(0.5, 2.0, n) * s
        h = QnHistory(n, 2, track_v=True)
        h.push_pair(s, u, v)
        q = v + sigma * s
        expected = (
            sigma * np.eye(n) - np.outer(q, q) / (s @ v + sigma * s @ s) + np.outer(u, u) / (s @ u)
        )
        assert_allclose(dense_A_plus(PlusState(h, sigma, ScaledIdentityOp(n))), expected, atol=1e-12)

    def test_matches_recursive_update(self, spd):
        """Densified compact Aᴾ equals the recursion on random trajectories."""
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(200):
            n = int(rng.integers(2, 21))
            k = int(rng.integers(1, 7))
            history, expected, worst = _trajectory(rng, n, k, 1.0, spd(rng, n))
            if worst < 1e-3:
                continue
            compact = dense_A_plus(PlusState(history, 1.0, ScaledIdentityOp(n)))
            err = np.linalg.norm(compact - expected) / np.linalg.norm(expected)
            assert err <= 1e-8
            checked += 1
        assert checked > 100

    def test_coincides_with_minus_for_constant_k(self, spd):
        """With K fixed, K + Aᴾ equals Bᴹ started from σI + K."""
        rng = np.random.default_rng(6)
        n, sigma = 9, 0.8
        K = np.diag(rng.uniform(0.5, 3.0, n))
        C = spd(rng, n)
        h = QnHistory(n, 5, track_v=True)
        for _ in range(5):
            s = rng.standard_normal(n)
            h.push_pair(s, C @ s, K @ s)
        plus = dense_A_plus(PlusState(h, sigma, DenseOp(K))) + K
        minus = dense_B_minus(MinusState(h, OperatorInit(DenseOp(K), sigma)))
        err = np.linalg.norm(plus - minus) / np.linalg.norm(minus)
        assert err <= 1e-9


class TestSolvePlus:
    """Test cases for solve_plus."""

    def test_empty_history(self):
        """K = I, σ = 1 and no pairs give p = −g/2."""
        st = PlusState(QnHistory(1, 2, track_v=True), 1.0, ScaledIdentityOp(1))
        assert_allclose(solve_plus(st, np.array([3.0])), [-1.5])

    def test_residual_with_diagonal_k(self, make_history):
        """‖(K + Aᴾ)p + g‖∞ ≤ 1e-8‖g‖∞ with a diagonal K."""
        rng = np.random.default_rng(7)
        st = PlusState(
            make_history(5, 3, 2, seed=8, track_v=True), 1.0, DiagonalOp(rng.uniform(1.0, 3.0, 5))
        )
        g = rng.standard_normal(5)
        p = solve_plus(st, g)
        assert np.max(np.abs(apply_plus_system(st, p) + g)) <= 1e-8 * np.max(np.abs(g))

    def test_residual_with_sparse_laplacian(self, make_history):
        """The same residual bound holds with a five-point Laplacian K."""
        rng = np.random.default_rng(9)
        st = PlusState(
            make_history(36, 5, 7, seed=10, track_v=True), 1.0, SparseOp(_laplacian(6))
        )
        g = rng.standard_normal(36)
        p = solve_plus(st, g)
        assert np.max(np.abs(apply_plus_system(st, p) + g)) <= 1e-8 * np.max(np.abs(g))

    def test_agrees_with_dense_solve(self, make_history):
        """SMW and the densified system give the same direction."""
        rng = np.random.default_rng(11)
        for seed in range(5):
            n = int(rng.integers(5, 31))
            st = PlusState(
                make_history(n, 4, 6, seed=seed, track_v=True),
                1.0,
                DiagonalOp(rng.uniform(0.5, 2.0, n)),
            )
            ensure_positive_definite(st)
            g = rng.standard_normal(n)
            assert_allclose(solve_plus(st, g), solve_plus_dense(st, g), rtol=1e-8, atol=1e-10)

    def test_indefinite_shifted_k_rejected(self):
        """K + (σ + δ)I must be positive definite for the SMW path."""
        st = PlusState(QnHistory(2, 2, track_v=True), 1.0, DiagonalOp(np.array([-3.0, 1.0])))
        with pytest.raises(InitNotPDError):
            solve_plus(st, np.ones(2))

    def test_dense_solve_respects_cap(self):
        """The dense fallback refuses n above dense_cap."""
        st = PlusState(QnHistory(4, 2, track_v=True), 1.0, ScaledIdentityOp(4), dense_cap=3)
        with pytest.raises(InitNotPDError):
            solve_plus_dense(st, np.ones(4))


class TestPdProbePlus:
    """Test cases for pd_probe_plus."""

    def test_examples(self):
        """K = I is PD with σ = 1; K = diag(−3, 1) is not."""
        empty = QnHistory(2, 2, track_v=True)
        assert pd_probe_plus(PlusState(empty, 1.0, ScaledIdentityOp(2)))
        assert not pd_probe_plus(PlusState(empty, 1.0, DiagonalOp(np.array([-3.0, 1.0]))))

    def test_singular_middle_matrix_raises(self):
        """vᵀs + σsᵀs = 0 zeroes the top-left block of M for every δ."""
        history = QnHistory(2, 2, track_v=True)
        e1 = np.array([1.0, 0.0])
        history.push_pair(e1, e1, -e1)
        st = PlusState(history, 1.0, ScaledIdentityOp(2))
        with pytest.raises(SingularMiddleMatrixError):
            pd_probe_plus(st)
        with pytest.raises(SingularMiddleMatrixError):
            ensure_positive_definite(st)

    def test_agrees_with_eigenvalues(self, make_history):
        """Random states agree with the smallest eigenvalue of the dense matrix."""
        rng = np.random.default_rng(12)
        checked = 0
        for seed in range(60):
            n = 10
            diagonal = rng.uniform(-2.0, 2.0, n) if seed % 2 else rng.uniform(0.1, 2.0, n)
            st = PlusState(
                make_history(n, 4, int(rng.integers(1, 6)), seed=seed, track_v=True),
                float(rng.uniform(0.1, 2.0)),
                DiagonalOp(diagonal),
            )
            dense = st.K.to_dense() + dense_A_plus(st)
            smallest = np.linalg.eigvalsh(0.5 * (dense + dense.T))[0]
            if abs(smallest) < 1e-6:
                continue
            assert pd_probe_plus(st) == (smallest > 0.0)
            checked += 1
        assert checked > 40


class TestEnsurePositiveDefinite:
    """Test cases for ensure_positive_definite."""

    @pytest.mark.parametrize(
        ("diagonal", "expected"),
        [((1.0, 2.0), 0.0), ((-1.5, 0.0), 1.0), ((-6.0, 0.0), 10.0)],
    )
    def test_power_of_ten_examples(self, diagonal, expected):
        """K + Aᴾ = diag(2,3), diag(−0.5,1) and diag(−5,1) need δ = 0, 1 and 10."""
        st = PlusState(QnHistory(2, 2, track_v=True), 1.0, DiagonalOp(np.array(diagonal)))
        assert ensure_positive_definite(st).delta == expected

    def test_cap_reached(self):
        """With cap 0 a shift of 1 is not enough and the search fails."""
        st = PlusState(QnHistory(2, 2, track_v=True), 1.0, DiagonalOp(np.array([-6.0, 0.0])))
        with pytest.raises(RegularizationFailedError):
            ensure_positive_definite(st, cap=0)
        assert st.delta == 0.0

    def test_result_is_positive_definite(self, make_history):
        """After regularization the dense matrix has a positive smallest eigenvalue."""
        rng = np.random.default_rng(13)
        for seed in range(20):
            n = int(rng.integers(3, 31))
            st = PlusState(
                make_history(n, 4, 4, seed=seed, track_v=True),
                1.0,
                DiagonalOp(rng.uniform(-5.0, 1.0, n)),
            )
            ensure_positive_definite(st)
            dense = st.K.to_dense() + dense_A_plus(st) + st.delta * np.eye(n)
            assert np.linalg.eigvalsh(0.5 * (dense + dense.T))[0] > 0.0

    def test_cheap_delta_formula(self):
        """δ = (ε − (u + v)ᵀs)/‖s‖² from the newest pair, floored at 0."""
        h = QnHistory(2, 2, track_v=True)
        e1 = np.array([1.0, 0.0])
        h.push_pair(e1, e1, -3.0 * e1)
        st = PlusState(h, 1.0, ScaledIdentityOp(2))
        assert cheap_delta(st, 1e-8) == pytest.approx(2.0 + 1e-8)
        h.push_pair(e1, e1, e1)
        assert cheap_delta(st, 1e-8) == 0.0

    def test_cheap_mode_ends_positive_definite(self, make_history):
        """The cheap mode falls back to powers of ten and always ends PD."""
        rng = np.random.default_rng(14)
        st = PlusState(
            make_history(8, 3, 3, seed=15, track_v=True), 1.0, DiagonalOp(rng.uniform(-4.0, 0.0, 8))
        )
        ensure_positive_definite(st, mode=DeltaMode.CHEAP)
        assert pd_probe_plus(st)
