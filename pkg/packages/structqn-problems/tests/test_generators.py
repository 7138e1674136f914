"""Tests for the quadratic, Poisson control and quartic generators."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from structqn_core.errors import BadRankError
from structqn_problems.gradcheck import fd_gradient_check
from structqn_problems.poisson import laplacian_2d, make_poisson_control
from structqn_problems.quadratic import make_structured_quadratic
from structqn_problems.quartic import StructuredQuartic, make_structured_quartic


def _check_operator(op, rng: np.random.Generator, probes: int = 20) -> None:
    """Symmetry of apply and the residual of solve_shifted on random probes."""
    for _ in range(probes):
        a, b = rng.standard_normal(op.n), rng.standard_normal(op.n)
        assert a @ op.apply(b) == pytest.approx(b @ op.apply(a), rel=1e-10, abs=1e-10)
        sigma = float(rng.uniform(0.5, 2.0))
        z = op.solve_shifted(sigma, a)
        assert np.max(np.abs(op.apply(z) + sigma * z - a)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


def _check_gradients(problem, rng: np.random.Generator, scale: float = 1.0) -> None:
    for _ in range(5):
        assert fd_gradient_check(problem, scale * rng.standard_normal(problem.n)) <= 1e-5


class TestStructuredQuadratic:
    """Test cases for make_structured_quadratic."""

    def test_identical_identity_hessians(self):
        """r = n and D = 0 give H₁ = H₂ = φI and x* = −g/(2φ)."""
        problem = make_structured_quadratic(6, r=6, phi=2.0, d_range=(0.0, 0.0), seed=1)
        assert_allclose(problem.known.to_dense(), 2.0 * np.eye(6), atol=1e-12)
        assert_allclose(problem.minimizer(), -problem.g / 4.0, atol=1e-12)

    def test_spectrum_low_phi(self):
        """φ = 1 leaves n − r eigenvalues at 1 and the rest in [1, 1000]."""
        problem = make_structured_quadratic(100, r=10, phi=1.0, seed=0)
        eigenvalues = np.linalg.eigvalsh(problem.known.to_dense())
        assert np.sum(np.isclose(eigenvalues, 1.0, atol=1e-8)) >= 90
        assert eigenvalues[0] >= 1.0 - 1e-8
        assert eigenvalues[-1] <= 1000.0 + 1e-8

    def test_spectrum_high_phi(self):
        """φ = 1000 with D in [−999, 0] also keeps the spectrum in [1, 1000]."""
        problem = make_structured_quadratic(50, r=5, phi=1000.0, seed=2)
        for op in (problem.known, problem.unknown):
            eigenvalues = np.linalg.eigvalsh(op.to_dense())
            assert eigenvalues[0] >= 1.0 - 1e-8
            assert eigenvalues[-1] <= 1000.0 + 1e-8

    def test_default_rank(self):
        """Without r the rank is n // 10."""
        assert make_structured_quadratic(40).known.rank == 4

    @pytest.mark.parametrize("r", [0, 11])
    def test_bad_rank(self, r):
        """r must lie in [1, n]."""
        with pytest.raises(BadRankError):
            make_structured_quadratic(10, r=r)

    def test_nonpositive_phi(self):
        """φ must be positive."""
        with pytest.raises(ValueError):
            make_structured_quadratic(10, phi=0.0)

    def test_seed_reproducible(self):
        """The same seed gives the same instance; another seed does not."""
        a = make_structured_quadratic(20, seed=3)
        b = make_structured_quadratic(20, seed=3)
        c = make_structured_quadratic(20, seed=4)
        assert_allclose(a.g, b.g)
        assert not np.allclose(a.g, c.g)
        assert a.metadata.seed == 3

    def test_operators_and_gradients(self):
        """Both Hessians are symmetric with exact shifted solves; gradients check out."""
        rng = np.random.default_rng(5)
        problem = make_structured_quadratic(30, r=3, seed=5)
        _check_operator(problem.known, rng)
        _check_gradients(problem, rng)
        x = rng.standard_normal(30)
        assert fd_gradient_check(problem, x) <= 1e-7


class TestPoissonControl:
    """Test cases for make_poisson_control."""

    @pytest.mark.parametrize(("j", "n"), [(1, 64), (2, 324)])
    def test_dimension(self, j, n):
        """n = (10j − 2)²."""
        assert make_poisson_control(j).n == n

    def test_laplacian_is_symmetric_positive_definite(self):
        """The 5-point matrix is symmetric with positive spectrum."""
        dense = laplacian_2d(4, 0.2).toarray()
        assert_allclose(dense, dense.T)
        assert np.linalg.eigvalsh(dense)[0] > 0.0

    def test_gradient_vanishes_at_target_state(self):
        """x with A⁻¹(x + g) = y* makes ∇û = 0."""
        problem = make_poisson_control(1)
        x = problem.A @ problem.target - problem.boundary
        assert_allclose(problem.eval_grad_u(x), 0.0, atol=1e-10)
        assert problem.eval_u(x) == pytest.approx(0.0, abs=1e-20)

    def test_known_part(self):
        """k̂ = ½‖x‖² with K = I."""
        problem = make_poisson_control(1)
        x = np.arange(problem.n, dtype=float)
        assert problem.eval_k(x) == pytest.approx(0.5 * x @ x)
        assert_allclose(problem.known_hessian(x).apply(x), x)
        assert problem.constant_hessian

    def test_gradient_check(self):
        """Analytic gradients match central differences at seeded points."""
        _check_gradients(make_poisson_control(1), np.random.default_rng(6))

    def test_bad_mesh_index(self):
        """j must be at least 1."""
        with pytest.raises(ValueError):
            make_poisson_control(0)


class TestStructuredQuartic:
    """Test cases for make_structured_quartic."""

    def test_scalar_example(self):
        """n = 1, a = 1, g = 0, q = 1 at x = 1 gives f = 7/12 and ∇f = 4/3."""
        problem = StructuredQuartic(np.array([1.0]), np.array([0.0]), np.array([1.0]))
        x = np.array([1.0])
        assert problem.eval_f(x) == pytest.approx(1.0 / 12.0 + 0.5)
        assert_allclose(problem.gradient(x), [4.0 / 3.0])

    def test_degenerate_is_linear(self):
        """a = q = 0 leaves the linear term, so the gradient is constant."""
        g = np.array([1.0, 0.0, 0.0])
        problem = StructuredQuartic(np.zeros(3), g, np.zeros(3))
        for x in (np.zeros(3), np.array([2.0, -1.0, 5.0])):
            assert_allclose(problem.gradient(x), g)

    def test_known_hessian_at_ones(self):
        """K(1) = diag(aᵢ²) and K depends on x."""
        problem = make_structured_quartic(8, seed=0)
        assert_allclose(problem.known_hessian(np.ones(8)).to_dense(), np.diag(problem.a**2))
        assert not problem.constant_hessian
        assert_allclose(problem.initial_point(), np.ones(8))

    def test_coefficients_away_from_zero(self):
        """Every |aᵢ| is at least 0.1."""
        problem = make_structured_quartic(500, seed=1)
        assert np.all(np.abs(problem.a) >= 0.1)

    def test_gradient_check(self):
        """Analytic gradients match central differences at seeded points."""
        _check_gradients(make_structured_quartic(10, seed=2), np.random.default_rng(7))

    def test_bad_dimension(self):
        """n must be at least 1."""
        with pytest.raises(ValueError):
            make_structured_quartic(0)
