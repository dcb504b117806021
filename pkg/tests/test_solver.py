import numpy as np
import pytest
from hypothesis import given, strategies as st

from splinecs import solver
from splinecs.sensing import SensingOp
from splinecs.solver import SolverConfig, estimate_lipschitz, soft_threshold, solve_l1


class DenseOp:
    """Plain matrix behind the operator protocol."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)
        self.shape = self.A.shape

    def forward(self, x):
        return self.A @ x

    def adjoint(self, y):
        return self.A.T @ y


def test_soft_threshold_example():
    np.testing.assert_array_equal(soft_threshold(np.array([3.0, -0.5, 1.0]), 1.0), [2.0, 0.0, 0.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20), st.floats(0, 1e3))
def test_soft_threshold_is_prox(values, t):
    v = np.array(values)
    z = soft_threshold(v, t)
    assert np.all(np.abs(z) <= np.abs(v))
    assert np.all(np.abs(z - v) <= t * (1 + 1e-12) + 1e-9)
    assert np.all(z * v >= 0)


def test_least_squares_limit():
    op = SensingOp.build(8, 8, 64, seed=0, p=0, levels=2)
    x_true = np.random.default_rng(1).standard_normal(64)
    y = op.forward(x_true)
    x, report = solve_l1(op, y, SolverConfig(lam=0.0, max_iters=5000, rel_tol=1e-14))
    assert np.linalg.norm(x - x_true) / np.linalg.norm(x_true) < 1e-6
    np.testing.assert_allclose(x, np.linalg.lstsq(op.todense(), y, rcond=None)[0], atol=1e-6)


def test_zero_measurements_give_zero():
    op = SensingOp.build(16, 16, 60, seed=0, p=1)
    x, report = solve_l1(op, np.zeros(60), SolverConfig(lam=1e-3))
    assert not np.any(x)
    assert report.objective == 0.0


def test_large_weight_gives_zero():
    op = SensingOp.build(16, 16, 60, seed=0, p=1)
    y = np.random.default_rng(0).standard_normal(60)
    lam = 2.0 * np.max(np.abs(op.adjoint(y))) * 1.001
    x, _ = solve_l1(op, y, SolverConfig(lam=lam))
    assert not np.any(x)


def test_recovers_sparse_vector():
    op = SensingOp.build(64, 64, round(0.4 * 4096), seed=2, p=1)
    rng = np.random.default_rng(2)
    x_true = np.zeros(op.n_coeffs)
    x_true[rng.choice(op.n_coeffs, 10, replace=False)] = rng.standard_normal(10)
    cfg = SolverConfig(lam=1e-6, max_iters=5000, rel_tol=1e-10, continuation=True)
    x, _ = solve_l1(op, op.forward(x_true), cfg)
    assert np.linalg.norm(x - x_true) / np.linalg.norm(x_true) < 1e-3


def test_lipschitz_matches_dense_spectral_norm():
    op = SensingOp.build(8, 8, 40, seed=1, p=3, levels=2)
    exact = np.linalg.norm(op.todense(), 2) ** 2
    assert estimate_lipschitz(op, max_iters=500, tol=1e-10) == pytest.approx(exact, rel=1e-2)


def test_lipschitz_of_orthogonal_chain():
    op = SensingOp.build(16, 16, 256, seed=0, p=0, bank="haar", levels=3)
    assert estimate_lipschitz(op) == pytest.approx(1.0, rel=1e-6)


def test_lipschitz_scales_quadratically(rng):
    A = rng.standard_normal((20, 30))
    base = estimate_lipschitz(DenseOp(A), max_iters=1000, tol=1e-12)
    assert estimate_lipschitz(DenseOp(2 * A), max_iters=1000, tol=1e-12) == pytest.approx(4 * base, rel=1e-8)


@pytest.mark.parametrize("step", ["fixed", "backtracking"])
def test_objective_history_nonincreasing(step):
    op = SensingOp.build(16, 16, 80, seed=5, p=2)
    y = np.random.default_rng(5).standard_normal(80)
    _, report = solve_l1(op, y, SolverConfig(lam=1e-2, max_iters=300, step=step))
    objs = [h[2] for h in report.history]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(objs, objs[1:]))


def test_underestimated_curvature_is_corrected(rng):
    A = rng.standard_normal((15, 25))
    y = rng.standard_normal(15)
    _, report = solve_l1(DenseOp(A), y, SolverConfig(lam=0.1, max_iters=400, lipschitz=1e-3))
    objs = [h[2] for h in report.history]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(objs, objs[1:]))
    ref, _ = solve_l1(DenseOp(A), y, SolverConfig(lam=0.1, max_iters=4000, rel_tol=1e-12))
    assert report.objective == pytest.approx(solver._objective(A @ ref - y, ref, 0.1), rel=1e-4)


def test_backtracking_agrees_with_fixed(rng):
    A = rng.standard_normal((30, 50))
    y = rng.standard_normal(30)
    cfg = dict(lam=0.5, max_iters=5000, rel_tol=1e-12)
    a, _ = solve_l1(DenseOp(A), y, SolverConfig(**cfg))
    b, _ = solve_l1(DenseOp(A), y, SolverConfig(step="backtracking", **cfg))
    np.testing.assert_allclose(a, b, atol=1e-6)


def test_continuation_reaches_same_minimum(rng):
    A = rng.standard_normal((30, 50))
    y = rng.standard_normal(30)
    a, _ = solve_l1(DenseOp(A), y, SolverConfig(lam=0.05, max_iters=20000, rel_tol=1e-12))
    b, rep = solve_l1(DenseOp(A), y, SolverConfig(lam=0.05, max_iters=20000, rel_tol=1e-12, continuation=True))
    np.testing.assert_allclose(a, b, atol=1e-6)
    assert len({h[1] for h in rep.history}) > 1


def test_deterministic():
    op = SensingOp.build(16, 16, 80, seed=5, p=1)
    y = np.random.default_rng(9).standard_normal(80)
    a, ra = solve_l1(op, y, SolverConfig(lam=1e-2, max_iters=200))
    b, rb = solve_l1(op, y, SolverConfig(lam=1e-2, max_iters=200))
    assert np.array_equal(a, b)
    assert ra.progress_lines() == rb.progress_lines()


def test_report_fields():
    op = SensingOp.build(16, 16, 80, seed=5, p=1)
    y = np.random.default_rng(9).standard_normal(80)
    x, rep = solve_l1(op, y, SolverConfig(lam=1e-2, max_iters=50))
    assert 1 <= rep.iterations <= 50
    assert rep.residual_norm == pytest.approx(np.linalg.norm(op.forward(x) - y))
    assert rep.sparsity == np.count_nonzero(np.abs(x) > 1e-8)
    assert rep.progress_lines()[0].count("\t") == 3


def test_input_validation():
    op = SensingOp.build(16, 16, 80, seed=5, p=1)
    with pytest.raises(ValueError, match="non-finite"):
        solve_l1(op, np.full(80, np.nan), SolverConfig(lam=1.0))
    with pytest.raises(ValueError):
        solve_l1(op, np.zeros(79), SolverConfig(lam=1.0))
    with pytest.raises(ValueError, match="zero"):
        solve_l1(DenseOp(np.zeros((3, 4))), np.ones(3), SolverConfig(lam=1.0))
    for bad in (dict(lam=-1), dict(lam=1, rel_tol=0), dict(lam=1, step="newton"), dict(lam=1, continuation_factor=1)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
