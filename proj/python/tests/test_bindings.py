import numpy as np
import pytest

import sqsk


def test_sketch_of_exact_low_rank_is_exact():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 3)) @ rng.standard_normal((3, 40))
    sk = sqsk.power_sketch(X, 3, seed=1)
    assert (sk.n, sk.m, sk.rank) == (20, 40, 3)
    assert np.allclose(sk.reconstruct(), X, atol=1e-10)
    assert np.allclose(sk.Q.T @ sk.Q, np.eye(3), atol=1e-12)
    spectral, frob = sqsk.sketch_error(X, sk)
    assert spectral < 1e-8 and frob < 1e-8


def test_reduced_objective_matches_data_space(regression):
    X, y, _ = regression
    sk = sqsk.power_sketch(X, 5)
    rp = sqsk.reduce(sk, y)
    w = np.linspace(-1, 1, X.shape[0])
    direct = np.linalg.norm(sk.reconstruct().T @ w - y) + 0.3 * np.linalg.norm(w) + 0.2 * np.abs(w).sum()
    assert rp.objective(w, 0.3, 0.2) == pytest.approx(direct, rel=1e-10)


def test_full_solve_recovers_planted_support(regression):
    X, y, w_true = regression
    lam = 0.4 * np.abs(X @ y).max() / np.linalg.norm(y)
    sol = sqsk.solve_full(X, y, lam)
    assert sol.status == "converged"
    assert set(sol.support) == {0, 1, 2}
    assert np.allclose(sol.w[:3], w_true[:3], atol=0.1)


def test_certificate_brackets_the_optimum(regression):
    X, y, _ = regression
    rp = sqsk.reduce(sqsk.power_sketch(X, 4), y)
    sol = sqsk.solve_reduced(rp, 0.2, 0.3, tol=1e-10)
    dp = sqsk.dual_certificate(rp, sol.w, 0.2, 0.3)
    assert dp.feasible
    assert dp.value <= sol.objective + 1e-12 * (1 + sol.objective)
    assert sol.objective - dp.value <= 1e-8 * (1 + sol.objective)


def test_screen_discards_everything_for_large_lambda(regression):
    X, y, _ = regression
    rp = sqsk.reduce(sqsk.power_sketch(X, 4), y)
    lam = 1.01 * np.linalg.norm(rp.R, axis=1).max()
    assert sqsk.screen(rp, 0.0, lam) == []
    sol = sqsk.solve_reduced(rp, 0.0, lam)
    assert not sol.w.any()
    assert sol.objective == pytest.approx(np.linalg.norm(y), rel=1e-12)


def test_cardinality_reduce_keeps_constraints():
    A = np.ones((1, 3))
    x = np.array([0.5, 0.25, 0.25])
    out, steps = sqsk.cardinality_reduce(A, A @ x, x)
    assert np.count_nonzero(out) == 1
    assert np.allclose(A @ out, A @ x) and np.abs(out).sum() == pytest.approx(1.0)
    assert len(steps) == 2


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        sqsk.power_sketch(np.ones((3, 4)), 5)
    with pytest.raises(ValueError):
        sqsk.solve_instance(np.ones((2, 2)), np.ones(3), 0.1, 0.1)


def test_sketch_round_trip(tmp_path, regression):
    X, _, _ = regression
    sk = sqsk.power_sketch(X, 4, seed=9)
    path = tmp_path / "s.bin"
    sk.save(path)
    back = sqsk.load_sketch(path)
    assert np.array_equal(back.P, sk.P) and np.array_equal(back.Q, sk.Q)
    assert back.meta.seed == 9


def test_libsvm_loader(libsvm_file, regression):
    X, y, _ = regression
    Xl, yl = sqsk.load_libsvm(libsvm_file)
    assert np.array_equal(Xl, X) and np.array_equal(yl, y)


def test_driver_reports_validate(regression, validate):
    X, y, _ = regression
    cv = sqsk.cross_validate(X, y, 4, 3, [0.1, 0.5], eps=0.1)
    validate(cv)
    assert len(cv["records"]) == 6
    full = sqsk.cross_validate(X, y, 0, 3, [0.1, 0.5])
    validate(full)
    assert full["model"] == "full"

    prof = sqsk.sparsity_profile(X, y, 1, [0.01, 0.1, 1.0], robust=False)
    validate(prof)
    assert all(p["cardinality"] <= 1 for p in prof["points"])

    b = sqsk.bench([20], k=3)
    validate(b)
    assert b["records"][0]["ratio"] > 0
