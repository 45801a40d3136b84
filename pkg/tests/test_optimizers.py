import math

import numpy as np
import pytest

from augclust.core import Ball, Box, min_eigenvalue
from augclust.harness import grid_optimum
from augclust.objectives import ObjectiveHandle, augment, perturbed_quadratic, quadratic_objective
from augclust.optimizers import (GDConfig, GraduatedConfig, estimate_strong_convexity, fd_hessian,
                                 grad_descent, graduated_descent, inner_iterations, phase_endpoints)
from augclust.analysis import evals_to_converge, step_ratios
from augclust.smoothing import SmoothingParams, ball_draws, grad_op

W_STAR = np.array([20.0, 20.0])
K = Box([0.0, 0.0], [40.0, 40.0])


@pytest.fixture(scope="module")
def family():
    F = perturbed_quadratic(W_STAR, 1.0, 0.6, n_points=100)
    Fg = quadratic_objective(3.0 * np.eye(2), W_STAR, n_points=100)
    Fp = augment(F, Fg)
    mu_F = 1 - 0.36
    return dict(F=F, Fp=Fp, mu_F=mu_F, mu_P=(mu_F + 3.0) / 2,
                opt_F=grid_optimum(F, 0, 40), opt_P=grid_optimum(Fp, 0, 40))


# -- projected gradient descent ---------------------------------------------

def test_start_at_optimum_stays_put():
    f = quadratic_objective(np.diag([1.0, 3.0]), [1.0, 2.0])
    _, tr = grad_descent(f, [1.0, 2.0], GDConfig(0.1, 10))
    assert len(tr) == 11
    assert all(np.array_equal(w, [1.0, 2.0]) for w in tr.iterates)


def test_scalar_quadratic_one_step():
    f = quadratic_objective(np.eye(1), [3.0])
    _, tr = grad_descent(f, [-17.0], GDConfig(1.0, 3))
    assert tr.iterates[1][0] == 3.0


def test_diagonal_quadratic_ratio_bound():
    f = quadratic_objective(np.diag([1.0, 2.0]), np.zeros(2))
    _, tr = grad_descent(f, [5.0, -4.0], GDConfig(0.5, 30))
    r = step_ratios(tr, np.zeros(2))
    assert np.all(r <= 0.5 + 1e-10)


def test_non_finite_gradient_names_iteration():
    calls = {"n": 0}

    def grad(w):
        calls["n"] += 1
        return np.array([np.nan]) if calls["n"] == 3 else np.array([1.0])

    f = ObjectiveHandle(lambda w: 0.0, grad, 1, 1)
    with pytest.raises(FloatingPointError, match="iteration 2"):
        grad_descent(f, [0.0], GDConfig(0.1, 10))


def test_start_outside_projection_set():
    f = quadratic_objective(np.eye(2), np.zeros(2))
    with pytest.raises(ValueError):
        grad_descent(f, [3.0, 0.0], GDConfig(0.1, 5, Ball(np.zeros(2), 1.0)))


def test_projected_iterates_stay_feasible():
    f = quadratic_objective(np.eye(2), [5.0, 5.0])
    B = Ball(np.zeros(2), 1.0)
    w, tr = grad_descent(f, [0.0, 0.0], GDConfig(0.3, 50, B))
    assert all(B.contains(v) for v in tr.iterates)
    np.testing.assert_allclose(w, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-9)


def test_stop_rules():
    f = quadratic_objective(np.eye(2), np.zeros(2))
    _, tr = grad_descent(f, [1.0, 1.0], GDConfig(0.5, 1000, stop_epsilon=1e-6))
    assert np.linalg.norm(tr.iterates[-2] - tr.iterates[-1]) / 0.5 <= 1e-6 < len(tr)
    _, tr = grad_descent(f, [1.0, 1.0], GDConfig(0.5, 1000, stop_epsilon=1e-3, stop_rule="distance"),
                         w_ref=np.zeros(2))
    assert np.linalg.norm(tr.iterates[-1]) <= 1e-3 < np.linalg.norm(tr.iterates[-2])
    with pytest.raises(ValueError):
        grad_descent(f, [1.0, 1.0], GDConfig(0.5, 10, stop_epsilon=1e-3, stop_rule="distance"))


@pytest.mark.parametrize("kw", [dict(eta=0.0, max_iters=1), dict(eta=0.1, max_iters=0),
                                dict(eta=0.1, max_iters=1, stop_rule="other")])
def test_gd_config_validation(kw):
    with pytest.raises(ValueError):
        GDConfig(**kw)


def test_eval_counts_monotone():
    f = quadratic_objective(np.eye(2), np.zeros(2))
    _, tr = grad_descent(f, [1.0, 1.0], GDConfig(0.1, 5), evals_per_call=4)
    assert tr.eval_counts == [0, 4, 8, 12, 16, 20]


# -- inner iteration count ---------------------------------------------------

def test_inner_iterations_formula():
    assert inner_iterations(1.0, 3.0, 0.5, 1.0) == math.ceil(2 * math.log(1 / 12) / math.log(0.5)) == 8


def test_inner_iterations_domain():
    with pytest.raises(ValueError):
        inner_iterations(1.0, 3.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        inner_iterations(1.0, 3.0, 0.5, 4.0)
    assert inner_iterations(4.0, 1.0, 0.5, 1.0) == 1
    assert inner_iterations(1e-9, 1.0, 1e-6, 1.0, t_cap=50) == 50


@pytest.mark.parametrize("kw", [dict(M=0), dict(shrink=1.0), dict(eta=1.0, mu_kappa=1.5),
                                dict(delta1=-1.0), dict(mu_kappa=0.0)])
def test_graduated_config_validation(kw):
    with pytest.raises(ValueError):
        GraduatedConfig(**kw)


# -- graduated descent -------------------------------------------------------

def test_strongly_convex_quadratic_lands_per_phase():
    f = quadratic_objective(1.5 * np.eye(2), W_STAR)
    cfg = GraduatedConfig(M=8, eta=0.4, mu_kappa=1.5, seed=3)
    w, tr = graduated_descent(f, K, cfg)
    ends = phase_endpoints(tr)[1:]
    # each phase ends within half of the next radius of the (shared) smoothed minimiser
    for m, w_end in enumerate(ends):
        assert np.linalg.norm(w_end - W_STAR) <= tr.phase_deltas[m] / cfg.shrink / 2
    assert np.linalg.norm(w - W_STAR) <= tr.phase_deltas[-1] / cfg.shrink


@pytest.mark.parametrize("shrink", [2.0, 1.5])
def test_iterates_stay_in_phase_sets(family, shrink):
    cfg = GraduatedConfig(M=6, eta=0.4, mu_kappa=family["mu_P"], shrink=shrink, seed=1)
    _, tr = graduated_descent(family["Fp"], K, cfg)
    bounds = tr.phase_boundaries + [len(tr)]
    for m in range(cfg.M):
        center, delta = tr.iterates[bounds[m]], tr.phase_deltas[m]
        for v in tr.iterates[bounds[m]:bounds[m + 1]]:
            assert K.contains(v, tol=1e-9)
            assert np.linalg.norm(v - center) <= 1.5 * delta + 1e-9


def test_lands_near_global_optimum(family):
    for obj, opt, mk in ((family["F"], family["opt_F"], family["mu_F"]),
                         (family["Fp"], family["opt_P"], family["mu_P"])):
        w, tr = graduated_descent(obj, K, GraduatedConfig(M=8, eta=0.4, mu_kappa=mk, seed=0))
        assert np.linalg.norm(w - opt) <= tr.phase_deltas[-1] / 2


def test_augmented_run_needs_fewer_gradient_evaluations(family):
    evals = []
    for obj, opt, mk in ((family["F"], family["opt_F"], family["mu_F"]),
                         (family["Fp"], family["opt_P"], family["mu_P"])):
        _, tr = graduated_descent(obj, K, GraduatedConfig(M=16, eta=0.4, mu_kappa=mk, seed=2),
                                  w_ref=opt)
        evals.append(evals_to_converge(tr, opt, 1e-3))
    assert None not in evals and evals[1] < evals[0]


def test_graduated_deterministic(family):
    cfg = GraduatedConfig(M=4, eta=0.4, mu_kappa=family["mu_P"], seed=5)
    a, ta = graduated_descent(family["Fp"], K, cfg)
    b, tb = graduated_descent(family["Fp"], K, cfg)
    np.testing.assert_array_equal(a, b)
    assert ta.eval_counts == tb.eval_counts


def test_phase_index_in_errors():
    f = ObjectiveHandle(lambda w: 0.0, lambda w: np.full(2, np.nan), 1, 2)
    with pytest.raises((ValueError, FloatingPointError), match="^phase 1: non-finite"):
        graduated_descent(f, K, GraduatedConfig(M=2, samples=2))


def test_smoothed_augmented_curvature_floor(family):
    # finite differences of the common-draw smoothed gradient near the optimum
    delta = 1.0
    draws = ball_draws(2, 256, 0)
    p = SmoothingParams(delta, 256, 0)
    H = fd_hessian(lambda w: grad_op(family["Fp"], w, p, draws), family["opt_P"], h=1e-4)
    assert min_eigenvalue(H) >= family["mu_P"] - 1e-6


def test_empirical_strong_convexity(family):
    mu = estimate_strong_convexity(family["Fp"].grad, family["opt_P"])
    assert mu >= family["mu_P"] - 1e-6
