"""
Smoothing over a ball and its gradient estimator
================================================

The smoothed function averages f over a ball of radius delta. Its gradient is
estimated by averaging gradients at uniform points in the ball. For a
quadratic the smoothed gradient equals the plain gradient, which makes the
estimator easy to check. Smoothing also commutes with augmentation when the
same draws are reused.
"""
import numpy as np

from augclust.objectives import augment, perturbed_quadratic, quadratic_objective
from augclust.smoothing import SmoothingParams, ball_draws, grad_op_estimate, smoothed_value

A = np.array([[2.0, 0.5], [0.5, 1.0]])
c = np.array([1.0, -1.0])
w = np.array([3.0, 2.0])
est = grad_op_estimate(quadratic_objective(A, c), w, SmoothingParams(delta=2.0, samples=10_000, seed=0))
print("exact gradient    :", A @ (w - c))
print("estimate          :", est.mean.round(4))
print("z-scores          :", (np.abs(est.mean - A @ (w - c)) / est.std_error).round(2))

center = np.array([20.0, 20.0])
F = perturbed_quadratic(center, 1.0, 0.6, n_points=100)
Fg = quadratic_objective(3.0 * np.eye(2), center, n_points=100)
p = SmoothingParams(delta=5.0, samples=64, seed=1)
draws = ball_draws(2, p.samples, p.seed)
lhs = smoothed_value(augment(F, Fg), w, p, draws).mean
rhs = 0.5 * smoothed_value(F, w, p, draws).mean + 0.5 * smoothed_value(Fg, w, p, draws).mean
print(f"smoothed F+ = {lhs:.12f}, weighted parts = {rhs:.12f}")
