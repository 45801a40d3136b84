"""Turning optimisation traces into rates, epoch counts and optimum checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DecisionSet, as_vec, min_eigenvalue
from .objectives import ObjectiveHandle, SumNormsParams, hessian_sum_norms
from .optimizers import GDConfig, OptTrace, grad_descent

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RateReport:
    """Fitted per-step contraction of the squared distance to the optimum."""

    fitted_rate: float
    r_squared: float
    bound: Optional[float]
    satisfied: Optional[bool]
    n_used: int
    degenerate_tail: bool = False


def _distances(trace: OptTrace, w_star) -> np.ndarray:
    w_star = as_vec(w_star, "w_star")
    return np.linalg.norm(trace.as_array() - w_star, axis=1)


def step_ratios(trace: OptTrace, w_star) -> np.ndarray:
    """Per-step ratios ||w_{t+1} - w*||^2 / ||w_t - w*||^2 (steps from w* omitted)."""
    d2 = _distances(trace, w_star) ** 2
    keep = d2[:-1] > 0
    return d2[1:][keep] / d2[:-1][keep]


def fit_log_slope(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log(y)`` against ``x`` and the fit's r^2."""
    x = np.asarray(x, dtype=float)
    ly = np.log(np.asarray(y, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid ** 2) / ss_tot
    return float(coef[0]), float(r2)


def estimate_contraction(trace: OptTrace, w_star, bound: Optional[float] = None) -> RateReport:
    """Fit log ||w_t - w*||^2 against t over the pre-convergence prefix.

    The prefix ends at the first distance below ``100 * eps * scale``; beyond
    that point the log-distance sits on the floating-point floor. The reported
    rate is ``exp(slope)``. If only the start lies above the floor (one-step
    convergence) the single observed ratio is returned and the tail is flagged.
    """
    if len(trace) < 3:
        raise ValueError("need at least three iterates")
    w_star = as_vec(w_star, "w_star")
    dist = _distances(trace, w_star)
    floor = 100.0 * EPS * max(1.0, float(np.linalg.norm(w_star)), float(dist[0]))
    if dist[0] <= floor:
        raise ValueError("degenerate trace: starts at the reference optimum")
    below = np.nonzero(dist <= floor)[0]
    end = int(below[0]) if below.size else dist.size
    d2 = dist[:end] ** 2
    if end == 1:
        rate = float((dist[1] / dist[0]) ** 2)
        return RateReport(rate, 1.0, bound, None if bound is None else rate <= bound + 1e-6,
                          n_used=2, degenerate_tail=True)
    slope, r2 = fit_log_slope(np.arange(end), d2)
    rate = float(np.exp(slope))
    satisfied = None if bound is None else rate <= bound + 1e-6
    return RateReport(rate, r2, bound, satisfied, n_used=end, degenerate_tail=end < dist.size)


def epochs_to_converge(trace: OptTrace, w_star, epsilon: float) -> Optional[int]:
    """Index of the first iterate within ``epsilon`` of ``w_star``, or None."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    hits = np.nonzero(_distances(trace, w_star) <= epsilon)[0]
    return int(hits[0]) if hits.size else None


def evals_to_converge(trace: OptTrace, w_star, epsilon: float) -> Optional[int]:
    """Gradient evaluations spent before first reaching ``epsilon`` of ``w_star``."""
    t = epochs_to_converge(trace, w_star, epsilon)
    return None if t is None else trace.eval_counts[t]


def newton_on_simplex(obj: ObjectiveHandle, q0, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    """Interior minimiser over the probability simplex by damped Newton steps.

    Works in an orthonormal basis of the simplex's tangent space and halves
    steps that would leave the open simplex or increase the objective. Used as
    an independent reference for the first-order solvers; raises if the
    minimiser is (numerically) on the boundary.
    """
    if obj.hessian is None:
        raise ValueError("objective has no Hessian")
    q = as_vec(q0, "q0").copy()
    k = q.size
    basis = np.linalg.qr(np.vstack([np.ones(k), np.eye(k)[:-1]]).T)[0][:, 1:]
    for _ in range(max_iter):
        g = basis.T @ obj.grad(q)
        H = basis.T @ obj.hessian(q) @ basis
        step = basis @ np.linalg.solve(H, g)
        f0 = obj.value(q)
        for _ in range(60):
            if (q - step).min() > 0 and obj.value(q - step) <= f0 + 1e-15 * abs(f0):
                break
            step = step / 2
        else:
            raise RuntimeError("Newton step could not stay inside the simplex")
        q = q - step
        if np.linalg.norm(step) <= tol:
            return q
    raise RuntimeError("Newton iteration did not converge (minimiser on the boundary?)")


@dataclass(frozen=True)
class OptimaReport:
    distance: float
    passed: bool
    argmin_base: np.ndarray
    argmin_augmented: np.ndarray


def solve_to_tolerance(obj: ObjectiveHandle, w0, cfg: GDConfig):
    """Projected gradient descent that must meet ``cfg.stop_epsilon``."""
    if cfg.stop_epsilon is None:
        raise ValueError("solver config needs a stop_epsilon")
    w, trace = grad_descent(obj, w0, cfg)
    last_step = np.linalg.norm(trace.iterates[-1] - trace.iterates[-2]) / cfg.eta
    if last_step > cfg.stop_epsilon:
        raise RuntimeError(
            f"no convergence within {cfg.max_iters} iterations (gradient mapping {last_step:.3g})")
    return w, trace


def verify_unchanged_optima(F: ObjectiveHandle, Fplus: ObjectiveHandle, K: Optional[DecisionSet],
                            solver_cfg: GDConfig, *, w0=None, seed: int = 0,
                            bound: float = 1e-3) -> OptimaReport:
    """Minimise F and F+ from one seeded start and compare the minimisers.

    ``K`` overrides the solver's projection set when given. The start is drawn
    uniformly from the projection set unless ``w0`` is supplied.
    """
    if F.param_dim != Fplus.param_dim:
        raise ValueError("objectives differ in parameter dimension")
    proj = K if K is not None else solver_cfg.projection
    cfg = GDConfig(solver_cfg.eta, solver_cfg.max_iters, proj, solver_cfg.stop_epsilon)
    if w0 is None:
        if proj is None:
            raise ValueError("need w0 when there is no decision set to sample from")
        w0 = proj.sample(np.random.default_rng(seed))
    w_base, _ = solve_to_tolerance(F, w0, cfg)
    w_aug, _ = solve_to_tolerance(Fplus, w0, cfg)
    dist = float(np.linalg.norm(w_base - w_aug))
    return OptimaReport(dist, dist <= bound, w_base, w_aug)


@dataclass(frozen=True)
class SpectralGain:
    lambda_min_base: float
    lambda_min_aug: float
    ordered: bool


def spectral_gain(params: SumNormsParams, augmented: SumNormsParams) -> SpectralGain:
    """Compare smallest Hessian eigenvalues of a base and an augmented fused loss."""
    lb = min_eigenvalue(hessian_sum_norms(params))
    la = min_eigenvalue(hessian_sum_norms(augmented))
    return SpectralGain(lb, la, la >= lb - 1e-10)
