"""Projected gradient descent and graduated (smoothed, shrinking-ball) descent."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Ball, DecisionSet, Intersection, as_vec, min_eigenvalue
from .objectives import ObjectiveHandle
from .smoothing import SmoothingParams, ball_draws, grad_op

DEFAULT_T_CAP = 10_000


@dataclass(frozen=True)
class GDConfig:
    """Step size, iteration budget and optional projection set.

    ``stop_epsilon`` ends the run early. With ``stop_rule="gradient"`` it bounds
    the gradient mapping ``||w_t - w_{t+1}|| / eta`` (the gradient norm when
    there is no projection); with ``stop_rule="distance"`` it bounds the
    distance to the reference point passed to :func:`grad_descent`.
    """

    eta: float
    max_iters: int
    projection: Optional[DecisionSet] = None
    stop_epsilon: Optional[float] = None
    stop_rule: str = "gradient"

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.stop_rule not in ("gradient", "distance"):
            raise ValueError(f"unknown stop rule {self.stop_rule!r}")


@dataclass(frozen=True)
class GraduatedConfig:
    M: int = 8
    eta: float = 0.4
    mu_kappa: float = 1.0
    delta1: Optional[float] = None      # None -> diam(K) / 2
    shrink: float = 2.0
    samples: int = 64
    seed: int = 0
    t_cap: int = DEFAULT_T_CAP

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not self.shrink > 1:
            raise ValueError("shrink must exceed 1")
        if not self.mu_kappa > 0:
            raise ValueError("mu_kappa must be positive")
        if not 0 < self.eta * self.mu_kappa < 1:
            raise ValueError("need 0 < eta * mu_kappa < 1")
        if self.delta1 is not None and not self.delta1 > 0:
            raise ValueError("delta1 must be positive")


@dataclass
class OptTrace:
    """Iterates of a run plus bookkeeping.

    ``eval_counts[t]`` is the number of gradient evaluations spent before
    iterate ``t`` was produced (Monte-Carlo samples count individually).
    """

    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    dist_to_ref: Optional[list] = None
    eval_counts: list = field(default_factory=list)
    phase_boundaries: list = field(default_factory=list)
    phase_deltas: list = field(default_factory=list)
    grad_eval_count: int = 0

    def append(self, w, value, evals_so_far, w_ref=None):
        self.iterates.append(np.array(w, dtype=float))
        self.values.append(float(value))
        if evals_so_far < self.grad_eval_count:
            raise ValueError("gradient evaluation count must not decrease")
        self.grad_eval_count = int(evals_so_far)
        self.eval_counts.append(self.grad_eval_count)
        if w_ref is not None:
            if self.dist_to_ref is None:
                self.dist_to_ref = []
            self.dist_to_ref.append(float(np.linalg.norm(w - w_ref)))

    def __len__(self):
        return len(self.iterates)

    def as_array(self) -> np.ndarray:
        return np.array(self.iterates)


def grad_descent(obj: ObjectiveHandle, w1, cfg: GDConfig, *,
                 oracle: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 evals_per_call: int = 1, w_ref=None,
                 trace: Optional[OptTrace] = None):
    """Run ``w_{t+1} = P(w_t - eta * g_t)`` for up to ``cfg.max_iters`` steps.

    ``g_t`` comes from ``oracle`` when given, otherwise from ``obj.grad``.
    ``P`` is the projection onto ``cfg.projection`` (identity when absent).
    Returns the last iterate and the trace, which gets every iterate including
    the start. Pass an existing ``trace`` to append to it.
    """
    w = as_vec(w1, "w1")
    if w.size != obj.param_dim:
        raise ValueError(f"start has dimension {w.size}, objective has {obj.param_dim}")
    if cfg.projection is not None and not cfg.projection.contains(w):
        raise ValueError("starting point lies outside the projection set")
    gradient = oracle if oracle is not None else obj.grad
    w_ref = None if w_ref is None else as_vec(w_ref, "w_ref")
    by_distance = cfg.stop_epsilon is not None and cfg.stop_rule == "distance"
    if by_distance and w_ref is None:
        raise ValueError("the distance stop rule needs a reference point")
    trace = OptTrace() if trace is None else trace
    if not trace.iterates or not np.array_equal(trace.iterates[-1], w):
        trace.append(w, obj.value(w), trace.grad_eval_count, w_ref)
    if by_distance and np.linalg.norm(w - w_ref) <= cfg.stop_epsilon:
        return w, trace

    evals = trace.grad_eval_count
    for t in range(cfg.max_iters):
        g = np.asarray(gradient(w), dtype=float)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient at iteration {t}")
        evals += evals_per_call
        w_next = w - cfg.eta * g
        if cfg.projection is not None:
            w_next = cfg.projection.project(w_next)
        step = np.linalg.norm(w_next - w)
        w = w_next
        trace.append(w, obj.value(w), evals, w_ref)
        if cfg.stop_epsilon is None:
            continue
        if by_distance:
            if np.linalg.norm(w - w_ref) <= cfg.stop_epsilon:
                break
        elif step / cfg.eta <= cfg.stop_epsilon:
            break
    return w, trace


def inner_iterations(delta_m: float, diam_Km: float, eta: float, mu_kappa: float,
                     t_cap: int = DEFAULT_T_CAP) -> int:
    """Steps per graduated phase: ceil(2 ln(delta/(4 diam)) / ln(1 - eta*(mu+kappa))).

    Clamped to ``[1, t_cap]``.
    """
    rate = eta * mu_kappa
    if not 0 < rate < 1:
        raise ValueError(f"eta * mu_kappa = {rate} outside (0, 1); the log is undefined")
    if not (delta_m > 0 and diam_Km > 0):
        raise ValueError("delta and diameter must be positive")
    ratio = delta_m / (4.0 * diam_Km)
    if ratio >= 1.0:
        return 1
    T = math.ceil(2.0 * math.log(ratio) / math.log(1.0 - rate))
    return int(min(max(T, 1), t_cap))


def graduated_descent(obj: ObjectiveHandle, K: DecisionSet, cfg: GraduatedConfig, *,
                      w1=None, w_ref=None):
    """Graduated descent over shrinking smoothing radii.

    Phase ``m`` runs projected gradient descent on the ``delta_m``-smoothed
    objective (gradients from :func:`grad_op`) over ``K`` intersected with the
    ball of radius ``1.5 delta_m`` around the phase's start, for
    :func:`inner_iterations` steps; then ``delta`` is divided by ``cfg.shrink``.

    The start is drawn uniformly from ``K`` unless ``w1`` is given. All phases
    share one set of ball draws keyed by ``cfg.seed``.
    """
    start_seq, draw_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    if w1 is None:
        w = K.sample(np.random.default_rng(start_seq))
    else:
        w = as_vec(w1, "w1")
    draw_seed = int(draw_seq.generate_state(1)[0])
    draws = ball_draws(obj.param_dim, cfg.samples, draw_seed)

    diam_K = K.diameter()
    delta = cfg.delta1 if cfg.delta1 is not None else diam_K / 2.0
    trace = OptTrace()
    for m in range(cfg.M):
        trace.phase_boundaries.append(len(trace))
        trace.phase_deltas.append(delta)
        Km = Intersection((K, Ball(w, 1.5 * delta)))
        T = inner_iterations(delta, min(diam_K, 3.0 * delta), cfg.eta, cfg.mu_kappa, cfg.t_cap)
        params = SmoothingParams(delta, cfg.samples, draw_seed)

        def oracle(v, params=params):
            return grad_op(obj, v, params, draws)

        try:
            w, trace = grad_descent(obj, w, GDConfig(cfg.eta, T, Km), oracle=oracle,
                                    evals_per_call=cfg.samples, w_ref=w_ref, trace=trace)
        except (ValueError, FloatingPointError) as exc:
            raise type(exc)(f"phase {m + 1}: {exc}") from exc
        delta = delta / cfg.shrink
    return w, trace


def phase_endpoints(trace: OptTrace) -> np.ndarray:
    """Iterates at the start of each phase followed by the final iterate."""
    idx = list(trace.phase_boundaries) + [len(trace) - 1]
    return np.array([trace.iterates[i] for i in idx])


def fd_hessian(grad: Callable[[np.ndarray], np.ndarray], w, h: float = 1e-4) -> np.ndarray:
    """Symmetrised central-difference Hessian from a gradient function."""
    w = as_vec(w)
    d = w.size
    H = np.empty((d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        H[:, k] = (grad(w + e) - grad(w - e)) / (2.0 * h)
    return 0.5 * (H + H.T)


def estimate_strong_convexity(grad: Callable[[np.ndarray], np.ndarray], w, h: float = 1e-4) -> float:
    """Smallest eigenvalue of the finite-difference Hessian at ``w``."""
    return min_eigenvalue(fd_hessian(grad, w, h))
