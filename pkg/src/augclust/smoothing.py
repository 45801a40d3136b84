"""Ball smoothing of objectives and the Monte-Carlo smoothed-gradient oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_vec, sample_unit_ball
from .objectives import ObjectiveHandle

__all__ = [
    "SmoothingParams",
    "SmoothedEstimate",
    "ball_draws",
    "grad_op",
    "grad_op_estimate",
    "sample_unit_ball",
    "smoothed_value",
]

DEFAULT_SAMPLES = 64


@dataclass(frozen=True)
class SmoothingParams:
    delta: float
    samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass(frozen=True)
class SmoothedEstimate:
    mean: np.ndarray | float
    std_error: np.ndarray | float


def ball_draws(d: int, samples: int, seed: int) -> np.ndarray:
    """``samples`` uniform draws from the unit ball, shape ``(samples, d)``.

    Directions and radii come from two independent streams keyed by ``seed``,
    so draw ``s`` depends only on ``(seed, s, d)``: asking for more samples
    extends the sequence without changing its prefix.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    dir_seq, rad_seq = np.random.SeedSequence(seed).spawn(2)
    G = np.random.default_rng(dir_seq).standard_normal((samples, d))
    r = np.random.default_rng(rad_seq).uniform(size=samples) ** (1.0 / d)
    return G / np.linalg.norm(G, axis=1, keepdims=True) * r[:, None]


def _resolve_draws(w, p: SmoothingParams, draws):
    if draws is None:
        return ball_draws(w.size, p.samples, p.seed)
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[1] != w.size:
        raise ValueError("draws do not match the parameter dimension")
    return draws


def _evaluate(fn, w, p, draws, what):
    out = []
    for s, u in enumerate(draws):
        val = fn(w + p.delta * u)
        if not np.all(np.isfinite(val)):
            raise ValueError(f"non-finite {what} at draw {s} (u={u.tolist()})")
        out.append(val)
    return np.asarray(out, dtype=float)


def smoothed_value(f: ObjectiveHandle, w, p: SmoothingParams, draws=None) -> SmoothedEstimate:
    """Monte-Carlo estimate of E_u[f(w + delta u)], u uniform in the unit ball.

    Passing the same ``draws`` to several objectives gives common random
    numbers. With ``delta == 0`` the exact value is returned.
    """
    w = as_vec(w)
    if p.delta == 0:
        return SmoothedEstimate(float(f.value(w)), 0.0)
    vals = _evaluate(f.value, w, p, _resolve_draws(w, p, draws), "value")
    se = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
    return SmoothedEstimate(float(vals.mean()), float(se))


def grad_op_estimate(f: ObjectiveHandle, w, p: SmoothingParams, draws=None) -> SmoothedEstimate:
    """Smoothed gradient and its per-coordinate standard error."""
    w = as_vec(w)
    if p.delta == 0:
        return SmoothedEstimate(np.asarray(f.grad(w), dtype=float), np.zeros(w.size))
    grads = _evaluate(f.grad, w, p, _resolve_draws(w, p, draws), "gradient")
    if grads.shape[0] > 1:
        se = grads.std(axis=0, ddof=1) / np.sqrt(grads.shape[0])
    else:
        se = np.zeros(w.size)
    return SmoothedEstimate(grads.mean(axis=0), se)


def grad_op(f: ObjectiveHandle, w, p: SmoothingParams, draws=None) -> np.ndarray:
    """(1/S) sum_s grad f(w + delta u_s): unbiased for the smoothed gradient.

    The draws are fixed by ``(seed, samples)``, so for a fixed seed the oracle
    is the exact gradient of an S-point average of shifted copies of ``f``.
    """
    return grad_op_estimate(f, w, p, draws).mean
