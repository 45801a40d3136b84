"""Clustering losses, their derivatives, and the augmentation combinator.

Every loss is exposed twice: as plain functions of ``(params, W)`` and as an
:class:`ObjectiveHandle` whose ``value`` is the per-point average that the
optimisers minimise.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import as_vec

SIMPLEX_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ObjectiveHandle:
    """Evaluable objective: ``value``/``grad``/``hessian`` of a per-point average.

    ``n_points`` is the number of data points the average runs over and is the
    weight used when two handles are combined by :func:`augment`.
    """

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    n_points: int
    param_dim: int
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "objective"


def augment(F: ObjectiveHandle, Fg: ObjectiveHandle, normalized: bool = True) -> ObjectiveHandle:
    """Combine an objective with its transformed-data component.

    With ``normalized`` (the default) the result is the point-count weighted
    average ``(N*F + N'*Fg) / (N + N')``. With ``normalized=False`` it is the
    plain sum ``F + Fg``, whose strong-convexity constant is exactly the sum of
    the two components' constants.
    """
    if F.param_dim != Fg.param_dim:
        raise ValueError(f"parameter dimensions differ: {F.param_dim} vs {Fg.param_dim}")
    N, Ng = F.n_points, Fg.n_points
    if normalized:
        if N + Ng == 0:
            raise ValueError("augmenting two empty objectives")
        a, b = N / (N + Ng), Ng / (N + Ng)
    else:
        a, b = 1.0, 1.0

    if b == 0.0:
        def value(W):
            return a * F.value(W)

        def grad(W):
            return a * F.grad(W)
    else:
        def value(W):
            return a * F.value(W) + b * Fg.value(W)

        def grad(W):
            return a * F.grad(W) + b * Fg.grad(W)

    hessian = None
    if F.hessian is not None and (Fg.hessian is not None or b == 0.0):
        def hessian(W):
            H = a * F.hessian(W)
            return H if b == 0.0 else H + b * Fg.hessian(W)

    return ObjectiveHandle(value, grad, N + Ng, F.param_dim, hessian,
                           name=f"augment({F.name}, {Fg.name})")


# ---------------------------------------------------------------------------
# sum-of-norms convex clustering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SumNormsParams:
    """Data, coupling strength and symmetric pair weights of the fused loss.

    The pair sum runs over unordered pairs ``i < j``; the diagonal of ``alpha``
    is ignored.
    """

    X: np.ndarray
    gamma: float
    alpha: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        alpha = np.array(self.alpha, dtype=float)
        n = X.shape[0]
        if alpha.shape != (n, n):
            raise ValueError(f"alpha must be {n}x{n}, got {alpha.shape}")
        if not np.allclose(alpha, alpha.T, rtol=0, atol=1e-12):
            raise ValueError("alpha must be symmetric")
        np.fill_diagonal(alpha, 0.0)
        if np.any(alpha < 0):
            raise ValueError("alpha must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "alpha", alpha)
        a = self.gamma * alpha
        lap = np.diag(a.sum(axis=1)) - a
        lap.setflags(write=False)
        object.__setattr__(self, "_laplacian", lap)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def laplacian(self) -> np.ndarray:
        """``gamma`` times the graph Laplacian of ``alpha`` (that is, A - B)."""
        return self._laplacian


def _blocks(params: SumNormsParams, W) -> np.ndarray:
    W = as_vec(W, "W")
    if W.size != params.n * params.d:
        raise ValueError(f"W has length {W.size}, expected n*d = {params.n * params.d}")
    return W.reshape(params.n, params.d)


def eval_sum_norms(params: SumNormsParams, W) -> float:
    """0.5 * (sum_i ||w_i - x_i||^2 + gamma * sum_{i<j} alpha_ij ||w_i - w_j||^2)."""
    Wb = _blocks(params, W)
    fit = np.sum((Wb - params.X) ** 2)
    # sum_{i<j} a_ij ||w_i - w_j||^2 == trace(W^T L W)
    coupling = np.sum(Wb * (params.laplacian() @ Wb))
    return 0.5 * (fit + coupling)


def grad_sum_norms(params: SumNormsParams, W) -> np.ndarray:
    Wb = _blocks(params, W)
    return ((Wb - params.X) + params.laplacian() @ Wb).ravel()


def hessian_sum_norms(params: SumNormsParams) -> np.ndarray:
    """Per-coordinate block ``I + A - B`` (n x n); constant in W.

    ``A`` is diagonal with ``A_ii = gamma * sum_j alpha_ij`` and
    ``B_ij = gamma * alpha_ij``. The Hessian over the flattened W is
    ``kron(I + A - B, I_d)``.
    """
    return np.eye(params.n) + params.laplacian()


def sum_norms_point_terms(params: SumNormsParams, W) -> np.ndarray:
    """Per-point terms f_i whose sum is :func:`eval_sum_norms`.

    Each pair's coupling is split evenly between its two endpoints.
    """
    Wb = _blocks(params, W)
    sq = np.sum((Wb[:, None, :] - Wb[None, :, :]) ** 2, axis=2)
    return 0.5 * np.sum((Wb - params.X) ** 2, axis=1) + 0.25 * params.gamma * np.sum(
        params.alpha * sq, axis=1)


def sum_norms_point_grads(params: SumNormsParams, W) -> np.ndarray:
    """Gradients of the per-point terms, shape ``(n, n*d)``."""
    Wb = _blocks(params, W)
    n, d = Wb.shape
    G = np.zeros((n, n, d))
    ga = 0.5 * params.gamma * params.alpha
    for i in range(n):
        diff = Wb[i] - Wb                       # (n, d)
        G[i, i] = (Wb[i] - params.X[i]) + ga[i] @ diff
        G[i] -= ga[i][:, None] * diff
    return G.reshape(n, n * d)


def sum_norms_objective(params: SumNormsParams) -> ObjectiveHandle:
    """Handle for the per-point average ``Phi(W) / n``."""
    n = params.n
    H = np.kron(hessian_sum_norms(params), np.eye(params.d)) / n
    return ObjectiveHandle(
        value=lambda W: eval_sum_norms(params, W) / n,
        grad=lambda W: grad_sum_norms(params, W) / n,
        n_points=n,
        param_dim=n * params.d,
        hessian=lambda W: H,
        name="sum_norms",
    )


# ---------------------------------------------------------------------------
# soft-min (exemplar mixture) clustering
# ---------------------------------------------------------------------------


def sq_euclidean(X, C) -> np.ndarray:
    X, C = np.atleast_2d(X), np.atleast_2d(C)
    return np.sum((X[:, None, :] - C[None, :, :]) ** 2, axis=2)


def generalized_kl(X, C) -> np.ndarray:
    """sum_k x_k log(x_k / c_k) - x_k + c_k for positive vectors."""
    X, C = np.atleast_2d(X), np.atleast_2d(C)
    if np.any(X <= 0) or np.any(C <= 0):
        raise ValueError("KL divergence needs strictly positive coordinates")
    Xe, Ce = X[:, None, :], C[None, :, :]
    return np.sum(Xe * np.log(Xe / Ce) - Xe + Ce, axis=2)


DIVERGENCES = {"sqeuclidean": sq_euclidean, "kl": generalized_kl}


@dataclass(frozen=True)
class SoftMinParams:
    """Data, inverse temperature and candidate centroids of the soft-min loss.

    ``centers`` defaults to the data itself (one candidate per point).
    """

    X: np.ndarray
    beta: float
    divergence: str = "sqeuclidean"
    centers: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.divergence not in DIVERGENCES:
            raise ValueError(f"unknown divergence {self.divergence!r}")
        C = X if self.centers is None else np.atleast_2d(np.asarray(self.centers, dtype=float))
        if C.shape[1] != X.shape[1]:
            raise ValueError("centers and data differ in dimension")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "centers", C)
        object.__setattr__(self, "_D", DIVERGENCES[self.divergence](X, C))

    @property
    def k(self):
        return self.centers.shape[0]

    @property
    def distances(self) -> np.ndarray:
        """Divergence matrix, shape (n, k)."""
        return self._D


def _check_q(params: SoftMinParams, q) -> np.ndarray:
    q = as_vec(q, "q")
    if q.size != params.k:
        raise ValueError(f"q has length {q.size}, expected {params.k}")
    if np.any(q < 0):
        raise ValueError("q has a negative entry")
    if abs(q.sum() - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError(f"q sums to {q.sum()!r}, not 1")
    return q


def _log_mixture(params: SoftMinParams, q):
    """Row-wise log sum_j q_j exp(-beta d_ij) with a max shift; also the log terms."""
    with np.errstate(divide="ignore"):
        z = np.log(q)[None, :] - params.beta * params.distances
    m = np.max(z, axis=1)
    lse = m + np.log(np.sum(np.exp(z - m[:, None]), axis=1))
    return lse


def soft_min_point_terms(params: SoftMinParams, q) -> np.ndarray:
    """Per-point log-likelihoods log sum_j q_j exp(-beta d(x_i, c_j))."""
    return _log_mixture(params, _check_q(params, q))


def eval_soft_min(params: SoftMinParams, q) -> float:
    """Average log-likelihood (1/n) sum_i log sum_j q_j exp(-beta d(x_i, c_j)).

    This is the quantity maximised over ``q``; :func:`soft_min_objective`
    negates it for minimisation.
    """
    return float(np.mean(soft_min_point_terms(params, q)))


def _responsibility_ratios(params: SoftMinParams, q) -> np.ndarray:
    lse = _log_mixture(params, q)
    return np.exp(-params.beta * params.distances - lse[:, None])


def soft_min_point_grads(params: SoftMinParams, q) -> np.ndarray:
    """Gradients of the per-point log-likelihoods w.r.t. q, shape (n, k)."""
    return _responsibility_ratios(params, _check_q(params, q))


def grad_soft_min(params: SoftMinParams, q) -> np.ndarray:
    """Gradient of :func:`eval_soft_min` (un-negated)."""
    return np.mean(soft_min_point_grads(params, q), axis=0)


def hessian_soft_min(params: SoftMinParams, q) -> np.ndarray:
    """Hessian of :func:`eval_soft_min` (un-negated); negative semidefinite."""
    S = _responsibility_ratios(params, _check_q(params, q))
    return -(S.T @ S) / S.shape[0]


def soft_min_objective(params: SoftMinParams) -> ObjectiveHandle:
    """Minimisation handle: the negated average log-likelihood over q."""
    return ObjectiveHandle(
        value=lambda q: -eval_soft_min(params, q),
        grad=lambda q: -grad_soft_min(params, q),
        n_points=params.X.shape[0],
        param_dim=params.k,
        hessian=lambda q: -hessian_soft_min(params, q),
        name="soft_min",
    )


# ---------------------------------------------------------------------------
# synthetic quadratic families
# ---------------------------------------------------------------------------


def quadratic_objective(A, center, n_points: int = 1, name: str = "quadratic") -> ObjectiveHandle:
    """f(w) = 0.5 (w - c)^T A (w - c) for symmetric positive semidefinite A."""
    A = np.asarray(A, dtype=float)
    c = as_vec(center, "center")
    return ObjectiveHandle(
        value=lambda w: 0.5 * float((w - c) @ A @ (w - c)),
        grad=lambda w: A @ (w - c),
        n_points=n_points,
        param_dim=c.size,
        hessian=lambda w: A,
        name=name,
    )


def perturbed_quadratic(center, amplitude: float, frequency: float, curvature: float = 1.0,
                        n_points: int = 1) -> ObjectiveHandle:
    """f(w) = (curvature/2) ||w - c||^2 + amplitude * sum_k sin(frequency * w_k).

    Strongly convex with constant ``curvature - amplitude * frequency**2`` when
    that is positive; the sine ripple makes the minimiser differ from ``c``.
    """
    c = as_vec(center, "center")
    a, b, s = float(amplitude), float(frequency), float(curvature)

    def value(w):
        return 0.5 * s * float((w - c) @ (w - c)) + a * float(np.sum(np.sin(b * w)))

    def grad(w):
        return s * (w - c) + a * b * np.cos(b * w)

    def hessian(w):
        return np.diag(s - a * b * b * np.sin(b * w))

    return ObjectiveHandle(value, grad, n_points, c.size, hessian, name="perturbed_quadratic")
