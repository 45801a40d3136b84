"""Decision sets with Euclidean projections, simplex projection and
small dense symmetric eigenvalue routines.

Vectors are plain 1-d float arrays; matrices are 2-d float arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEMBERSHIP_TOL = 1e-9
DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_ROUNDS = 10_000
JACOBI_MAX_DIM = 64


def as_vec(w, name="w") -> np.ndarray:
    v = np.asarray(w, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


# ---------------------------------------------------------------------------
# decision sets
# ---------------------------------------------------------------------------


class DecisionSet:
    """Closed convex set with an exact (or iterative) Euclidean projection."""

    dim: int

    def project(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, w, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a point uniformly at random from the set."""
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(DecisionSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center, "center"))
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self):
        return self.center.size

    def project(self, w):
        offset = w - self.center
        dist = np.linalg.norm(offset)
        if dist <= self.radius:
            return w.copy()
        return self.center + offset * (self.radius / dist)

    def contains(self, w, tol=MEMBERSHIP_TOL):
        return bool(np.linalg.norm(np.asarray(w) - self.center) <= self.radius + tol)

    def diameter(self):
        return 2.0 * self.radius

    def sample(self, rng):
        return self.center + self.radius * sample_unit_ball(self.dim, rng)


@dataclass(frozen=True)
class Box(DecisionSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_vec(self.lo, "lo"), as_vec(self.hi, "hi")
        if lo.shape != hi.shape:
            raise ValueError("lo and hi differ in length")
        if np.any(lo > hi):
            raise ValueError("lo must be <= hi elementwise")
        if not np.any(hi > lo):
            raise ValueError("box is a single point (zero diameter)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def project(self, w):
        return np.clip(w, self.lo, self.hi)

    def contains(self, w, tol=MEMBERSHIP_TOL):
        w = np.asarray(w)
        return bool(np.all(w >= self.lo - tol) and np.all(w <= self.hi + tol))

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def sample(self, rng):
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class Simplex(DecisionSet):
    """Probability simplex {q >= 0, sum(q) = 1} in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("simplex needs dim >= 2 to have positive diameter")

    def project(self, w):
        return project_simplex(w)

    def contains(self, w, tol=MEMBERSHIP_TOL):
        w = np.asarray(w)
        return bool(np.all(w >= -tol) and abs(w.sum() - 1.0) <= tol)

    def diameter(self):
        return float(np.sqrt(2.0))

    def sample(self, rng):
        return rng.dirichlet(np.ones(self.dim))


@dataclass(frozen=True)
class Intersection(DecisionSet):
    """Intersection of convex sets, projected onto with Dykstra's algorithm.

    Non-emptiness is probed at construction by alternating projections; an
    empty intersection raises ``ValueError`` here and never at projection time.
    """

    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("intersection needs at least one set")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError(f"parts have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "parts", parts)
        self._check_feasible()

    @property
    def dim(self):
        return self.parts[0].dim

    def _start_point(self):
        first = self.parts[0]
        if isinstance(first, Ball):
            return first.center.copy()
        if isinstance(first, Box):
            return 0.5 * (first.lo + first.hi)
        return np.full(self.dim, 1.0 / self.dim)

    def _check_feasible(self):
        w = self._start_point()
        for _ in range(DYKSTRA_MAX_ROUNDS):
            prev = w
            for p in self.parts:
                w = p.project(w)
            if np.linalg.norm(w - prev) < DYKSTRA_TOL:
                break
        if not all(p.contains(w) for p in self.parts):
            raise ValueError("decision sets have an empty intersection")

    def project(self, w):
        w = np.asarray(w, dtype=float)
        if self.contains(w, tol=0.0):
            return w.copy()
        x = w.copy()
        corrections = [np.zeros_like(x) for _ in self.parts]
        for _ in range(DYKSTRA_MAX_ROUNDS):
            prev = x
            for k, p in enumerate(self.parts):
                y = x + corrections[k]
                x = p.project(y)
                corrections[k] = y - x
            if np.linalg.norm(x - prev) < DYKSTRA_TOL:
                break
        return x

    def contains(self, w, tol=MEMBERSHIP_TOL):
        return all(p.contains(w, tol) for p in self.parts)

    def diameter(self):
        # upper bound; exact diameters of mixed intersections are not computed
        return min(p.diameter() for p in self.parts)

    def sample(self, rng, max_tries: int = 100_000):
        host = min(self.parts, key=lambda p: p.diameter())
        for _ in range(max_tries):
            w = host.sample(rng)
            if self.contains(w, tol=0.0):
                return w
        raise RuntimeError("rejection sampling from intersection did not succeed")


class BallIntersection(Intersection):
    """Intersection of Euclidean balls."""

    def __init__(self, balls):
        balls = tuple(balls)
        if not all(isinstance(b, Ball) for b in balls):
            raise TypeError("BallIntersection accepts Ball instances only")
        super().__init__(balls)


def project(dset: DecisionSet, w) -> np.ndarray:
    """Euclidean projection of ``w`` onto ``dset``."""
    w = as_vec(w)
    if w.size != dset.dim:
        raise ValueError(f"point has dimension {w.size}, set has {dset.dim}")
    return dset.project(w)


def project_simplex(q) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-and-threshold)."""
    q = as_vec(q, "q")
    # the projection commutes with constant shifts; centring keeps cumsums small
    q = q - q.max()
    u = np.sort(q)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, q.size + 1)
    positive = np.nonzero(u - css / k > 0)[0]
    rho = positive[-1] if positive.size else 0
    theta = css[rho] / (rho + 1.0)
    out = np.maximum(q - theta, 0.0)
    # one renormalisation pass pins the sum to within a few ulps of 1
    return out / out.sum()


def sample_unit_ball(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit ball in R^d (Gaussian direction, U^(1/d) radius)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    return direction * rng.uniform() ** (1.0 / d)


# ---------------------------------------------------------------------------
# symmetric eigenvalues
# ---------------------------------------------------------------------------


def symmetrize(H) -> np.ndarray:
    """Mirror the upper triangle onto the lower one."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    upper = np.triu(H)
    return upper + np.triu(H, 1).T


def jacobi_eigenvalues(H, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending)."""
    A = np.array(H, dtype=float)
    n = A.shape[0]
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta     # theta^2 would overflow
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


def tridiagonalize(H):
    """Householder reduction of a symmetric matrix to tridiagonal (diag, offdiag)."""
    A = np.array(H, dtype=float)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        K = v @ p
        q = p - K * v
        sub -= 2.0 * (np.outer(v, q) + np.outer(q, v))
        A[k + 1:, k + 1:] = sub
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
    return np.diag(A).copy(), np.diag(A, 1).copy()


def _sturm_count(diag, off2, x):
    """Number of eigenvalues of the tridiagonal matrix strictly below x."""
    count = 0
    d = 1.0
    for i in range(diag.size):
        d = diag[i] - x - (off2[i - 1] / d if i > 0 else 0.0)
        if d == 0.0:
            d = -1e-300
        if d < 0:
            count += 1
    return count


def tridiagonal_min_eigenvalue(diag, off, rtol: float = 1e-14) -> float:
    """Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    radius = np.abs(np.concatenate([off, [0.0]])) + np.abs(np.concatenate([[0.0], off]))
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    scale = max(abs(lo), abs(hi), np.finfo(float).tiny)
    off2 = off ** 2
    while hi - lo > rtol * scale:
        mid = 0.5 * (lo + hi)
        if _sturm_count(diag, off2, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def min_eigenvalue(H) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Cyclic Jacobi for ``d <= 64``; Householder tridiagonalisation followed by
    Sturm-sequence bisection above that. Only the upper triangle is read.
    """
    H = np.asarray(H, dtype=float)
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    H = symmetrize(H)
    n = H.shape[0]
    if n > 2000:
        raise ValueError(f"dimension {n} exceeds the supported maximum of 2000")
    if n == 1:
        return float(H[0, 0])
    if n <= JACOBI_MAX_DIM:
        return float(jacobi_eigenvalues(H)[0])
    diag, off = tridiagonalize(H)
    return tridiagonal_min_eigenvalue(diag, off)
