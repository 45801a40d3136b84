"""Data transforms and the cluster-membership check for transformed points."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objectives import DIVERGENCES


@dataclass(frozen=True)
class Dataset:
    """Points with ground-truth labels and cluster centroids.

    ``metric`` names the divergence used for nearest-centroid membership.
    """

    X: np.ndarray
    labels: np.ndarray
    centroids: np.ndarray
    metric: str = "sqeuclidean"

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        labels = np.asarray(self.labels, dtype=int)
        C = np.atleast_2d(np.asarray(self.centroids, dtype=float))
        if labels.shape != (X.shape[0],):
            raise ValueError("need exactly one label per point")
        if C.size and C.shape[1] != X.shape[1]:
            raise ValueError("centroids and points differ in dimension")
        if labels.size and (labels.min() < 0 or labels.max() >= C.shape[0]):
            raise ValueError("labels must index into the centroid list")
        if self.metric not in DIVERGENCES:
            raise ValueError(f"unknown metric {self.metric!r}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", C)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def nearest_centroid(self, points) -> np.ndarray:
        if self.centroids.shape[0] == 0:
            raise ValueError("dataset has no centroids")
        return np.argmin(DIVERGENCES[self.metric](points, self.centroids), axis=1)


# Transform specifications. Each carries the seed of its own generator.

@dataclass(frozen=True)
class GaussianNoise:
    variance: float
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")


@dataclass(frozen=True)
class Rotation:
    """Rotation by ``angle`` radians in the plane of the first two coordinates.

    ``center`` defaults to the data mean.
    """

    angle: float
    center: Optional[tuple] = None
    seed: int = 0


@dataclass(frozen=True)
class Duplicate:
    seed: int = 0


@dataclass(frozen=True)
class AlphaPair:
    """Duplicate points, coupled to every other point with the larger weight ``alpha2``."""

    alpha1: float
    alpha2: float
    seed: int = 0

    def __post_init__(self):
        if not (self.alpha2 >= self.alpha1 >= 0):
            raise ValueError("need alpha2 >= alpha1 >= 0")


TransformSpec = GaussianNoise | Rotation | Duplicate | AlphaPair


def apply_transform(spec: TransformSpec, data: Dataset) -> np.ndarray:
    """Return one transformed point per original point."""
    if data.n == 0:
        raise ValueError("cannot transform an empty dataset")
    X = data.X
    if isinstance(spec, GaussianNoise):
        if spec.variance == 0:
            return X.copy()
        rng = np.random.default_rng(spec.seed)
        return X + rng.normal(0.0, np.sqrt(spec.variance), size=X.shape)
    if isinstance(spec, Rotation):
        if spec.angle == 0:
            return X.copy()
        if data.d < 2:
            raise ValueError("rotation needs at least two coordinates")
        center = X.mean(axis=0) if spec.center is None else np.asarray(spec.center, float)
        c, s = np.cos(spec.angle), np.sin(spec.angle)
        out = X - center
        x0, x1 = out[:, 0].copy(), out[:, 1].copy()
        out[:, 0] = c * x0 - s * x1
        out[:, 1] = s * x0 + c * x1
        return out + center
    if isinstance(spec, (Duplicate, AlphaPair)):
        return X.copy()
    raise TypeError(f"unsupported transform spec {spec!r}")


def alpha_pair_weights(data: Dataset, spec: AlphaPair, n_transformed: Optional[int] = None) -> np.ndarray:
    """Pair weights over original points followed by transformed points.

    ``alpha1`` between two originals, ``alpha2`` whenever either index belongs
    to a transformed point. The diagonal is zero.
    """
    n = data.n
    m = n if n_transformed is None else n_transformed
    alpha = np.full((n + m, n + m), float(spec.alpha2))
    alpha[:n, :n] = spec.alpha1
    np.fill_diagonal(alpha, 0.0)
    return alpha


@dataclass(frozen=True)
class SupervisionReport:
    valid: bool
    violating_indices: list = field(default_factory=list)


def check_positive_supervision(data: Dataset, transformed) -> SupervisionReport:
    """Does every transformed point keep its source's nearest ground-truth centroid?"""
    transformed = np.atleast_2d(np.asarray(transformed, dtype=float))
    if data.centroids.shape[0] == 0:
        raise ValueError("dataset has no centroids")
    if transformed.shape != data.X.shape:
        raise ValueError("need one transformed point per original point")
    assigned = data.nearest_centroid(transformed)
    bad = np.nonzero(assigned != data.labels)[0]
    return SupervisionReport(valid=bad.size == 0, violating_indices=bad.tolist())
