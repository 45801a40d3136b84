"""Synthetic Gaussian clusters and the equal-size baseline/augmented pair."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .transforms import Dataset, TransformSpec, apply_transform

# four clusters in the plane
DEFAULT_CENTROIDS = ((10.0, 20.0), (30.0, 20.0), (20.0, 10.0), (20.0, 30.0))


@dataclass(frozen=True)
class GenSpec:
    centroids: tuple = DEFAULT_CENTROIDS
    n_per_cluster: int = 100
    spread: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_per_cluster < 1:
            raise ValueError("n_per_cluster must be >= 1")
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")
        if len(self.centroids) < 1:
            raise ValueError("need at least one centroid")


def gen_clusters(spec: GenSpec) -> Dataset:
    """Isotropic Gaussian blobs, ``n_per_cluster`` points around each centroid."""
    C = np.asarray(spec.centroids, dtype=float)
    rng = np.random.default_rng(spec.seed)
    labels = np.repeat(np.arange(C.shape[0]), spec.n_per_cluster)
    noise = rng.normal(0.0, 1.0, size=(labels.size, C.shape[1]))
    X = C[labels] + spec.spread * noise
    return Dataset(X, labels, C)


@dataclass(frozen=True)
class ComparisonPair:
    baseline: Dataset
    augmented: Dataset


def build_comparison_pair(data: Dataset, spec: TransformSpec) -> ComparisonPair:
    """Equal-size datasets for a fair convergence comparison.

    The baseline repeats every original point once; the augmented set appends
    one transformed copy of every point instead. Both hold ``2N`` rows with the
    originals first.
    """
    labels = np.concatenate([data.labels, data.labels])
    baseline = Dataset(np.vstack([data.X, data.X]), labels, data.centroids, data.metric)
    transformed = apply_transform(spec, data)
    augmented = Dataset(np.vstack([data.X, transformed]), labels, data.centroids, data.metric)
    return ComparisonPair(baseline, augmented)


def write_dataset_csv(data: Dataset, path) -> Path:
    """Write ``x0,x1,...,label`` rows with round-trip float formatting."""
    path = Path(path)
    header = [f"x{k}" for k in range(data.d)] + ["label"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for x, lab in zip(data.X, data.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(lab)])
    return path


def read_dataset_csv(path, centroids=None, metric: str = "sqeuclidean") -> Dataset:
    """Read a dataset CSV. Centroids default to the per-label means."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-1] != "label" or not all(h == f"x{k}" for k, h in enumerate(header[:-1])):
        raise ValueError(f"unexpected dataset header {header}")
    X = np.array([[float(v) for v in r[:-1]] for r in body]).reshape(len(body), len(header) - 1)
    labels = np.array([int(r[-1]) for r in body], dtype=int)
    if centroids is None:
        k = labels.max() + 1 if labels.size else 0
        centroids = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    return Dataset(X, labels, centroids, metric)
