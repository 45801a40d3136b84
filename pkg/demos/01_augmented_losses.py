"""
Augmenting a clustering loss with transformed data
==================================================

Two clustering losses are built on a four-cluster toy dataset: the soft-min
(mixture log-likelihood) loss over a probability vector, and the fused
sum-of-norms loss over one representative per point. Each is then augmented
with a transformed copy of the data and the effect on the loss is inspected.
"""
import numpy as np

from augclust.analysis import newton_on_simplex, spectral_gain
from augclust.datagen import GenSpec, gen_clusters
from augclust.harness import candidate_centers
from augclust.objectives import (SoftMinParams, SumNormsParams, augment, hessian_sum_norms,
                                 soft_min_objective)
from augclust.transforms import AlphaPair, Dataset, GaussianNoise, apply_transform, alpha_pair_weights

data = gen_clusters(GenSpec(n_per_cluster=100, seed=0))
print(f"{data.n} points in {data.d} dimensions, {data.centroids.shape[0]} clusters")

# Soft-min loss: candidates are the data points closest to each true centroid.
centers = candidate_centers(data, "exemplars")
F = soft_min_objective(SoftMinParams(data.X, beta=1.0, centers=centers))

# A noisy copy of the data defines the transformed loss, and F+ averages the two.
Xg = apply_transform(GaussianNoise(variance=0.5, seed=1), data)
Fg = soft_min_objective(SoftMinParams(Xg, beta=1.0, centers=centers))
Fp = augment(F, Fg)

# At beta = 1 the clusters are far apart on the loss's scale, so every point is
# effectively assigned to its own cluster and the optimal weights are the cluster
# fractions. Noise that keeps each point in its cluster leaves them untouched.
q0 = np.full(4, 0.25)
q_F = newton_on_simplex(F, q0)
q_P = newton_on_simplex(Fp, q0)
print("mixture weights, original :", np.round(q_F, 6))
print("mixture weights, augmented:", np.round(q_P, 6))
print(f"distance between minimisers: {np.linalg.norm(q_F - q_P):.2e}")

# Sum-of-norms: the Hessian is I + gamma * Laplacian, so its smallest eigenvalue is 1.
# Adding transformed points tied to their sources with a heavier weight keeps that floor.
rng = np.random.default_rng(0)
X = rng.uniform(0, 10, size=(5, 2))
small = Dataset(X, np.zeros(5, dtype=int), X.mean(axis=0, keepdims=True))
spec = AlphaPair(alpha1=0.1, alpha2=0.5, seed=0)
base = SumNormsParams(X, 1.0, np.full((5, 5), 0.1))
aug = SumNormsParams(np.vstack([X, apply_transform(spec, small)]), 1.0, alpha_pair_weights(small, spec))
gain = spectral_gain(base, aug)
print(f"sum-of-norms lambda_min: base {gain.lambda_min_base:.6f}, augmented {gain.lambda_min_aug:.6f}")
print("largest Hessian eigenvalue, base:", np.linalg.eigvalsh(hessian_sum_norms(base))[-1].round(4))
