import numpy as np
import pytest

from augclust.datagen import GenSpec, gen_clusters
from augclust.objectives import SumNormsParams, hessian_sum_norms
from augclust.transforms import (AlphaPair, Dataset, Duplicate, GaussianNoise, Rotation,
                                 alpha_pair_weights, apply_transform, check_positive_supervision)


@pytest.fixture(scope="module")
def data():
    return gen_clusters(GenSpec())


@pytest.mark.parametrize("spec", [GaussianNoise(0.0), Rotation(0.0), Duplicate()])
def test_identity_transforms(data, spec):
    np.testing.assert_array_equal(apply_transform(spec, data), data.X)


def test_noise_mean_clt_bound(data):
    diff = apply_transform(GaussianNoise(4.0, seed=3), data) - data.X
    assert np.all(np.abs(diff.mean(axis=0)) <= 3 * 2 / np.sqrt(400))
    assert diff.var() == pytest.approx(4.0, rel=0.15)


def test_transforms_are_deterministic(data):
    for spec in (GaussianNoise(2.0, seed=5), Rotation(0.3, seed=1)):
        np.testing.assert_array_equal(apply_transform(spec, data), apply_transform(spec, data))


def test_rotation_about_mean_preserves_distances(data):
    out = apply_transform(Rotation(np.pi / 3), data)
    m = data.X.mean(axis=0)
    np.testing.assert_allclose(np.linalg.norm(out - m, axis=1), np.linalg.norm(data.X - m, axis=1))
    np.testing.assert_allclose(out.mean(axis=0), m, atol=1e-10)


def test_rotation_needs_two_coordinates():
    d1 = Dataset(np.arange(3.0)[:, None], np.zeros(3, int), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        apply_transform(Rotation(0.5), d1)


def test_alpha_pair_uniform_when_equal(data):
    small = Dataset(data.X[:3], data.labels[:3], data.centroids)
    W = alpha_pair_weights(small, AlphaPair(0.4, 0.4))
    off = W[~np.eye(6, dtype=bool)]
    np.testing.assert_array_equal(off, 0.4)


def test_alpha_pair_structure():
    rng = np.random.default_rng(0)
    d = Dataset(rng.normal(size=(4, 2)), np.zeros(4, int), np.zeros((1, 2)))
    W = alpha_pair_weights(d, AlphaPair(0.1, 0.5))
    np.testing.assert_array_equal(W, W.T)
    assert set(np.unique(W[~np.eye(8, dtype=bool)])) == {0.1, 0.5}
    assert np.all(W[:4, :4][~np.eye(4, dtype=bool)] == 0.1)
    np.testing.assert_array_equal(np.diag(W), 0.0)


def test_alpha_pair_rejects_smaller_alpha2():
    with pytest.raises(ValueError):
        AlphaPair(0.5, 0.1)


def _second_smallest(H):
    return np.linalg.eigvalsh(H)[1]


def test_alpha_pair_spectral_ordering_two_points():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    d = Dataset(X, np.zeros(2, int), np.zeros((1, 2)))
    spec = AlphaPair(0.1, 0.5)
    base = SumNormsParams(X, 1.0, np.full((2, 2), 0.1))
    aug = SumNormsParams(np.vstack([X, apply_transform(spec, d)]), 1.0, alpha_pair_weights(d, spec))
    lb, la = np.linalg.eigvalsh(hessian_sum_norms(base)), np.linalg.eigvalsh(hessian_sum_norms(aug))
    assert la[0] >= lb[0] - 1e-12
    # the connectivity eigenvalue is where the stronger coupling shows up
    assert _second_smallest(hessian_sum_norms(aug)) > _second_smallest(hessian_sum_norms(base))


def test_supervision_duplicate_valid(data):
    assert check_positive_supervision(data, apply_transform(Duplicate(), data)).valid


def test_supervision_identity_always_valid(data):
    assert check_positive_supervision(data, data.X).valid


def test_supervision_small_noise_valid(data):
    assert check_positive_supervision(data, apply_transform(GaussianNoise(1.0, seed=1), data)).valid


def test_supervision_large_noise_invalid(data):
    rep = check_positive_supervision(data, apply_transform(GaussianNoise(100.0, seed=1), data))
    assert not rep.valid and len(rep.violating_indices) > 0
    idx = rep.violating_indices
    moved = apply_transform(GaussianNoise(100.0, seed=1), data)[idx]
    assert np.all(data.nearest_centroid(moved) != data.labels[idx])


def test_supervision_needs_centroids():
    d = Dataset(np.zeros((2, 2)), np.zeros(2, int), np.zeros((1, 2)))
    empty = Dataset(np.zeros((0, 2)), np.zeros(0, int), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        check_positive_supervision(empty, np.zeros((0, 2)))
    with pytest.raises(ValueError):
        check_positive_supervision(d, np.zeros((3, 2)))
