import numpy as np
import pytest

from echafaudage import backends as be
from echafaudage import factorization


def test_eigen_descending_batched():
    rng = be.make_rng(1)
    a = rng.normal(size=(10, 3, 3))
    matrices = np.einsum("nij,nkj->nik", a, a)
    values, vectors = factorization.eigen_descending(matrices)
    assert np.all(np.diff(values, axis=1) <= 0)
    assert np.all(values >= 0)
    for m, w, v in zip(matrices, values, vectors):
        assert np.allclose(m @ v, v * w)

def test_pca_of_a_line():
    t = np.linspace(-1, 1, 101)
    direction = be.float_tensor([1, 2, 2]) / 3
    points = np.outer(t, direction) + be.float_tensor([5, 5, 5])
    pca = factorization.PCA.from_points(points)
    assert np.allclose(pca.mean, [5, 5, 5])
    assert np.isclose(abs(np.dot(pca.principal_direction, direction)), 1)
    assert np.allclose(pca.var[1:], 0, atol=1e-12)

def test_pca_normal_of_a_plane():
    rng = be.make_rng(2)
    points = np.column_stack([rng.uniform(size=200), rng.uniform(size=200), np.zeros(200)])
    pca = factorization.PCA.from_points(points)
    assert np.isclose(abs(pca.normal[2]), 1)

def test_pca_transform_centers():
    points = be.make_rng(3).normal(size=(500, 3)) * [3, 2, 1]
    pca = factorization.PCA.from_points(points)
    projected = pca.transform(points)
    assert np.allclose(np.mean(projected, axis=0), 0, atol=1e-12)
    assert np.allclose(np.var(projected, axis=0), pca.var)


if __name__ == "__main__":
    pytest.main([__file__])
