import numpy as np
import pytest

from echafaudage import backends as be


# ----- matrix ----- #

def test_point_tensor_shapes():
    assert be.point_tensor([]).shape == (0, 3)
    assert be.point_tensor([1, 2, 3]).shape == (1, 3)
    assert be.point_tensor([[1, 2, 3], [4, 5, 6]]).dtype == be.Float

def test_scatter_matrix_is_population_covariance():
    x = be.make_rng(1).normal(size=(50, 3))
    assert np.allclose(be.scatter_matrix(x), np.cov(x.T, bias=True))

def test_square_distances():
    x = be.float_tensor([[0, 0, 0], [1, 1, 1]])
    y = be.float_tensor([[3, 4, 0], [1, 1, 1]])
    assert np.array_equal(be.square_distances(x, y), [25, 0])

def test_within_includes_boundary():
    values = be.float_tensor([-0.5, 0.25, 0.5, 0.75])
    assert np.array_equal(be.within(values, 0.5), [True, True, True, False])

def test_first_nonfinite_row():
    x = np.zeros((4, 3))
    assert be.first_nonfinite_row(x) == -1
    x[2, 0] = -np.inf
    x[3, 1] = np.nan
    assert be.first_nonfinite_row(x) == 2

def test_round_half_up():
    assert np.array_equal(be.round_half_up(be.float_tensor([0.5, 1.5, 2.49, -0.5])),
                          [1, 2, 2, 0])

def test_line_angle_is_sign_folded():
    u = be.float_tensor([1, 0, 0])
    assert np.isclose(be.line_angle(u, -u), 0)
    assert np.isclose(be.line_angle(u, be.float_tensor([0, 1, 0])), 90)
    v = be.float_tensor([1, 1, 0]) / np.sqrt(2)
    assert np.isclose(be.line_angle(u, v), 45)

def test_orient_positive():
    vectors = be.float_tensor([[0, 0, -1], [-0.1, 0.9, 0.2], [0.3, -0.8, 0]])
    result = be.orient_positive(vectors)
    assert np.array_equal(result, [[0, 0, 1], [-0.1, 0.9, 0.2], [-0.3, 0.8, 0]])
    assert np.array_equal(be.orient_positive(be.float_tensor([0, -2, 1])), [0, 2, -1])


# ----- rand ----- #

def test_make_rng_is_seeded():
    assert np.array_equal(be.make_rng(5).uniform(size=10), be.make_rng(5).uniform(size=10))
    assert np.array_equal(be.make_rng().uniform(size=3),
                          be.make_rng(be.DEFAULT_SEED).uniform(size=3))


# ----- common ----- #

def test_maybe_key():
    d = {"a": 2}
    assert be.maybe_key(d, "a") == 2
    assert be.maybe_key(d, "b", default=7) == 7
    assert be.maybe_key(d, "a", func=lambda x: x * 3) == 6

def test_inclusive_slice_covers_range():
    x = np.arange(10)
    chunks = list(be.inclusive_slice(x, 0, 10, 4))
    assert [offset for offset, _ in chunks] == [0, 4, 8]
    assert np.array_equal(np.concatenate([c for _, c in chunks]), x)


if __name__ == "__main__":
    pytest.main([__file__])
