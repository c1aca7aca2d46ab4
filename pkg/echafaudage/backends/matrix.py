import numpy
import numexpr as ne
from . import typedef as T

def float_tensor(tensor: T.FloatConstructable) -> T.Tensor:
    """
    Construct a float tensor.
    This will always copy the data in tensor.

    Args:
        tensor: A float tensor or list of floats.

    Returns:
        tensor: A 64-bit float tensor.

    """
    return numpy.array(tensor, dtype=T.Float)

def long_tensor(tensor: T.LongConstructable) -> T.Tensor:
    """
    Construct a long tensor.
    This will always copy the data in tensor.

    Args:
        tensor: A long tensor or list of integers.

    Returns:
        tensor: A 64-bit integer tensor.

    """
    return numpy.array(tensor, dtype=T.Long)

def byte_tensor(tensor: T.LongConstructable) -> T.Tensor:
    """
    Construct an unsigned 8-bit tensor.
    This will always copy the data in tensor.

    Args:
        tensor: A tensor or list of integers in [0, 255].

    Returns:
        tensor: A uint8 tensor.

    """
    return numpy.array(tensor, dtype=T.Byte)

def point_tensor(points: T.FloatConstructable) -> T.Tensor:
    """
    Construct a (num_points, 3) float tensor of coordinates.

    Notes:
        An empty input gives a (0, 3) tensor.

    Args:
        points: an array-like of 3-vectors.

    Returns:
        tensor (num_points, 3)

    """
    return float_tensor(points).reshape(-1, 3)

def norm(x: T.Tensor, axis: int=None, keepdims: bool=False):
    """
    Return the L2 norm of a tensor.

    Args:
        x: A tensor.
        axis (optional): the axis for taking the norm
        keepdims (optional): If this is set to true, the dimension of the tensor
                             is unchanged. Otherwise, the reduced axis is removed
                             and the dimension of the array is 1 less.

    Returns:
        if axis is none:
            float: The L2 norm of the tensor
        else:
            tensor: The L2 norm along the specified axis.

    """
    return numpy.linalg.norm(x, axis=axis, keepdims=keepdims)

def center(x: T.Tensor, axis: int=0) -> T.Tensor:
    """
    Remove the mean along axis.

    Args:
        x (tensor (num_samples, num_units)): the array to center
        axis (int; optional): the axis to center along

    Returns:
        tensor (num_samples, num_units)

    """
    return x - numpy.mean(x, axis=axis, keepdims=True)

def scatter_matrix(x: T.Tensor) -> T.Tensor:
    """
    Compute the (population) covariance of the rows of x.

    Args:
        x (tensor (num_samples, num_units))

    Returns:
        tensor (num_units, num_units)

    """
    centered = center(x)
    return numpy.dot(centered.T, centered) / len(x)

def square_distances(x: T.Tensor, y: T.Tensor) -> T.Tensor:
    """
    Squared Euclidean distance between corresponding rows of x and y.

    Notes:
        Computed from explicit differences so that the result is exact
        to rounding, unlike the inner-product expansion.

    Args:
        x (tensor (num_samples, num_units))
        y (tensor (num_samples, num_units))

    Returns:
        tensor (num_samples,)

    """
    d = x - y
    return numpy.einsum('ij,ij->i', d, d)

def within(values: T.Tensor, limit: T.Scalar) -> T.Tensor:
    """
    Elementwise test |values| <= limit, evaluated with numexpr.

    Args:
        values (tensor (num_samples,))
        limit (float)

    Returns:
        tensor (num_samples,): boolean mask

    """
    return ne.evaluate('abs(values) <= limit', local_dict={'values': values,
                                                           'limit': limit})

def first_nonfinite_row(x: T.Tensor) -> int:
    """
    Find the first row of x that holds a NaN or an infinity.

    Args:
        x (tensor (num_rows, num_cols))

    Returns:
        int: the row index, or -1 if every entry is finite

    """
    bad = ~numpy.isfinite(x).all(axis=1)
    if not bad.any():
        return -1
    return int(numpy.argmax(bad))

def round_half_up(x: T.Tensor) -> T.Tensor:
    """
    Round to the nearest integer, halves going up.

    Args:
        x: A tensor.

    Returns:
        tensor: floor(x + 0.5)

    """
    return numpy.floor(x + 0.5)

def line_angle(u: T.Tensor, v: T.Tensor) -> T.Tensor:
    """
    Angle in degrees between lines with unit directions u and v.
    Directions are sign-folded, so the result lies in [0, 90].

    Args:
        u (tensor (..., 3))
        v (tensor (..., 3))

    Returns:
        tensor: angles in degrees

    """
    cos = numpy.abs(numpy.sum(u * v, axis=-1))
    return numpy.degrees(numpy.arccos(numpy.clip(cos, 0.0, 1.0)))

def orient_positive(vectors: T.Tensor) -> T.Tensor:
    """
    Flip vectors so that their largest-magnitude component is positive.

    Args:
        vectors (tensor (3,) or (num_vectors, 3))

    Returns:
        tensor of the same shape

    """
    vectors = numpy.asarray(vectors)
    lead_index = numpy.expand_dims(numpy.argmax(numpy.abs(vectors), axis=-1), -1)
    lead = numpy.take_along_axis(vectors, lead_index, axis=-1)
    return numpy.where(lead < 0, -vectors, vectors)
