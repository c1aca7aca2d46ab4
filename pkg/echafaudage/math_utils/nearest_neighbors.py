"""
Exhaustive geometric searches. These are O(n * m) and serve both as the
small-input paths of the library and as oracles for the tree-based code.

"""
import numpy

from .. import backends as be

DEFAULT_CHUNK = 512


def pdist(x: be.Tensor, y: be.Tensor) -> be.Tensor:
    """
    Compute the pairwise distance matrix between the rows of x and y.

    Notes:
        Uses explicit differences, so entries are exact to rounding.

    Args:
        x (tensor (num_samples_1, num_units))
        y (tensor (num_samples_2, num_units))

    Returns:
        tensor (num_samples_1, num_samples_2)

    """
    diff = x[:, None, :] - y[None, :, :]
    return numpy.sqrt(numpy.einsum('ijk,ijk->ij', diff, diff))


def find_nearest_neighbors(x: be.Tensor, y: be.Tensor,
                           chunk: int = DEFAULT_CHUNK) -> be.Tuple[be.Tensor, be.Tensor]:
    """
    For each row in x, find the nearest row in y by exhaustive scan.
    Ties go to the lowest index in y.

    Args:
        x (tensor (num_samples_x, num_units))
        y (tensor (num_samples_y, num_units))
        chunk (optional; int): rows of x handled at once.

    Returns:
        indices (long_tensor (num_samples_x,)),
        distances (float_tensor (num_samples_x,))

    """
    indices = numpy.zeros(len(x), dtype=be.Long)
    distances = numpy.zeros(len(x), dtype=be.Float)
    for start, block in be.inclusive_slice(x, 0, len(x), chunk):
        dist = pdist(block, y)
        nearest = numpy.argmin(dist, axis=1)
        indices[start:start+len(block)] = nearest
        distances[start:start+len(block)] = dist[numpy.arange(len(block)), nearest]
    return indices, distances


def find_k_nearest_neighbors(x: be.Tensor, y: be.Tensor, k: int) \
                                    -> be.Tuple[be.Tensor, be.Tensor]:
    """
    For each row in x, find the k nearest rows in y, closest first.

    Args:
        x (tensor (num_samples_x, num_units))
        y (tensor (num_samples_y, num_units))
        k (int > 0)

    Returns:
        indices (long_tensor (num_samples_x, k)),
        distances (float_tensor (num_samples_x, k))

    """
    dist = pdist(x, y)
    order = numpy.argsort(dist, axis=1, kind='stable')[:, :k]
    return order.astype(be.Long), numpy.take_along_axis(dist, order, axis=1)


def find_radius_neighbors(x: be.Tensor, y: be.Tensor, radius: float):
    """
    For each row in x, the ascending indices of the rows in y within radius.

    Args:
        x (tensor (num_samples_x, num_units))
        y (tensor (num_samples_y, num_units))
        radius (float >= 0)

    Returns:
        List[long_tensor]

    """
    dist = pdist(x, y)
    return [numpy.flatnonzero(row <= radius).astype(be.Long) for row in dist]


def farthest_pair(x: be.Tensor, chunk: int = DEFAULT_CHUNK) -> be.Tuple[int, int, float]:
    """
    The pair of rows of x at maximum distance, by exhaustive scan.
    Ties go to the lexicographically smallest (i, j).

    Args:
        x (tensor (num_samples, num_units)): at least 2 rows.
        chunk (optional; int): rows handled at once.

    Returns:
        (i (int), j (int), distance (float)) with i < j

    """
    assert len(x) >= 2, "need at least two points"
    best = (-1.0, 0, 1)
    columns = numpy.arange(len(x))
    for start, block in be.inclusive_slice(x, 0, len(x) - 1, chunk):
        diff = block[:, None, :] - x[None, :, :]
        sq = numpy.einsum('ijk,ijk->ij', diff, diff)
        rows = numpy.arange(start, start + len(block))
        sq[columns[None, :] <= rows[:, None]] = -1.0
        flat = int(numpy.argmax(sq))
        r, c = divmod(flat, len(x))
        if sq[r, c] > best[0]:
            best = (sq[r, c], start + r, c)
    return best[1], best[2], float(numpy.sqrt(best[0]))
