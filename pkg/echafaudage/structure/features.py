"""
Local shape of a point cloud from the covariance of radius neighborhoods.

With covariance eigenvalues l1 >= l2 >= l3 >= 0:

    linearity  = (l1 - l2) / l1
    planarity  = (l2 - l3) / l1
    sphericity = l3 / l1

which sum to one whenever l1 > 0.

"""
from collections import namedtuple
import numpy

from .. import backends as be
from ..factorization import eigen_descending

LINEAR = "linear"
PLANAR = "planar"
SPHERICAL = "spherical"
UNCLASSIFIED = "unclassified"

# argmax order doubles as the tie-break order
SHAPE_CLASSES = (LINEAR, PLANAR, SPHERICAL)

ShapeFeatures = namedtuple("ShapeFeatures", ["eigenvalues", "linearity", "planarity",
                                             "sphericity", "principal_direction",
                                             "neighbor_count", "classifiable"])


def features_from_eigenvalues(eigenvalues, principal_direction, neighbor_count,
                              min_neighbors):
    """
    Assemble ShapeFeatures from per-point covariance spectra.

    Notes:
        Points with fewer than min_neighbors neighbors, or with l1 == 0,
        get zero features and are not classifiable.

    Args:
        eigenvalues (tensor (num_points, 3)): descending.
        principal_direction (tensor (num_points, 3))
        neighbor_count (long tensor (num_points,))
        min_neighbors (int)

    Returns:
        ShapeFeatures

    """
    eigenvalues = be.float_tensor(eigenvalues).reshape(-1, 3)
    l1, l2, l3 = eigenvalues[:, 0], eigenvalues[:, 1], eigenvalues[:, 2]
    neighbor_count = be.long_tensor(neighbor_count)
    classifiable = (neighbor_count >= min_neighbors) & (l1 > 0)
    safe = numpy.where(classifiable, l1, 1.0)
    linearity = numpy.where(classifiable, (l1 - l2) / safe, 0.0)
    planarity = numpy.where(classifiable, (l2 - l3) / safe, 0.0)
    sphericity = numpy.where(classifiable, l3 / safe, 0.0)
    return ShapeFeatures(eigenvalues, linearity, planarity, sphericity,
                         be.float_tensor(principal_direction).reshape(-1, 3),
                         neighbor_count, classifiable)


def neighborhood_covariances(points, neighborhoods, centers):
    """
    Covariance of each neighborhood, accumulated around its center point
    to keep the sums small.

    Args:
        points (tensor (num_points, 3))
        neighborhoods (List[long tensor]): indices into points.
        centers (tensor (num_queries, 3))

    Returns:
        tensor (num_queries, 3, 3)

    """
    counts = numpy.array([len(n) for n in neighborhoods], dtype=be.Long)
    covariances = numpy.zeros((len(neighborhoods), 3, 3))
    if counts.sum() == 0:
        return covariances
    members = numpy.concatenate([n for n in neighborhoods if len(n) > 0])
    owner = numpy.repeat(numpy.arange(len(neighborhoods)), counts)
    local = points[members] - centers[owner]
    size = len(neighborhoods)
    weight = numpy.maximum(counts, 1)
    first = numpy.stack([numpy.bincount(owner, weights=local[:, j], minlength=size)
                         for j in range(3)], axis=1) / weight[:, None]
    for j in range(3):
        for k in range(j, 3):
            second = numpy.bincount(owner, weights=local[:, j] * local[:, k],
                                    minlength=size) / weight
            covariances[:, j, k] = second - first[:, j] * first[:, k]
            covariances[:, k, j] = covariances[:, j, k]
    return covariances


def shape_features(cloud, index, radius=0.10, min_neighbors=8, chunk=4096, workers=1):
    """
    Eigenvalue shape features of the radius neighborhood of every point.

    Notes:
        Neighborhoods include the point itself. Work proceeds in chunks of
        points to bound memory; results do not depend on the chunk size.

    Args:
        cloud (PointCloud)
        index (SpatialIndex): index over the same cloud.
        radius (optional; float > 0): neighborhood radius in meters.
        min_neighbors (optional; int >= 3)
        chunk (optional; int)
        workers (optional; int)

    Returns:
        ShapeFeatures

    """
    if not radius > 0:
        raise ValueError("radius must be positive, got {}".format(radius))
    if min_neighbors < 3:
        raise ValueError("min_neighbors must be at least 3, got {}".format(min_neighbors))
    points = cloud.points
    num_points = len(points)
    eigenvalues = numpy.zeros((num_points, 3))
    directions = numpy.zeros((num_points, 3))
    counts = numpy.zeros(num_points, dtype=be.Long)
    for start, block in be.inclusive_slice(points, 0, num_points, chunk):
        neighborhoods = index.radius_neighbors(block, radius, workers=workers)
        stop = start + len(block)
        counts[start:stop] = [len(n) for n in neighborhoods]
        values, vectors = eigen_descending(
            neighborhood_covariances(index.points, neighborhoods, block))
        eigenvalues[start:stop] = values
        directions[start:stop] = be.orient_positive(vectors[:, :, 0])
    return features_from_eigenvalues(eigenvalues, directions, counts, min_neighbors)


def classify_points(features):
    """
    Label each point by its dominant feature.

    Notes:
        Exact ties resolve as linear, then planar, then spherical.
        Points that are not classifiable are 'unclassified'.

    Args:
        features (ShapeFeatures)

    Returns:
        tensor (num_points,) of str

    """
    stacked = numpy.stack([features.linearity, features.planarity,
                           features.sphericity], axis=1)
    winners = numpy.array(SHAPE_CLASSES, dtype=object)[numpy.argmax(stacked, axis=1)] \
        if len(stacked) else numpy.array([], dtype=object)
    classes = numpy.where(features.classifiable, winners, UNCLASSIFIED)
    return classes.astype(str)
