import numpy

from .. import backends as be
from .point_cloud import PointCloud
from .spatial import SpatialIndex


def voxel_keys(points, voxel_size):
    """
    Integer voxel coordinates floor(p / voxel_size) of each point.
    The grid is anchored at the origin; boundary points go to the higher cell.

    Args:
        points (tensor (num_points, 3))
        voxel_size (float > 0)

    Returns:
        long tensor (num_points, 3)

    """
    return numpy.floor(points / voxel_size).astype(be.Long)


def voxel_downsample(cloud, voxel_size):
    """
    Replace the points of every occupied voxel by their centroid.

    Notes:
        Output is ordered by ascending lexicographic voxel coordinate.
        Colors are averaged per channel and rounded half up.

    Args:
        cloud (PointCloud)
        voxel_size (float > 0): edge length of a voxel in meters.

    Returns:
        PointCloud

    """
    if not voxel_size > 0:
        raise ValueError("voxel_size must be positive, got {}".format(voxel_size))
    if len(cloud) == 0:
        return cloud

    keys = voxel_keys(cloud.points, voxel_size)
    occupied, inverse, counts = numpy.unique(keys, axis=0, return_inverse=True,
                                             return_counts=True)
    inverse = inverse.reshape(-1)

    def cell_mean(values):
        sums = numpy.stack([numpy.bincount(inverse, weights=values[:, j],
                                           minlength=len(occupied))
                            for j in range(values.shape[1])], axis=1)
        return sums / counts[:, None]

    centroids = cell_mean(cloud.points)
    colors = None
    if cloud.has_colors:
        colors = numpy.clip(be.round_half_up(cell_mean(be.float_tensor(cloud.colors))),
                            0, 255)
    return PointCloud(centroids, colors)


def mean_neighbor_distances(points, k, workers=1):
    """
    Mean distance from each point to its k nearest other points.

    Args:
        points (tensor (num_points, 3))
        k (int >= 1)
        workers (optional; int)

    Returns:
        tensor (num_points,)

    """
    index = SpatialIndex(points)
    _, distances = index.k_nearest(points, k + 1, workers=workers)
    # the smallest distance is the point itself (or a coincident twin, also 0)
    return numpy.mean(distances[:, 1:], axis=1)


def remove_statistical_outliers(cloud, k=20, std_ratio=2.0, workers=1):
    """
    Drop points whose mean k-nearest-neighbor distance exceeds
    mean + std_ratio * std over the cloud.

    Notes:
        Survivors keep their relative order.
        The standard deviation is the population one.

    Args:
        cloud (PointCloud)
        k (optional; int >= 1): neighbors per point.
        std_ratio (optional; float > 0)
        workers (optional; int)

    Returns:
        PointCloud

    """
    if k < 1:
        raise ValueError("k must be at least 1, got {}".format(k))
    if not std_ratio > 0:
        raise ValueError("std_ratio must be positive, got {}".format(std_ratio))
    if len(cloud) <= k:
        raise ValueError("cloud of {} points is too small for k={}".format(
            len(cloud), k))
    spread = mean_neighbor_distances(cloud.points, k, workers=workers)
    threshold = numpy.mean(spread) + std_ratio * numpy.std(spread)
    return cloud.select(spread <= threshold)
