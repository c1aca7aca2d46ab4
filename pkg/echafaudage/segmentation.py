"""
Isolating the scaffolding from a raw scan: RANSAC plane detection,
removal of the dominant planes (ground, wall), and cropping by the
distance from the wall.

"""
from collections import namedtuple
import numpy
import numexpr as ne

from . import backends as be
from .cloud import DegenerateGeometryError
from .factorization import PCA

RansacParams = namedtuple("RansacParams", ["inlier_distance", "max_iterations",
                                           "min_inlier_fraction", "seed"])
RansacParams.__new__.__defaults__ = (0.03, 1000, 0.10, be.DEFAULT_SEED)

# the plane is {p : normal . p + offset = 0}
PlaneModel = namedtuple("PlaneModel", ["normal", "offset", "inlier_indices",
                                       "inlier_count"])

PlaneRemoval = namedtuple("PlaneRemoval", ["remaining", "remaining_indices",
                                           "planes", "termination"])

VERTICAL = be.float_tensor([0, 0, 1])


class PlaneNotFoundError(ValueError):
    """
    Raised when no plane gathers enough inliers.

    """
    pass


def check_ransac_params(params):
    """
    Validate the bounds of a RansacParams.

    Args:
        params (RansacParams)

    Returns:
        None

    Raises:
        ValueError

    """
    if not params.inlier_distance > 0:
        raise ValueError("inlier_distance must be positive")
    if params.max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if not 0 < params.min_inlier_fraction <= 1:
        raise ValueError("min_inlier_fraction must be in (0, 1]")


def sample_triples(rng, num_points, num_samples):
    """
    Draw triples of distinct indices uniformly from range(num_points).

    Args:
        rng (numpy.random.Generator)
        num_points (int >= 3)
        num_samples (int)

    Returns:
        long tensor (num_samples, 3)

    """
    a = rng.integers(0, num_points, num_samples)
    b = rng.integers(0, num_points - 1, num_samples)
    c = rng.integers(0, num_points - 2, num_samples)
    b = b + (b >= a)
    lo, hi = numpy.minimum(a, b), numpy.maximum(a, b)
    c = c + (c >= lo)
    c = c + (c >= hi)
    return numpy.stack([a, b, c], axis=1).astype(be.Long)


def planes_through_triples(points, triples):
    """
    The exact plane through each triple of points.

    Args:
        points (tensor (num_points, 3))
        triples (long tensor (num_samples, 3))

    Returns:
        normals (tensor (num_samples, 3)): unit normals, zero for collinear triples,
        offsets (tensor (num_samples,)),
        valid (bool tensor (num_samples,)): False for collinear triples

    """
    p0, p1, p2 = (points[triples[:, j]] for j in range(3))
    u, v = p1 - p0, p2 - p0
    cross = numpy.cross(u, v)
    area = be.norm(cross, axis=1)
    scale = be.norm(u, axis=1) * be.norm(v, axis=1)
    valid = area > 1e-12 * numpy.maximum(scale, be.EPSILON)
    normals = numpy.zeros_like(cross)
    normals[valid] = cross[valid] / area[valid, None]
    offsets = -numpy.einsum("ij,ij->i", normals, p0)
    return normals, offsets, valid


def signed_distances(points, normal, offset):
    """
    Signed distance of each point from a plane with unit normal.

    Args:
        points (tensor (num_points, 3))
        normal (tensor (3,))
        offset (float)

    Returns:
        tensor (num_points,)

    """
    return numpy.dot(points, normal) + offset


def _count_inliers(columns, normal, offset, threshold):
    x, y, z = columns
    a, b, c = normal
    return int(ne.evaluate("sum(where(abs(x*a + y*b + z*c + offset) <= threshold, 1, 0))"))


def fit_plane(points):
    """
    Least-squares plane through points: the smallest-variance direction
    of their covariance, through their centroid.

    Args:
        points (tensor (num_points, 3)): at least 3 points.

    Returns:
        normal (tensor (3,)), offset (float)

    """
    pca = PCA.from_points(points)
    normal = be.orient_positive(pca.normal)
    return normal, float(-numpy.dot(normal, pca.mean))


def ransac_plane(cloud, params=RansacParams(), verbose=False):
    """
    Find the dominant plane of a cloud by random sample consensus.

    Notes:
        Triples are drawn from a generator seeded by params.seed, so the
        result is reproducible. The best sampled plane (ties go to the
        earliest trial) is refit by least squares over its inliers and the
        inliers are recounted against the refit plane. The normal is
        oriented with its largest-magnitude component positive.

    Args:
        cloud (PointCloud)
        params (optional; RansacParams)
        verbose (optional; bool)

    Returns:
        PlaneModel

    Raises:
        DegenerateGeometryError, PlaneNotFoundError

    """
    check_ransac_params(params)
    points = cloud.points
    num_points = len(points)
    if num_points < 3:
        raise DegenerateGeometryError(
            "plane fitting needs at least 3 points, got {}".format(num_points))

    rng = be.make_rng(params.seed)
    triples = sample_triples(rng, num_points, params.max_iterations)
    normals, offsets, valid = planes_through_triples(points, triples)
    if not valid.any():
        raise DegenerateGeometryError("every sampled triple is collinear")

    columns = [numpy.ascontiguousarray(points[:, j]) for j in range(3)]
    best_count, best_trial = -1, -1
    for trial in numpy.flatnonzero(valid):
        count = _count_inliers(columns, normals[trial], offsets[trial],
                               params.inlier_distance)
        if count > best_count:
            best_count, best_trial = count, trial

    fraction = best_count / num_points
    be.maybe_print("RANSAC: best plane has {} of {} points ({:.3f})".format(
        best_count, num_points, fraction), verbose=verbose)
    if fraction < params.min_inlier_fraction:
        raise PlaneNotFoundError(
            "best plane holds {:.4f} of the points, below {}".format(
                fraction, params.min_inlier_fraction))

    sampled = be.within(signed_distances(points, normals[best_trial],
                                         offsets[best_trial]),
                        params.inlier_distance)
    normal, offset = fit_plane(points[sampled])
    inliers = numpy.flatnonzero(be.within(signed_distances(points, normal, offset),
                                          params.inlier_distance))
    return PlaneModel(normal, offset, be.long_tensor(inliers), len(inliers))


def remove_planes(cloud, n_planes=2, params=RansacParams(), verbose=False):
    """
    Repeatedly find the dominant plane and delete its inliers.

    Notes:
        The k-th plane (from 0) is searched with seed params.seed + k.
        A plane that fails the min_inlier_fraction bar ends the removal
        without error; the reason is kept in the termination field.
        Plane inlier indices refer to the input cloud.

    Args:
        cloud (PointCloud)
        n_planes (optional; int >= 1)
        params (optional; RansacParams)
        verbose (optional; bool)

    Returns:
        PlaneRemoval: (remaining cloud, remaining_indices into the input,
            planes in removal order, termination message)

    Raises:
        DegenerateGeometryError: only when the first plane cannot be fit.

    """
    if n_planes < 1:
        raise ValueError("n_planes must be at least 1, got {}".format(n_planes))
    keep = numpy.arange(len(cloud))
    planes = []
    termination = "removed {} planes".format(n_planes)
    for k in range(n_planes):
        current = cloud.select(keep)
        try:
            plane = ransac_plane(current, params._replace(seed=params.seed + k),
                                 verbose=verbose)
        except PlaneNotFoundError as err:
            termination = "stopped after {} planes: {}".format(k, err)
            break
        except DegenerateGeometryError as err:
            if k == 0:
                raise
            termination = "stopped after {} planes: {}".format(k, err)
            break
        removed = keep[plane.inlier_indices]
        planes.append(plane._replace(inlier_indices=be.long_tensor(removed)))
        survivors = numpy.ones(len(keep), dtype=bool)
        survivors[plane.inlier_indices] = False
        keep = keep[survivors]
        be.maybe_print("removed plane {} with {} points".format(
            k, plane.inlier_count), verbose=verbose)
    return PlaneRemoval(cloud.select(keep), be.long_tensor(keep), planes, termination)


def plane_tilt(plane):
    """
    Angle in degrees between the plane normal and the vertical axis.

    Args:
        plane (PlaneModel)

    Returns:
        float in [0, 90]

    """
    return float(be.line_angle(plane.normal, VERTICAL))


def identify_ground_and_wall(planes, vertical_tolerance=15.0):
    """
    Pick the ground and the wall out of a list of removed planes.

    Notes:
        The ground is the plane with the most inliers whose normal is within
        vertical_tolerance of the vertical. The wall is the plane with the
        most inliers among those whose normal is within vertical_tolerance of
        the horizontal.

    Args:
        planes (List[PlaneModel])
        vertical_tolerance (optional; float): degrees.

    Returns:
        ground (PlaneModel or None), wall (PlaneModel or None)

    """
    def largest(candidates):
        if not candidates:
            return None
        return max(candidates, key=lambda p: p.inlier_count)
    ground = largest([p for p in planes if plane_tilt(p) <= vertical_tolerance])
    wall = largest([p for p in planes if plane_tilt(p) >= 90 - vertical_tolerance
                    and p is not ground])
    return ground, wall


def plane_offset_mask(cloud, wall, max_distance):
    """
    Which points lie between a plane and max_distance in front of it.

    Notes:
        The side of the plane is chosen so the cloud centroid has a
        non-negative signed distance.

    Args:
        cloud (PointCloud)
        wall (PlaneModel)
        max_distance (float > 0)

    Returns:
        bool tensor (num_points,)

    """
    if not max_distance > 0:
        raise ValueError("max_distance must be positive, got {}".format(max_distance))
    if len(cloud) == 0:
        return numpy.zeros(0, dtype=bool)
    normal, offset = be.float_tensor(wall.normal), float(wall.offset)
    centroid = numpy.mean(cloud.points, axis=0)
    if numpy.dot(centroid, normal) + offset < 0:
        normal, offset = -normal, -offset
    distance = signed_distances(cloud.points, normal, offset)
    return (distance >= 0) & (distance <= max_distance)


def crop_by_plane_offset(cloud, wall, max_distance):
    """
    Keep the points within max_distance in front of the wall, in order.

    Args:
        cloud (PointCloud)
        wall (PlaneModel)
        max_distance (float > 0)

    Returns:
        PointCloud

    """
    return cloud.select(plane_offset_mask(cloud, wall, max_distance))
