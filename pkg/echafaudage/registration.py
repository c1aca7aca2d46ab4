"""
Rigid alignment of a campaign scan onto a reference scan by point-to-point
iterative closest point (ICP). The quantity minimized is the mean squared
residual between each current point and its nearest reference point.

"""
from collections import namedtuple
import numpy

from . import backends as be
from .cloud import DegenerateGeometryError, EmptyCloudError, build_index

# maps p to rotation . p + translation
RigidTransform = namedtuple("RigidTransform", ["rotation", "translation"])

IcpParams = namedtuple("IcpParams", ["max_iterations", "convergence_delta",
                                     "max_correspondence_distance", "initial"])
IcpParams.__new__.__defaults__ = (50, 1e-6, 1.0, None)

IcpResult = namedtuple("IcpResult", ["transform", "mse", "error_history", "iterations",
                                     "converged", "correspondence_count"])


class NoCorrespondenceError(ValueError):

    def __init__(self, message, iteration=None):
        """
        No current point has a reference point within the rejection radius.

        Args:
            message (str)
            iteration (optional; int): the ICP iteration (0 is the initial
                transform) at which it happened.

        Returns:
            NoCorrespondenceError

        """
        self.iteration = iteration
        if iteration is not None:
            message = "iteration {}: {}".format(iteration, message)
        super().__init__(message)


# ----- transform algebra ----- #

def identity_transform():
    """
    The identity rigid transform.

    Returns:
        RigidTransform

    """
    return RigidTransform(numpy.eye(3), numpy.zeros(3))


def compose(second, first):
    """
    The transform that applies first, then second.

    Args:
        second (RigidTransform)
        first (RigidTransform)

    Returns:
        RigidTransform

    """
    rotation = numpy.dot(second.rotation, first.rotation)
    translation = numpy.dot(second.rotation, first.translation) + second.translation
    return RigidTransform(rotation, translation)


def invert(t):
    """
    The inverse of a rigid transform.

    Args:
        t (RigidTransform)

    Returns:
        RigidTransform

    """
    rotation = t.rotation.T
    return RigidTransform(rotation, -numpy.dot(rotation, t.translation))


def check_transform(t, tol=1e-9):
    """
    Verify that the rotation is orthonormal with determinant +1.

    Args:
        t (RigidTransform)
        tol (optional; float)

    Returns:
        None

    Raises:
        ValueError

    """
    rotation = be.float_tensor(t.rotation)
    if rotation.shape != (3, 3) or be.float_tensor(t.translation).shape != (3,):
        raise ValueError("a rigid transform is a 3x3 rotation and a 3-vector")
    if not numpy.allclose(numpy.dot(rotation.T, rotation), numpy.eye(3), rtol=0, atol=tol):
        raise ValueError("rotation is not orthonormal")
    if abs(numpy.linalg.det(rotation) - 1) > tol:
        raise ValueError("rotation has determinant {}".format(numpy.linalg.det(rotation)))


def transform_to_list(t):
    """
    Serialize as the 12 numbers of the row-major [R | T] block.

    Args:
        t (RigidTransform)

    Returns:
        List[float]

    """
    block = numpy.hstack([t.rotation, t.translation[:, None]])
    return [float(v) for v in block.ravel()]


def transform_from_list(values):
    """
    Rebuild a transform from 12 row-major [R | T] numbers.

    Args:
        values (List[float])

    Returns:
        RigidTransform

    """
    block = be.float_tensor(values)
    if block.size != 12:
        raise ValueError("expected 12 numbers, got {}".format(block.size))
    block = block.reshape(3, 4)
    t = RigidTransform(block[:, :3].copy(), block[:, 3].copy())
    check_transform(t, tol=1e-6)
    return t


def rotation_angle(rotation):
    """
    Rotation angle of a rotation matrix, in degrees.

    Args:
        rotation (tensor (3, 3))

    Returns:
        float

    """
    cos = (numpy.trace(rotation) - 1) / 2
    return float(numpy.degrees(numpy.arccos(numpy.clip(cos, -1, 1))))


def transform_points(points, t):
    """
    Map each row p of points to R p + T.

    Args:
        points (tensor (num_points, 3))
        t (RigidTransform)

    Returns:
        tensor (num_points, 3)

    """
    return numpy.dot(points, t.rotation.T) + t.translation


def apply_transform(cloud, t):
    """
    Transform every point of a cloud; colors and order are kept.

    Args:
        cloud (PointCloud)
        t (RigidTransform)

    Returns:
        PointCloud

    """
    return cloud.with_points(transform_points(cloud.points, t))


# ----- estimation ----- #

def estimate_rigid_transform(source_points, target_points):
    """
    Closed-form least-squares rigid transform taking source onto target.

    Notes:
        Centroids are removed, the 3x3 cross-covariance is factored by SVD
        and the rotation is corrected for reflection so that det(R) = +1.

    Args:
        source_points (tensor (num_points, 3))
        target_points (tensor (num_points, 3)): corresponding points.

    Returns:
        RigidTransform

    Raises:
        DegenerateGeometryError

    """
    source = be.point_tensor(source_points)
    target = be.point_tensor(target_points)
    if len(source) != len(target):
        raise ValueError("{} source points for {} target points".format(
            len(source), len(target)))
    if len(source) < 3:
        raise DegenerateGeometryError(
            "need at least 3 point pairs, got {}".format(len(source)))

    source_mean = numpy.mean(source, axis=0)
    target_mean = numpy.mean(target, axis=0)
    centered_source = source - source_mean
    centered_target = target - target_mean

    spread = numpy.linalg.svd(centered_source, compute_uv=False)
    if spread[1] <= 1e-12 * max(spread[0], be.EPSILON):
        raise DegenerateGeometryError("source points are collinear")

    cross = numpy.dot(centered_source.T, centered_target)
    U, _, Vt = numpy.linalg.svd(cross)
    reflection = numpy.sign(numpy.linalg.det(numpy.dot(Vt.T, U.T)))
    correction = numpy.diag([1.0, 1.0, reflection if reflection != 0 else 1.0])
    rotation = numpy.dot(Vt.T, numpy.dot(correction, U.T))
    translation = target_mean - numpy.dot(rotation, source_mean)
    return RigidTransform(rotation, translation)


def centroid_initial_transform(reference, current):
    """
    Pure translation moving the centroid of current onto that of reference.

    Args:
        reference (PointCloud)
        current (PointCloud)

    Returns:
        RigidTransform

    """
    shift = numpy.mean(reference.points, axis=0) - numpy.mean(current.points, axis=0)
    return RigidTransform(numpy.eye(3), shift)


def _correspond(index, moved, max_correspondence_distance, workers):
    """
    Pair each moved current point with its nearest reference point.

    Returns:
        nearest (long tensor), squared residuals (tensor), keep (bool tensor)

    """
    nearest, _ = index.nearest(moved, workers=workers)
    squared = be.square_distances(index.points[nearest], moved)
    keep = squared <= max_correspondence_distance ** 2
    return nearest, squared, keep


def alignment_error(reference, current, t,
                    max_correspondence_distance=numpy.inf, index=None, workers=1):
    """
    Mean squared residual between transformed current points and their
    nearest reference points, over pairs within the rejection radius.

    Args:
        reference (PointCloud)
        current (PointCloud)
        t (RigidTransform): applied to current.
        max_correspondence_distance (optional; float): pairs farther apart
            are discarded.
        index (optional; SpatialIndex): a prebuilt index of reference.
        workers (optional; int)

    Returns:
        mse (float), correspondence_count (int)

    Raises:
        EmptyCloudError, NoCorrespondenceError

    """
    if len(reference) == 0 or len(current) == 0:
        raise EmptyCloudError("alignment error needs two non-empty clouds")
    index = index if index is not None else build_index(reference)
    moved = transform_points(current.points, t)
    _, squared, keep = _correspond(index, moved, max_correspondence_distance, workers)
    count = int(numpy.sum(keep))
    if count == 0:
        raise NoCorrespondenceError("no correspondences within {}".format(
            max_correspondence_distance))
    return float(numpy.mean(squared[keep])), count


def check_icp_params(params):
    """
    Validate the bounds of an IcpParams.

    Args:
        params (IcpParams)

    Returns:
        None

    Raises:
        ValueError

    """
    if params.max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if params.convergence_delta < 0:
        raise ValueError("convergence_delta must be non-negative")
    if not params.max_correspondence_distance > 0:
        raise ValueError("max_correspondence_distance must be positive")
    if params.initial is not None:
        check_transform(params.initial)


def icp(reference, current, params=IcpParams(), index=None, workers=1, verbose=False):
    """
    Align current onto reference by point-to-point ICP.

    Notes:
        error_history[0] is the error of the initial transform and
        iterations == len(error_history) - 1. Convergence is declared when
        |e_k - e_(k-1)| / max(e_(k-1), 1e-12) < convergence_delta. A step
        that would increase the error (possible only through correspondence
        rejection) is discarded and iteration stops.

    Args:
        reference (PointCloud): the certified scan.
        current (PointCloud): the campaign scan to move.
        params (optional; IcpParams)
        index (optional; SpatialIndex): a prebuilt index of reference.
        workers (optional; int): threads for correspondence search.
        verbose (optional; bool)

    Returns:
        IcpResult

    Raises:
        DegenerateGeometryError, NoCorrespondenceError

    """
    check_icp_params(params)
    if len(reference) < 3 or len(current) < 3:
        raise DegenerateGeometryError("ICP needs at least 3 points in each cloud")
    index = index if index is not None else build_index(reference)
    transform = params.initial if params.initial is not None else identity_transform()

    def evaluate(t, iteration):
        moved = transform_points(current.points, t)
        nearest, squared, keep = _correspond(
            index, moved, params.max_correspondence_distance, workers)
        if not keep.any():
            raise NoCorrespondenceError("no correspondences within {}".format(
                params.max_correspondence_distance), iteration=iteration)
        return nearest, keep, float(numpy.mean(squared[keep]))

    nearest, keep, error = evaluate(transform, 0)
    history = [error]
    converged = False
    be.maybe_print("ICP: initial mse {:.6e} over {} pairs".format(
        error, int(keep.sum())), verbose=verbose)

    for iteration in range(1, params.max_iterations + 1):
        step = estimate_rigid_transform(transform_points(current.points[keep], transform),
                                        index.points[nearest[keep]])
        candidate = compose(step, transform)
        new_nearest, new_keep, new_error = evaluate(candidate, iteration)
        change = abs(error - new_error) / max(error, 1e-12)
        if new_error > error:
            converged = change < params.convergence_delta
            be.maybe_print("ICP: step {} would raise the error; stopping".format(
                iteration), verbose=verbose)
            break
        transform, nearest, keep, error = candidate, new_nearest, new_keep, new_error
        history.append(error)
        be.maybe_print("ICP iteration {}: mse {:.6e}".format(iteration, error),
                       verbose=verbose)
        if change < params.convergence_delta:
            converged = True
            break

    return IcpResult(transform, history[-1], history, len(history) - 1,
                     converged, int(keep.sum()))
