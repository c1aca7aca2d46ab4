"""
Geometric scaffold elements: braces as segments between their farthest
points, and joints as the mean of the cloud around brace ends and brace
crossings.

"""
from collections import namedtuple
import numpy
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import backends as be
from .. import math_utils

VERTICAL = "vertical"
HORIZONTAL_X = "horizontal_x"
HORIZONTAL_Y = "horizontal_y"
DIAGONAL = "diagonal"

ORIENTATIONS = (VERTICAL, HORIZONTAL_X, HORIZONTAL_Y, DIAGONAL)

AXES = {VERTICAL: be.float_tensor([0, 0, 1]),
        HORIZONTAL_X: be.float_tensor([1, 0, 0]),
        HORIZONTAL_Y: be.float_tensor([0, 1, 0])}

# above this many points the farthest pair is searched on the convex hull
EXHAUSTIVE_LIMIT = 2000

# braces closer to parallel than this never form a crossing
PARALLEL_ANGLE = 10.0

BraceSegment = namedtuple("BraceSegment", ["endpoint_a", "endpoint_b", "direction",
                                           "length", "orientation", "source_cluster"])

Joints = namedtuple("Joints", ["positions", "assignment", "extra_assignment"])


class BraceError(ValueError):
    """
    Raised when a cluster cannot be turned into a brace.

    """
    pass


def classify_orientation(segment, vertical_tolerance=15.0, horizontal_tolerance=15.0):
    """
    Orientation class of a brace from its direction.

    Notes:
        Vertical wins over horizontal; a direction close to neither the
        vertical nor a horizontal axis is diagonal.

    Args:
        segment (BraceSegment or tensor (3,)): a segment or a unit direction.
        vertical_tolerance (optional; float): degrees.
        horizontal_tolerance (optional; float): degrees.

    Returns:
        str: one of ORIENTATIONS

    """
    direction = be.float_tensor(getattr(segment, "direction", segment))
    if be.line_angle(direction, AXES[VERTICAL]) <= vertical_tolerance:
        return VERTICAL
    if be.line_angle(direction, AXES[HORIZONTAL_X]) <= horizontal_tolerance:
        return HORIZONTAL_X
    if be.line_angle(direction, AXES[HORIZONTAL_Y]) <= horizontal_tolerance:
        return HORIZONTAL_Y
    return DIAGONAL


def make_segment(a, b, source_cluster=-1, vertical_tolerance=15.0,
                 horizontal_tolerance=15.0):
    """
    A BraceSegment between two points, ordered so that endpoint_a is the
    lexicographically smaller one.

    Args:
        a (tensor (3,))
        b (tensor (3,))
        source_cluster (optional; int)
        vertical_tolerance (optional; float)
        horizontal_tolerance (optional; float)

    Returns:
        BraceSegment

    """
    a, b = be.float_tensor(a), be.float_tensor(b)
    if tuple(b) < tuple(a):
        a, b = b, a
    length = float(be.norm(b - a))
    if not length > 0:
        raise BraceError("zero-length brace")
    direction = (b - a) / length
    return BraceSegment(a, b, direction, length,
                        classify_orientation(direction, vertical_tolerance,
                                             horizontal_tolerance),
                        source_cluster)


def farthest_pair(points):
    """
    Indices (i < j) of the two points at maximum distance.

    Notes:
        Exhaustive up to EXHAUSTIVE_LIMIT points; beyond, the search runs
        over the convex hull vertices, which always contain a farthest pair,
        falling back to the exhaustive scan when the hull is degenerate.

    Args:
        points (tensor (num_points, 3))

    Returns:
        (int, int)

    """
    if len(points) > EXHAUSTIVE_LIMIT:
        try:
            vertices = numpy.sort(ConvexHull(points).vertices)
        except (QhullError, ValueError):
            vertices = None
        if vertices is not None:
            i, j, _ = math_utils.farthest_pair(points[vertices])
            return int(vertices[i]), int(vertices[j])
    i, j, _ = math_utils.farthest_pair(points)
    return i, j


def extract_brace(points, source_cluster=-1, vertical_tolerance=15.0,
                  horizontal_tolerance=15.0):
    """
    The brace spanned by a cluster: the segment between its two farthest points.

    Args:
        points (tensor (num_points, 3)): the cluster's points.
        source_cluster (optional; int): the cluster label.
        vertical_tolerance (optional; float): degrees.
        horizontal_tolerance (optional; float): degrees.

    Returns:
        BraceSegment

    Raises:
        BraceError

    """
    points = be.point_tensor(points)
    if len(points) < 2:
        raise BraceError("a brace needs at least 2 points, got {}".format(len(points)))
    i, j = farthest_pair(points)
    return make_segment(points[i], points[j], source_cluster,
                        vertical_tolerance, horizontal_tolerance)


def find_crossings(braces, tolerance=0.10, margin=0.18):
    """
    Points where two non-parallel braces pass each other.

    Notes:
        For each pair of braces at least PARALLEL_ANGLE apart, the closest
        points of their lines must be within tolerance of each other and
        lie on the braces extended by margin at both ends. The crossing is
        the midpoint of the two closest points.

    Args:
        braces (List[BraceSegment])
        tolerance (optional; float): meters.
        margin (optional; float): meters.

    Returns:
        tensor (num_crossings, 3)

    """
    if len(braces) < 2:
        return be.point_tensor([])
    starts = numpy.stack([b.endpoint_a for b in braces])
    directions = numpy.stack([b.direction for b in braces])
    lengths = be.float_tensor([b.length for b in braces])
    i, j = numpy.triu_indices(len(braces), k=1)

    u, v = directions[i], directions[j]
    cos = numpy.sum(u * v, axis=1)
    crossing = be.line_angle(u, v) >= PARALLEL_ANGLE
    w = starts[i] - starts[j]
    d, e = numpy.sum(u * w, axis=1), numpy.sum(v * w, axis=1)
    denominator = numpy.where(crossing, 1 - cos ** 2, 1.0)
    s = (cos * e - d) / denominator
    t = (e - cos * d) / denominator
    p = starts[i] + s[:, None] * u
    q = starts[j] + t[:, None] * v
    crossing &= be.norm(p - q, axis=1) <= tolerance
    crossing &= (s >= -margin) & (s <= lengths[i] + margin)
    crossing &= (t >= -margin) & (t <= lengths[j] + margin)
    return (p[crossing] + q[crossing]) / 2


def merge_candidates(candidates, merge_radius):
    """
    Single-linkage merging of candidate joints.

    Notes:
        Candidates within merge_radius are linked and each connected group
        is replaced by the mean of its candidates; groups whose means come
        within merge_radius are linked again until all means are farther
        apart. Groups are numbered by their first candidate.

    Args:
        candidates (tensor (num_candidates, 3))
        merge_radius (float)

    Returns:
        positions (tensor (num_joints, 3)),
        labels (long tensor (num_candidates,)): joint of each candidate

    """
    labels = numpy.arange(len(candidates))
    while True:
        _, first, labels = numpy.unique(labels, return_index=True, return_inverse=True)
        order = numpy.argsort(first, kind="stable")
        labels = numpy.argsort(order)[labels.reshape(-1)]
        num_groups = len(first)
        counts = numpy.bincount(labels, minlength=num_groups)
        positions = numpy.stack([numpy.bincount(labels, weights=candidates[:, k],
                                                minlength=num_groups)
                                 for k in range(3)], axis=1) / counts[:, None]
        pairs = cKDTree(positions).query_pairs(merge_radius, output_type="ndarray")
        if len(pairs) == 0:
            return positions, labels.astype(be.Long)
        links = coo_matrix((numpy.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                           shape=(num_groups, num_groups))
        _, components = connected_components(links, directed=False)
        labels = components[labels]


def form_joints(braces, cloud, index, joint_radius=0.08, merge_radius=0.10,
                extra_candidates=None, workers=1):
    """
    Joints at the brace ends.

    Notes:
        Each brace endpoint (and each extra candidate) is replaced by the
        mean of the cloud points within joint_radius of it, or kept as is
        when there are none. Candidates are then merged by merge_candidates.

    Args:
        braces (List[BraceSegment])
        cloud (PointCloud)
        index (SpatialIndex): over cloud.
        joint_radius (optional; float)
        merge_radius (optional; float)
        extra_candidates (optional; tensor (num_extra, 3)): e.g. crossings.
        workers (optional; int)

    Returns:
        Joints: positions (num_joints, 3), assignment (num_braces, 2) joint ids
            of endpoint_a and endpoint_b, extra_assignment (num_extra,)

    """
    if not (joint_radius > 0 and merge_radius > 0):
        raise ValueError("joint_radius and merge_radius must be positive")
    ends = [p for b in braces for p in (b.endpoint_a, b.endpoint_b)]
    extra = be.point_tensor(extra_candidates if extra_candidates is not None else [])
    seeds = be.point_tensor(ends + list(extra))
    if len(seeds) == 0:
        return Joints(be.point_tensor([]), numpy.zeros((0, 2), dtype=be.Long),
                      numpy.zeros(0, dtype=be.Long))
    neighborhoods = index.radius_neighbors(seeds, joint_radius, workers=workers)
    candidates = numpy.stack([
        numpy.mean(cloud.points[n], axis=0) if len(n) > 0 else seed
        for seed, n in zip(seeds, neighborhoods)])
    positions, labels = merge_candidates(candidates, merge_radius)
    num_ends = len(ends)
    return Joints(positions, labels[:num_ends].reshape(-1, 2), labels[num_ends:])


def split_braces(braces, joints, tolerance=0.10, margin=0.10,
                 vertical_tolerance=15.0, horizontal_tolerance=15.0):
    """
    Cut braces at the joints lying along them, and move every brace end
    onto its joint.

    Notes:
        A joint other than the brace's own end joints splits the brace when
        it is within tolerance of the brace line and more than margin from
        both ends. The pieces run joint to joint. A brace whose ends share
        one joint and has no interior joint is passed through unchanged.

    Args:
        braces (List[BraceSegment])
        joints (Joints): from form_joints.
        tolerance (optional; float): meters.
        margin (optional; float): meters.
        vertical_tolerance (optional; float)
        horizontal_tolerance (optional; float)

    Returns:
        segments (List[BraceSegment]),
        assignment (long tensor (num_segments, 2))

    """
    positions = joints.positions
    segments, assignment = [], []
    for brace, (a_id, b_id) in zip(braces, joints.assignment):
        offsets = positions - brace.endpoint_a
        along = numpy.dot(offsets, brace.direction)
        across = be.norm(offsets - along[:, None] * brace.direction, axis=1)
        interior = (across <= tolerance) & (along > margin) & \
                   (along < brace.length - margin)
        interior[[a_id, b_id]] = False
        chain = [int(a_id)] + [int(k) for k in
                               numpy.flatnonzero(interior)[numpy.argsort(
                                   along[interior], kind="stable")]] + [int(b_id)]
        if len(chain) == 2 and a_id == b_id:
            segments.append(brace)
            assignment.append((a_id, b_id))
            continue
        for u, v in zip(chain[:-1], chain[1:]):
            if u == v:
                continue
            piece = make_segment(positions[u], positions[v], brace.source_cluster,
                                 vertical_tolerance, horizontal_tolerance)
            # make_segment orders the ends, keep the joint ids with them
            if numpy.array_equal(piece.endpoint_a, positions[u]):
                assignment.append((u, v))
            else:
                assignment.append((v, u))
            segments.append(piece._replace(orientation=brace.orientation))
    return segments, be.long_tensor(assignment).reshape(-1, 2)
