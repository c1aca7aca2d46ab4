"""
Brace clustering: density-based spatial clustering of the linear points,
then the two-stage (spatial, then direction) refinement of clusters that
hold members running in different directions.

"""
from collections import namedtuple
import numpy
from sklearn.cluster import DBSCAN

from .. import backends as be

NOISE = -1

# directions this linear or more seed the dominant lines of a mixed cluster
SEED_LINEARITY = 0.8
# a dominant line holds at least this share of the seeds
DOMINANT_SHARE = 0.01
# hybrid pieces below this share of the largest piece are dropped
SMALL_PIECE_SHARE = 0.05

Cluster = namedtuple("Cluster", ["label", "point_indices"])


def dbscan(points, eps, min_pts, subset=None):
    """
    Density-based clustering with noise.

    Notes:
        A core point has at least min_pts points (itself included) within
        eps. Clusters are numbered in the order of their lowest core index
        and a border point joins the first cluster that reaches it in
        ascending index order, so the output is deterministic for a fixed
        point order.

    Args:
        points (PointCloud or tensor (num_points, 3))
        eps (float > 0): neighborhood radius in meters.
        min_pts (int >= 1)
        subset (optional; long tensor): cluster only these points.

    Returns:
        List[Cluster]: point_indices refer to points (not to the subset),
            sorted ascending. Noise points are left out.

    """
    if not eps > 0:
        raise ValueError("eps must be positive, got {}".format(eps))
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1, got {}".format(min_pts))
    coordinates = getattr(points, "points", points)
    ids = numpy.arange(len(coordinates)) if subset is None else be.long_tensor(subset)
    if len(ids) == 0:
        return []
    labels = DBSCAN(eps=eps, min_samples=min_pts, algorithm="kd_tree").fit(
        coordinates[ids]).labels_
    return [Cluster(int(label), ids[labels == label])
            for label in range(labels.max() + 1)]


def cluster_labels(clusters, num_points):
    """
    Per-point labels from a list of clusters, NOISE where unassigned.

    Args:
        clusters (List[Cluster])
        num_points (int)

    Returns:
        long tensor (num_points,)

    """
    labels = numpy.full(num_points, NOISE, dtype=be.Long)
    for cluster in clusters:
        labels[cluster.point_indices] = cluster.label
    return labels


def max_line_angle(directions, chunk=256, limit=None):
    """
    Largest angle in degrees between any two of the (sign-folded) directions.

    Notes:
        With a limit, the scan stops at the first block holding a pair
        whose angle exceeds it, so the result is only exact up to the limit.

    Args:
        directions (tensor (num_directions, 3)): unit vectors.
        chunk (optional; int)
        limit (optional; float): degrees.

    Returns:
        float

    """
    if len(directions) < 2:
        return 0.0
    stop = -1.0 if limit is None else numpy.cos(numpy.radians(limit))
    smallest = 1.0
    for _, block in be.inclusive_slice(directions, 0, len(directions), chunk):
        smallest = min(smallest, float(numpy.min(numpy.abs(numpy.dot(block, directions.T)))))
        if smallest < stop:
            break
    return float(numpy.degrees(numpy.arccos(numpy.clip(smallest, 0.0, 1.0))))


def mean_line(directions):
    """
    The line direction closest to a set of sign-free unit directions:
    the leading eigenvector of their scatter.

    Args:
        directions (tensor (num_directions, 3))

    Returns:
        tensor (3,)

    """
    directions = be.float_tensor(directions).reshape(-1, 3)
    _, vectors = numpy.linalg.eigh(numpy.dot(directions.T, directions))
    return be.orient_positive(vectors[:, -1])


def _indices(cluster):
    return be.long_tensor(getattr(cluster, "point_indices", cluster))


def detect_mixed_cluster(cluster, features, mixing_angle=25.0):
    """
    Whether a cluster holds members running in different directions.

    Notes:
        True iff the largest pairwise angle between per-point principal
        directions exceeds mixing_angle. A cluster whose directions all lie
        within mixing_angle / 2 of their mean line cannot be mixed and is
        accepted without the pairwise scan.

    Args:
        cluster (Cluster or long tensor)
        features (ShapeFeatures): for the whole cloud.
        mixing_angle (optional; float): degrees.

    Returns:
        bool

    """
    directions = features.principal_direction[_indices(cluster)]
    if len(directions) < 2:
        return False
    alignment = numpy.abs(numpy.dot(directions, mean_line(directions)))
    if numpy.min(alignment) >= numpy.cos(numpy.radians(mixing_angle / 2)):
        return False
    return max_line_angle(directions, limit=mixing_angle) > mixing_angle


def _greedy_groups(directions, accept):
    sums = numpy.zeros((0, 3))
    counts = []
    for d in directions:
        if len(counts) > 0:
            alignment = numpy.dot(sums, d) / be.norm(sums, axis=1)
            best = int(numpy.argmax(numpy.abs(alignment)))
            if abs(alignment[best]) >= accept:
                sums[best] += d if alignment[best] >= 0 else -d
                counts[best] += 1
                continue
        sums = numpy.vstack([sums, d])
        counts.append(1)
    return list(sums), counts


def _merge_groups(sums, counts, accept):
    # closest pair first, until no two means lie within the threshold
    while len(sums) > 1:
        means = numpy.array([s / be.norm(s) for s in sums])
        alignment = numpy.abs(numpy.dot(means, means.T))
        numpy.fill_diagonal(alignment, -1.0)
        a, b = sorted(numpy.unravel_index(int(numpy.argmax(alignment)), alignment.shape))
        if alignment[a, b] < accept:
            break
        sums[a] = sums[a] + (sums[b] if numpy.dot(sums[a], sums[b]) >= 0 else -sums[b])
        counts[a] += counts[b]
        del sums[b], counts[b]
    return sums, counts


def dominant_lines(directions, angle_threshold, seeds=None, min_size=1):
    """
    The dominant line directions of a set of unit directions.

    Notes:
        Means are learned from the seed directions only, all of them when
        no seed is given. Seeds are visited in order: each joins the group
        whose running mean is closest, if within angle_threshold, otherwise
        it starts a new group. Groups whose means lie within angle_threshold
        of each other are then merged, closest pair first. A group is
        dominant if it holds at least min_size seeds and DOMINANT_SHARE of
        all seeds; the largest group always is.

    Args:
        directions (tensor (num_directions, 3)): unit vectors.
        angle_threshold (float): degrees.
        seeds (optional; bool tensor (num_directions,))
        min_size (optional; int)

    Returns:
        tensor (num_lines, 3): unit means in order of first appearance.

    """
    directions = be.float_tensor(directions).reshape(-1, 3)
    if len(directions) == 0:
        return numpy.zeros((0, 3))
    if seeds is None or not numpy.any(seeds):
        seeds = numpy.ones(len(directions), dtype=bool)
    accept = numpy.cos(numpy.radians(angle_threshold))
    sums, counts = _merge_groups(*_greedy_groups(directions[seeds], accept), accept=accept)
    counts = numpy.array(counts)
    dominant = counts >= max(min_size, DOMINANT_SHARE * len(directions[seeds]))
    dominant[int(numpy.argmax(counts))] = True
    sums = numpy.array(sums)[dominant]
    return sums / be.norm(sums, axis=1)[:, None]


def direction_groups(directions, angle_threshold, seeds=None, min_size=1,
                     keep_angle=None):
    """
    Assign every direction, seed or not, to the closest of the dominant
    lines, and to NOISE if that line is farther than keep_angle.

    Args:
        directions (tensor (num_directions, 3)): unit vectors.
        angle_threshold (float): degrees.
        seeds (optional; bool tensor (num_directions,))
        min_size (optional; int)
        keep_angle (optional; float): degrees, unlimited by default.

    Returns:
        long tensor (num_directions,): group per direction, or NOISE

    """
    directions = be.float_tensor(directions).reshape(-1, 3)
    if len(directions) == 0:
        return numpy.zeros(0, dtype=be.Long)
    means = dominant_lines(directions, angle_threshold, seeds, min_size)
    alignment = numpy.abs(numpy.dot(directions, means.T))
    groups = numpy.argmax(alignment, axis=1).astype(be.Long)
    if keep_angle is not None:
        keep = numpy.cos(numpy.radians(keep_angle))
        groups[alignment[numpy.arange(len(directions)), groups] < keep] = NOISE
    return groups


def hybrid_cluster(cluster, features, points, angle_threshold=30.0, eps=0.06,
                   min_pts=6, mixing_angle=25.0):
    """
    Split a cluster by per-point principal direction, then restore spatial
    coherence by clustering each direction group again.

    Notes:
        Dominant lines are seeded from points with linearity of at least
        SEED_LINEARITY. Each spatial piece then keeps only the points within
        min(mixing_angle, angle_threshold) / 2 of its mean line, so no
        sub-cluster is itself mixed. Pieces left with fewer than min_pts
        points, or less than SMALL_PIECE_SHARE of the largest piece, are
        dropped.

    Args:
        cluster (Cluster or long tensor)
        features (ShapeFeatures): for the whole cloud.
        points (PointCloud or tensor (num_points, 3))
        angle_threshold (optional; float): degrees.
        eps (optional; float): spatial radius of the second stage.
        min_pts (optional; int)
        mixing_angle (optional; float): degrees.

    Returns:
        List[Cluster]: labels numbered from 0.

    """
    ids = _indices(cluster)
    directions = features.principal_direction[ids]
    seeds = features.linearity[ids] >= SEED_LINEARITY
    groups = direction_groups(directions, angle_threshold, seeds, min_size=min_pts)
    keep = numpy.cos(numpy.radians(min(mixing_angle, angle_threshold) / 2))
    pieces = []
    for group in range(groups.max() + 1 if len(groups) else 0):
        members = ids[groups == group]
        for piece in dbscan(points, eps, min_pts, subset=members):
            local = features.principal_direction[piece.point_indices]
            aligned = numpy.abs(numpy.dot(local, mean_line(local))) >= keep
            pieces.append(piece.point_indices[aligned])
    smallest = max(min_pts, SMALL_PIECE_SHARE * max([len(p) for p in pieces] + [0]))
    return [Cluster(label, piece) for label, piece in
            enumerate(p for p in pieces if len(p) >= smallest)]


def refine_clusters(clusters, features, points, mixing_angle=25.0,
                    angle_threshold=30.0, eps=0.06, min_pts=6, verbose=False):
    """
    Replace every mixed cluster by its hybrid sub-clusters and number the
    result consecutively.

    Args:
        clusters (List[Cluster])
        features (ShapeFeatures)
        points (PointCloud or tensor (num_points, 3))
        mixing_angle (optional; float): degrees.
        angle_threshold (optional; float): degrees.
        eps (optional; float)
        min_pts (optional; int)
        verbose (optional; bool)

    Returns:
        List[Cluster]

    """
    refined = []
    num_mixed = 0
    for cluster in clusters:
        if detect_mixed_cluster(cluster, features, mixing_angle):
            num_mixed += 1
            pieces = [p.point_indices for p in hybrid_cluster(
                cluster, features, points, angle_threshold, eps, min_pts, mixing_angle)]
        else:
            pieces = [cluster.point_indices]
        for piece in pieces:
            refined.append(Cluster(len(refined), piece))
    be.maybe_print("split {} mixed clusters: {} -> {} clusters".format(
        num_mixed, len(clusters), len(refined)), verbose=verbose)
    return refined
