"""
Per-point comparison of an aligned campaign scan with the reference scan:
cloud-to-cloud distances, threshold classification, matched/modified change
maps, and colored exports.

"""
from collections import namedtuple
import numpy
import pandas

from . import backends as be
from .cloud import EmptyCloudError, PointCloud, save_cloud

WITHIN = "within"
EXCEEDING = "exceeding"
MATCHED = "matched"
MODIFIED = "modified"

DEFAULT_PALETTE = {
    MATCHED: (0, 0, 255),
    MODIFIED: (255, 255, 0),
    WITHIN: (0, 255, 0),
    EXCEEDING: (255, 0, 0),
}

DEFAULT_CHARACTERISTIC_LENGTH = 1.0

DeviationReport = namedtuple("DeviationReport", ["distances", "threshold",
                                                 "threshold_fraction",
                                                 "characteristic_length",
                                                 "labels", "exceeding_fraction"])

ChangeMap = namedtuple("ChangeMap", ["labels", "match_distance"])


def cloud_distances(current_aligned, reference_index, workers=1):
    """
    Distance from every current point to its nearest reference point.

    Args:
        current_aligned (PointCloud): already moved by the ICP transform.
        reference_index (SpatialIndex): index of the reference cloud.
        workers (optional; int)

    Returns:
        tensor (num_points,): in the order of current_aligned.

    """
    if reference_index is None or len(reference_index) == 0:
        raise EmptyCloudError("reference cloud is empty")
    _, distances = reference_index.nearest(current_aligned.points, workers=workers)
    return distances


def classify_deviation(distances, threshold_fraction, characteristic_length):
    """
    Label each distance as within or exceeding
    threshold = threshold_fraction * characteristic_length.

    Notes:
        The comparison is strict: a distance equal to the threshold is within.

    Args:
        distances (tensor (num_points,))
        threshold_fraction (float > 0): e.g. 0.05 or 0.10.
        characteristic_length (float > 0): meters.

    Returns:
        DeviationReport

    """
    if not threshold_fraction > 0:
        raise ValueError("threshold_fraction must be positive")
    if not characteristic_length > 0:
        raise ValueError("characteristic_length must be positive")
    distances = be.float_tensor(distances)
    threshold = threshold_fraction * characteristic_length
    exceeding = distances > threshold
    labels = numpy.where(exceeding, EXCEEDING, WITHIN)
    fraction = float(numpy.mean(exceeding)) if len(distances) else 0.0
    return DeviationReport(distances, threshold, threshold_fraction,
                           characteristic_length, labels, fraction)


def change_map(current_aligned, reference_index, match_distance, workers=1):
    """
    Label each current point matched (within match_distance of the
    reference) or modified.

    Args:
        current_aligned (PointCloud)
        reference_index (SpatialIndex)
        match_distance (float > 0): may be numpy.inf.
        workers (optional; int)

    Returns:
        ChangeMap

    """
    if not match_distance > 0:
        raise ValueError("match_distance must be positive")
    distances = cloud_distances(current_aligned, reference_index, workers=workers)
    return ChangeMap(numpy.where(distances <= match_distance, MATCHED, MODIFIED),
                     match_distance)


def label_counts(labels):
    """
    Number of points carrying each label.

    Args:
        labels (tensor (num_points,) of str)

    Returns:
        Dict[str, int]

    """
    counts = pandas.Series(labels, dtype=object).value_counts()
    return {str(k): int(v) for k, v in sorted(counts.items())}


def deviation_summary(report):
    """
    The report block describing a DeviationReport.

    Args:
        report (DeviationReport)

    Returns:
        dict

    """
    counts = {WITHIN: 0, EXCEEDING: 0}
    counts.update(label_counts(report.labels))
    return {"threshold_fraction": report.threshold_fraction,
            "characteristic_length": report.characteristic_length,
            "threshold": report.threshold,
            "exceeding_fraction": report.exceeding_fraction,
            "counts": counts}


def colorize(cloud, labels, palette=None):
    """
    Replace the colors of a cloud by the palette color of each label.

    Args:
        cloud (PointCloud)
        labels (tensor (num_points,) of str)
        palette (optional; Dict[str, (int, int, int)]): overrides entries
            of DEFAULT_PALETTE.

    Returns:
        PointCloud

    """
    if len(labels) != len(cloud):
        raise ValueError("{} labels for {} points".format(len(labels), len(cloud)))
    colors_by_label = dict(DEFAULT_PALETTE)
    colors_by_label.update(palette or {})
    labels = numpy.asarray(labels)
    colors = numpy.zeros((len(cloud), 3), dtype=be.Byte)
    for label in numpy.unique(labels):
        if label not in colors_by_label:
            raise ValueError("no palette color for label '{}'".format(label))
        colors[labels == label] = colors_by_label[label]
    return cloud.with_colors(colors)


def export_colored(cloud, labels, path, palette=None, format="ply_binary"):
    """
    Write a PLY whose vertex colors encode the labels.

    Notes:
        Performs an IO operation.

    Args:
        cloud (PointCloud)
        labels (tensor (num_points,) of str)
        path (str)
        palette (optional; Dict[str, (int, int, int)])
        format (optional; str): 'ply_binary' or 'ply_ascii'.

    Returns:
        None

    """
    if not format.startswith("ply"):
        raise ValueError("colored exports must be PLY")
    save_cloud(colorize(cloud, labels, palette), path, format=format)


def estimate_lift_height(graph, default=DEFAULT_CHARACTERISTIC_LENGTH):
    """
    Median length of the vertical edges of a scaffold graph.

    Args:
        graph (ScaffoldGraph)
        default (optional; float): used when there is no vertical edge.

    Returns:
        float

    """
    lengths = [e.length for e in graph.edges if e.orientation == "vertical"]
    if not lengths:
        return default
    return float(numpy.median(lengths))
