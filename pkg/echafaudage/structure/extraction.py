"""
From a preprocessed scaffold cloud to its graph: shape classification,
clustering of the linear points, brace and joint extraction, assembly.

"""
from collections import namedtuple
import warnings
import numpy

from .. import backends as be
from ..cloud import build_index
from ..deviation import export_colored
from . import features as ft
from . import clustering as cl
from . import elements as el
from .graph import build_graph

StructureParams = namedtuple("StructureParams", ["feature_radius", "min_neighbors",
                                                 "dbscan_eps", "dbscan_min_points",
                                                 "mixing_angle", "hybrid_angle",
                                                 "joint_radius", "merge_radius",
                                                 "vertical_tolerance",
                                                 "horizontal_tolerance",
                                                 "min_brace_length",
                                                 "crossing_tolerance"])
StructureParams.__new__.__defaults__ = (0.10, 8, 0.06, 6, 25.0, 30.0, 0.08, 0.10,
                                        15.0, 15.0, 0.3, 0.10)

Extraction = namedtuple("Extraction", ["graph", "features", "classes", "clusters",
                                       "braces", "joints"])

ELEMENT_PALETTE = {
    ft.LINEAR: (0, 255, 0),
    ft.SPHERICAL: (255, 0, 0),
    ft.PLANAR: (0, 0, 255),
    ft.UNCLASSIFIED: (128, 128, 128)
    }


def check_structure_params(params):
    """
    Validate StructureParams.

    Args:
        params (StructureParams)

    Returns:
        None

    Raises:
        ValueError: naming the first parameter out of bounds.

    """
    positive = ["feature_radius", "dbscan_eps", "joint_radius", "merge_radius",
                "crossing_tolerance"]
    for name in positive:
        if not getattr(params, name) > 0:
            raise ValueError("{} must be positive, got {}".format(
                name, getattr(params, name)))
    if params.min_neighbors < 3:
        raise ValueError("min_neighbors must be at least 3, got {}".format(
            params.min_neighbors))
    if params.dbscan_min_points < 1:
        raise ValueError("dbscan_min_points must be at least 1, got {}".format(
            params.dbscan_min_points))
    if params.min_brace_length < 0:
        raise ValueError("min_brace_length must be non-negative")
    for name in ["mixing_angle", "hybrid_angle", "vertical_tolerance",
                 "horizontal_tolerance"]:
        if not 0 < getattr(params, name) < 90:
            raise ValueError("{} must be in (0, 90) degrees, got {}".format(
                name, getattr(params, name)))


def extract_braces(cloud, clusters, params=StructureParams()):
    """
    One brace per cluster, dropping clusters that give no brace or a brace
    shorter than min_brace_length.

    Args:
        cloud (PointCloud)
        clusters (List[Cluster])
        params (optional; StructureParams)

    Returns:
        List[BraceSegment]

    """
    braces = []
    for cluster in clusters:
        try:
            brace = el.extract_brace(cloud.points[cluster.point_indices], cluster.label,
                                     params.vertical_tolerance,
                                     params.horizontal_tolerance)
        except el.BraceError as err:
            warnings.warn("cluster {} skipped: {}".format(cluster.label, err))
            continue
        if brace.length >= params.min_brace_length:
            braces.append(brace)
    return braces


def extract_graph(cloud, params=StructureParams(), index=None, workers=1,
                  verbose=False):
    """
    Extract the scaffold graph of a cloud.

    Args:
        cloud (PointCloud): preprocessed, scaffold points only.
        params (optional; StructureParams)
        index (optional; SpatialIndex): over cloud, built if not given.
        workers (optional; int)
        verbose (optional; bool)

    Returns:
        Extraction

    """
    check_structure_params(params)
    index = index if index is not None else build_index(cloud)

    features = ft.shape_features(cloud, index, params.feature_radius,
                                 params.min_neighbors, workers=workers)
    classes = ft.classify_points(features)
    linear = numpy.flatnonzero(classes == ft.LINEAR)
    be.maybe_print("{} of {} points linear".format(len(linear), len(cloud)),
                   verbose=verbose)

    clusters = cl.dbscan(cloud, params.dbscan_eps, params.dbscan_min_points,
                         subset=linear)
    clusters = cl.refine_clusters(clusters, features, cloud, params.mixing_angle,
                                  params.hybrid_angle, params.dbscan_eps,
                                  params.dbscan_min_points, verbose=verbose)

    braces = extract_braces(cloud, clusters, params)
    crossings = el.find_crossings(braces, params.crossing_tolerance,
                                  margin=params.joint_radius + params.merge_radius)
    joints = el.form_joints(braces, cloud, index, params.joint_radius,
                            params.merge_radius, extra_candidates=crossings,
                            workers=workers)
    segments, assignment = el.split_braces(braces, joints, params.crossing_tolerance,
                                           params.merge_radius,
                                           params.vertical_tolerance,
                                           params.horizontal_tolerance)
    graph = build_graph(segments, joints.positions, assignment)
    be.maybe_print("{} braces, {} crossings -> {}".format(
        len(braces), len(crossings), graph), verbose=verbose)
    return Extraction(graph, features, classes, clusters, braces, joints)


def export_elements(cloud, classes, path, format="ply_binary"):
    """
    Write the cloud colored by shape class: linear green, spherical red,
    planar blue, unclassified grey.

    Notes:
        Performs an IO operation.

    Args:
        cloud (PointCloud)
        classes (tensor (num_points,) of str): from classify_points.
        path (str)
        format (optional; str)

    Returns:
        None

    """
    export_colored(cloud, classes, path, palette=ELEMENT_PALETTE, format=format)
