import itertools
import json
import os
import warnings
import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from echafaudage import backends as be
from echafaudage import structure as st
from echafaudage import synth
from echafaudage import math_utils
from echafaudage import registration as reg
from echafaudage.graphdiff import compare_graphs
from echafaudage.cloud import PointCloud, build_index, load_cloud


def tube(start, end, seed=1, radius=0.024, ppm=400, sigma=0.0):
    points, _ = synth.sample_tube(be.make_rng(seed), start, end, radius, ppm, sigma)
    return points

def assemble(*members):
    points = np.vstack(members)
    owner = np.repeat(np.arange(len(members)), [len(m) for m in members])
    return PointCloud(points), owner

def l_junction(seed=1, ppm=2000, sigma=0.0):
    return assemble(tube([0, 0, 0], [0, 0, 1.5], seed, ppm=ppm, sigma=sigma),
                    tube([0, 0, 0], [1.5, 0, 0], seed + 1, ppm=ppm, sigma=sigma))

def t_junction(seed=1, ppm=2000, sigma=0.0, gap=0.0):
    # a bar along x with a stem rising from its middle; a gap cuts the bar in two
    stem = tube([0, 0, 0], [0, 0, 1.5], seed, ppm=ppm, sigma=sigma)
    if gap == 0:
        return assemble(tube([-1, 0, 0], [1, 0, 0], seed + 1, ppm=ppm, sigma=sigma), stem)
    return assemble(tube([-1, 0, 0], [-gap, 0, 0], seed + 1, ppm=ppm, sigma=sigma),
                    tube([gap, 0, 0], [1, 0, 0], seed + 2, ppm=ppm, sigma=sigma), stem)

def linear_points(cloud):
    features = st.shape_features(cloud, build_index(cloud))
    classes = st.classify_points(features)
    return features, np.flatnonzero(classes == st.LINEAR)

def owners_of(pieces, owner, purity=0.95):
    # the member each piece belongs to; every piece must be nearly pure
    result = []
    for piece in pieces:
        counts = np.bincount(owner[piece.point_indices], minlength=owner.max() + 1)
        assert counts.max() >= purity * len(piece.point_indices)
        result.append(int(np.argmax(counts)))
    return sorted(result)


# ----- features ----- #

def test_line_is_linear():
    t = np.linspace(0, 1, 201)
    cloud = PointCloud(np.column_stack([t, 0 * t, 0 * t]))
    features = st.shape_features(cloud, build_index(cloud), radius=0.05)
    assert np.all(st.classify_points(features) == st.LINEAR)
    assert np.allclose(features.linearity, 1)
    assert np.allclose(np.abs(features.principal_direction[:, 0]), 1)

def test_plane_is_planar():
    rng = be.make_rng(2)
    cloud = PointCloud(np.column_stack([rng.uniform(0, 1, 4000), rng.uniform(0, 1, 4000),
                                        np.zeros(4000)]))
    features = st.shape_features(cloud, build_index(cloud))
    interior = np.all((cloud.points[:, :2] > 0.1) & (cloud.points[:, :2] < 0.9), axis=1)
    assert np.all(st.classify_points(features)[interior] == st.PLANAR)

def test_ball_is_spherical():
    cloud = PointCloud(be.make_rng(3).normal(0, 0.02, (3000, 3)))
    features = st.shape_features(cloud, build_index(cloud))
    center = be.norm(cloud.points, axis=1) < 0.01
    assert np.mean(st.classify_points(features)[center] == st.SPHERICAL) > 0.9

def test_features_sum_to_one():
    cloud = PointCloud(be.make_rng(4).uniform(0, 0.5, (2000, 3)))
    features = st.shape_features(cloud, build_index(cloud))
    total = features.linearity + features.planarity + features.sphericity
    assert np.allclose(total[features.classifiable], 1)
    assert np.all(features.eigenvalues[:, 0] >= features.eigenvalues[:, 1])
    assert np.all(features.eigenvalues[:, 1] >= features.eigenvalues[:, 2])

def test_features_match_direct_covariance():
    cloud = PointCloud(be.make_rng(5).uniform(0, 0.3, (500, 3)))
    index = build_index(cloud)
    features = st.shape_features(cloud, index, radius=0.1, chunk=37)
    for i in [0, 17, 333]:
        neighbors = cloud.points[index.radius_neighbors(cloud.points[i:i + 1], 0.1)[0]]
        values = np.sort(np.linalg.eigvalsh(np.cov(neighbors.T, bias=True)))[::-1]
        assert np.allclose(features.eigenvalues[i], values, atol=1e-12)

def test_sparse_points_are_unclassified():
    cloud = PointCloud([[0, 0, 0], [0.01, 0, 0], [5, 5, 5]])
    features = st.shape_features(cloud, build_index(cloud), min_neighbors=3)
    assert not features.classifiable.any()
    assert np.all(st.classify_points(features) == st.UNCLASSIFIED)
    with pytest.raises(ValueError):
        st.shape_features(cloud, build_index(cloud), min_neighbors=2)

@pytest.mark.parametrize("seed", range(3))
def test_features_are_rotation_invariant(seed):
    cloud = PointCloud(be.make_rng(seed).uniform(0, 0.5, (2000, 3)))
    rotation = Rotation.random(random_state=seed).as_matrix()
    moved = reg.apply_transform(cloud, reg.RigidTransform(rotation, be.float_tensor([1, -2, 3])))
    before = st.shape_features(cloud, build_index(cloud))
    after = st.shape_features(moved, build_index(moved))
    assert np.array_equal(before.neighbor_count, after.neighbor_count)
    assert np.allclose(before.eigenvalues, after.eigenvalues, rtol=0, atol=1e-9)
    assert np.array_equal(st.classify_points(before), st.classify_points(after))
    turned = np.abs(np.sum(np.dot(before.principal_direction, rotation.T)
                           * after.principal_direction, axis=1))
    assert np.all(turned[before.linearity > 0.1] > 1 - 1e-6)

def test_classification_ties():
    features = st.features_from_eigenvalues([[2, 1, 0], [2, 2, 1]], np.zeros((2, 3)),
                                            [10, 10], 8)
    assert list(st.classify_points(features)) == [st.LINEAR, st.PLANAR]


# ----- clustering ----- #

def test_dbscan_separates_blobs():
    rng = be.make_rng(6)
    blobs = np.vstack([rng.normal(0, 0.01, (50, 3)), rng.normal(1, 0.01, (60, 3)),
                       [[5, 5, 5]]])
    clusters = st.dbscan(blobs, 0.05, 5)
    assert [len(c.point_indices) for c in clusters] == [50, 60]
    assert [c.label for c in clusters] == [0, 1]
    labels = st.cluster_labels(clusters, len(blobs))
    assert labels[-1] == st.NOISE

def test_dbscan_subset_keeps_original_indices():
    points = np.vstack([np.zeros((10, 3)), np.ones((10, 3))])
    clusters = st.dbscan(points, 0.1, 3, subset=np.arange(10, 20))
    assert len(clusters) == 1
    assert np.array_equal(clusters[0].point_indices, np.arange(10, 20))
    assert st.dbscan(points, 0.1, 3, subset=[]) == []

def test_dbscan_sparse_points_are_all_noise():
    grid = np.stack(np.meshgrid(*[np.arange(5.0)] * 3), axis=-1).reshape(-1, 3)
    points = grid + be.make_rng(8).uniform(-0.1, 0.1, grid.shape)
    assert st.dbscan(points, 0.5, 2) == []
    assert np.all(st.cluster_labels([], len(points)) == st.NOISE)

def test_dbscan_finds_every_generated_brace():
    scene = synthetic_lattice(bays_x=3, bays_y=1, lifts=3)
    interior = np.flatnonzero((scene.labels.kind == synth.BRACE) & ~scene.labels.joint_zone)
    index = build_index(PointCloud(scene.cloud.points[interior]))
    _, distances = index.k_nearest(index.points, 2)
    # spacing: the nearest neighbor distance all but 0.1% of points attain
    spacing = np.quantile(distances[:, 1], 0.999)
    clusters = st.dbscan(scene.cloud, 1.5 * spacing, 4, subset=interior)
    assert len(clusters) == scene.graph.num_edges
    for cluster in clusters:
        assert len(np.unique(scene.labels.element[cluster.point_indices])) == 1

def test_straight_brace_is_not_mixed():
    cloud = PointCloud(tube([0, 0, 0], [0, 0, 1.5], ppm=2000))
    features, linear = linear_points(cloud)
    assert not st.detect_mixed_cluster(linear, features)

def test_straight_brace_passes_through_hybrid_clustering():
    cloud = PointCloud(tube([0, 0, 0], [1.5, 0, 0], ppm=2000))
    features, linear = linear_points(cloud)
    pieces = st.hybrid_cluster(linear, features, cloud)
    assert len(pieces) == 1
    assert np.array_equal(pieces[0].point_indices, linear)

def test_max_line_angle():
    x, z = be.float_tensor([1, 0, 0]), be.float_tensor([0, 0, 1])
    tilted = be.float_tensor([np.cos(0.2), 0, np.sin(0.2)])
    directions = np.stack([x, -x, tilted] * 100 + [z])
    assert st.max_line_angle(directions[:-1]) == pytest.approx(np.degrees(0.2))
    assert st.max_line_angle(directions, chunk=7) == pytest.approx(90)
    assert st.max_line_angle(directions, chunk=7, limit=25) > 25
    assert st.max_line_angle(directions[:1]) == 0

def test_mean_line_ignores_signs():
    directions = be.float_tensor([[1, 0, 0], [-1, 0, 0], [0.99, 0.141, 0]])
    line = st.mean_line(directions / be.norm(directions, axis=1)[:, None])
    assert abs(line[0]) > 0.99

def test_l_junction_is_mixed_and_splits():
    cloud, owner = l_junction()
    features, linear = linear_points(cloud)
    assert st.detect_mixed_cluster(linear, features)
    pieces = st.hybrid_cluster(linear, features, cloud, angle_threshold=30.0)
    assert len(pieces) == 2
    assert owners_of(pieces, owner, purity=0.99) == [0, 1]

def test_t_junction_keeps_the_bar_whole():
    cloud, owner = t_junction()
    features, linear = linear_points(cloud)
    assert st.detect_mixed_cluster(linear, features)
    pieces = st.hybrid_cluster(linear, features, cloud, angle_threshold=30.0)
    assert len(pieces) == 2
    assert owners_of(pieces, owner) == [0, 1]

def test_t_junction_splits_a_broken_bar():
    cloud, owner = t_junction(gap=0.2)
    features, linear = linear_points(cloud)
    pieces = st.hybrid_cluster(linear, features, cloud, angle_threshold=30.0)
    assert len(pieces) == 3
    assert owners_of(pieces, owner) == [0, 1, 2]

@pytest.mark.parametrize("seed", range(20))
def test_refined_junctions_are_not_mixed(seed):
    for cloud, owner in [l_junction(seed, ppm=400, sigma=0.002),
                         t_junction(seed, ppm=400, sigma=0.002)]:
        features, linear = linear_points(cloud)
        assert st.detect_mixed_cluster(linear, features)
        refined = st.refine_clusters([st.Cluster(0, linear)], features, cloud)
        assert not any(st.detect_mixed_cluster(c, features) for c in refined)
        assert owners_of(refined, owner) == [0, 1]

def test_refine_clusters_numbers_consecutively():
    corner, _ = l_junction()
    straight = tube([5, 0, 0], [5, 0, 1.5], ppm=2000)
    cloud = PointCloud(np.vstack([corner.points, straight]))
    features, linear = linear_points(cloud)
    bar, corner = linear[cloud.points[linear, 0] > 3], linear[cloud.points[linear, 0] < 3]
    refined = st.refine_clusters([st.Cluster(4, bar), st.Cluster(9, corner)], features, cloud)
    assert [c.label for c in refined] == [0, 1, 2]
    assert np.array_equal(refined[0].point_indices, bar)

def test_direction_groups():
    x, z = be.float_tensor([1, 0, 0]), be.float_tensor([0, 0, 1])
    tilted = be.float_tensor([np.cos(0.1), np.sin(0.1), 0])
    directions = np.stack([x, -x, z, tilted, z, -z, x])
    groups = st.direction_groups(directions, 30.0)
    assert groups.max() == 1
    assert np.array_equal(groups, [0, 0, 1, 0, 1, 1, 0])
    trimmed = st.direction_groups(directions, 30.0, keep_angle=3.0)
    assert np.array_equal(trimmed, [0, 0, 1, st.NOISE, 1, 1, 0])

def test_direction_groups_learn_from_seeds():
    x, z = be.float_tensor([1, 0, 0]), be.float_tensor([0, 0, 1])
    diagonal = be.float_tensor([1, 0, 1]) / np.sqrt(2)
    directions = np.stack([diagonal] * 30 + [x] * 100 + [z] * 100)
    seeds = np.arange(len(directions)) >= 30
    groups = st.direction_groups(directions, 30.0, seeds=seeds)
    assert groups.max() == 1
    assert set(groups[:30]) <= {0, 1}
    # without seeds the diagonal directions form a line of their own
    assert st.direction_groups(directions, 30.0).max() == 2

def test_direction_groups_merge_drifting_means():
    # 0 and 36 degrees start apart; 17 pulls the first mean close enough to merge
    angles = np.radians(np.repeat([0, 36, 17], 20))
    directions = np.column_stack([np.cos(angles), np.zeros(len(angles)), np.sin(angles)])
    lines = st.dominant_lines(directions, 30.0)
    assert len(lines) == 1
    assert be.line_angle(lines[0], st.mean_line(directions)) < 0.5

def test_small_direction_groups_are_absorbed():
    x, y = be.float_tensor([1, 0, 0]), be.float_tensor([0, 1, 0])
    directions = np.stack([x] * 500 + [y] * 3)
    assert len(st.dominant_lines(directions, 30.0, min_size=6)) == 1
    assert np.all(st.direction_groups(directions, 30.0, min_size=6) == 0)


# ----- braces ----- #

def test_classify_orientation():
    assert st.classify_orientation(be.float_tensor([0, 0.1, 1]) / np.sqrt(1.01)) == st.VERTICAL
    assert st.classify_orientation(be.float_tensor([-1, 0, 0])) == st.HORIZONTAL_X
    assert st.classify_orientation(be.float_tensor([0, 1, 0])) == st.HORIZONTAL_Y
    diagonal = be.float_tensor([1, 0, 1]) / np.sqrt(2)
    assert st.classify_orientation(diagonal) == st.DIAGONAL

def test_segment_ordering():
    segment = st.make_segment([1, 0, 0], [0, 0, 2])
    assert np.array_equal(segment.endpoint_a, [0, 0, 2])
    assert segment.length == pytest.approx(np.sqrt(5))
    with pytest.raises(st.BraceError):
        st.make_segment([1, 1, 1], [1, 1, 1])

@pytest.mark.parametrize("seed", range(3))
def test_brace_length_is_the_farthest_distance(seed):
    points = be.make_rng(seed).normal(size=(300, 3)) * [1, 0.1, 0.1]
    brace = st.extract_brace(points)
    best = max(np.linalg.norm(p - q) for p, q in itertools.combinations(points, 2))
    assert brace.length == best

def test_hull_search_matches_exhaustive():
    points = be.make_rng(7).normal(size=(st.EXHAUSTIVE_LIMIT + 500, 3)) * [1, 0.2, 0.2]
    i, j = st.farthest_pair(points)
    k, l, _ = math_utils.farthest_pair(points)
    assert (i, j) == (k, l)

def test_noisy_brace_length():
    points = tube([0, 0, 0], [1.5, 0, 0], radius=0.024, sigma=0.002)
    brace = st.extract_brace(points)
    assert brace.length == pytest.approx(1.5, rel=0.01)
    assert brace.orientation == st.HORIZONTAL_X

def test_brace_needs_two_points():
    with pytest.raises(st.BraceError):
        st.extract_brace([[0, 0, 0]])


# ----- joints ----- #

def test_crossings():
    a = st.make_segment([-1, 0, 0], [1, 0, 0])
    b = st.make_segment([0, -1, 0.05], [0, 1, 0.05])
    c = st.make_segment([-1, 0.5, 0], [1, 0.5, 0])
    crossings = st.find_crossings([a, b, c], tolerance=0.10)
    assert np.allclose(crossings, [[0, 0, 0.025], [0, 0.5, 0.025]])

def test_crossings_beyond_the_margin():
    a = st.make_segment([0, 0, 0], [1, 0, 0])
    b = st.make_segment([1.5, -1, 0], [1.5, 1, 0])
    assert len(st.find_crossings([a, b], margin=0.18)) == 0
    assert len(st.find_crossings([a, b], margin=0.6)) == 1

def test_merge_candidates_chains():
    candidates = be.float_tensor([[0, 0, 0], [0.08, 0, 0], [5, 0, 0], [0.16, 0, 0]])
    positions, labels = st.merge_candidates(candidates, 0.1)
    assert np.array_equal(labels, [0, 0, 1, 0])
    assert np.allclose(positions, [[0.08, 0, 0], [5, 0, 0]])

def test_form_joints_and_split():
    horizontal = st.make_segment([0, 0, 0], [2, 0, 0])
    vertical = st.make_segment([1, 0, 0], [1, 0, 2])
    cloud = PointCloud([[50, 50, 50]])
    joints = st.form_joints([horizontal, vertical], cloud, build_index(cloud))
    assert len(joints.positions) == 4
    segments, assignment = st.split_braces([horizontal, vertical], joints)
    assert len(segments) == 3
    assert [s.orientation for s in segments] == [st.HORIZONTAL_X, st.HORIZONTAL_X,
                                                 st.VERTICAL]
    assert assignment.tolist() == [[0, 2], [2, 1], [2, 3]]


# ----- graph ----- #

def test_graph_validation():
    with pytest.raises(ValueError):
        st.ScaffoldGraph([[0, 0, 0]], [st.Edge(0, 0, "vertical", 1.0)])
    with pytest.raises(ValueError):
        st.ScaffoldGraph([[0, 0, 0]], [st.Edge(0, 1, "vertical", 1.0)])
    graph = st.ScaffoldGraph([[0, 0, 0], [0, 0, 1]], [st.Edge(1, 0, "vertical", 1.0)])
    assert graph.edges[0].a == 0 and graph.edges[0].b == 1
    assert graph.degrees().tolist() == [1, 1]
    assert graph.orientation_counts() == {"vertical": 1}

def test_graph_save_load(tmp_path):
    graph = synth.generate_scaffold(synth.ScaffoldSpec(bays_x=1, bays_y=1, lifts=1,
                                                       include_ground=False,
                                                       include_wall=False)).graph
    path = os.path.join(str(tmp_path), "graph.json")
    graph.save(path)
    back = st.ScaffoldGraph.load(path)
    assert np.array_equal(back.positions, graph.positions)
    assert back.edges == graph.edges

def test_graph_from_config_relabels():
    config = {"nodes": [{"id": 7, "x": 0, "y": 0, "z": 1}, {"id": 3, "x": 0, "y": 0, "z": 0}],
              "edges": [{"a": 3, "b": 7, "orientation": "vertical", "length": 1.0}]}
    graph = st.ScaffoldGraph.from_config(config)
    assert graph.positions.tolist() == [[0, 0, 0], [0, 0, 1]]
    assert graph.edges == [st.Edge(0, 1, "vertical", 1.0)]

def test_build_graph_drops_and_merges():
    braces = [st.make_segment([0, 0, 0], [1, 0, 0]), st.make_segment([0, 0, 0], [0.9, 0, 0]),
              st.make_segment([0, 0, 0], [0, 0, 0.1])]
    positions = be.float_tensor([[0, 0, 0], [5, 5, 5], [1, 0, 0]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        graph = st.build_graph(braces, positions, [[0, 2], [2, 0], [0, 0]])
    assert len(caught) == 2
    assert len(graph.warnings) == 2
    assert graph.num_nodes == 2
    assert graph.edges == [st.Edge(0, 1, st.HORIZONTAL_X, 1.0)]


# ----- extraction ----- #

def synthetic_lattice(**kwargs):
    spec = synth.ScaffoldSpec(include_ground=False, include_wall=False, **kwargs)
    return synth.generate_scaffold(spec)

def test_extract_single_bay():
    scene = synthetic_lattice(bays_x=1, bays_y=1, lifts=1)
    result = st.extract_graph(scene.cloud)
    assert result.graph.num_nodes == 8
    assert result.graph.num_edges == 12
    diff = compare_graphs(scene.graph, result.graph, node_tolerance=0.25,
                          deviation_tolerance=0.10)
    assert diff.summary["matched_edges"] == 12
    assert result.graph.orientation_counts() == scene.graph.orientation_counts()

def test_extract_lattice():
    scene = synthetic_lattice(bays_x=3, bays_y=1, lifts=3)
    result = st.extract_graph(scene.cloud)
    assert result.graph.num_nodes == scene.graph.num_nodes
    assert result.graph.num_edges == scene.graph.num_edges

def test_brace_interiors_are_linear():
    scene = synthetic_lattice(bays_x=1, bays_y=1, lifts=1)
    result = st.extract_graph(scene.cloud)
    interior = ~scene.labels.joint_zone
    assert np.mean(result.classes[interior] == st.LINEAR) >= 0.9

def test_structure_params_bounds():
    with pytest.raises(ValueError):
        st.check_structure_params(st.StructureParams(dbscan_eps=0))
    with pytest.raises(ValueError):
        st.check_structure_params(st.StructureParams(mixing_angle=95))
    st.check_structure_params(st.StructureParams())

def test_short_braces_are_dropped():
    long, short = tube([0, 0, 0], [1, 0, 0]), tube([3, 0, 0], [3, 0, 0.2])
    cloud = PointCloud(np.vstack([long, short]))
    clusters = [st.Cluster(0, np.arange(len(long))),
                st.Cluster(1, np.arange(len(long), len(cloud)))]
    braces = st.extract_braces(cloud, clusters, st.StructureParams(min_brace_length=0.3))
    assert [b.source_cluster for b in braces] == [0]

def test_export_elements(tmp_path):
    cloud = PointCloud([[0, 0, 0], [1, 0, 0]])
    path = os.path.join(str(tmp_path), "elements.ply")
    st.export_elements(cloud, np.array([st.LINEAR, st.UNCLASSIFIED]), path)
    assert load_cloud(path).colors.tolist() == [[0, 255, 0], [128, 128, 128]]



if __name__ == "__main__":
    pytest.main([__file__])
