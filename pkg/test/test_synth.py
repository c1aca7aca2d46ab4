import json
import os
import numpy as np
import pytest

from echafaudage import backends as be
from echafaudage import synth
from echafaudage.cloud import load_cloud
from echafaudage.structure import VERTICAL, HORIZONTAL_X, HORIZONTAL_Y


def small_spec(**kwargs):
    defaults = dict(bays_x=1, bays_y=1, lifts=1, include_ground=False,
                    include_wall=False, noise_sigma=0.0)
    defaults.update(kwargs)
    return synth.ScaffoldSpec(**defaults)


# ----- lattice ----- #

def test_lattice_counts():
    lattice = synth.build_lattice(small_spec())
    assert len(lattice.positions) == 8
    assert len(lattice.members) == 12

    lattice = synth.build_lattice(synth.ScaffoldSpec())
    assert len(lattice.positions) == 4 * 2 * 4
    assert len(lattice.members) == 4 * (3 * 2 + 4 * 1) + 3 * 8

def test_lattice_positions():
    spec = synth.ScaffoldSpec(bays_x=2, bays_y=1, lifts=2, bay_width=1.5,
                              bay_depth=0.7, lift_height=2.0, base_height=0.1)
    lattice = synth.build_lattice(spec)
    n = synth.node_id(spec, 2, 1, 1)
    assert lattice.node_ids[(2, 1, 1)] == n
    assert np.allclose(lattice.positions[n], [3.0, 0.7, 2.1])

def test_lattice_members():
    spec = small_spec()
    lattice = synth.build_lattice(spec)
    counts = {}
    for m in lattice.members:
        counts[m.orientation] = counts.get(m.orientation, 0) + 1
    assert counts == {HORIZONTAL_X: 4, HORIZONTAL_Y: 4, VERTICAL: 4}
    member = lattice.members[lattice.member_ids[(1, 0, 0, "y")]]
    assert member.a == synth.node_id(spec, 1, 0, 0)
    assert member.b == synth.node_id(spec, 1, 1, 0)
    assert member.length == pytest.approx(spec.bay_depth)
    assert lattice.members[-1].orientation == VERTICAL


# ----- sampling ----- #

def test_sample_tube_lies_on_the_tube():
    rng = be.make_rng(1)
    start, end = be.float_tensor([0, 0, 0]), be.float_tensor([0, 0, 2])
    points, along = synth.sample_tube(rng, start, end, 0.03, 100)
    assert len(points) == 200
    assert np.allclose(be.norm(points[:, :2], axis=1), 0.03)
    assert np.allclose(points[:, 2], 2 * along)

def test_sample_rectangle():
    points = synth.sample_rectangle(be.make_rng(2), (0, 0, 1), (2, 0, 0), (0, 3, 0), 50)
    assert len(points) == 300
    assert np.all(points[:, 2] == 1)
    assert points[:, 0].max() <= 2 and points[:, 1].max() <= 3


# ----- generation ----- #

def test_generation_is_deterministic():
    a = synth.generate_scaffold(small_spec(noise_sigma=0.002))
    b = synth.generate_scaffold(small_spec(noise_sigma=0.002))
    assert a.cloud.equals(b.cloud)
    c = synth.generate_scaffold(small_spec(noise_sigma=0.002, seed=1))
    assert not a.cloud.equals(c.cloud)

def test_generated_labels():
    spec = synth.ScaffoldSpec(bays_x=1, bays_y=1, lifts=1, clutter_points=100)
    scene = synth.generate_scaffold(spec)
    assert len(scene.labels.kind) == len(scene.cloud)
    kinds = set(scene.labels.kind)
    assert kinds == {synth.BRACE, synth.GROUND, synth.WALL, synth.CLUTTER}
    braces = scene.labels.kind == synth.BRACE
    expected = sum(int(np.ceil(spec.points_per_meter * m.length))
                   for m in scene.graph.edges)
    assert braces.sum() == expected
    assert np.all(scene.labels.element[~braces] == -1)
    assert not scene.labels.joint_zone[~braces].any()
    assert scene.labels.joint_zone[braces].any()

def test_environment_geometry():
    spec = synth.ScaffoldSpec(bays_x=1, bays_y=1, lifts=1, noise_sigma=0.0,
                              clutter_points=50, wall_standoff=0.8)
    scene = synth.generate_scaffold(spec)
    points, kind = scene.cloud.points, scene.labels.kind
    assert np.all(points[kind == synth.GROUND][:, 2] == 0)
    assert np.allclose(points[kind == synth.WALL][:, 1], -0.8)
    assert np.all(points[kind == synth.CLUTTER][:, 1] < -0.8)
    assert np.all(points[kind == synth.BRACE][:, 1] > -0.8)

def test_ground_truth_graph():
    scene = synth.generate_scaffold(small_spec())
    assert scene.graph.num_nodes == 8
    assert scene.graph.num_edges == 12
    assert scene.edge_elements == list(range(12))
    assert np.all(scene.graph.degrees() == 3)

def test_bad_spec():
    with pytest.raises(ValueError):
        synth.generate_scaffold(small_spec(bays_x=0))
    with pytest.raises(ValueError):
        synth.generate_scaffold(small_spec(tube_radius=-0.01))
    with pytest.raises(ValueError):
        synth.scaffold_spec_from_dict({"bays": 3})


# ----- defects ----- #

def test_remove_brace():
    scene = synth.generate_scaffold(small_spec())
    lattice = synth.build_lattice(scene.spec)
    member = lattice.member_ids[(0, 0, 0, "x")]
    defected, log = synth.apply_defects(scene, [synth.remove_brace(0, 0, 0, "x")])
    assert defected.graph.num_edges == 11
    assert member not in defected.edge_elements
    assert not np.any(defected.labels.element == member)
    removed = np.sum(scene.labels.element == member)
    assert len(defected.cloud) == len(scene.cloud) - removed
    assert log[0]["removed_points"] == removed
    assert log[0]["edge"] == [synth.node_id(scene.spec, 0, 0, 0),
                              synth.node_id(scene.spec, 1, 0, 0)]

def test_remove_brace_twice():
    scene = synth.generate_scaffold(small_spec())
    with pytest.raises(synth.UnknownTargetError):
        synth.apply_defects(scene, [synth.remove_brace(0, 0, 0, "x"),
                                    synth.remove_brace(0, 0, 0, "x")])

def test_unknown_targets():
    scene = synth.generate_scaffold(small_spec())
    with pytest.raises(synth.UnknownTargetError):
        synth.apply_defects(scene, [synth.remove_brace(1, 0, 0, "x")])
    with pytest.raises(synth.UnknownTargetError):
        synth.apply_defects(scene, [synth.shift_joint(0, 0, 5, (0, 0, 0.1))])
    with pytest.raises(ValueError):
        synth.apply_defects(scene, [synth.Defect("bend", (0, 0, 0, "x"))])

def test_shift_brace():
    scene = synth.generate_scaffold(small_spec())
    member = synth.build_lattice(scene.spec).member_ids[(0, 1, 1, "x")]
    defected, log = synth.apply_defects(scene, [synth.shift_brace(0, 1, 1, "x",
                                                                  (0, -0.08, 0))])
    mask = scene.labels.element == member
    assert np.allclose(defected.cloud.points[mask], scene.cloud.points[mask] + [0, -0.08, 0])
    assert np.array_equal(defected.cloud.points[~mask], scene.cloud.points[~mask])
    assert defected.graph.num_edges == 12
    edge = scene.graph.edges[member]
    assert np.allclose(log[0]["endpoints"][0], scene.graph.positions[edge.a] + [0, -0.08, 0])

def test_shift_joint():
    spec = small_spec()
    scene = synth.generate_scaffold(spec)
    node = synth.node_id(spec, 1, 1, 1)
    defected, log = synth.apply_defects(scene, [synth.shift_joint(1, 1, 1, (0.09, 0, 0))])
    assert np.allclose(defected.graph.positions[node], scene.graph.positions[node] + [0.09, 0, 0])
    assert len(log[0]["members"]) == 3
    for k, edge in enumerate(defected.graph.edges):
        moved = np.linalg.norm(defected.graph.positions[edge.b] - defected.graph.positions[edge.a])
        assert edge.length == pytest.approx(moved)
    untouched = ~np.isin(scene.labels.element, log[0]["members"])
    assert np.array_equal(defected.cloud.points[untouched], scene.cloud.points[untouched])
    assert len(defected.cloud) == len(scene.cloud)

def test_defect_from_dict():
    defect = synth.defect_from_dict({"kind": "shift_joint", "target": [1, 0, 1],
                                     "displacement": [0, 0, 0.1]})
    assert defect == synth.shift_joint(1, 0, 1, (0, 0, 0.1))
    assert synth.defect_from_dict({"kind": "remove_brace",
                                   "target": [0, 0, 0, "z"]}).displacement is None


# ----- saving ----- #

def test_save_scene(tmp_path):
    scene = synth.generate_scaffold(small_spec())
    scene, log = synth.apply_defects(scene, [synth.remove_brace(0, 0, 0, "z")])
    path = os.path.join(str(tmp_path), "scene.ply")
    sidecar = synth.save_scene(scene, path, log=log)
    assert sidecar == os.path.join(str(tmp_path), "scene.json")
    assert load_cloud(path).equals(scene.cloud)
    with open(sidecar) as f:
        content = json.load(f)
    assert content["spec"]["bays_x"] == 1
    assert len(content["labels"]["kind"]) == len(scene.cloud)
    assert len(content["graph"]["edges"]) == 11
    assert content["defects"][0]["kind"] == synth.REMOVE_BRACE


if __name__ == "__main__":
    pytest.main([__file__])
