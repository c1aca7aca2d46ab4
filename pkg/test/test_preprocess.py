import numpy as np
import pytest

from echafaudage import backends as be
from echafaudage import preprocess as pre
from echafaudage import synth
from echafaudage.config import PipelineConfig
from echafaudage.cloud import PointCloud


def scene(**kwargs):
    defaults = dict(bays_x=1, bays_y=1, lifts=1)
    defaults.update(kwargs)
    return synth.generate_scaffold(synth.ScaffoldSpec(**defaults))

def sources(cloud, generated):
    """
    Source label of each point of a cloud cut out of a generated scene.

    """
    lookup = {tuple(p): k for p, k in zip(generated.cloud.points, generated.labels.kind)}
    return np.array([lookup[tuple(p)] for p in cloud.points])

def fraction_kept(kept, generated, kind):
    return np.sum(kept == kind) / np.sum(generated.labels.kind == kind)


# ----- transformations ----- #

def test_default_transformation_does_nothing():
    cloud = PointCloud([[0, 0, 0], [1, 1, 1]])
    transformation = pre.Transformation()
    result, info = transformation.compute(cloud)
    assert result is cloud
    assert info == {}
    assert transformation.name == "do_nothing"

def test_transformation_config():
    cloud = PointCloud(be.make_rng(1).uniform(0, 1, (2000, 3)))
    transformer = pre.Transformation(pre.voxelize, kwargs={"voxel_size": 0.1})
    config = transformer.get_config()
    assert config == {"name": "voxelize", "args": None, "kwargs": {"voxel_size": 0.1}}
    transformer_from_config = pre.Transformation.from_config(config)
    a, _ = transformer.compute(cloud)
    b, _ = transformer_from_config.compute(cloud)
    assert a.equals(b)
    assert len(a) <= 1000

def test_denoise():
    rng = be.make_rng(2)
    cloud = PointCloud(np.vstack([rng.normal(0, 0.01, (100, 3)), [[10, 10, 10]]]))
    result, info = pre.denoise(cloud, neighbors=10, std_ratio=2.0)
    assert len(result) == 100
    assert info == {"neighbors": 10, "std_ratio": 2.0}


# ----- plane stripping ----- #

def test_strip_ground_and_wall():
    generated = scene()
    result, info = pre.strip_planes(generated.cloud, n_planes=2)
    kept = sources(result, generated)
    assert fraction_kept(kept, generated, synth.BRACE) >= 0.99
    assert fraction_kept(kept, generated, synth.GROUND) <= 0.01
    assert fraction_kept(kept, generated, synth.WALL) <= 0.01
    assert [p["role"] for p in info["planes"]] == ["ground", "wall"]

def test_strip_one_plane_removes_the_larger():
    generated = scene()
    num_ground = np.sum(generated.labels.kind == synth.GROUND)
    num_wall = np.sum(generated.labels.kind == synth.WALL)
    assert num_ground > num_wall
    result, info = pre.strip_planes(generated.cloud, n_planes=1, crop=False)
    kept = sources(result, generated)
    assert fraction_kept(kept, generated, synth.GROUND) == 0
    assert fraction_kept(kept, generated, synth.WALL) >= 0.98
    assert info["planes"][0]["role"] == "ground"

def test_crop_keeps_the_scaffold_in_front_of_the_wall():
    generated = scene(wall_standoff=1.2, bay_depth=0.7, clutter_points=500)
    result, info = pre.strip_planes(generated.cloud, n_planes=2, max_distance=2.0)
    kept = sources(result, generated)
    assert fraction_kept(kept, generated, synth.BRACE) == 1
    assert fraction_kept(kept, generated, synth.CLUTTER) == 0
    assert info["crop"].startswith("kept")

def test_crop_without_wall_is_skipped():
    generated = scene(include_wall=False)
    result, info = pre.strip_planes(generated.cloud, n_planes=1)
    assert info["crop"].startswith("skipped")
    assert len(result) == np.sum(generated.labels.kind == synth.BRACE)

def test_strip_nothing():
    generated = scene()
    result, info = pre.strip_planes(generated.cloud, n_planes=0)
    assert result is generated.cloud
    assert info["planes"] == []


# ----- pipeline stages ----- #

def test_build_transformations():
    stages = pre.build_transformations(PipelineConfig())
    assert [s.name for s in stages] == ["voxelize", "denoise", "strip_planes"]
    assert stages[0].kwargs == {"voxel_size": 0.02}

    config = PipelineConfig({"preprocess.remove_planes": False,
                             "preprocess.voxelize": False})
    assert [s.name for s in pre.build_transformations(config)] == ["denoise"]

def test_run_transformations():
    generated = scene()
    config = PipelineConfig({"preprocess.remove_outliers": False})
    cloud, summary = pre.run_transformations(generated.cloud,
                                             pre.build_transformations(config))
    assert [s["stage"] for s in summary] == ["voxelize", "strip_planes"]
    assert summary[0]["points_in"] == len(generated.cloud)
    assert summary[0]["points_out"] == summary[1]["points_in"]
    assert summary[1]["points_out"] == len(cloud)
    assert len(cloud) <= np.sum(generated.labels.kind == synth.BRACE)


if __name__ == "__main__":
    pytest.main([__file__])
