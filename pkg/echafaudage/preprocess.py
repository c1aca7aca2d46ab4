import sys

from . import backends as be
from . import segmentation as seg
from .cloud import voxel_downsample, remove_statistical_outliers


class Transformation(object):

    def __init__(self, function=None, args=None, kwargs=None):
        """
        Create a transformation that operates on a point cloud.

        Notes:
            The function maps a cloud to (cloud, info) where info is a dict
            describing what the stage did.

        Args:
            function (optional; callable): defaults to do_nothing.
            args (optional; List)
            kwargs (optional; Dict)

        Returns:
            Transformation

        """
        function = function if function is not None else do_nothing
        self.name = function.__name__
        self.function = function
        self.args = args if args is not None else []
        self.kwargs = kwargs if kwargs is not None else {}

    def _closure(self):
        """
        Create a callable function with the arguments and keyword arguments
        already in place.

        Args:
            None

        Returns:
            callable

        """
        def partial(cloud):
            return self.function(cloud, *self.args, **self.kwargs)
        return partial

    def compute(self, cloud):
        """
        Apply the transformation to a cloud.

        Args:
            cloud (PointCloud)

        Returns:
            cloud (PointCloud), info (dict)

        """
        return self._closure()(cloud)

    def get_config(self):
        """
        Get the configuration of a transformation.

        Args:
            None

        Returns:
            Dict

        """
        return {'name': self.name,
                'args': self.args if len(self.args) > 0 else None,
                'kwargs': self.kwargs if len(self.kwargs) > 0 else None}

    @classmethod
    def from_config(cls, config):
        """
        Create a transformation from a configuration dictionary.

        Args:
            config (Dict)

        Returns:
            Transformation

        """
        function = getattr(sys.modules[__name__], config["name"])
        return cls(function, config['args'], config['kwargs'])


def do_nothing(cloud):
    """
    Identity stage.

    Args:
        cloud (PointCloud)

    Returns:
        cloud (PointCloud), info (dict)

    """
    return cloud, {}


def voxelize(cloud, voxel_size=0.02):
    """
    Voxel-grid downsampling.

    Args:
        cloud (PointCloud)
        voxel_size (optional; float)

    Returns:
        cloud (PointCloud), info (dict)

    """
    return voxel_downsample(cloud, voxel_size), {"voxel_size": voxel_size}


def denoise(cloud, neighbors=20, std_ratio=2.0, workers=1):
    """
    Statistical outlier removal.

    Args:
        cloud (PointCloud)
        neighbors (optional; int)
        std_ratio (optional; float)
        workers (optional; int)

    Returns:
        cloud (PointCloud), info (dict)

    """
    return remove_statistical_outliers(cloud, neighbors, std_ratio, workers), \
        {"neighbors": neighbors, "std_ratio": std_ratio}


def strip_planes(cloud, n_planes=2, inlier_distance=0.03, max_iterations=1000,
                 min_inlier_fraction=0.10, seed=be.DEFAULT_SEED,
                 vertical_tolerance=15.0, crop=True, max_distance=5.0,
                 verbose=False):
    """
    Remove the dominant planes, then keep what lies within max_distance in
    front of the wall.

    Notes:
        The crop needs a wall among the removed planes; without one it is
        skipped and the info says so.

    Args:
        cloud (PointCloud)
        n_planes (optional; int): 0 skips plane removal.
        inlier_distance (optional; float)
        max_iterations (optional; int)
        min_inlier_fraction (optional; float)
        seed (optional; int)
        vertical_tolerance (optional; float): degrees, to tell ground from wall.
        crop (optional; bool)
        max_distance (optional; float)
        verbose (optional; bool)

    Returns:
        cloud (PointCloud), info (dict)

    """
    info = {"planes": []}
    if n_planes < 1:
        info["termination"] = "plane removal disabled"
        return cloud, info
    params = seg.RansacParams(inlier_distance, max_iterations, min_inlier_fraction, seed)
    removal = seg.remove_planes(cloud, n_planes, params, verbose=verbose)
    ground, wall = seg.identify_ground_and_wall(removal.planes, vertical_tolerance)

    def role(plane):
        if plane is ground:
            return "ground"
        if plane is wall:
            return "wall"
        return "other"

    info["termination"] = removal.termination
    info["planes"] = [{"role": role(p), "normal": [float(x) for x in p.normal],
                       "offset": float(p.offset), "inliers": int(p.inlier_count)}
                      for p in removal.planes]
    remaining = removal.remaining
    if crop:
        if wall is None:
            info["crop"] = "skipped: no wall found"
        else:
            remaining = seg.crop_by_plane_offset(remaining, wall, max_distance)
            info["crop"] = "kept points within {} m of the wall".format(max_distance)
    return remaining, info


def build_transformations(config):
    """
    The preprocessing stages enabled by a pipeline configuration.

    Args:
        config (PipelineConfig)

    Returns:
        List[Transformation]

    """
    stages = []
    if config["preprocess.voxelize"]:
        stages.append(Transformation(voxelize, kwargs={
            "voxel_size": config["cloud.voxel_size"]}))
    if config["preprocess.remove_outliers"]:
        stages.append(Transformation(denoise, kwargs={
            "neighbors": config["cloud.outlier_neighbors"],
            "std_ratio": config["cloud.outlier_std_ratio"],
            "workers": config["run.workers"]}))
    if config["preprocess.remove_planes"]:
        stages.append(Transformation(strip_planes, kwargs={
            "n_planes": config["ransac.n_planes"],
            "inlier_distance": config["ransac.inlier_distance"],
            "max_iterations": config["ransac.max_iterations"],
            "min_inlier_fraction": config["ransac.min_inlier_fraction"],
            "seed": config["run.seed"],
            "vertical_tolerance": config["ransac.vertical_tolerance"],
            "crop": config["preprocess.crop"],
            "max_distance": config["crop.max_distance"],
            "verbose": config["run.verbose"]}))
    return stages


def run_transformations(cloud, transformations, verbose=False):
    """
    Apply transformations in order.

    Args:
        cloud (PointCloud)
        transformations (List[Transformation])
        verbose (optional; bool)

    Returns:
        cloud (PointCloud), summary (List[dict]): one entry per stage with
            its name, points_in, points_out and info.

    """
    summary = []
    for transformation in transformations:
        points_in = len(cloud)
        cloud, info = transformation.compute(cloud)
        summary.append({"stage": transformation.name, "points_in": points_in,
                        "points_out": len(cloud), "info": info})
        be.maybe_print("{}: {} -> {} points".format(
            transformation.name, points_in, len(cloud)), verbose=verbose)
    return cloud, summary
