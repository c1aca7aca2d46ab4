import numpy
from scipy.spatial import cKDTree

from .. import backends as be
from .point_cloud import EmptyCloudError


class SpatialIndex(object):

    def __init__(self, points):
        """
        An immutable KD-tree over a set of points.
        Query results are indices into the source points.

        Args:
            points (tensor (num_points, 3))

        Returns:
            SpatialIndex

        """
        points = be.point_tensor(points)
        if len(points) == 0:
            raise EmptyCloudError("cannot index an empty cloud")
        self.points = points
        self.points.setflags(write=False)
        self.tree = cKDTree(self.points)

    def __len__(self):
        return len(self.points)

    def nearest(self, queries, workers=1):
        """
        Nearest indexed point for every query.

        Args:
            queries (tensor (num_queries, 3))
            workers (optional; int): threads used by the tree; -1 for all.

        Returns:
            indices (long tensor (num_queries,)),
            distances (float tensor (num_queries,))

        """
        queries = be.point_tensor(queries)
        if len(queries) == 0:
            return be.long_tensor([]), be.float_tensor([])
        distances, indices = self.tree.query(queries, k=1, workers=workers)
        return be.long_tensor(indices), be.float_tensor(distances)

    def k_nearest(self, queries, k, workers=1):
        """
        The k nearest indexed points for every query, closest first.

        Args:
            queries (tensor (num_queries, 3))
            k (int): number of neighbors, at most len(self).
            workers (optional; int)

        Returns:
            indices (long tensor (num_queries, k)),
            distances (float tensor (num_queries, k))

        """
        if not 1 <= k <= len(self):
            raise ValueError("k must be in [1, {}], got {}".format(len(self), k))
        queries = be.point_tensor(queries)
        distances, indices = self.tree.query(queries, k=k,
                                             workers=workers)
        return be.long_tensor(indices).reshape(len(queries), k), \
            be.float_tensor(distances).reshape(len(queries), k)

    def radius_neighbors(self, queries, radius, workers=1):
        """
        All indexed points within radius of each query (boundary included).

        Args:
            queries (tensor (num_queries, 3))
            radius (float >= 0)
            workers (optional; int)

        Returns:
            List[long tensor]: ascending indices per query.

        """
        if radius < 0:
            raise ValueError("radius must be non-negative, got {}".format(radius))
        queries = be.point_tensor(queries)
        if len(queries) == 0:
            return []
        found = self.tree.query_ball_point(queries, radius, workers=workers,
                                           return_sorted=True)
        return [be.long_tensor(numpy.sort(f)) for f in found]


def build_index(cloud):
    """
    Build a SpatialIndex over the points of a cloud.

    Args:
        cloud (PointCloud)

    Returns:
        SpatialIndex

    Raises:
        EmptyCloudError

    """
    return SpatialIndex(cloud.points)
