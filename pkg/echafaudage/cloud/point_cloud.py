from collections import namedtuple
import numpy

from .. import backends as be


class InvalidCloudError(ValueError):
    """
    Raised when points or colors violate the cloud invariants.

    """
    pass


class EmptyCloudError(ValueError):
    """
    Raised by operations that need at least one point.

    """
    pass


Aabb = namedtuple("Aabb", ["min_corner", "max_corner", "diagonal"])


class PointCloud(object):

    def __init__(self, points, colors=None):
        """
        An ordered set of 3D points with optional per-point RGB colors.

        Notes:
            The coordinate and color tensors are copied and made read-only,
            so a PointCloud can be shared freely.

        Args:
            points (tensor (num_points, 3)): coordinates in meters.
            colors (optional; tensor (num_points, 3)): integer RGB in [0, 255].

        Returns:
            PointCloud

        Raises:
            InvalidCloudError

        """
        points = be.point_tensor(points)
        bad_row = be.first_nonfinite_row(points)
        if bad_row >= 0:
            raise InvalidCloudError(
                "non-finite coordinate at point {}".format(bad_row))
        points.setflags(write=False)
        self.points = points
        self.colors = None
        if colors is not None:
            self.colors = self._check_colors(colors, len(points))

    @staticmethod
    def _check_colors(colors, num_points):
        raw = numpy.asarray(colors)
        if raw.size == 0 and num_points == 0:
            raw = raw.reshape(0, 3)
        if raw.ndim != 2 or raw.shape[1] != 3:
            raise InvalidCloudError(
                "colors must have shape (num_points, 3), got {}".format(raw.shape))
        if len(raw) != num_points:
            raise InvalidCloudError(
                "{} colors for {} points".format(len(raw), num_points))
        if len(raw) > 0:
            if numpy.any(raw != numpy.round(raw)) or raw.min() < 0 or raw.max() > 255:
                raise InvalidCloudError("color channels must be integers in [0, 255]")
        result = be.byte_tensor(raw)
        result.setflags(write=False)
        return result

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return "PointCloud({} points{})".format(
            len(self), ", colored" if self.has_colors else "")

    @property
    def has_colors(self):
        return self.colors is not None

    def select(self, index):
        """
        Build a new cloud from a subset of the points.

        Args:
            index (tensor): integer indices or a boolean mask.

        Returns:
            PointCloud

        """
        colors = None if self.colors is None else self.colors[index]
        return PointCloud(self.points[index], colors)

    def with_points(self, points):
        """
        Replace the coordinates, keeping the colors.

        Args:
            points (tensor (num_points, 3))

        Returns:
            PointCloud

        """
        return PointCloud(points, self.colors)

    def with_colors(self, colors):
        """
        Replace (or drop, with None) the colors, keeping the coordinates.

        Args:
            colors (tensor (num_points, 3) or None)

        Returns:
            PointCloud

        """
        return PointCloud(self.points, colors)

    def equals(self, other):
        """
        Exact equality of coordinates and colors.

        Args:
            other (PointCloud)

        Returns:
            bool

        """
        if len(self) != len(other) or self.has_colors != other.has_colors:
            return False
        if not numpy.array_equal(self.points, other.points):
            return False
        return not self.has_colors or numpy.array_equal(self.colors, other.colors)

    @classmethod
    def empty(cls, colored=False):
        """
        A cloud with no points.

        Args:
            colored (optional; bool): attach an empty color table.

        Returns:
            PointCloud

        """
        return cls(be.point_tensor([]), be.byte_tensor([]) if colored else None)


def concatenate(clouds):
    """
    Join clouds end to end.

    Notes:
        Colors survive only if every input is colored.

    Args:
        clouds (List[PointCloud])

    Returns:
        PointCloud

    """
    if len(clouds) == 0:
        return PointCloud.empty()
    points = numpy.concatenate([c.points for c in clouds], axis=0)
    colors = None
    if all(c.has_colors for c in clouds):
        colors = numpy.concatenate([c.colors for c in clouds], axis=0)
    return PointCloud(points, colors)


def bounding_box(cloud):
    """
    The axis-aligned bounding box of a cloud.

    Args:
        cloud (PointCloud)

    Returns:
        Aabb

    Raises:
        EmptyCloudError

    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot bound an empty cloud")
    lo = numpy.min(cloud.points, axis=0)
    hi = numpy.max(cloud.points, axis=0)
    return Aabb(lo, hi, float(be.norm(hi - lo)))


class DegenerateGeometryError(ValueError):
    """
    Raised when points are too few or too collinear for a fit.

    """
    pass
