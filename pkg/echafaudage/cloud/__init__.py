from .point_cloud import (PointCloud, Aabb, InvalidCloudError, EmptyCloudError,
                          DegenerateGeometryError,
                          bounding_box, concatenate)
from .io import CloudFormatError, load_cloud, save_cloud
from .spatial import SpatialIndex, build_index
from .filters import voxel_downsample, remove_statistical_outliers
