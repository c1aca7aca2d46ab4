from typing import Iterable, Tuple, Union
from numpy import ndarray
import numpy

Scalar = Union[int, float]

# points are (num_points, 3) arrays
Tensor = ndarray

FloatConstructable = Union[Tensor, Iterable[float], Iterable[Iterable[float]]]

LongConstructable = Union[Tensor, Iterable[int]]

# coordinates are always held at 64-bit precision
Float = numpy.float64
Long = numpy.int64
# color channels
Byte = numpy.uint8

EPSILON = float(numpy.finfo(Float).eps)
