"""
Reading and writing point clouds as PLY (via plyfile) or plain-text XYZ
(via pandas).

"""
import os
import re
import warnings

import numpy
import pandas
from plyfile import PlyData, PlyElement, PlyParseError

from .. import backends as be
from .point_cloud import PointCloud

LOAD_FORMATS = ("ply", "xyz", "auto")
SAVE_FORMATS = ("ply_ascii", "ply_binary", "xyz")

COORDINATES = ("x", "y", "z")
CHANNELS = ("red", "green", "blue")


class CloudFormatError(ValueError):

    def __init__(self, message, path=None, line=None, byte_offset=None):
        """
        A point cloud file that cannot be read.

        Args:
            message (str): what went wrong.
            path (optional; str): the offending file.
            line (optional; int): 1-based line number, for text content.
            byte_offset (optional; int): offset from the start of the file,
                for binary content.

        Returns:
            CloudFormatError

        """
        self.path = path
        self.line = line
        self.byte_offset = byte_offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append("line {}".format(line))
        if byte_offset is not None:
            where.append("byte {}".format(byte_offset))
        if where:
            message = "{}: {}".format(", ".join(where), message)
        super().__init__(message)


def _sniff_format(path):
    with open(path, "rb") as infile:
        magic = infile.read(3)
    return "ply" if magic == b"ply" else "xyz"


def load_cloud(path, format="auto"):
    """
    Read a point cloud from a PLY or XYZ file.

    Notes:
        Performs an IO operation.
        Non-vertex PLY elements and extra vertex properties are skipped
        with a warning.

    Args:
        path (str): the file to read.
        format (optional; str): one of 'ply', 'xyz', 'auto'.

    Returns:
        PointCloud

    Raises:
        CloudFormatError

    """
    if format not in LOAD_FORMATS:
        raise ValueError("format must be one of {}".format(LOAD_FORMATS))
    try:
        if format == "auto":
            format = _sniff_format(path)
        if format == "ply":
            return _load_ply(path)
        return _load_xyz(path)
    except OSError as err:
        raise CloudFormatError("unreadable file ({})".format(
            err.strerror or err), path=path) from err


def save_cloud(cloud, path, format="ply_binary"):
    """
    Write a point cloud to disk.

    Notes:
        Performs an IO operation.
        Colors cannot be stored in XYZ; they are dropped with a warning.

    Args:
        cloud (PointCloud)
        path (str)
        format (optional; str): one of 'ply_ascii', 'ply_binary', 'xyz'.

    Returns:
        None

    """
    if format not in SAVE_FORMATS:
        raise ValueError("format must be one of {}".format(SAVE_FORMATS))
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    if format == "xyz":
        _save_xyz(cloud, path)
    else:
        _save_ply(cloud, path, text=(format == "ply_ascii"))


# ----- PLY ----- #

def _scan_header(path):
    """
    Count the lines and bytes of a PLY header, up to and including end_header.

    """
    lines, nbytes = 0, 0
    with open(path, "rb") as infile:
        for raw in infile:
            lines += 1
            nbytes += len(raw)
            if raw.strip() == b"end_header":
                break
    return lines, nbytes


def _parse_error_location(err, header_lines):
    line = getattr(err, "line", None)
    if line is not None:
        return line
    row = getattr(err, "row", None)
    if row is not None:
        return header_lines + row + 1
    return None


def _load_ply(path):
    header_lines, header_bytes = _scan_header(path)
    try:
        ply = PlyData.read(path)
    except PlyParseError as err:
        raise CloudFormatError(str(err), path=path,
            line=_parse_error_location(err, header_lines)) from err

    names = [el.name for el in ply.elements]
    if "vertex" not in names:
        raise CloudFormatError("no vertex element", path=path, line=header_lines)
    for name in names:
        if name != "vertex":
            warnings.warn("{}: skipping PLY element '{}'".format(path, name))

    vertex = ply["vertex"]
    dtypes = {prop.name: getattr(prop, "val_dtype", None) for prop in vertex.properties}
    for coord in COORDINATES:
        if coord not in dtypes:
            raise CloudFormatError("vertex element has no '{}' property".format(coord),
                                   path=path, line=header_lines)
        if dtypes[coord] is None or numpy.dtype(dtypes[coord]).kind != "f":
            raise CloudFormatError(
                "vertex property '{}' must be float or double".format(coord),
                path=path, line=header_lines)
    present = [c for c in CHANNELS if c in dtypes]
    if 0 < len(present) < 3:
        raise CloudFormatError("incomplete vertex color properties {}".format(present),
                               path=path, line=header_lines)
    for channel in present:
        if dtypes[channel] is None or numpy.dtype(dtypes[channel]) != numpy.uint8:
            raise CloudFormatError(
                "vertex property '{}' must be uchar".format(channel),
                path=path, line=header_lines)
    extra = [name for name in dtypes if name not in COORDINATES + CHANNELS]
    if extra:
        warnings.warn("{}: skipping vertex properties {}".format(path, extra))

    points = be.float_tensor(numpy.stack([vertex[c] for c in COORDINATES], axis=1)
                             if len(vertex.data) > 0 else [])
    bad_row = be.first_nonfinite_row(be.point_tensor(points))
    if bad_row >= 0:
        raise CloudFormatError("non-finite coordinate in vertex {}".format(bad_row),
                               path=path,
                               **_row_location(ply, bad_row, header_lines, header_bytes))
    colors = None
    if present:
        colors = numpy.stack([vertex[c] for c in CHANNELS], axis=1) \
            if len(vertex.data) > 0 else be.byte_tensor([])
    return PointCloud(points, colors)


def _row_location(ply, row, header_lines, header_bytes):
    """
    Where vertex row lives in the file: a line for ASCII, a byte offset
    for binary (None when earlier elements have variable size).

    """
    elements_before = []
    for el in ply.elements:
        if el.name == "vertex":
            break
        elements_before.append(el)
    if ply.text:
        offset = sum(len(el.data) for el in elements_before)
        return {"line": header_lines + offset + row + 1}
    if any(el.data.dtype.hasobject for el in elements_before):
        return {}
    offset = header_bytes + sum(el.data.nbytes for el in elements_before)
    return {"byte_offset": offset + row * ply["vertex"].data.dtype.itemsize}


def _save_ply(cloud, path, text):
    fields = [(c, "f8") for c in COORDINATES]
    if cloud.has_colors:
        fields += [(c, "u1") for c in CHANNELS]
    data = numpy.empty(len(cloud), dtype=fields)
    for j, c in enumerate(COORDINATES):
        data[c] = cloud.points[:, j]
    if cloud.has_colors:
        for j, c in enumerate(CHANNELS):
            data[c] = cloud.colors[:, j]
    element = PlyElement.describe(data, "vertex")
    PlyData([element], text=text, byte_order="<").write(path)


# ----- XYZ ----- #

def _data_line_number(path, row):
    """
    Map a parsed data row back to its 1-based line in an XYZ file.

    """
    seen = -1
    with open(path, "r") as infile:
        for number, line in enumerate(infile, start=1):
            content = line.split("#", 1)[0].strip()
            if content:
                seen += 1
                if seen == row:
                    return number
    return None


def _load_xyz(path):
    try:
        frame = pandas.read_csv(path, sep=r"\s+", comment="#", header=None,
                                skip_blank_lines=True, float_precision="round_trip")
    except pandas.errors.EmptyDataError:
        return PointCloud.empty()
    except pandas.errors.ParserError as err:
        match = re.search(r"line (\d+)", str(err))
        raise CloudFormatError("malformed XYZ content ({})".format(err), path=path,
                               line=int(match.group(1)) if match else None) from err

    if frame.shape[1] != 3:
        raise CloudFormatError("expected 3 columns, found {}".format(frame.shape[1]),
                               path=path, line=_data_line_number(path, 0))
    frame = frame.apply(pandas.to_numeric, errors="coerce")
    points = be.float_tensor(frame.values)
    bad_row = be.first_nonfinite_row(points)
    if bad_row >= 0:
        raise CloudFormatError("missing or non-finite coordinate", path=path,
                               line=_data_line_number(path, bad_row))
    return PointCloud(points)


def _save_xyz(cloud, path):
    if cloud.has_colors:
        warnings.warn("{}: XYZ cannot store colors; dropping them".format(path))
    frame = pandas.DataFrame(cloud.points, columns=list(COORDINATES))
    frame.to_csv(path, sep=" ", header=False, index=False, float_format="%.17g")
