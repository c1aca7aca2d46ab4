"""
Synthetic scaffolds with known ground truth.

A rectangular lattice of standards (verticals) and ledgers (horizontals
along x and y at every lift) is rendered as noisy points on tube surfaces,
optionally with a ground plane, a wall behind the scaffold and clutter
beyond the wall. Every point carries its source label, and defects
(removed braces, shifted braces, shifted joints) can be injected with a
log of what changed.

Lattice coordinates:
    node (i, j, k) sits at (i * bay_width, j * bay_depth,
    base_height + k * lift_height) for 0 <= i <= bays_x, 0 <= j <= bays_y,
    0 <= k <= lifts.
    member (i, j, k, axis) joins node (i, j, k) to its neighbor one step
    along axis, one of 'x', 'y', 'z'.

"""
from collections import namedtuple
import json
import os
import numpy

from . import backends as be
from .cloud import PointCloud, save_cloud
from .structure.elements import VERTICAL, HORIZONTAL_X, HORIZONTAL_Y
from .structure.graph import Edge, ScaffoldGraph

ScaffoldSpec = namedtuple("ScaffoldSpec", ["bays_x", "bays_y", "lifts", "bay_width",
                                           "bay_depth", "lift_height", "wall_standoff",
                                           "tube_radius", "points_per_meter",
                                           "noise_sigma", "include_ground",
                                           "include_wall", "clutter_points", "seed",
                                           "base_height", "surface_density", "margin"])
ScaffoldSpec.__new__.__defaults__ = (3, 1, 3, 2.0, 1.0, 2.0, 0.5, 0.024, 400.0, 0.002,
                                     True, True, 0, be.DEFAULT_SEED, 0.2, 1000.0, 1.0)

Defect = namedtuple("Defect", ["kind", "target", "displacement"])
Defect.__new__.__defaults__ = (None,)

SourceLabels = namedtuple("SourceLabels", ["kind", "element", "joint_zone"])

# ground truth: graph edge k is lattice member edge_elements[k]
Scene = namedtuple("Scene", ["cloud", "labels", "graph", "edge_elements", "spec"])

Lattice = namedtuple("Lattice", ["positions", "members", "member_ids", "node_ids"])

BRACE = "brace"
GROUND = "ground"
WALL = "wall"
CLUTTER = "clutter"

REMOVE_BRACE = "remove_brace"
SHIFT_BRACE = "shift_brace"
SHIFT_JOINT = "shift_joint"
DEFECT_KINDS = (REMOVE_BRACE, SHIFT_BRACE, SHIFT_JOINT)

AXIS_ORIENTATION = {"x": HORIZONTAL_X, "y": HORIZONTAL_Y, "z": VERTICAL}
AXIS_STEP = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}

JOINT_ZONE = 0.1


class UnknownTargetError(ValueError):
    """
    Raised when a defect names a member or node that is not in the lattice.

    """
    pass


def check_scaffold_spec(spec):
    """
    Validate the bounds of a ScaffoldSpec.

    Args:
        spec (ScaffoldSpec)

    Returns:
        None

    Raises:
        ValueError: naming the first field out of bounds.

    """
    for name in ["bays_x", "bays_y", "lifts"]:
        value = getattr(spec, name)
        if int(value) != value or value < 1:
            raise ValueError("{} must be an integer >= 1, got {}".format(name, value))
    for name in ["bay_width", "bay_depth", "lift_height", "tube_radius",
                 "points_per_meter", "surface_density"]:
        if not getattr(spec, name) > 0:
            raise ValueError("{} must be positive, got {}".format(
                name, getattr(spec, name)))
    for name in ["wall_standoff", "noise_sigma", "clutter_points", "base_height",
                 "margin"]:
        if not getattr(spec, name) >= 0:
            raise ValueError("{} must be non-negative, got {}".format(
                name, getattr(spec, name)))
    if int(spec.clutter_points) != spec.clutter_points:
        raise ValueError("clutter_points must be an integer")


def node_id(spec, i, j, k):
    """
    Id of lattice node (i, j, k).

    Args:
        spec (ScaffoldSpec)
        i, j, k (int)

    Returns:
        int

    """
    return k * (spec.bays_x + 1) * (spec.bays_y + 1) + j * (spec.bays_x + 1) + i


def build_lattice(spec):
    """
    Node positions and members of the lattice.

    Notes:
        Members are listed lift level by lift level: the x ledgers, then the
        y ledgers of each level, then all the standards.

    Args:
        spec (ScaffoldSpec)

    Returns:
        Lattice: positions (num_nodes, 3); members as Edges; member_ids maps
            (i, j, k, axis) to the member index and node_ids (i, j, k) to
            the node id.

    """
    nx, ny, nz = spec.bays_x + 1, spec.bays_y + 1, spec.lifts + 1
    node_ids = {}
    positions = numpy.zeros((nx * ny * nz, 3))
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                n = node_id(spec, i, j, k)
                node_ids[(i, j, k)] = n
                positions[n] = (i * spec.bay_width, j * spec.bay_depth,
                                spec.base_height + k * spec.lift_height)

    members, member_ids = [], {}

    def add(i, j, k, axis):
        di, dj, dk = AXIS_STEP[axis]
        a, b = node_ids[(i, j, k)], node_ids[(i + di, j + dj, k + dk)]
        member_ids[(i, j, k, axis)] = len(members)
        members.append(Edge(a, b, AXIS_ORIENTATION[axis],
                            float(be.norm(positions[b] - positions[a]))))

    for k in range(nz):
        for j in range(ny):
            for i in range(nx - 1):
                add(i, j, k, "x")
        for j in range(ny - 1):
            for i in range(nx):
                add(i, j, k, "y")
    for k in range(nz - 1):
        for j in range(ny):
            for i in range(nx):
                add(i, j, k, "z")
    return Lattice(positions, members, member_ids, node_ids)


def _perpendicular_basis(direction):
    helper = numpy.eye(3)[numpy.argmin(numpy.abs(direction))]
    e1 = numpy.cross(direction, helper)
    e1 /= be.norm(e1)
    return e1, numpy.cross(direction, e1)


def sample_tube(rng, start, end, radius, points_per_meter, noise_sigma=0.0):
    """
    Random points on the surface of a tube around the segment start-end.

    Notes:
        ceil(points_per_meter * length) points, uniform along the axis and
        around it, plus isotropic Gaussian noise.

    Args:
        rng (numpy.random.Generator)
        start (tensor (3,))
        end (tensor (3,))
        radius (float)
        points_per_meter (float)
        noise_sigma (optional; float)

    Returns:
        points (tensor (num_points, 3)),
        along (tensor (num_points,)): axis parameter in [0, 1] from start

    """
    start, end = be.float_tensor(start), be.float_tensor(end)
    length = be.norm(end - start)
    direction = (end - start) / length
    e1, e2 = _perpendicular_basis(direction)
    num_points = int(numpy.ceil(points_per_meter * length))
    along = rng.uniform(0.0, 1.0, num_points)
    angle = rng.uniform(0.0, 2 * numpy.pi, num_points)
    points = start + numpy.outer(along * length, direction) \
        + radius * (numpy.outer(numpy.cos(angle), e1) + numpy.outer(numpy.sin(angle), e2))
    if noise_sigma > 0:
        points = points + rng.normal(0.0, noise_sigma, points.shape)
    return points, along


def sample_rectangle(rng, origin, u, v, density, noise_sigma=0.0):
    """
    Uniform random points on the parallelogram origin + s u + t v, s, t in [0, 1].

    Args:
        rng (numpy.random.Generator)
        origin (tensor (3,))
        u (tensor (3,))
        v (tensor (3,))
        density (float): points per square meter.
        noise_sigma (optional; float): noise along the normal.

    Returns:
        tensor (num_points, 3)

    """
    u, v = be.float_tensor(u), be.float_tensor(v)
    normal = numpy.cross(u, v)
    area = be.norm(normal)
    num_points = int(round(density * area))
    st = rng.uniform(0.0, 1.0, (num_points, 2))
    points = be.float_tensor(origin) + numpy.outer(st[:, 0], u) + numpy.outer(st[:, 1], v)
    if noise_sigma > 0:
        points = points + numpy.outer(rng.normal(0.0, noise_sigma, num_points),
                                      normal / area)
    return points


def _environment(rng, spec, top):
    x0, x1 = -spec.margin, spec.bays_x * spec.bay_width + spec.margin
    y_wall = -spec.wall_standoff
    y0, y1 = y_wall - spec.margin, spec.bays_y * spec.bay_depth + spec.margin
    parts = []
    if spec.include_ground:
        parts.append((GROUND, sample_rectangle(rng, (x0, y0, 0.0), (x1 - x0, 0, 0),
                                               (0, y1 - y0, 0), spec.surface_density,
                                               spec.noise_sigma)))
    if spec.include_wall:
        parts.append((WALL, sample_rectangle(rng, (x0, y_wall, 0.0), (x1 - x0, 0, 0),
                                             (0, 0, top + spec.margin),
                                             spec.surface_density, spec.noise_sigma)))
    if spec.clutter_points > 0:
        low = be.float_tensor([x0, y0 - spec.margin, 0.0])
        high = be.float_tensor([x1, y_wall - 0.1, top])
        parts.append((CLUTTER, rng.uniform(low, high, (int(spec.clutter_points), 3))))
    return parts


def generate_scaffold(spec=ScaffoldSpec(), verbose=False):
    """
    Render a scaffold lattice as a labeled point cloud.

    Notes:
        Points are produced member by member in lattice order, then ground,
        wall and clutter, all from one generator seeded by spec.seed.

    Args:
        spec (optional; ScaffoldSpec)
        verbose (optional; bool)

    Returns:
        Scene

    """
    check_scaffold_spec(spec)
    rng = be.make_rng(spec.seed)
    lattice = build_lattice(spec)
    points, kinds, elements, zones = [], [], [], []
    for m, member in enumerate(lattice.members):
        tube, along = sample_tube(rng, lattice.positions[member.a],
                                  lattice.positions[member.b], spec.tube_radius,
                                  spec.points_per_meter, spec.noise_sigma)
        distance = along * member.length
        points.append(tube)
        kinds.append(numpy.full(len(tube), BRACE, dtype=object))
        elements.append(numpy.full(len(tube), m, dtype=be.Long))
        zones.append((distance < JOINT_ZONE) | (distance > member.length - JOINT_ZONE))

    top = spec.base_height + spec.lifts * spec.lift_height
    for kind, part in _environment(rng, spec, top):
        points.append(part)
        kinds.append(numpy.full(len(part), kind, dtype=object))
        elements.append(numpy.full(len(part), -1, dtype=be.Long))
        zones.append(numpy.zeros(len(part), dtype=bool))

    labels = SourceLabels(numpy.concatenate(kinds).astype(str),
                          numpy.concatenate(elements),
                          numpy.concatenate(zones))
    cloud = PointCloud(numpy.concatenate(points))
    graph = ScaffoldGraph(lattice.positions, lattice.members)
    be.maybe_print("generated {} points, {}".format(len(cloud), graph), verbose=verbose)
    return Scene(cloud, labels, graph, list(range(len(lattice.members))), spec)


def remove_brace(i, j, k, axis):
    """
    Defect: delete member (i, j, k, axis).

    """
    return Defect(REMOVE_BRACE, (int(i), int(j), int(k), str(axis)))


def shift_brace(i, j, k, axis, displacement):
    """
    Defect: translate the points of member (i, j, k, axis).

    """
    return Defect(SHIFT_BRACE, (int(i), int(j), int(k), str(axis)),
                  tuple(float(d) for d in displacement))


def shift_joint(i, j, k, displacement):
    """
    Defect: move node (i, j, k) and bend its members with it.

    """
    return Defect(SHIFT_JOINT, (int(i), int(j), int(k)),
                  tuple(float(d) for d in displacement))


def _resolve_member(lattice, edge_elements, target):
    key = tuple(target)
    if key not in lattice.member_ids:
        raise UnknownTargetError("no lattice member {}".format(key))
    member = lattice.member_ids[key]
    if member not in edge_elements:
        raise UnknownTargetError("lattice member {} was already removed".format(key))
    return member


def _resolve_node(lattice, target):
    key = tuple(target)
    if key not in lattice.node_ids:
        raise UnknownTargetError("no lattice node {}".format(key))
    return lattice.node_ids[key]


def apply_defects(scene, defects, verbose=False):
    """
    Inject defects into a scene, in order.

    Notes:
        remove_brace deletes the member's points and its graph edge.
        shift_brace translates the member's points; the graph keeps the
        edge and the log records the moved endpoints.
        shift_joint moves the graph node, and the points of every member
        at that node by the displacement scaled linearly from 1 at the
        node to 0 at the member's other end; incident edge lengths are
        updated.
        Every point keeps its source label.

    Args:
        scene (Scene)
        defects (List[Defect])
        verbose (optional; bool)

    Returns:
        scene (Scene), log (List[dict])

    Raises:
        UnknownTargetError

    """
    lattice = build_lattice(scene.spec)
    points = scene.cloud.points.copy()
    keep = numpy.ones(len(points), dtype=bool)
    positions = scene.graph.positions.copy()
    edges = list(scene.graph.edges)
    edge_elements = list(scene.edge_elements)
    log = []

    for defect in defects:
        if defect.kind not in DEFECT_KINDS:
            raise ValueError("unknown defect kind '{}'".format(defect.kind))
        entry = {"kind": defect.kind, "target": list(defect.target)}
        if defect.kind == SHIFT_JOINT:
            node = _resolve_node(lattice, defect.target)
            shift = be.float_tensor(defect.displacement)
            incident = [k for k, e in enumerate(edges) if node in (e.a, e.b)]
            for k in incident:
                edge = edges[k]
                a, b = positions[edge.a], positions[edge.b]
                mask = keep & (scene.labels.element == edge_elements[k])
                t = numpy.clip(numpy.dot(points[mask] - a, b - a) / numpy.dot(b - a, b - a),
                               0.0, 1.0)
                weight = 1 - t if edge.a == node else t
                points[mask] += numpy.outer(weight, shift)
            positions[node] += shift
            for k in incident:
                edge = edges[k]
                edges[k] = edge._replace(
                    length=float(be.norm(positions[edge.b] - positions[edge.a])))
            entry.update(node=node, displacement=list(shift),
                         members=[edge_elements[k] for k in incident],
                         position=list(positions[node]))
        else:
            member = _resolve_member(lattice, edge_elements, defect.target)
            k = edge_elements.index(member)
            mask = keep & (scene.labels.element == member)
            entry["member"] = member
            if defect.kind == REMOVE_BRACE:
                keep &= ~mask
                entry.update(edge=[edges[k].a, edges[k].b],
                             removed_points=int(mask.sum()))
                del edges[k]
                del edge_elements[k]
            else:
                shift = be.float_tensor(defect.displacement)
                points[mask] += shift
                entry.update(displacement=list(shift), moved_points=int(mask.sum()),
                             endpoints=[list(positions[edges[k].a] + shift),
                                        list(positions[edges[k].b] + shift)])
        be.maybe_print("applied {}".format(entry), verbose=verbose)
        log.append(entry)

    cloud = PointCloud(points[keep])
    labels = SourceLabels(*[field[keep] for field in scene.labels])
    graph = ScaffoldGraph(positions, edges)
    return Scene(cloud, labels, graph, edge_elements, scene.spec), log


def scaffold_spec_from_dict(config):
    """
    A ScaffoldSpec from a (partial) dictionary; missing fields take defaults.

    Args:
        config (dict)

    Returns:
        ScaffoldSpec

    """
    unknown = set(config) - set(ScaffoldSpec._fields)
    if unknown:
        raise ValueError("unknown scaffold fields: {}".format(sorted(unknown)))
    return ScaffoldSpec(**config)


def defect_from_dict(config):
    """
    A Defect from {kind, target, displacement}.

    Args:
        config (dict)

    Returns:
        Defect

    """
    displacement = be.maybe_key(config, "displacement", func=tuple)
    return Defect(config["kind"], tuple(config["target"]), displacement)


def save_scene(scene, path, format="ply_binary", log=None):
    """
    Write the scene cloud and a JSON sidecar next to it holding the spec,
    the source labels, the ground-truth graph and the defect log.

    Notes:
        Performs an IO operation. The sidecar path is path with its
        extension replaced by '.json'.

    Args:
        scene (Scene)
        path (str)
        format (optional; str)
        log (optional; List[dict])

    Returns:
        str: the sidecar path

    """
    save_cloud(scene.cloud, path, format=format)
    sidecar = os.path.splitext(path)[0] + ".json"
    content = {
        "spec": scene.spec._asdict(),
        "labels": {"kind": scene.labels.kind.tolist(),
                   "element": scene.labels.element.tolist(),
                   "joint_zone": scene.labels.joint_zone.tolist()},
        "graph": scene.graph.get_config(),
        "edge_elements": list(scene.edge_elements),
        "defects": list(log or [])
        }
    with open(sidecar, "w") as f:
        json.dump(content, f, sort_keys=True)
    return sidecar

