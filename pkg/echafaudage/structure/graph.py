import json
import warnings
from collections import namedtuple
import numpy
from cytoolz import groupby

from .. import backends as be

Edge = namedtuple("Edge", ["a", "b", "orientation", "length"])


class ScaffoldGraph(object):
    """
    Joints as nodes and braces as edges.

    Node ids are the row indices of positions. Edges are stored with a < b.

    """
    def __init__(self, positions, edges=(), warnings=()):
        """
        Create a scaffold graph.

        Args:
            positions (tensor (num_nodes, 3)): joint positions.
            edges (optional; Iterable[Edge])
            warnings (optional; Iterable[str]): notes from graph construction.

        Returns:
            ScaffoldGraph

        """
        self.positions = be.point_tensor(positions)
        self.positions.setflags(write=False)
        self.edges = []
        for edge in edges:
            a, b = int(edge.a), int(edge.b)
            if a == b:
                raise ValueError("self-loop edge at node {}".format(a))
            if not (0 <= a < self.num_nodes and 0 <= b < self.num_nodes):
                raise ValueError("edge ({}, {}) references a missing node".format(a, b))
            self.edges.append(Edge(min(a, b), max(a, b), str(edge.orientation),
                                   float(edge.length)))
        self.warnings = list(warnings)

    @property
    def num_nodes(self):
        return len(self.positions)

    @property
    def num_edges(self):
        return len(self.edges)

    def __repr__(self):
        return "ScaffoldGraph(num_nodes={}, num_edges={})".format(
            self.num_nodes, self.num_edges)

    def edge_index(self):
        """
        Map from the sorted node pair of each edge to its position in edges.

        Args:
            None

        Returns:
            dict

        """
        return {(e.a, e.b): i for i, e in enumerate(self.edges)}

    def degrees(self):
        """
        Number of edges at each node.

        Args:
            None

        Returns:
            long tensor (num_nodes,)

        """
        ends = numpy.array([(e.a, e.b) for e in self.edges], dtype=be.Long).reshape(-1)
        return numpy.bincount(ends, minlength=self.num_nodes).astype(be.Long)

    def orientation_counts(self):
        """
        Number of edges per orientation label.

        Args:
            None

        Returns:
            dict

        """
        return {k: len(v) for k, v in groupby(lambda e: e.orientation,
                                               self.edges).items()}

    def get_config(self):
        """
        Return a dictionary describing the graph.

        Args:
            None

        Returns:
            dict: nodes [{id, x, y, z}], edges [{a, b, orientation, length}]

        """
        return {
            "nodes": [{"id": i, "x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
                      for i, p in enumerate(self.positions)],
            "edges": [e._asdict() for e in self.edges],
            "warnings": list(self.warnings)
            }

    @classmethod
    def from_config(cls, config):
        """
        Build a graph from a configuration dictionary.

        Notes:
            Node ids may come in any order; they are relabeled to row indices
            in ascending id order.

        Args:
            config (dict)

        Returns:
            ScaffoldGraph

        """
        nodes = sorted(config["nodes"], key=lambda n: n["id"])
        relabel = {n["id"]: i for i, n in enumerate(nodes)}
        positions = [(n["x"], n["y"], n["z"]) for n in nodes]
        edges = [Edge(relabel[e["a"]], relabel[e["b"]], e["orientation"], e["length"])
                 for e in config["edges"]]
        return cls(positions, edges, be.maybe_key(config, "warnings", []))

    def save(self, path):
        """
        Write the graph as JSON.

        Notes:
            Performs an IO operation.

        Args:
            path (str)

        Returns:
            None

        """
        with open(path, "w") as f:
            json.dump(self.get_config(), f, indent=2)

    @classmethod
    def load(cls, path):
        """
        Read a graph written by save.

        Args:
            path (str)

        Returns:
            ScaffoldGraph

        """
        with open(path) as f:
            return cls.from_config(json.load(f))


def build_graph(braces, joint_positions, assignment):
    """
    Assemble the scaffold graph from braces and their joint assignment.

    Notes:
        Braces whose ends share a joint are dropped, and braces repeating a
        joint pair are merged into the first one (keeping the longer length);
        both are reported as warnings. Joints left without any edge are
        removed and the remaining ones relabeled in order.

    Args:
        braces (List[BraceSegment])
        joint_positions (tensor (num_joints, 3))
        assignment (long tensor (num_braces, 2)): joint ids of the brace ends.

    Returns:
        ScaffoldGraph

    """
    notes = []
    kept = {}
    for k, (brace, (a, b)) in enumerate(zip(braces, assignment)):
        a, b = int(a), int(b)
        if a == b:
            notes.append("brace {} dropped: both ends at joint {}".format(k, a))
            continue
        key = (min(a, b), max(a, b))
        if key in kept:
            notes.append("brace {} merged: duplicate of joints {}".format(k, key))
            first = kept[key]
            kept[key] = first._replace(length=max(first.length, brace.length))
            continue
        kept[key] = Edge(key[0], key[1], brace.orientation, brace.length)
    for note in notes:
        warnings.warn(note)

    positions = be.point_tensor(joint_positions)
    used = numpy.zeros(len(positions), dtype=bool)
    for a, b in kept:
        used[[a, b]] = True
    relabel = numpy.cumsum(used) - 1
    edges = [e._replace(a=int(relabel[e.a]), b=int(relabel[e.b]))
             for e in kept.values()]
    return ScaffoldGraph(positions[used], edges, notes)
