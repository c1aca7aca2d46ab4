"""
Comparison of a reference scaffold graph with a campaign graph in the same
frame: node matching by position, then missing, added and deviated braces.

"""
from collections import namedtuple
import json
import numpy
import pandas
from scipy.spatial import cKDTree

from . import backends as be
from .structure.elements import VERTICAL

NodeMatching = namedtuple("NodeMatching", ["pairs", "unmatched_reference",
                                           "unmatched_current"])

GraphDiff = namedtuple("GraphDiff", ["node_matches", "unmatched_reference_nodes",
                                     "unmatched_current_nodes", "matched_edges",
                                     "missing_edges", "added_edges", "deviated_edges",
                                     "summary"])

MATCHED = "matched"
MISSING = "missing"
ADDED = "added"
DEVIATED = "deviated"
JOINT = "joint"

DIFF_PALETTE = {
    MISSING: (255, 0, 0),
    DEVIATED: (255, 255, 0),
    ADDED: (255, 0, 255),
    "matched_vertical": (0, 0, 255),
    "matched_horizontal": (0, 255, 0),
    JOINT: (255, 0, 0)
    }


def match_nodes(reference, current, node_tolerance=0.25):
    """
    Greedy closest-first matching of graph nodes.

    Notes:
        All (reference, current) pairs within node_tolerance are visited by
        increasing distance, ties by reference id then current id; a pair
        is accepted when neither node is matched yet.

    Args:
        reference (ScaffoldGraph)
        current (ScaffoldGraph)
        node_tolerance (optional; float): meters.

    Returns:
        NodeMatching: pairs as (reference id, current id, displacement),
            sorted by reference id, and the unmatched ids of each graph.

    """
    if not node_tolerance >= 0:
        raise ValueError("node_tolerance must be non-negative")
    pairs = []
    if reference.num_nodes and current.num_nodes:
        near = cKDTree(reference.positions).query_ball_tree(
            cKDTree(current.positions), node_tolerance)
        rows = [(i, int(j), float(be.norm(reference.positions[i] - current.positions[j])))
                for i, js in enumerate(near) for j in js]
        rows = sorted(rows, key=lambda r: (r[2], r[0], r[1]))
        used_ref, used_cur = set(), set()
        for r, c, d in rows:
            if r in used_ref or c in used_cur:
                continue
            used_ref.add(r)
            used_cur.add(c)
            pairs.append((r, c, d))
    pairs.sort()
    matched_ref = {p[0] for p in pairs}
    matched_cur = {p[1] for p in pairs}
    return NodeMatching(pairs,
                        [i for i in range(reference.num_nodes) if i not in matched_ref],
                        [j for j in range(current.num_nodes) if j not in matched_cur])


def diff_graphs(reference, current, matching, deviation_tolerance=0.05):
    """
    Classify the edges of two graphs given their node matching.

    Notes:
        A reference edge whose matched nodes are joined in the current
        graph is matched, or deviated when either node moved by more than
        deviation_tolerance; any other reference edge is missing. Current
        edges without a reference counterpart are added.

    Args:
        reference (ScaffoldGraph)
        current (ScaffoldGraph)
        matching (NodeMatching): from match_nodes.
        deviation_tolerance (optional; float): meters.

    Returns:
        GraphDiff: edges are given as indices into graph.edges; deviated
            edges as (reference edge, current edge, max node displacement)
            and matched edges as (reference edge, current edge).

    """
    if not deviation_tolerance >= 0:
        raise ValueError("deviation_tolerance must be non-negative")
    to_current = {r: (c, d) for r, c, d in matching.pairs}
    current_edges = current.edge_index()
    matched, deviated, missing = [], [], []
    found = set()
    for k, edge in enumerate(reference.edges):
        if edge.a in to_current and edge.b in to_current:
            (ca, da), (cb, db) = to_current[edge.a], to_current[edge.b]
            key = (min(ca, cb), max(ca, cb))
            if key in current_edges:
                j = current_edges[key]
                found.add(j)
                displacement = max(da, db)
                if displacement > deviation_tolerance:
                    deviated.append((k, j, displacement))
                else:
                    matched.append((k, j))
                continue
        missing.append(k)
    added = [j for j in range(current.num_edges) if j not in found]
    summary = {
        "reference_nodes": reference.num_nodes,
        "current_nodes": current.num_nodes,
        "reference_edges": reference.num_edges,
        "current_edges": current.num_edges,
        "matched_nodes": len(matching.pairs),
        "matched_edges": len(matched),
        "missing_edges": len(missing),
        "added_edges": len(added),
        "deviated_edges": len(deviated)
        }
    return GraphDiff(list(matching.pairs), list(matching.unmatched_reference),
                     list(matching.unmatched_current), matched, missing, added,
                     deviated, summary)


def compare_graphs(reference, current, node_tolerance=0.25, deviation_tolerance=0.05):
    """
    match_nodes followed by diff_graphs.

    Args:
        reference (ScaffoldGraph)
        current (ScaffoldGraph)
        node_tolerance (optional; float)
        deviation_tolerance (optional; float)

    Returns:
        GraphDiff

    """
    return diff_graphs(reference, current,
                       match_nodes(reference, current, node_tolerance),
                       deviation_tolerance)


def diff_to_dict(diff, reference, current):
    """
    JSON-ready description of a GraphDiff, with edges spelled out by node ids.

    Args:
        diff (GraphDiff)
        reference (ScaffoldGraph)
        current (ScaffoldGraph)

    Returns:
        dict

    """
    def ref_edge(k):
        return reference.edges[k]._asdict()

    def cur_edge(j):
        return current.edges[j]._asdict()

    return {
        "node_matches": [{"reference": r, "current": c, "displacement": d}
                         for r, c, d in diff.node_matches],
        "unmatched_reference_nodes": diff.unmatched_reference_nodes,
        "unmatched_current_nodes": diff.unmatched_current_nodes,
        "missing_edges": [ref_edge(k) for k in diff.missing_edges],
        "added_edges": [cur_edge(j) for j in diff.added_edges],
        "deviated_edges": [{"reference": ref_edge(k), "current": cur_edge(j),
                            "displacement": d} for k, j, d in diff.deviated_edges],
        "summary": dict(diff.summary)
        }


def save_diff(diff, reference, current, path):
    """
    Write a GraphDiff as JSON.

    Notes:
        Performs an IO operation.

    Args:
        diff (GraphDiff)
        reference (ScaffoldGraph)
        current (ScaffoldGraph)
        path (str)

    Returns:
        None

    """
    with open(path, "w") as f:
        json.dump(diff_to_dict(diff, reference, current), f, indent=2, sort_keys=True)


def annotated_edge_list(diff, reference, current):
    """
    Renderer-neutral table of the diff drawn on the reference graph.

    Notes:
        One row per reference joint (status 'joint') and per reference edge
        (matched, deviated or missing), then one row per added current edge.
        Matched edges are blue when vertical and green otherwise.

    Args:
        diff (GraphDiff)
        reference (ScaffoldGraph)
        current (ScaffoldGraph)

    Returns:
        pandas.DataFrame: columns kind, status, a, b, x_a .. z_b, orientation,
            length, red, green, blue

    """
    status = {k: MATCHED for k, _ in diff.matched_edges}
    status.update({k: DEVIATED for k, _, _ in diff.deviated_edges})
    status.update({k: MISSING for k in diff.missing_edges})

    def color(state, orientation):
        if state == MATCHED:
            state = "matched_vertical" if orientation == VERTICAL else "matched_horizontal"
        return DIFF_PALETTE[state]

    def edge_row(kind, state, graph, edge):
        pa, pb = graph.positions[edge.a], graph.positions[edge.b]
        return [kind, state, edge.a, edge.b, *pa, *pb, edge.orientation, edge.length,
                *color(state, edge.orientation)]

    rows = [["node", JOINT, i, i, *p, *p, "", 0.0, *DIFF_PALETTE[JOINT]]
            for i, p in enumerate(reference.positions)]
    rows += [edge_row("edge", status[k], reference, e)
             for k, e in enumerate(reference.edges)]
    rows += [edge_row("edge", ADDED, current, current.edges[j]) for j in diff.added_edges]
    columns = ["kind", "status", "a", "b", "x_a", "y_a", "z_a", "x_b", "y_b", "z_b",
               "orientation", "length", "red", "green", "blue"]
    return pandas.DataFrame(rows, columns=columns)


def export_diff_edges(diff, reference, current, path):
    """
    Write annotated_edge_list as CSV.

    Notes:
        Performs an IO operation.

    Args:
        diff (GraphDiff)
        reference (ScaffoldGraph)
        current (ScaffoldGraph)
        path (str)

    Returns:
        None

    """
    annotated_edge_list(diff, reference, current).to_csv(path, index=False,
                                                          float_format="%.6f")
