import numpy
import matplotlib.pyplot as plt

from .structure.elements import VERTICAL
from . import graphdiff as gd


def _rgb(color):
    return tuple(c / 255 for c in color)


def _draw_edges(ax, graph, edges, color, linestyle="-", linewidth=1.5):
    for edge in edges:
        segment = graph.positions[[edge.a, edge.b]]
        ax.plot(segment[:, 0], segment[:, 1], segment[:, 2], linestyle,
                c=color, linewidth=linewidth)


def plot_graph(graph, filename=None, diff=None, current=None, show=False):
    """
    Draw a scaffold graph in 3D: horizontal braces green, vertical braces
    blue, joints red. With a diff against current, missing braces are red
    and dashed, deviated braces yellow and added braces magenta.

    Args:
        graph (ScaffoldGraph): the (reference) graph.
        filename (optional; str): save the figure there.
        diff (optional; GraphDiff): from compare_graphs(graph, current).
        current (optional; ScaffoldGraph): needed to draw added braces.
        show (optional; bool)

    Returns:
        None

    """
    f = plt.figure(figsize=(6, 6))
    ax = f.add_subplot(projection="3d")

    if diff is None:
        plain = graph.edges
    else:
        plain = [graph.edges[k] for k, _ in diff.matched_edges]
        _draw_edges(ax, graph, [graph.edges[k] for k in diff.missing_edges],
                    _rgb(gd.DIFF_PALETTE[gd.MISSING]), "--", 2.5)
        _draw_edges(ax, graph, [graph.edges[k] for k, _, _ in diff.deviated_edges],
                    _rgb(gd.DIFF_PALETTE[gd.DEVIATED]), "-", 2.5)
        if current is not None:
            _draw_edges(ax, current, [current.edges[j] for j in diff.added_edges],
                        _rgb(gd.DIFF_PALETTE[gd.ADDED]), "-", 2.5)

    _draw_edges(ax, graph, [e for e in plain if e.orientation == VERTICAL],
                _rgb(gd.DIFF_PALETTE["matched_vertical"]))
    _draw_edges(ax, graph, [e for e in plain if e.orientation != VERTICAL],
                _rgb(gd.DIFF_PALETTE["matched_horizontal"]))
    if graph.num_nodes:
        ax.scatter(graph.positions[:, 0], graph.positions[:, 1], graph.positions[:, 2],
                   c=[_rgb(gd.DIFF_PALETTE[gd.JOINT])], s=12)

    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel("z (m)")
    plt.tight_layout()
    if show:
        plt.show()
    if filename is not None:
        f.savefig(filename)
    plt.close(f)


def plot_error_history(history, filename=None, show=False):
    """
    Plot the ICP mean squared error per iteration on a log scale.

    Args:
        history (List[float]): IcpResult.error_history.
        filename (optional; str)
        show (optional; bool)

    Returns:
        None

    """
    vals = numpy.asarray(history, dtype=float)
    f, ax = plt.subplots(1, 1, figsize=(4, 3))
    markersize = max(2.5, 5*min(1, 10/max(len(vals), 1)))
    ax.plot(range(len(vals)), vals, 'o-', markersize=markersize, c='b')
    if len(vals) and numpy.all(vals > 0):
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_title("ICP mse")
    plt.tight_layout(pad=0.5)
    if show:
        plt.show()
    if filename is not None:
        f.savefig(filename)
    plt.close(f)
