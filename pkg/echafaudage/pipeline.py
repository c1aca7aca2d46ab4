"""
The inspection workflow as composable commands. Each command reads its
inputs, runs its stages and writes its artifacts and a JSON report into an
output directory. A failing stage surfaces as a StageError naming it.

"""
from contextlib import contextmanager
from datetime import datetime, timezone
import json
import os
import numpy

from . import backends as be
from . import deviation as dev
from . import graphdiff as gd
from . import plotting
from . import preprocess as pre
from . import registration as reg
from . import synth
from .cloud import load_cloud, save_cloud, build_index
from .structure import StructureParams, extract_graph, export_elements, ScaffoldGraph

EXTENSIONS = {"ply_ascii": ".ply", "ply_binary": ".ply", "xyz": ".xyz"}


class StageError(RuntimeError):
    """
    A pipeline stage failed.

    """
    def __init__(self, stage, message):
        self.stage = stage
        super().__init__("error in stage '{}': {}".format(stage, message))


@contextmanager
def stage(name, verbose=False):
    """
    Context in which any failure is reported as a StageError for name.

    Args:
        name (str)
        verbose (optional; bool)

    Returns:
        context manager

    """
    be.maybe_print("stage: {}".format(name), verbose=verbose)
    try:
        yield
    except StageError:
        raise
    except (ValueError, KeyError, TypeError, OSError, numpy.linalg.LinAlgError) as err:
        raise StageError(name, str(err)) from err


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _now():
    return datetime.now(timezone.utc).isoformat()


def _start_report(config, command):
    report = {"command": command}
    if config["run.record_timestamps"]:
        report["started"] = _now()
    return report


def _finish_report(report, config, path):
    if config["run.record_timestamps"]:
        report["finished"] = _now()
    write_json(report, path)
    return report


def write_json(content, path):
    """
    Write a JSON document with sorted keys.

    Notes:
        Performs an IO operation.

    Args:
        content (dict)
        path (str)

    Returns:
        None

    """
    with open(path, "w") as f:
        json.dump(content, f, indent=2, sort_keys=True)


def _output_path(output_dir, name, config=None):
    os.makedirs(output_dir, exist_ok=True)
    if config is not None:
        name += EXTENSIONS[config["run.output_format"]]
    return os.path.join(output_dir, name)


def icp_params(config, reference=None, current=None):
    """
    IcpParams from a pipeline configuration.

    Args:
        config (PipelineConfig)
        reference (optional; PointCloud): needed for the centroid initializer.
        current (optional; PointCloud): needed for the centroid initializer.

    Returns:
        IcpParams

    """
    initial = None
    if config["icp.initial"] == "centroid":
        initial = reg.centroid_initial_transform(reference, current)
    return reg.IcpParams(config["icp.max_iterations"], config["icp.convergence_delta"],
                         config["icp.max_correspondence_distance"], initial)


def structure_params(config):
    """
    StructureParams from a pipeline configuration.

    Args:
        config (PipelineConfig)

    Returns:
        StructureParams

    """
    section = config.section("structure")
    return StructureParams(**{name: section[name] for name in StructureParams._fields})


def match_distance(config):
    """
    deviation.match_distance, resolving 'auto' to twice the voxel size.

    """
    value = config["deviation.match_distance"]
    return 2 * config["cloud.voxel_size"] if value == "auto" else value


def characteristic_length(config, reference_graph=None):
    """
    deviation.characteristic_length, resolving 'auto' to the lift height of
    the reference graph (or DEFAULT_CHARACTERISTIC_LENGTH without one).

    """
    value = config["deviation.characteristic_length"]
    if value != "auto":
        return value
    if reference_graph is None:
        return dev.DEFAULT_CHARACTERISTIC_LENGTH
    return dev.estimate_lift_height(reference_graph)


def icp_summary(result):
    """
    Report block of an IcpResult.

    Args:
        result (IcpResult)

    Returns:
        dict

    """
    return {"transform": reg.transform_to_list(result.transform),
            "rotation_degrees": reg.rotation_angle(result.transform.rotation),
            "translation_norm": float(be.norm(result.transform.translation)),
            "mse": result.mse,
            "error_history": list(result.error_history),
            "iterations": result.iterations,
            "converged": result.converged,
            "correspondence_count": result.correspondence_count}


def alert_flag(diff_summary, deviation_reports, alarm_fraction):
    """
    Whether the site manager must be alerted.

    Notes:
        True iff a brace is missing or deviated, or the share of points
        exceeding the first deviation threshold is above alarm_fraction.

    Args:
        diff_summary (dict): GraphDiff.summary.
        deviation_reports (List[DeviationReport]): first one drives the alert.
        alarm_fraction (float)

    Returns:
        bool

    """
    exceeding = deviation_reports[0].exceeding_fraction if deviation_reports else 0.0
    return bool(diff_summary["missing_edges"] > 0 or diff_summary["deviated_edges"] > 0
                or exceeding > alarm_fraction)


def _load(path, verbose):
    with stage("load", verbose):
        return load_cloud(path)


def _preprocess(cloud, config):
    with stage("preprocess", config["run.verbose"]):
        return pre.run_transformations(cloud, pre.build_transformations(config),
                                       verbose=config["run.verbose"])


def _register(reference, current, config):
    with stage("register", config["run.verbose"]):
        index = build_index(reference)
        result = reg.icp(reference, current, icp_params(config, reference, current),
                         index=index, workers=config["run.workers"],
                         verbose=config["run.verbose"])
        return result, index


def _structure(cloud, config):
    with stage("structure", config["run.verbose"]):
        return extract_graph(cloud, structure_params(config),
                             workers=config["run.workers"],
                             verbose=config["run.verbose"])


def _deviate(reference_index, aligned, config, output_dir, reference_graph=None):
    with stage("deviation", config["run.verbose"]):
        workers = config["run.workers"]
        length = characteristic_length(config, reference_graph)
        distances = dev.cloud_distances(aligned, reference_index, workers=workers)
        reports = [dev.classify_deviation(distances, fraction, length)
                   for fraction in config["deviation.threshold_fractions"]]
        fmt = config["run.output_format"]
        if not fmt.startswith("ply"):
            fmt = "ply_binary"
        exports = []
        for report in reports:
            path = _output_path(output_dir, "deviation_{:g}pct.ply".format(
                100 * report.threshold_fraction))
            dev.export_colored(aligned, report.labels, path, format=fmt)
            exports.append(path)
        changes = dev.change_map(aligned, reference_index, match_distance(config),
                                 workers=workers)
        change_path = _output_path(output_dir, "change_map.ply")
        dev.export_colored(aligned, changes.labels, change_path, format=fmt)
        summary = {"reports": [dev.deviation_summary(r) for r in reports],
                   "exports": exports,
                   "change_map": {"match_distance": changes.match_distance,
                                  "counts": dev.label_counts(changes.labels),
                                  "export": change_path}}
        return reports, summary


def cmd_preprocess(input_path, config, output_dir="."):
    """
    Clean a raw scan: voxel grid, outlier removal, plane removal and crop.

    Notes:
        Writes <stem>_clean.<ext> and <stem>_preprocess.json.

    Args:
        input_path (str)
        config (PipelineConfig)
        output_dir (optional; str)

    Returns:
        dict: the report

    Raises:
        StageError

    """
    report = _start_report(config, "preprocess")
    cloud = _load(input_path, config["run.verbose"])
    clean, stages = _preprocess(cloud, config)
    with stage("write", config["run.verbose"]):
        out = _output_path(output_dir, _stem(input_path) + "_clean", config)
        save_cloud(clean, out, format=config["run.output_format"])
        report.update(input=input_path, output=out, stages=stages,
                      points_in=len(cloud), points_out=len(clean))
        return _finish_report(report, config, _output_path(
            output_dir, _stem(input_path) + "_preprocess.json"))


def cmd_register(reference_path, current_path, config, output_dir="."):
    """
    Align a current cloud onto a reference cloud with ICP.

    Notes:
        Inputs are used as given (no preprocessing). Writes the aligned
        current cloud and registration.json.

    Args:
        reference_path (str)
        current_path (str)
        config (PipelineConfig)
        output_dir (optional; str)

    Returns:
        dict: the report

    Raises:
        StageError

    """
    report = _start_report(config, "register")
    reference = _load(reference_path, config["run.verbose"])
    current = _load(current_path, config["run.verbose"])
    result, _ = _register(reference, current, config)
    with stage("write", config["run.verbose"]):
        out = _output_path(output_dir, _stem(current_path) + "_aligned", config)
        save_cloud(reg.apply_transform(current, result.transform), out,
                   format=config["run.output_format"])
        report.update(reference=reference_path, current=current_path, aligned=out,
                      icp=icp_summary(result))
        if config["run.plot"]:
            plotting.plot_error_history(result.error_history,
                                        _output_path(output_dir, "icp_error.png"))
        return _finish_report(report, config,
                              _output_path(output_dir, "registration.json"))


def cmd_deviate(reference_path, current_path, config, output_dir=".",
                reference_graph_path=None):
    """
    Deviation and change maps of an aligned current cloud.

    Args:
        reference_path (str)
        current_path (str): already aligned with the reference.
        config (PipelineConfig)
        output_dir (optional; str)
        reference_graph_path (optional; str): graph JSON used for the
            automatic characteristic length.

    Returns:
        dict: the report

    Raises:
        StageError

    """
    report = _start_report(config, "deviate")
    reference = _load(reference_path, config["run.verbose"])
    current = _load(current_path, config["run.verbose"])
    graph = None
    if reference_graph_path is not None:
        with stage("load", config["run.verbose"]):
            graph = ScaffoldGraph.load(reference_graph_path)
    with stage("deviation", config["run.verbose"]):
        index = build_index(reference)
    _, summary = _deviate(index, current, config, output_dir, graph)
    report.update(reference=reference_path, current=current_path, deviation=summary)
    with stage("write", config["run.verbose"]):
        return _finish_report(report, config, _output_path(output_dir, "deviation.json"))


def cmd_graph(input_path, config, output_dir="."):
    """
    Extract the scaffold graph of a preprocessed cloud.

    Notes:
        Writes <stem>_graph.json and the element cloud <stem>_elements.ply.

    Args:
        input_path (str)
        config (PipelineConfig)
        output_dir (optional; str)

    Returns:
        dict: the report

    Raises:
        StageError

    """
    report = _start_report(config, "graph")
    cloud = _load(input_path, config["run.verbose"])
    extraction = _structure(cloud, config)
    with stage("write", config["run.verbose"]):
        graph_path = _output_path(output_dir, _stem(input_path) + "_graph.json")
        extraction.graph.save(graph_path)
        elements_path = _output_path(output_dir, _stem(input_path) + "_elements.ply")
        export_elements(cloud, extraction.classes, elements_path)
        if config["run.plot"]:
            plotting.plot_graph(extraction.graph,
                                _output_path(output_dir, _stem(input_path) + "_graph.png"))
        report.update(input=input_path, graph=graph_path, elements=elements_path,
                      nodes=extraction.graph.num_nodes,
                      edges=extraction.graph.num_edges,
                      orientations=extraction.graph.orientation_counts(),
                      warnings=list(extraction.graph.warnings))
        return _finish_report(report, config, _output_path(
            output_dir, _stem(input_path) + "_graph_report.json"))


def cmd_inspect(reference_path, current_path, config, output_dir=".",
                preprocessed=False):
    """
    Compare a campaign scan with the certified reference scan.

    Notes:
        Preprocess both scans (unless preprocessed), align the current one
        with ICP, extract both graphs, compute the deviation and change
        maps, diff the graphs and raise the alert flag.

    Args:
        reference_path (str)
        current_path (str)
        config (PipelineConfig)
        output_dir (optional; str)
        preprocessed (optional; bool): skip preprocessing.

    Returns:
        dict: the InspectionReport, also written to inspection_report.json

    Raises:
        StageError

    """
    verbose = config["run.verbose"]
    report = _start_report(config, "inspect")
    reference = _load(reference_path, verbose)
    current = _load(current_path, verbose)
    report["scans"] = {"reference": {"path": reference_path, "points": len(reference)},
                       "current": {"path": current_path, "points": len(current)}}

    if not preprocessed:
        reference, reference_stages = _preprocess(reference, config)
        current, current_stages = _preprocess(current, config)
        report["preprocess"] = {"reference": reference_stages, "current": current_stages}

    result, reference_index = _register(reference, current, config)
    report["icp"] = icp_summary(result)
    aligned = reg.apply_transform(current, result.transform)

    reference_structure = _structure(reference, config)
    current_structure = _structure(aligned, config)
    ref_graph, cur_graph = reference_structure.graph, current_structure.graph

    deviation_reports, report["deviation"] = _deviate(reference_index, aligned, config,
                                                      output_dir, ref_graph)

    with stage("graphdiff", verbose):
        diff = gd.compare_graphs(ref_graph, cur_graph, config["graphdiff.node_tolerance"],
                                 config["graphdiff.deviation_tolerance"])
        report["graphdiff"] = dict(diff.summary)
        report["alert"] = alert_flag(diff.summary, deviation_reports,
                                     config["deviation.alarm_fraction"])

    with stage("write", verbose):
        paths = {"reference_graph": _output_path(output_dir, "reference_graph.json"),
                 "current_graph": _output_path(output_dir, "current_graph.json"),
                 "diff": _output_path(output_dir, "graph_diff.json"),
                 "diff_edges": _output_path(output_dir, "graph_diff_edges.csv"),
                 "aligned": _output_path(output_dir, "current_aligned", config)}
        ref_graph.save(paths["reference_graph"])
        cur_graph.save(paths["current_graph"])
        gd.save_diff(diff, ref_graph, cur_graph, paths["diff"])
        gd.export_diff_edges(diff, ref_graph, cur_graph, paths["diff_edges"])
        save_cloud(aligned, paths["aligned"], format=config["run.output_format"])
        if config["run.plot"]:
            paths["diff_plot"] = _output_path(output_dir, "graph_diff.png")
            plotting.plot_graph(ref_graph, paths["diff_plot"], diff=diff,
                                current=cur_graph)
            paths["icp_plot"] = _output_path(output_dir, "icp_error.png")
            plotting.plot_error_history(result.error_history, paths["icp_plot"])
        report["artifacts"] = paths
        be.maybe_print("alert: {}".format(report["alert"]), verbose=verbose)
        return _finish_report(report, config,
                              _output_path(output_dir, "inspection_report.json"))


def cmd_synth(spec_path, config, output_dir=".", name="synthetic"):
    """
    Generate a synthetic scene from a JSON spec file
    {"scaffold": {...ScaffoldSpec fields}, "defects": [{kind, target, displacement}]}.

    Notes:
        The scaffold seed defaults to run.seed. Writes <name>.<ext> and the
        <name>.json sidecar.

    Args:
        spec_path (str)
        config (PipelineConfig)
        output_dir (optional; str)
        name (optional; str)

    Returns:
        dict: the report

    Raises:
        StageError

    """
    verbose = config["run.verbose"]
    report = _start_report(config, "synth")
    with stage("load", verbose):
        with open(spec_path) as f:
            content = json.load(f)
        scaffold = dict(content.get("scaffold", {}))
        scaffold.setdefault("seed", config["run.seed"])
        spec = synth.scaffold_spec_from_dict(scaffold)
        defects = [synth.defect_from_dict(d) for d in content.get("defects", [])]
    with stage("synth", verbose):
        scene = synth.generate_scaffold(spec, verbose=verbose)
        scene, log = synth.apply_defects(scene, defects, verbose=verbose)
    with stage("write", verbose):
        out = _output_path(output_dir, name, config)
        sidecar = synth.save_scene(scene, out, format=config["run.output_format"],
                                   log=log)
        report.update(spec=spec_path, output=out, sidecar=sidecar, points=len(scene.cloud),
                      nodes=scene.graph.num_nodes, edges=scene.graph.num_edges,
                      defects=log)
        return _finish_report(report, config, _output_path(output_dir,
                                                           name + "_report.json"))
