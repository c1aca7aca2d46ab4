"""
Command line entry point:

    echafaudage preprocess SCAN
    echafaudage register REFERENCE CURRENT
    echafaudage deviate REFERENCE CURRENT [--reference-graph GRAPH]
    echafaudage graph CLOUD
    echafaudage inspect REFERENCE CURRENT [--preprocessed]
    echafaudage synth SPEC [--name NAME]

Every subcommand takes --config, --set key=value, --seed, --output-dir,
--emit-effective-config and --verbose. Exit codes: 0 on success, 1 when a
stage fails, 2 on a configuration error (before any computation).

"""
import argparse
import sys

from .config import ConfigError, PipelineConfig
from . import pipeline


def build_argparser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="configuration file (key = value, [section] headers)")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one configuration key")
    common.add_argument("--seed", type=int, default=None, help="overrides run.seed")
    common.add_argument("--output-dir", default=".", help="where artifacts are written")
    common.add_argument("--emit-effective-config", default=None, metavar="PATH",
                        help="write the resolved configuration to PATH")
    common.add_argument("--verbose", action="store_true", help="overrides run.verbose")

    p = argparse.ArgumentParser(prog="echafaudage",
                                description="Scaffolding inspection from point clouds")
    sub = p.add_subparsers(dest="command")
    sub.required = True

    s = sub.add_parser("preprocess", parents=[common], help="clean a raw scan")
    s.add_argument("input")

    s = sub.add_parser("register", parents=[common], help="align current onto reference")
    s.add_argument("reference")
    s.add_argument("current")

    s = sub.add_parser("deviate", parents=[common],
                       help="deviation maps of an aligned current scan")
    s.add_argument("reference")
    s.add_argument("current")
    s.add_argument("--reference-graph", default=None,
                   help="graph JSON giving the characteristic length")

    s = sub.add_parser("graph", parents=[common], help="extract the scaffold graph")
    s.add_argument("input")

    s = sub.add_parser("inspect", parents=[common],
                       help="compare a campaign scan with the reference scan")
    s.add_argument("reference")
    s.add_argument("current")
    s.add_argument("--preprocessed", action="store_true",
                   help="inputs are already preprocessed")

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic scene")
    s.add_argument("spec", help="JSON file with 'scaffold' and 'defects'")
    s.add_argument("--name", default="synthetic")
    return p


def resolve_config(args):
    """
    Defaults < --config file < --set overrides < dedicated flags.

    Args:
        args (argparse.Namespace)

    Returns:
        PipelineConfig

    Raises:
        ConfigError

    """
    config = PipelineConfig.load(args.config, args.overrides)
    if args.seed is not None:
        config.set("run.seed", args.seed, source="--seed")
    if args.verbose:
        config.set("run.verbose", True, source="--verbose")
    return config


def run_command(args, config):
    """
    Dispatch a parsed command line to its pipeline command.

    Args:
        args (argparse.Namespace)
        config (PipelineConfig)

    Returns:
        dict: the command's report

    """
    out = args.output_dir
    if args.command == "preprocess":
        return pipeline.cmd_preprocess(args.input, config, out)
    if args.command == "register":
        return pipeline.cmd_register(args.reference, args.current, config, out)
    if args.command == "deviate":
        return pipeline.cmd_deviate(args.reference, args.current, config, out,
                                    args.reference_graph)
    if args.command == "graph":
        return pipeline.cmd_graph(args.input, config, out)
    if args.command == "inspect":
        return pipeline.cmd_inspect(args.reference, args.current, config, out,
                                    args.preprocessed)
    return pipeline.cmd_synth(args.spec, config, out, args.name)


def main(argv=None):
    """
    Run the command line.

    Args:
        argv (optional; List[str]): defaults to sys.argv[1:].

    Returns:
        int: the exit code

    """
    args = build_argparser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.emit_effective_config is not None:
            config.write(args.emit_effective_config)
    except ConfigError as err:
        print("configuration error: {}".format(err), file=sys.stderr)
        return 2
    except OSError as err:
        print("configuration error: {}".format(err), file=sys.stderr)
        return 2
    try:
        report = run_command(args, config)
    except pipeline.StageError as err:
        print(str(err), file=sys.stderr)
        return 1
    if "alert" in report:
        print("alert: {}".format("yes" if report["alert"] else "no"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
