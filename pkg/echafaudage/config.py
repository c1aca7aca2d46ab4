"""
Pipeline configuration.

A configuration is a flat mapping of dotted keys ('icp.max_iterations')
to typed values. The keys, their types and their defaults come from the
defaults.cfg file shipped with the package; a configuration file uses the
same syntax:

    # comment
    [icp]
    max_iterations = 80
    deviation.alarm_fraction = 0.05

Keys under a [section] header are prefixed with the section name unless
they are already dotted.

"""
import os
import re
from collections import OrderedDict
from math import isfinite
from cytoolz import groupby

from .cloud.io import SAVE_FORMATS

DEFAULTS_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "defaults.cfg")

AUTO = "auto"
# keys that accept auto besides a positive length
AUTO_KEYS = ("deviation.characteristic_length", "deviation.match_distance")
INITIAL_TRANSFORMS = ("identity", "centroid")

SECTION = re.compile(r"^\[\s*([A-Za-z_][\w]*)\s*\]$")
ENTRY = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")


class ConfigError(ValueError):
    """
    Raised for unknown keys, malformed lines and values out of bounds.

    """
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = "{}{}: ".format(source, "" if line is None else ":{}".format(line))
        super().__init__(where + message)


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _fraction(x):
    return 0 < x <= 1


def _angle(x):
    return 0 < x < 90


def _positive_or_auto(x):
    return x == AUTO or x > 0


BOUNDS = {
    "cloud.voxel_size": (_positive, "must be positive"),
    "cloud.outlier_neighbors": (_positive, "must be at least 1"),
    "cloud.outlier_std_ratio": (_positive, "must be positive"),
    "ransac.n_planes": (_non_negative, "must be non-negative"),
    "ransac.inlier_distance": (_positive, "must be positive"),
    "ransac.max_iterations": (_positive, "must be at least 1"),
    "ransac.min_inlier_fraction": (_fraction, "must be in (0, 1]"),
    "ransac.vertical_tolerance": (_angle, "must be in (0, 90) degrees"),
    "crop.max_distance": (_positive, "must be positive"),
    "icp.max_iterations": (_positive, "must be at least 1"),
    "icp.convergence_delta": (_non_negative, "must be non-negative"),
    "icp.max_correspondence_distance": (_positive, "must be positive"),
    "icp.initial": (lambda x: x in INITIAL_TRANSFORMS,
                    "must be one of {}".format(", ".join(INITIAL_TRANSFORMS))),
    "deviation.threshold_fractions": (lambda x: len(x) > 0 and all(0 < f <= 1 for f in x),
                                      "must be a non-empty list of fractions in (0, 1]"),
    "deviation.characteristic_length": (_positive_or_auto, "must be positive or auto"),
    "deviation.match_distance": (_positive_or_auto, "must be positive or auto"),
    "deviation.alarm_fraction": (lambda x: 0 <= x <= 1, "must be in [0, 1]"),
    "structure.feature_radius": (_positive, "must be positive"),
    "structure.min_neighbors": (lambda x: x >= 3, "must be at least 3"),
    "structure.dbscan_eps": (_positive, "must be positive"),
    "structure.dbscan_min_points": (_positive, "must be at least 1"),
    "structure.mixing_angle": (_angle, "must be in (0, 90) degrees"),
    "structure.hybrid_angle": (_angle, "must be in (0, 90) degrees"),
    "structure.joint_radius": (_positive, "must be positive"),
    "structure.merge_radius": (_positive, "must be positive"),
    "structure.vertical_tolerance": (_angle, "must be in (0, 90) degrees"),
    "structure.horizontal_tolerance": (_angle, "must be in (0, 90) degrees"),
    "structure.min_brace_length": (_non_negative, "must be non-negative"),
    "structure.crossing_tolerance": (_positive, "must be positive"),
    "graphdiff.node_tolerance": (_non_negative, "must be non-negative"),
    "graphdiff.deviation_tolerance": (_non_negative, "must be non-negative"),
    "run.seed": (_non_negative, "must be non-negative"),
    "run.workers": (lambda x: x >= 1 or x == -1, "must be at least 1, or -1 for all cores"),
    "run.output_format": (lambda x: x in SAVE_FORMATS,
                          "must be one of {}".format(", ".join(SAVE_FORMATS)))
    }


def parse_lines(text, source=None):
    """
    Parse configuration text into (key, raw value, line number) entries.

    Args:
        text (str)
        source (optional; str): name used in error messages.

    Returns:
        List[(str, str, int)]

    Raises:
        ConfigError: on a line that is neither a comment, a section header
            nor a key = value entry.

    """
    entries = []
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        header = SECTION.match(line)
        if header:
            section = header.group(1)
            continue
        entry = ENTRY.match(line)
        if entry is None:
            raise ConfigError("cannot parse '{}'".format(line), number, source)
        key, value = entry.group(1), entry.group(2).strip()
        if "." not in key:
            if section is None:
                raise ConfigError("key '{}' needs a section".format(key), number, source)
            key = section + "." + key
        entries.append((key, value, number))
    return entries


def _kind(raw):
    """
    Type of a default value from its literal.

    """
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return bool
    if "," in raw:
        return list
    try:
        int(raw)
        return int
    except ValueError:
        pass
    try:
        float(raw)
        return float
    except ValueError:
        return str


def convert(raw, kind):
    """
    Convert a raw string to a value of the given kind.

    Notes:
        Strings that read as 'auto' stay strings for every kind.

    Args:
        raw (str)
        kind (type): bool, int, float, list or str.

    Returns:
        value

    Raises:
        ValueError

    """
    raw = raw.strip()
    if raw.lower() == AUTO:
        return AUTO
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError("expected a boolean, got '{}'".format(raw))
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is list:
        return [float(x) for x in raw.split(",") if x.strip()]
    return raw


def format_value(value):
    """
    Configuration-file literal of a value; convert(format_value(v)) == v.

    Args:
        value

    Returns:
        str

    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if isfinite(value) else str(value)
    if isinstance(value, list):
        return ", ".join(format_value(float(v)) for v in value)
    return str(value)


def _read_defaults():
    with open(DEFAULTS_PATH) as f:
        entries = parse_lines(f.read(), DEFAULTS_PATH)
    kinds = OrderedDict()
    values = OrderedDict()
    for key, raw, _ in entries:
        if key == "deviation.threshold_fractions":
            kinds[key] = list
        elif key in AUTO_KEYS:
            kinds[key] = float
        else:
            kinds[key] = _kind(raw)
        values[key] = convert(raw, kinds[key])
    return kinds, values


class PipelineConfig(object):
    """
    Typed, validated pipeline parameters.

    """
    def __init__(self, values=None):
        """
        Create a configuration from the package defaults, updated by values.

        Args:
            values (optional; Dict[str, any]): typed values or raw strings.

        Returns:
            PipelineConfig

        """
        self.kinds, self.values = _read_defaults()
        for key, value in (values or {}).items():
            self.set(key, value)

    def set(self, key, value, line=None, source=None):
        """
        Set one key.

        Notes:
            Modifies the configuration in place.

        Args:
            key (str): dotted key.
            value (str or typed value)
            line (optional; int): for error messages.
            source (optional; str): for error messages.

        Returns:
            None

        Raises:
            ConfigError

        """
        if key not in self.kinds:
            raise ConfigError("unknown key '{}'".format(key), line, source)
        kind = self.kinds[key]
        try:
            if isinstance(value, str):
                value = convert(value, kind)
            elif kind is list:
                value = [float(v) for v in value]
            elif kind is float:
                value = float(value)
            elif kind is int:
                if int(value) != value:
                    raise ValueError("expected an integer, got {}".format(value))
                value = int(value)
            elif kind is bool and not isinstance(value, bool):
                raise ValueError("expected a boolean, got {}".format(value))
        except (TypeError, ValueError) as err:
            raise ConfigError("bad value for '{}': {}".format(key, err), line, source)
        if value == AUTO and key not in AUTO_KEYS:
            raise ConfigError("'{}' does not accept auto".format(key), line, source)
        if key in BOUNDS:
            check, message = BOUNDS[key]
            if not check(value):
                raise ConfigError("'{}' {}, got {}".format(key, message, value),
                                  line, source)
        self.values[key] = value

    def update_from_text(self, text, source=None):
        """
        Apply every entry of a configuration text.

        Notes:
            Modifies the configuration in place.

        Args:
            text (str)
            source (optional; str)

        Returns:
            None

        """
        for key, raw, line in parse_lines(text, source):
            self.set(key, raw, line, source)

    def update_from_file(self, path):
        """
        Apply every entry of a configuration file.

        Notes:
            Modifies the configuration in place.

        Args:
            path (str)

        Returns:
            None

        Raises:
            ConfigError: also when the file cannot be read.

        """
        try:
            with open(path) as f:
                text = f.read()
        except OSError as err:
            raise ConfigError("cannot read config file: {}".format(err.strerror),
                              source=path)
        self.update_from_text(text, path)

    def update_from_overrides(self, overrides):
        """
        Apply 'key=value' strings, as given on the command line.

        Notes:
            Modifies the configuration in place.

        Args:
            overrides (Iterable[str])

        Returns:
            None

        """
        for override in overrides:
            if "=" not in override:
                raise ConfigError("override '{}' is not key=value".format(override),
                                  source="--set")
            key, raw = override.split("=", 1)
            self.set(key.strip(), raw, source="--set")

    @classmethod
    def load(cls, path=None, overrides=()):
        """
        Defaults, then a configuration file, then overrides.

        Args:
            path (optional; str)
            overrides (optional; Iterable[str]): 'key=value' strings.

        Returns:
            PipelineConfig

        """
        config = cls()
        if path is not None:
            config.update_from_file(path)
        config.update_from_overrides(overrides)
        return config

    def __getitem__(self, key):
        return self.values[key]

    def __eq__(self, other):
        return isinstance(other, PipelineConfig) and self.values == other.values

    def section(self, name):
        """
        The keys of one section, without the section prefix.

        Args:
            name (str)

        Returns:
            Dict[str, any]

        """
        prefix = name + "."
        return {k[len(prefix):]: v for k, v in self.values.items()
                if k.startswith(prefix)}

    def get_config(self):
        """
        Return a dictionary of every key and its value.

        Args:
            None

        Returns:
            dict

        """
        return OrderedDict((k, list(v) if isinstance(v, list) else v)
                           for k, v in self.values.items())

    @classmethod
    def from_config(cls, config):
        """
        Create a configuration from a dictionary of dotted keys.

        Args:
            config (dict)

        Returns:
            PipelineConfig

        """
        return cls(config)

    def dumps(self):
        """
        The full configuration as text that loads back to an equal one.

        Args:
            None

        Returns:
            str

        """
        lines = []
        sections = groupby(lambda key: key.split(".", 1)[0], self.values.keys())
        for name, keys in sections.items():
            lines.append("[{}]".format(name))
            for key in keys:
                lines.append("{} = {}".format(key.split(".", 1)[1],
                                              format_value(self.values[key])))
            lines.append("")
        return "\n".join(lines)

    def write(self, path):
        """
        Write dumps() to a file.

        Notes:
            Performs an IO operation.

        Args:
            path (str)

        Returns:
            None

        """
        with open(path, "w") as f:
            f.write(self.dumps())
