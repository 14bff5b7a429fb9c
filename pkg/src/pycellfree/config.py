"""Experiment configuration: the reference preset, config files and flags.

A configuration is a flat mapping whose keys are the command-line flag
names without the leading dashes (``tau-up``, ``bandwidth-mhz``, ...).
Values are resolved with flags taking precedence over a config file, and
the file over the reference preset.
"""
from collections import OrderedDict
import logging

import datadiff
import six
import yaml

from pycellfree.exceptions import ConfigError, InvalidArgument
from pycellfree.pilot_assignment import (VARIANTS, VARIANT_ALIASES,
                                         Selection, UtilityConfig)
from pycellfree.power_control import POWER_MODES, MaxMinSettings
from pycellfree.propagation import PropagationParams, RadioConfig

# (key, attribute, kind, default) in manifest order. Defaults are the
# reference urban scenario.
FIELDS = (
    ("M", "num_aps", "int", 200),
    ("K", "num_ues", "int", 50),
    ("side", "side", "float", 1000.0),
    ("tau", "tau", "int", 200),
    ("tau-up", "tau_up", "int", 50),
    ("tau-dp", "tau_dp", "int", 25),
    ("frequency-mhz", "frequency_mhz", "float", 2000.0),
    ("bandwidth-mhz", "bandwidth_mhz", "float", 20.0),
    ("noise-figure", "noise_figure", "float", 9.0),
    ("sigma-sh", "sigma_sh", "float", 8.0),
    ("ap-power-mw", "ap_power_mw", "float", 200.0),
    ("ue-power-mw", "ue_power_mw", "float", 100.0),
    ("h-ap", "h_ap", "float", 5.0),
    ("h-ue", "h_ue", "float", 1.65),
    ("d0", "d0", "float", 10.0),
    ("d1", "d1", "float", 50.0),
    ("distance-unit", "distance_unit", "float", 1000.0),
    ("orthogonal-pilots", "orthogonal_pilots", "bool", True),
    ("power", "power_mode", "str", "maxmin"),
    ("bisection-tol", "bisection_tol", "float", 1e-2),
    ("metric", "metric", "str", "abs_rate"),
    ("w", "w", "float", 0.0),
    ("alpha", "alpha", "float", 1.0),
    ("doppler", "doppler", "float", 0.0),
    ("budget", "budget", "int?", None),
    ("threshold", "threshold", "float?", None),
    ("quadrature-nodes", "quadrature_nodes", "int", 24),
    ("realizations", "realizations", "int", 200),
    ("seed", "seed", "int", 0),
)
KEYS = tuple(field[0] for field in FIELDS)
_BY_KEY = {field[0]: field for field in FIELDS}
_CHOICES = {
    "power": POWER_MODES,
    "metric": VARIANTS + tuple(VARIANT_ALIASES),
}


def coerce_value(key, value):
    """Check and convert one config value to the type its key expects.

    :raises: :py:class:`InvalidArgument` on an unknown key or a value of
             the wrong type.
    """
    if key not in _BY_KEY:
        raise InvalidArgument("Unknown setting {}".format(repr(key)))
    kind = _BY_KEY[key][2]
    if kind.endswith("?"):
        if value is None:
            return None
        kind = kind[:-1]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, six.integer_types):
            raise InvalidArgument("{} expects an integer, got {}"
                                  .format(key, repr(value)))
        return int(value)
    elif kind == "float":
        if isinstance(value, six.string_types):
            # YAML 1.1 reads exponents without a dot (1e-2) as strings.
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or \
                not isinstance(value, six.integer_types + (float,)):
            raise InvalidArgument("{} expects a number, got {}"
                                  .format(key, repr(value)))
        return float(value)
    elif kind == "bool":
        if not isinstance(value, bool):
            raise InvalidArgument("{} expects true or false, got {}"
                                  .format(key, repr(value)))
        return value
    else:
        if not isinstance(value, six.string_types):
            raise InvalidArgument("{} expects a string, got {}"
                                  .format(key, repr(value)))
        if key in _CHOICES and value not in _CHOICES[key]:
            raise InvalidArgument("{} must be one of {}, got {}"
                                  .format(key, ", ".join(_CHOICES[key]),
                                          repr(value)))
        return value


class ExperimentConfig(object):
    """Every setting of an experiment, in the units of the flags (m, MHz,
    mW, dB)."""
    def __init__(self, **settings):
        """Initializer.

        :param settings: Attribute names from ``FIELDS`` (``num_aps``,
                         ``tau_up``, ...). Missing ones take the preset
                         default.

        :raises: :py:class:`InvalidArgument` on an unknown or invalid
                 setting.
        """
        by_attr = {field[1]: field for field in FIELDS}
        unknown = set(settings) - set(by_attr)
        if unknown:
            raise InvalidArgument("Unknown setting(s): {}"
                                  .format(", ".join(sorted(unknown))))
        for key, attr, _, default in FIELDS:
            setattr(self, attr, coerce_value(key, settings.get(attr, default)))
        self.validate()

    def validate(self):
        """Check value ranges and build every derived object once.

        :raises: :py:class:`InvalidArgument` describing the first problem,
                 with the key it is blamed on.
        """
        for key, attr in (("M", "num_aps"), ("K", "num_ues"),
                          ("tau", "tau"), ("realizations", "realizations")):
            if getattr(self, attr) < 1:
                raise InvalidArgument("{} must be >= 1".format(key), key)
        # Every UE needs at least one uplink pilot symbol to be estimated.
        if self.tau_up < 1:
            raise InvalidArgument("tau-up must be >= 1", "tau-up")
        if not 1 <= self.tau_dp <= self.num_ues:
            raise InvalidArgument("tau-dp must lie in [1, K], got {}"
                                  .format(self.tau_dp), "tau-dp")
        if self.tau_up + self.tau_dp > self.tau:
            raise InvalidArgument("tau-up + tau-dp exceeds tau", "tau")
        if self.orthogonal_pilots and self.tau_up < self.num_ues:
            raise InvalidArgument("Orthogonal uplink pilots need tau-up >= K",
                                  "tau-up")
        if self.side <= 0:
            raise InvalidArgument("side must be positive", "side")
        if self.quadrature_nodes < 2:
            raise InvalidArgument("quadrature-nodes must be >= 2",
                                  "quadrature-nodes")
        if self.seed < 0:
            raise InvalidArgument("seed must be non-negative", "seed")
        if self.budget is not None and self.threshold is not None:
            raise InvalidArgument("Set either budget or threshold, not both",
                                  "threshold")
        if self.budget is not None and self.budget > self.tau_dp:
            raise InvalidArgument("budget exceeds tau-dp", "budget")
        self.propagation()
        self.radio()
        self.utility()
        self.maxmin_settings()

    @classmethod
    def reference(cls):
        """The reference preset."""
        return cls()

    def propagation(self):
        """:rtype: :py:class:`pycellfree.propagation.PropagationParams`"""
        return PropagationParams(
            frequency_mhz=self.frequency_mhz, h_ap=self.h_ap, h_ue=self.h_ue,
            d0=self.d0, d1=self.d1, sigma_sh=self.sigma_sh,
            distance_unit=self.distance_unit)

    def radio(self):
        """:rtype: :py:class:`pycellfree.propagation.RadioConfig`"""
        return RadioConfig.from_units(
            bandwidth_mhz=self.bandwidth_mhz, noise_figure=self.noise_figure,
            ap_power_mw=self.ap_power_mw, ue_power_mw=self.ue_power_mw)

    def selection(self):
        if self.threshold is not None:
            return Selection.threshold(self.threshold)
        return Selection.budget(self.budget)

    def utility(self, metric=None):
        """Utility settings, optionally with another metric variant.

        :rtype: :py:class:`pycellfree.pilot_assignment.UtilityConfig`
        """
        return UtilityConfig.uniform(
            self.num_ues, variant=metric or self.metric, w=self.w,
            alpha=self.alpha, doppler=self.doppler,
            selection=self.selection())

    def maxmin_settings(self):
        return MaxMinSettings(bisection_tol=self.bisection_tol)

    def replace(self, **settings):
        """A copy with some attributes changed."""
        current = {field[1]: getattr(self, field[1]) for field in FIELDS}
        current.update(settings)
        return ExperimentConfig(**current)

    def as_dict(self):
        """Flat mapping from flag names to values, in a fixed order."""
        return OrderedDict((key, getattr(self, attr))
                           for key, attr, _, _ in FIELDS)

    @classmethod
    def from_dict(cls, values, path=None, lines=None):
        """Build a config from a flat mapping of flag names to values.

        :param values: Settings keyed by flag name.
        :type values: ``dict``
        :param path: File the values came from, for diagnostics.
        :type path: ``str`` or ``NoneType``
        :param lines: Line number of each key in that file.
        :type lines: ``dict`` or ``NoneType``

        :raises: :py:class:`ConfigError`
        """
        lines = lines or {}
        settings = {}
        for key, value in values.items():
            try:
                settings[_BY_KEY[key][1] if key in _BY_KEY else key] = \
                    coerce_value(key, value)
            except InvalidArgument as err:
                six.raise_from(ConfigError(str(err), path, lines.get(key)),
                               err)
        try:
            return cls(**settings)
        except InvalidArgument as err:
            line = lines.get(getattr(err, "key", None))
            six.raise_from(ConfigError(str(err), path, line), err)

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and \
            self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "ExperimentConfig(M={}, K={}, power={}, metric={})".format(
            self.num_aps, self.num_ues, self.power_mode, self.metric)


class ConfigFile(object):
    """Values read from a config file, with the line of each key.

    ``index`` is the realization a single-shot manifest was drawn from.
    """
    def __init__(self, path, values, lines, index=None):
        self.path = path
        self.values = values
        self.lines = lines
        self.index = index

    def line_of(self, key):
        return self.lines.get(key)


def _manifest_settings(root):
    keys = {key.value: value for key, value in root.value
            if isinstance(key, yaml.ScalarNode)}
    if "command" in keys and isinstance(keys.get("config"),
                                        yaml.MappingNode):
        return keys["config"]
    return None


def _manifest_index(root, data, path):
    """The single-shot realization index recorded in a manifest, if any."""
    for key_node, _ in root.value:
        if isinstance(key_node, yaml.ScalarNode) and \
                key_node.value == "index":
            index = data.get("index")
            if isinstance(index, bool) or \
                    not isinstance(index, six.integer_types) or index < 0:
                raise ConfigError("index must be a non-negative integer",
                                  path, key_node.start_mark.line + 1)
            return index
    return None


def load_config_file(path):
    """Read a flat ``key: value`` YAML config file.

    Keys must be flag names and values scalars. Every problem is reported
    with the line it occurs on.

    A run manifest is accepted too; its ``config`` section is read, along
    with the realization ``index`` of a single-shot run.

    :param path: Path to the file.
    :type path: ``str``

    :rtype: :py:class:`ConfigFile`

    :raises: :py:class:`ConfigError`
    """
    try:
        with open(path) as f:
            text = f.read()
    except (IOError, OSError) as err:
        six.raise_from(ConfigError("can't read config: {}".format(err),
                                   path), err)
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(err, "problem", None) or str(err)
        six.raise_from(ConfigError("invalid YAML: {}".format(problem),
                                   path, line), err)
    if root is None:
        return ConfigFile(path, {}, {})
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("expected key: value pairs", path,
                          root.start_mark.line + 1)
    settings = _manifest_settings(root)
    index = None
    if settings is not None:
        # A run manifest: its resolved config reproduces the run.
        index = _manifest_index(root, data, path)
        root, data = settings, data["config"]
    lines = {}
    for key_node, value_node in root.value:
        line = key_node.start_mark.line + 1
        if not isinstance(key_node, yaml.ScalarNode):
            raise ConfigError("keys must be plain names", path, line)
        key = key_node.value
        if key in lines:
            raise ConfigError("duplicate key {}".format(repr(key)),
                              path, line)
        if not isinstance(value_node, yaml.ScalarNode):
            raise ConfigError("{} must have a single value, not a nested "
                              "one".format(key), path, line)
        if key not in _BY_KEY:
            raise ConfigError("unknown key {}".format(repr(key)), path, line)
        lines[key] = line
    values = {str(key): value for key, value in data.items()}
    for key, value in values.items():
        try:
            coerce_value(key, value)
        except InvalidArgument as err:
            six.raise_from(ConfigError(str(err), path, lines[key]), err)
    logging.debug("Read {} setting(s) from {}".format(len(values), path))
    return ConfigFile(path, values, lines, index)


def resolve_config(config_file=None, overrides=None):
    """Combine the preset, a config file and flag overrides.

    :param config_file: Values from a config file, if one was given.
    :type config_file: :py:class:`ConfigFile` or ``NoneType``
    :param overrides: Values from flags, keyed by flag name. None values
                      mean "not given".
    :type overrides: ``dict`` or ``NoneType``

    :rtype: :py:class:`ExperimentConfig`

    :raises: :py:class:`ConfigError`
    """
    preset = ExperimentConfig.reference()
    values = preset.as_dict()
    path, lines = None, {}
    if config_file is not None:
        values.update(config_file.values)
        path, lines = config_file.path, config_file.lines
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key, value in flags.items():
        try:
            coerce_value(key, value)
        except InvalidArgument as err:
            six.raise_from(ConfigError("--{}: {}".format(key, err)), err)
    values.update(flags)
    # Only file values are blamed on the file.
    file_lines = {k: v for k, v in lines.items() if k not in flags}
    resolved = ExperimentConfig.from_dict(values, path, file_lines)
    if resolved != preset:
        logging.debug("Settings differing from the preset:\n{}".format(
            datadiff.diff(dict(preset.as_dict()), dict(resolved.as_dict()),
                          fromfile="preset", tofile="resolved")))
    return resolved
