"""Experiment configuration: flat ``key = value`` INI files plus inline overrides.

Layout::

    [experiment]
    potential = rastrigin
    x0 = 9.84, 3.33
    n_replicas = 100

    [method IAKSA]
    method = IKSA
    modifier = arctan:0.5

Overrides are ``key=value`` for experiment keys, ``LABEL.key=value`` for one
method section and a bare method key (``eta0=0.1``) for every method.
Anything unrecognised raises :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError
from .harness import ExperimentConfig
from .integrators import ALIASES, METHODS, MethodConfig
from .landscape import FModifier
from .schedules import AdaptiveC, CoolingSchedule, StepSchedule

# Per-benchmark defaults: initial point, eta(0), energy E in E/ln(theta+2), and the
# failure threshold delta scaled to each potential's range.
POTENTIAL_DEFAULTS = {
    "ackley": {"x0": "18.5, 17.4", "eta0": "0.05", "energy": "2", "delta": "0.5"},
    "ackley3": {"x0": "18.4, 12.8", "eta0": "0.05", "energy": "2", "delta": "2.0"},
    "rastrigin": {"x0": "9.84, 3.33", "eta0": "0.5", "energy": "0.5", "delta": "0.5"},
    "u0": {"x0": "-3.0", "eta0": "0.05", "energy": "2", "delta": "0.3"},
    "quadratic": {"x0": "3.0", "eta0": "0.05", "energy": "1", "delta": "0.5"},
    "double_well": {"x0": "-1.0", "eta0": "0.05", "energy": "1", "delta": "0.5"},
}

EXPERIMENT_KEYS = {
    "potential": ("(required)", "benchmark name: ackley, ackley3, rastrigin, u0, quadratic, double_well"),
    "x0": ("per potential", "initial position, comma separated"),
    "y0": ("zeros", "initial velocity for kinetic methods"),
    "n_replicas": ("100", "independent replicas (replica r uses noise stream (base_seed, r))"),
    "n_steps": ("10000", "Euler-Maruyama steps per replica"),
    "n_checkpoints": ("60", "log-spaced theta targets snapped to step counts"),
    "checkpoints": ("(log-spaced)", "explicit step counts, comma separated"),
    "delta": ("per potential", "failure threshold: U > U_min + delta"),
    "base_seed": ("0", "seed of the shared noise streams"),
    "time_axis": ("theta", "theta (cumulative stepsize) or step"),
    "workers": ("1", "worker processes for replica blocks"),
    "methods": ("SA, IASA, KSA, IAKSA", "method section labels to run, in order"),
}

METHOD_KEYS = {
    "method": ("from label", "SA, ISA (IASA), KSA or IKSA (IAKSA)"),
    "modifier": ("zero / arctan:0.5", "zero | arctan:<scale> | smoothstep:<M3>:<M4>"),
    "adaptive_c": ("appendix", "fixed:<c> | appendix | mollified:<n>:<delta1>"),
    "cooling": ("fixed:<E>:2", "fixed:<E>[:<offset>] | adaptive:<delta2>:<n>[:<offset>] | constant:<eps>"),
    "eta0": ("per potential", "initial stepsize"),
    "decay_every": ("1000", "stepsize decays every this many steps"),
    "decay_factor": ("0.999", "multiplicative stepsize decay"),
    "kinetic_form": ("appendix", "appendix (unit friction, sqrt(2 eps) noise) | theory (friction 1/eps, sqrt(2) noise)"),
}

STANDARD_LABELS = ("SA", "IASA", "KSA", "IAKSA")


def keys_help() -> str:
    lines = ["experiment keys ([experiment] section or key=value):"]
    for k, (default, text) in EXPERIMENT_KEYS.items():
        lines.append(f"  {k:<14} default {default:<22} {text}")
    lines.append("method keys ([method LABEL] section, LABEL.key=value, or key=value for all):")
    for k, (default, text) in METHOD_KEYS.items():
        lines.append(f"  {k:<14} default {default:<22} {text}")
    return "\n".join(lines)


def _floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from None


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def read_config_file(path) -> tuple[dict[str, str], dict[str, dict[str, str]]]:
    """Raw ``(experiment, {label: method_keys})`` from an INI file."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str.lower
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    experiment: dict[str, str] = {}
    methods: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        name = section.strip()
        if name.lower() == "experiment":
            experiment.update(items)
        elif name.lower().startswith("method"):
            label = name[len("method"):].strip(" :")
            if not label:
                raise ConfigError(f"{path}: method section needs a label, e.g. [method IAKSA]")
            methods[label] = items
        else:
            raise ConfigError(f"{path}: unknown section [{name}]")
    return experiment, methods


def apply_overrides(
    experiment: dict[str, str], methods: dict[str, dict[str, str]], overrides
) -> tuple[dict[str, str], dict[str, dict[str, str]], dict[str, str]]:
    """Split ``key=value`` strings into the raw dicts; returns method keys for all methods too."""
    for_all: dict[str, str] = {}
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        if "." in key:
            label, sub = key.split(".", 1)
            methods.setdefault(label, {})[sub.lower()] = value
        elif key.lower() in EXPERIMENT_KEYS:
            experiment[key.lower()] = value
        elif key.lower() in METHOD_KEYS:
            for_all[key.lower()] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return experiment, methods, for_all


def _method_config(label: str, raw: dict[str, str], defaults: dict[str, str]) -> MethodConfig:
    unknown = set(raw) - set(METHOD_KEYS)
    if unknown:
        raise ConfigError(f"[method {label}]: unknown key(s) {', '.join(sorted(unknown))}")
    name = raw.get("method", label).upper()
    if ALIASES.get(name, name) not in METHODS:
        raise ConfigError(f"[method {label}]: method must be one of SA, ISA, KSA, IKSA (or IASA, IAKSA); got {name!r}")
    improved = ALIASES.get(name, name) in ("ISA", "IKSA")
    modifier = FModifier.parse(raw.get("modifier", "arctan:0.5" if improved else "zero"))
    steps = StepSchedule(
        _float(raw.get("eta0", defaults["eta0"]), "eta0"),
        _int(raw.get("decay_every", "1000"), "decay_every"),
        _float(raw.get("decay_factor", "0.999"), "decay_factor"),
    )
    return MethodConfig(
        name,
        modifier=modifier,
        adaptive_c=AdaptiveC.parse(raw.get("adaptive_c", "appendix")),
        cooling=CoolingSchedule.parse(raw.get("cooling", f"fixed:{defaults['energy']}:2")),
        steps=steps,
        kinetic_form=raw.get("kinetic_form", "appendix").lower(),
    )


def build_experiment(
    experiment: dict[str, str],
    methods: dict[str, dict[str, str]],
    for_all: dict[str, str] | None = None,
    default_labels=STANDARD_LABELS,
) -> ExperimentConfig:
    unknown = set(experiment) - set(EXPERIMENT_KEYS)
    if unknown:
        raise ConfigError(f"[experiment]: unknown key(s) {', '.join(sorted(unknown))}")
    if "potential" not in experiment:
        raise ConfigError("missing required key 'potential'")
    pot = experiment["potential"].strip().lower()
    if pot not in POTENTIAL_DEFAULTS:
        raise ConfigError(f"potential: unknown name {pot!r}; known: {', '.join(sorted(POTENTIAL_DEFAULTS))}")
    defaults = POTENTIAL_DEFAULTS[pot]

    if "methods" in experiment:
        labels = [s.strip() for s in experiment["methods"].split(",") if s.strip()]
    else:
        labels = list(default_labels)
    for label in methods:
        if label not in labels:
            raise ConfigError(f"method section {label!r} is not listed in 'methods'")
    built = {}
    for label in labels:
        raw = dict(for_all or {})
        raw.update(methods.get(label, {}))
        if "method" not in raw and label.upper() not in METHODS and label.upper() not in ALIASES:
            raise ConfigError(f"[method {label}]: key 'method' is required for a non-standard label")
        built[label] = _method_config(label, raw, defaults)

    y0 = _floats(experiment["y0"], "y0") if "y0" in experiment else None
    checkpoints = None
    if "checkpoints" in experiment:
        checkpoints = tuple(int(v) for v in _floats(experiment["checkpoints"], "checkpoints"))
    return ExperimentConfig(
        potential=pot,
        methods=built,
        x0=_floats(experiment.get("x0", defaults["x0"]), "x0"),
        y0=y0,
        n_replicas=_int(experiment.get("n_replicas", "100"), "n_replicas"),
        n_steps=_int(experiment.get("n_steps", "10000"), "n_steps"),
        checkpoints=checkpoints,
        n_checkpoints=_int(experiment.get("n_checkpoints", "60"), "n_checkpoints"),
        delta=_float(experiment.get("delta", defaults["delta"]), "delta"),
        base_seed=_int(experiment.get("base_seed", "0"), "base_seed"),
        time_axis=experiment.get("time_axis", "theta").strip().lower(),
        workers=_int(experiment.get("workers", "1"), "workers"),
    )


def load_experiment(path=None, overrides=()) -> ExperimentConfig:
    experiment: dict[str, str] = {}
    methods: dict[str, dict[str, str]] = {}
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        experiment, methods = read_config_file(path)
    default_labels = list(methods) or list(STANDARD_LABELS)
    experiment, methods, for_all = apply_overrides(experiment, methods, overrides)
    return build_experiment(experiment, methods, for_all, default_labels)
