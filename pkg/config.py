"""
Experiment configuration in dotenv format.

A config file is a flat list of KEY=VALUE lines. Every key is optional
and missing keys take the defaults of `ExperimentConfig`. Lists are
comma-separated. Per-axis robot constants are prefixed with the axis
name, e.g. ``Y_MASS_SCALE=1.5``.
"""

import io
import math
from dataclasses import replace

from dotenv import dotenv_values

from models import Axis, AxisPlant, ExperimentConfig, default_plants
from teleop_scripts.errors import ConfigError, InvalidParameterError

GLOBAL_KEYS = (
    'K', 'KC', 'AMPLITUDE', 'OMEGA', 'DT',
    'DURATION_PERIODS', 'WARMUP_PERIODS', 'EPSILON',
    'DELAYS_S', 'STIFFNESS_LEVELS', 'AXES', 'TRIALS_PER_CELL', 'BASE_SEED',
    'OUTPUT_DIR',
)

# config key suffix -> AxisPlant field
AXIS_FIELDS = {
    'MASS': 'mass',
    'DAMPING': 'damping',
    'MASS_SCALE': 'mass_scale',
    'FRICTION': 'friction',
    'STATIC_FRICTION': 'static_friction',
    'STRIBECK_VELOCITY': 'stribeck_velocity',
    'FRICTION_SPREAD': 'friction_spread',
    'FORCE_GAIN_SPREAD': 'force_gain_spread',
    'SIGMA_X': 'sigma_x',
    'SIGMA_F': 'sigma_f',
}

AXIS_KEYS = tuple(f'{axis.value}_{suffix}' for axis in Axis for suffix in AXIS_FIELDS)
KNOWN_KEYS = GLOBAL_KEYS + AXIS_KEYS

# PlantParams field -> config key (per-axis fields take the axis prefix)
PLANT_FIELD_KEYS = {
    'k': 'K', 'kc': 'KC', 'amplitude': 'AMPLITUDE', 'omega': 'OMEGA', 'dt': 'DT',
    'delta': 'DELAYS_S', 'k0': 'STIFFNESS_LEVELS',
    'm1': 'MASS', 'm2': 'MASS', 'b1': 'DAMPING', 'b2': 'DAMPING',
    'fc': 'FRICTION', 'fs': 'STATIC_FRICTION', 'vs': 'STRIBECK_VELOCITY',
    'sigma_x': 'SIGMA_X', 'sigma_f': 'SIGMA_F', 'f2_gain': 'FORCE_GAIN_SPREAD',
}


def _number(key, raw):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {raw!r}")
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {raw!r}")
    return value


def _integer(key, raw):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an integer, got {raw!r}")


def _items(key, raw):
    items = [item.strip() for item in raw.split(',') if item.strip()]
    if not items:
        raise ConfigError(key, "factor list is empty")
    if len(set(items)) != len(items):
        raise ConfigError(key, f"duplicate levels in {raw!r}")
    return items


def _number_list(key, raw):
    values = tuple(_number(key, item) for item in _items(key, raw))
    if len(set(values)) != len(values):
        raise ConfigError(key, f"duplicate levels in {raw!r}")
    return values


def _axes(raw):
    axes = []
    for item in _items('AXES', raw):
        try:
            axes.append(Axis(item.upper()))
        except ValueError:
            raise ConfigError('AXES', f"unknown axis {item!r}")
    if len(set(axes)) != len(axes):
        raise ConfigError('AXES', f"duplicate levels in {raw!r}")
    return tuple(axes)


def _require(key, value, ok, message):
    if not ok:
        raise ConfigError(key, f"{message}, got {value!r}")
    return value


def read_mapping(text):
    """Parse dotenv text into a {KEY: value} mapping, rejecting unknown or empty keys."""
    values = dotenv_values(stream=io.StringIO(text or ''), interpolate=False)
    return merge_overrides({}, values)


def merge_overrides(mapping, overrides):
    merged = dict(mapping)
    for key, raw in (overrides or {}).items():
        key = key.strip().upper()
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown configuration key")
        if raw is None or str(raw).strip() == '':
            raise ConfigError(key, "missing value")
        merged[key] = str(raw).strip()
    return merged


def _parse_plants(mapping):
    plants = {}
    for axis, plant in default_plants().items():
        changes = {}
        for suffix, field_name in AXIS_FIELDS.items():
            key = f'{axis.value}_{suffix}'
            if key in mapping:
                changes[field_name] = _number(key, mapping[key])
        plant = replace(plant, **changes)
        prefix = axis.value
        _require(f'{prefix}_MASS', plant.mass, plant.mass > 0, "must be > 0")
        _require(f'{prefix}_MASS_SCALE', plant.mass_scale, plant.mass_scale > 0, "must be > 0")
        _require(f'{prefix}_DAMPING', plant.damping, plant.damping >= 0, "must be >= 0")
        _require(f'{prefix}_FRICTION', plant.friction, plant.friction >= 0, "must be >= 0")
        _require(f'{prefix}_STATIC_FRICTION', plant.static_friction,
                 plant.static_friction >= 0, "must be >= 0")
        _require(f'{prefix}_STRIBECK_VELOCITY', plant.stribeck_velocity,
                 plant.stribeck_velocity >= 0, "must be >= 0")
        _require(f'{prefix}_FRICTION_SPREAD', plant.friction_spread,
                 0 <= plant.friction_spread <= 1, "must be in [0, 1]")
        _require(f'{prefix}_FORCE_GAIN_SPREAD', plant.force_gain_spread,
                 0 <= plant.force_gain_spread < 1, "must be in [0, 1)")
        _require(f'{prefix}_SIGMA_X', plant.sigma_x, plant.sigma_x >= 0, "must be >= 0")
        _require(f'{prefix}_SIGMA_F', plant.sigma_f, plant.sigma_f >= 0, "must be >= 0")
        plants[axis] = plant
    return plants


def config_from_mapping(mapping):
    """Build and validate an ExperimentConfig from a {KEY: text} mapping."""
    mapping = merge_overrides({}, mapping)
    defaults = ExperimentConfig()
    changes = {}

    def number(key, attr):
        if key in mapping:
            changes[attr] = _number(key, mapping[key])
        return changes.get(attr, getattr(defaults, attr))

    def integer(key, attr):
        if key in mapping:
            changes[attr] = _integer(key, mapping[key])
        return changes.get(attr, getattr(defaults, attr))

    k = number('K', 'k')
    _require('K', k, k > 0, "must be > 0")
    kc = number('KC', 'kc')
    _require('KC', kc, kc >= 0, "must be >= 0")
    number('AMPLITUDE', 'amplitude')
    omega = number('OMEGA', 'omega')
    _require('OMEGA', omega, omega > 0, "must be > 0")
    dt = number('DT', 'dt')
    _require('DT', dt, dt > 0, "must be > 0")
    _require('DT', dt, omega * dt < 0.1, "OMEGA*DT must be < 0.1")
    duration_periods = integer('DURATION_PERIODS', 'duration_periods')
    _require('DURATION_PERIODS', duration_periods, duration_periods >= 1, "must be >= 1")
    warmup = number('WARMUP_PERIODS', 'warmup_periods')
    _require('WARMUP_PERIODS', warmup, 0 <= warmup < duration_periods,
             "must be >= 0 and below DURATION_PERIODS")
    epsilon = number('EPSILON', 'epsilon')
    _require('EPSILON', epsilon, epsilon > 0, "must be > 0")

    if 'DELAYS_S' in mapping:
        changes['delays_s'] = _number_list('DELAYS_S', mapping['DELAYS_S'])
    if 'STIFFNESS_LEVELS' in mapping:
        changes['stiffness_levels'] = _number_list('STIFFNESS_LEVELS', mapping['STIFFNESS_LEVELS'])
    if 'AXES' in mapping:
        changes['axes'] = _axes(mapping['AXES'])
    trials = integer('TRIALS_PER_CELL', 'trials_per_cell')
    _require('TRIALS_PER_CELL', trials, trials >= 1, "must be >= 1")
    base_seed = integer('BASE_SEED', 'base_seed')
    _require('BASE_SEED', base_seed, base_seed >= 0, "must be >= 0")
    if 'OUTPUT_DIR' in mapping:
        changes['output_dir'] = mapping['OUTPUT_DIR']

    changes['plants'] = _parse_plants(mapping)
    config = replace(defaults, **changes)
    validate_plants(config)
    return config


def validate_plants(config):
    """Build every PlantParams the grid will use, reporting failures by config key."""
    for axis in config.axes:
        for delta in config.delays_s:
            for k0 in config.stiffness_levels:
                try:
                    config.plant_params(axis, delta, k0)
                except InvalidParameterError as e:
                    key = PLANT_FIELD_KEYS.get(e.field, e.field.upper())
                    if key in AXIS_FIELDS:
                        key = f'{axis.value}_{key}'
                    raise ConfigError(key, e.message)


def parse_config(text, overrides=None):
    """Parse a dotenv config document, apply overrides, and validate the result."""
    return config_from_mapping(merge_overrides(read_mapping(text), overrides))


def load_config(path=None, overrides=None):
    if path is None:
        return parse_config('', overrides)
    with open(path, encoding='utf-8') as fin:
        return parse_config(fin.read(), overrides)


def _render(value):
    if isinstance(value, tuple):
        return ','.join(_render(item) for item in value)
    if isinstance(value, Axis):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_mapping(config):
    """The fully resolved config as an ordered {KEY: text} mapping."""
    mapping = {
        'K': config.k,
        'KC': config.kc,
        'AMPLITUDE': config.amplitude,
        'OMEGA': config.omega,
        'DT': config.dt,
        'DURATION_PERIODS': config.duration_periods,
        'WARMUP_PERIODS': config.warmup_periods,
        'EPSILON': config.epsilon,
        'DELAYS_S': config.delays_s,
        'STIFFNESS_LEVELS': config.stiffness_levels,
        'AXES': config.axes,
        'TRIALS_PER_CELL': config.trials_per_cell,
        'BASE_SEED': config.base_seed,
    }
    for axis in Axis:
        plant = config.plants.get(axis, AxisPlant())
        for suffix, field_name in AXIS_FIELDS.items():
            mapping[f'{axis.value}_{suffix}'] = getattr(plant, field_name)
    if config.output_dir is not None:
        mapping['OUTPUT_DIR'] = config.output_dir
    return {key: _render(value) for key, value in mapping.items()}


def serialize_config(config):
    """Render a config as dotenv text that parses back to an equal config."""
    return ''.join(f'{key}={value}\n' for key, value in config_mapping(config).items())
