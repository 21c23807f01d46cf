import functools
import logging
import os
import sys

import click
from dotenv import load_dotenv

from config import load_config, serialize_config
from experiment import (
    condition_seed,
    execute_condition,
    run_experiment,
    write_trial,
)
from models import Axis, Condition
from teleop_scripts.errors import ConfigError

load_dotenv()

DEFAULT_OUTPUT_DIR = 'results'
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TRIALS_FAILED = 2

logger = logging.getLogger('teleop')


def configure_logging(level_name):
    level = getattr(logging, (level_name or 'INFO').upper(), logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def resolve_output_dir(out, config):
    return out or config.output_dir or os.getenv('TELEOP_OUTPUT_DIR') or DEFAULT_OUTPUT_DIR


def _render_float(value):
    return repr(float(value))


def build_overrides(settings, delays=(), stiffness=(), axes=(), trials=None, seed=None):
    """Collect --set KEY=VALUE pairs and per-factor flags into one override mapping."""
    overrides = {}
    for item in settings:
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError(key.strip().upper() or item, "expected KEY=VALUE")
        overrides[key.strip().upper()] = value.strip()
    if delays:
        overrides['DELAYS_S'] = ','.join(_render_float(d) for d in delays)
    if stiffness:
        overrides['STIFFNESS_LEVELS'] = ','.join(_render_float(k) for k in stiffness)
    if axes:
        overrides['AXES'] = ','.join(axes)
    if trials is not None:
        overrides['TRIALS_PER_CELL'] = str(trials)
    if seed is not None:
        overrides['BASE_SEED'] = str(seed)
    return overrides


def config_options(func):
    """Options shared by every subcommand."""
    func = click.option('--set', 'settings', multiple=True, metavar='KEY=VALUE',
                        help='Override one config key (repeatable).')(func)
    func = click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                        help='dotenv-format experiment config.')(func)
    return func


def exit_on_config_error(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            click.echo(f"❌ Invalid configuration: {e}", err=True)
            sys.exit(EXIT_ERROR)
        except OSError as e:
            click.echo(f"❌ Cannot write output: {e}", err=True)
            sys.exit(EXIT_ERROR)
    return wrapper


@click.group()
@click.option('--log-level', default=None, help='Logging level (default: $TELEOP_LOG_LEVEL or INFO).')
def cli(log_level):
    """Delay-compensated stiffness estimation for simulated teleoperation dyads."""
    configure_logging(log_level or os.getenv('TELEOP_LOG_LEVEL'))


@cli.command('run-experiment')
@config_options
@click.option('--out', type=click.Path(file_okay=False), help='Output directory.')
@click.option('--seed', type=click.IntRange(min=0), help='Base seed for the grid.')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True,
              help='Worker processes.')
@click.option('--delay', 'delays', type=float, multiple=True, help='Delay level in s (repeatable).')
@click.option('--k0', 'stiffness', type=float, multiple=True, help='Stiffness level in N/m (repeatable).')
@click.option('--axis', 'axes', type=click.Choice([a.value for a in Axis]), multiple=True,
              help='Axis (repeatable).')
@click.option('--trials', type=click.IntRange(min=1), help='Trials per cell.')
@exit_on_config_error
def run_experiment_command(config_path, settings, out, seed, jobs, delays, stiffness, axes, trials):
    """Run the factorial experiment and write trials, summary and manifest."""
    overrides = build_overrides(settings, delays, stiffness, axes, trials, seed)
    config = load_config(config_path, overrides)
    output_dir = resolve_output_dir(out, config)

    result = run_experiment(config, output_dir=output_dir, jobs=jobs)

    click.echo(f"📊 {len(result.records)} trials written to {output_dir}")
    for name, value in result.verdicts.items():
        marker = {True: '✅', False: '❌', None: '➖'}[value]
        click.echo(f"   {marker} {name}")
    if result.failed:
        click.echo(f"⚠️ {len(result.failed)} trial(s) failed, see {result.paths['manifest.json']}",
                   err=True)
        sys.exit(EXIT_TRIALS_FAILED)
    sys.exit(EXIT_OK)


@cli.command('run-trial')
@config_options
@click.option('--out', type=click.Path(file_okay=False), help='Output directory.')
@click.option('--seed', type=click.IntRange(min=0), help='Trial seed (default: derived from BASE_SEED).')
@click.option('--delay', type=float, help='Delay in s (default: first configured level).')
@click.option('--k0', type=float, help='Stiffness in N/m (default: first configured level).')
@click.option('--axis', type=click.Choice([a.value for a in Axis]),
              help='Axis (default: first configured axis).')
@exit_on_config_error
def run_trial_command(config_path, settings, out, seed, delay, k0, axis):
    """Simulate one trial and write its signals and estimates."""
    overrides = build_overrides(
        settings,
        delays=() if delay is None else (delay,),
        stiffness=() if k0 is None else (k0,),
        axes=() if axis is None else (axis,),
    )
    config = load_config(config_path, overrides)
    output_dir = resolve_output_dir(out, config)

    chosen_axis = config.axes[0]
    if seed is None:
        seed = condition_seed(config.base_seed, 0, 0, chosen_axis, 0)
    condition = Condition(
        delta=config.delays_s[0],
        k0_cmd=config.stiffness_levels[0],
        axis=chosen_axis,
        trial_index=0,
        seed=seed,
    )
    logger.info("🔹 Starting trial delta=%r k0=%r axis=%s seed=%d",
                condition.delta, condition.k0_cmd, chosen_axis.value, seed)
    record, log = execute_condition(condition, config)
    paths = write_trial(log, record, output_dir)

    if not record.is_valid:
        click.echo(f"❌ Trial failed: {record.reason}", err=True)
        sys.exit(EXIT_TRIALS_FAILED)
    click.echo(f"✅ k_ref={record.k_ref:.4f}  naive={record.k_naive:.4f}  "
               f"ols={record.k_ols:.4f}  nwls={record.k_nwls:.4f} N/m")
    click.echo(f"📁 {', '.join(sorted(paths.values()))}")
    sys.exit(EXIT_OK)


@cli.command('print-config')
@config_options
@exit_on_config_error
def print_config_command(config_path, settings):
    """Print the fully resolved config in dotenv format."""
    config = load_config(config_path, build_overrides(settings))
    click.echo(serialize_config(config), nl=False)


if __name__ == '__main__':
    cli()
