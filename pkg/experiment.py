"""
Factorial stiffness-estimation experiment.

Every (delay, stiffness, axis, trial) condition is simulated, all four
estimators are run on its log, and the estimator errors are scored
against the per-trial reference fit. Results are summarised per grid
cell and compared with the Wilcoxon rank-sum test.
"""

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from models import (
    COMPARISON_COLUMNS,
    SUMMARY_COLUMNS,
    TRIAL_COLUMNS,
    ComparisonKind,
    ComparisonRow,
    Condition,
    SummaryRow,
    TrialRecord,
    TrialStatus,
)
from config import config_mapping
from teleop_scripts.errors import (
    ConfigError,
    DegenerateRegressorError,
    IntegrationDivergedError,
    UndefinedReferenceError,
)
from teleop_scripts.estimators import ESTIMATORS, SCORED_METHODS, Method
from teleop_scripts.simulation import simulate_trial, trial_streams
from teleop_scripts.statistics import ape, median_iqr, wilcoxon_rank_sum
from teleop_scripts.utils import (
    create_output_directory,
    sha256_file,
    stable_hash,
    write_columns_csv,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SIGNIFICANCE = 0.05
MIN_GROUP_SIZE = 2

TRIALS_FILE = 'trials.csv'
SUMMARY_FILE = 'summary.csv'
COMPARISONS_FILE = 'comparisons.csv'
MANIFEST_FILE = 'manifest.json'
SIGNALS_FILE = 'trial_signals.csv'
TRIAL_RECORD_FILE = 'trial_record.csv'


def condition_seed(base_seed, delta_index, k0_index, axis, trial_index):
    return base_seed + stable_hash(f"{delta_index}:{k0_index}:{axis.value}:{trial_index}")


def expand_grid(config):
    """Enumerate the full factorial grid in (delay, stiffness, axis, trial) order."""
    for key, levels in (('DELAYS_S', config.delays_s),
                        ('STIFFNESS_LEVELS', config.stiffness_levels),
                        ('AXES', config.axes)):
        if not levels:
            raise ConfigError(key, "factor list is empty")
    if config.trials_per_cell < 1:
        raise ConfigError('TRIALS_PER_CELL', "factor list is empty")

    conditions = []
    seeds = set()
    for (i, delta), (j, k0), (a, axis), trial in itertools.product(
            enumerate(config.delays_s),
            enumerate(config.stiffness_levels),
            enumerate(config.axes),
            range(config.trials_per_cell)):
        seed = condition_seed(config.base_seed, i, j, axis, trial)
        if seed in seeds:
            raise ConfigError('BASE_SEED', f"seed collision at condition {(i, j, axis.value, trial)}")
        seeds.add(seed)
        conditions.append(Condition(
            delta=delta,
            k0_cmd=k0,
            axis=axis,
            trial_index=trial,
            seed=seed,
            delta_index=i,
            k0_index=j,
            axis_index=a,
        ))
    return conditions


def trial_params(condition, config):
    """
    Plant parameters of one condition.

    The friction levels and the novice force-sensor gain are drawn per
    trial from the plant-variability stream of the condition seed, in
    that order.
    """
    plant = config.plants[condition.axis]
    _, plant_rng = trial_streams(condition.seed)
    friction_draw, gain_draw = plant_rng.uniform(-1.0, 1.0, size=2)
    return config.plant_params(
        condition.axis, condition.delta, condition.k0_cmd,
        friction_scale=1.0 + plant.friction_spread * float(friction_draw),
        f2_gain=1.0 + plant.force_gain_spread * float(gain_draw),
    )


def score_log(condition, log, config):
    """Run every estimator on a log and score them against the reference fit."""
    settings = config.estimator_settings
    estimates = {
        method: estimator.estimate(log, settings).k_hat
        for method, estimator in ESTIMATORS.items()
    }
    k_ref = estimates[Method.REFERENCE]
    if not k_ref > 0:
        raise UndefinedReferenceError(f"reference stiffness {k_ref!r} is not positive")
    apes = {method: ape(estimates[method], k_ref) for method in SCORED_METHODS}
    return TrialRecord(
        condition=condition,
        k_ref=k_ref,
        k_naive=estimates[Method.NAIVE],
        k_ols=estimates[Method.OLS],
        k_nwls=estimates[Method.NWLS],
        ape_naive=apes[Method.NAIVE],
        ape_ols=apes[Method.OLS],
        ape_nwls=apes[Method.NWLS],
    )


def _failed(condition, reason):
    return TrialRecord(condition=condition, status=TrialStatus.FAILED, reason=reason)


def execute_condition(condition, config):
    """
    Simulate and score one condition.

    Returns (record, log). A trial that diverges or cannot be estimated
    comes back as a failed record with a reason code and possibly no log.
    """
    log = None
    try:
        params = trial_params(condition, config)
        log = simulate_trial(params, config.duration, condition.seed)
        record = score_log(condition, log, config)
    except IntegrationDivergedError as e:
        record = _failed(condition, f"diverged:{e.step_index}")
    except DegenerateRegressorError as e:
        record = _failed(condition, f"degenerate:{e.method}")
    except UndefinedReferenceError:
        record = _failed(condition, "undefined-reference")
    except Exception as e:
        logger.exception("❌ Unexpected error in trial %s", condition)
        record = _failed(condition, f"error:{type(e).__name__}")

    if record.is_valid:
        logger.debug("✅ Trial delta=%r k0=%r axis=%s #%d completed",
                     condition.delta, condition.k0_cmd, condition.axis.value, condition.trial_index)
    else:
        logger.warning("❌ Trial delta=%r k0=%r axis=%s #%d failed: %s",
                       condition.delta, condition.k0_cmd, condition.axis.value,
                       condition.trial_index, record.reason)
    return record, log


def run_condition(condition, config):
    record, _ = execute_condition(condition, config)
    return record


def run_conditions(conditions, config, jobs=1):
    """Run conditions, in parallel when jobs > 1, and return records in grid order."""
    conditions = list(conditions)
    if jobs > 1 and len(conditions) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_condition, conditions,
                                    itertools.repeat(config), chunksize=4))
    else:
        records = [run_condition(condition, config) for condition in conditions]
    return sorted(records, key=lambda record: record.condition.sort_key)


def _cells(records):
    """Records grouped by (delta, k0, axis) cell, in grid order."""
    ordered = sorted(records, key=lambda record: record.condition.sort_key)
    cells = {}
    for record in ordered:
        cells.setdefault(record.condition.cell, []).append(record)
    return cells


def summarize(records):
    """Per-cell median and IQR of each estimator's APE, with rank-sum p against Naive."""
    rows = []
    for (delta, k0, axis), cell in _cells(records).items():
        valid = [record for record in cell if record.is_valid]
        if len(valid) < MIN_GROUP_SIZE:
            logger.warning("⚠️ Cell delta=%r k0=%r axis=%s has %d valid trials, statistics suppressed",
                           delta, k0, axis.value, len(valid))
            rows.extend(SummaryRow(delta, k0, axis, method, len(valid)) for method in SCORED_METHODS)
            continue

        naive = [record.ape_naive for record in valid]
        for method in SCORED_METHODS:
            values = [record.ape_for(method) for record in valid]
            median, iqr = median_iqr(values)
            p_value = significant = None
            if method != Method.NAIVE:
                p_value = wilcoxon_rank_sum(values, naive).pvalue
                significant = p_value < SIGNIFICANCE
            rows.append(SummaryRow(delta, k0, axis, method, len(valid),
                                   median, iqr, p_value, significant))
    return rows


def _comparison(kind, delta, k0, axis, method, level_a, level_b, sample_a, sample_b):
    result = wilcoxon_rank_sum(sample_a, sample_b)
    return ComparisonRow(
        kind=kind,
        delta=delta,
        k0_cmd=k0,
        axis=axis,
        method=method,
        level_a=level_a,
        level_b=level_b,
        n_a=len(sample_a),
        n_b=len(sample_b),
        median_a=median_iqr(sample_a)[0],
        median_b=median_iqr(sample_b)[0],
        statistic=result.statistic,
        p_value=result.pvalue,
    )


def compare_delay_steps(records):
    """Rank-sum of each estimator's APEs between consecutive delay levels."""
    valid = [record for record in records if record.is_valid]
    delays = sorted({(r.condition.delta_index, r.condition.delta) for r in valid})
    stiffnesses = sorted({(r.condition.k0_index, r.condition.k0_cmd) for r in valid})
    axes = sorted({(r.condition.axis_index, r.condition.axis) for r in valid}, key=lambda x: x[0])
    rows = []
    for (_, k0), (_, axis), method in itertools.product(stiffnesses, axes, SCORED_METHODS):
        for (_, delta_a), (_, delta_b) in zip(delays, delays[1:]):
            sample_a = [r.ape_for(method) for r in valid if r.condition.cell == (delta_a, k0, axis)]
            sample_b = [r.ape_for(method) for r in valid if r.condition.cell == (delta_b, k0, axis)]
            if sample_a and sample_b:
                rows.append(_comparison(ComparisonKind.DELAY_STEP, None, k0, axis, method,
                                        delta_a, delta_b, sample_a, sample_b))
    return rows


def compare_stiffness(records):
    """Rank-sum of each method's estimates between the lowest and highest stiffness level."""
    valid = [record for record in records if record.is_valid]
    stiffnesses = sorted({(r.condition.k0_index, r.condition.k0_cmd) for r in valid})
    if len(stiffnesses) < 2:
        return []
    low = min(level for _, level in stiffnesses)
    high = max(level for _, level in stiffnesses)
    delays = sorted({(r.condition.delta_index, r.condition.delta) for r in valid})
    axes = sorted({(r.condition.axis_index, r.condition.axis) for r in valid}, key=lambda x: x[0])
    methods = (Method.REFERENCE,) + SCORED_METHODS
    rows = []
    for (_, delta), (_, axis), method in itertools.product(delays, axes, methods):
        sample_a = [r.estimate(method) for r in valid if r.condition.cell == (delta, low, axis)]
        sample_b = [r.estimate(method) for r in valid if r.condition.cell == (delta, high, axis)]
        if sample_a and sample_b:
            rows.append(_comparison(ComparisonKind.STIFFNESS_SPLIT, delta, None, axis, method,
                                    low, high, sample_a, sample_b))
    return rows


def _rows_by_cell(summary):
    table = {}
    for row in summary:
        table[(row.delta, row.k0_cmd, row.axis, row.method)] = row
    return table


def acceptance_verdicts(summary, comparisons):
    """
    Qualitative checks of the delay trends.

    Each verdict is True or False, or None when the grid has no cell it
    applies to. Suppressed cells count as failures.
    """
    table = _rows_by_cell(summary)
    cells = sorted({(row.delta, row.k0_cmd, row.axis) for row in summary},
                   key=lambda cell: (cell[1], cell[2].value, cell[0]))

    def verdict(checks):
        checks = list(checks)
        return all(checks) if checks else None

    def median(cell, method):
        row = table[cell + (method,)]
        return None if row.suppressed else row.median_ape

    def monotone(k0, axis):
        values = [median((delta, k0, axis), Method.NAIVE)
                  for delta, k, a in cells if k == k0 and a == axis and delta > 0]
        if any(value is None for value in values):
            return False
        return all(b > a for a, b in zip(values, values[1:]))

    def nwls_wins(cell):
        row = table[cell + (Method.NWLS,)]
        naive = median(cell, Method.NAIVE)
        return (not row.suppressed and naive is not None
                and row.median_ape < naive and row.p_vs_naive < SIGNIFICANCE)

    def parity(cell):
        row = table[cell + (Method.NWLS,)]
        return not row.suppressed and row.p_vs_naive >= SIGNIFICANCE

    def ols_above_nwls(cell):
        ols, nwls = median(cell, Method.OLS), median(cell, Method.NWLS)
        return ols is not None and nwls is not None and ols > nwls

    pairs = sorted({(k0, axis) for _, k0, axis in cells
                    if sum(1 for d, k, a in cells if k == k0 and a == axis and d > 0) >= 2},
                   key=lambda pair: (pair[0], pair[1].value))
    delayed = [cell for cell in cells if cell[0] > 0]
    baseline = [cell for cell in cells if cell[0] == 0]
    splits = [row for row in comparisons
              if row.kind == ComparisonKind.STIFFNESS_SPLIT and row.method in (Method.OLS, Method.NWLS)]

    return {
        'naive_monotone_with_delay': verdict(monotone(k0, axis) for k0, axis in pairs),
        'nwls_beats_naive_under_delay': verdict(nwls_wins(cell) for cell in delayed),
        'zero_delay_parity': verdict(parity(cell) for cell in baseline),
        'stiffness_discrimination': verdict(row.significant for row in splits),
        'ols_exceeds_nwls_at_zero_delay': verdict(ols_above_nwls(cell) for cell in baseline),
    }


@dataclass
class ExperimentResult:
    records: list
    summary: list
    comparisons: list
    verdicts: dict
    manifest: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)

    @property
    def failed(self):
        return [record for record in self.records if not record.is_valid]


def _failed_entry(record):
    c = record.condition
    return {
        'delta_s': c.delta,
        'k0_cmd': c.k0_cmd,
        'axis': c.axis.value,
        'trial': c.trial_index,
        'seed': c.seed,
        'reason': record.reason,
    }


def write_experiment(result, config, output_dir):
    """Write the CSV tables and the manifest from a single writer."""
    create_output_directory(output_dir)
    paths = {
        TRIALS_FILE: write_csv(os.path.join(output_dir, TRIALS_FILE), TRIAL_COLUMNS,
                               (record.csv_row() for record in result.records)),
        SUMMARY_FILE: write_csv(os.path.join(output_dir, SUMMARY_FILE), SUMMARY_COLUMNS,
                                (row.csv_row() for row in result.summary)),
        COMPARISONS_FILE: write_csv(os.path.join(output_dir, COMPARISONS_FILE), COMPARISON_COLUMNS,
                                    (row.csv_row() for row in result.comparisons)),
    }
    suppressed = sorted(
        {(row.delta, row.k0_cmd, row.axis.value, row.n) for row in result.summary if row.suppressed}
    )
    manifest = {
        'schema_version': SCHEMA_VERSION,
        'config': config_mapping(config),
        'n_trials': len(result.records),
        'failed_trials': [_failed_entry(record) for record in result.failed],
        'suppressed_groups': [
            {'delta_s': delta, 'k0_cmd': k0, 'axis': axis, 'n_valid': n}
            for delta, k0, axis, n in suppressed
        ],
        'files': {name: sha256_file(path) for name, path in paths.items()},
        'verdicts': result.verdicts,
    }
    paths[MANIFEST_FILE] = write_json(os.path.join(output_dir, MANIFEST_FILE), manifest)
    result.manifest = manifest
    result.paths = paths
    return result


def run_experiment(config, output_dir=None, jobs=1):
    """Run the whole grid, analyse it, and write the artifacts when `output_dir` is given."""
    conditions = expand_grid(config)
    logger.info("🔹 Starting experiment: %d conditions on %d worker(s)", len(conditions), jobs)
    records = run_conditions(conditions, config, jobs=jobs)
    summary = summarize(records)
    comparisons = compare_delay_steps(records) + compare_stiffness(records)
    result = ExperimentResult(
        records=records,
        summary=summary,
        comparisons=comparisons,
        verdicts=acceptance_verdicts(summary, comparisons),
    )
    if output_dir is not None:
        write_experiment(result, config, output_dir)
    logger.info("✅ Experiment finished: %d trials, %d failed",
                len(records), len(result.failed))
    return result


def write_trial(log, record, output_dir):
    """Write one trial's signal table and its record row."""
    create_output_directory(output_dir)
    paths = {}
    if log is not None:
        paths[SIGNALS_FILE] = write_columns_csv(os.path.join(output_dir, SIGNALS_FILE),
                                                log.as_columns())
    paths[TRIAL_RECORD_FILE] = write_csv(os.path.join(output_dir, TRIAL_RECORD_FILE),
                                         TRIAL_COLUMNS, [record.csv_row()])
    return paths
