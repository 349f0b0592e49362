import os

import click
import pandas as pd
from flask import Blueprint, current_app

from mamid.commands.options import (data_option, fraction_option, grid_option, level_option, load_features,
                                    out_option, parallelism_option, record, resolve_config, seed_option,
                                    stage_dir, study_data, subset_option)
from mamid.data.loader import load_csv
from mamid.data.preprocessing import preprocess
from mamid.engine.optimizers import make_optimizer, optimizer_settings
from mamid.tuning.runner import Ledger, prepare_level_data, run_grid, tally
from mamid.tuning.selection import (OptionSummary, accuracy_bands, option_summary, scatter_frame,
                                    select_optimal, top_k_frame)
from mamid.utils.artifacts import write_csv, write_json
from mamid.utils.error_handler import DataIOError, handle_errors

tune_bp = Blueprint('tune', __name__, cli_group=None)

TOP_K = 10


def _run_level(pipeline, features, level):
    directory = stage_dir(pipeline, 'tune', level.value)
    data = prepare_level_data(features, level, pipeline.test_fraction, pipeline.seed)
    ledger = Ledger(os.path.join(directory, 'ledger.jsonl'))
    results = run_grid(pipeline.grid, data, pipeline.seed, parallelism=pipeline.parallelism, ledger=ledger)

    table = top_k_frame(results, TOP_K)
    summary = option_summary(results)
    artifacts = [
        ledger.path,
        write_csv(os.path.join(directory, 'top10.csv'), table),
        write_csv(os.path.join(directory, 'options.csv'), summary.to_frame()),
        write_csv(os.path.join(directory, 'scatter.csv'), scatter_frame(results)),
        write_csv(os.path.join(directory, 'bands.csv'), accuracy_bands(results)),
    ]
    counts = tally(results)
    click.echo(f"{level.value}: {counts['success']}/{len(results)} experiments succeeded")
    return table, summary, artifacts


def _read_level(pipeline, level):
    """Tables of an earlier tune run, for re-selection without training."""
    directory = os.path.join(pipeline.output_dir, 'tune', level.value)
    top_path = os.path.join(directory, 'top10.csv')
    if not os.path.isfile(top_path):
        raise DataIOError(f'No top-10 table for {level.value} at {top_path}; run tune first', path=top_path)
    table = pd.read_csv(top_path)
    options_path = os.path.join(directory, 'options.csv')
    summary = OptionSummary.from_frame(pd.read_csv(options_path)) if os.path.isfile(options_path) else None
    return table, summary, [top_path] + ([options_path] if summary is not None else [])


@tune_bp.cli.command('tune')
@data_option
@level_option
@subset_option
@fraction_option
@seed_option
@parallelism_option
@grid_option
@out_option
@click.option('--select-only', is_flag=True, help='Select from the existing top-10 tables without training.')
@handle_errors
def tune_command(data, level, subset_size, test_fraction, seed, parallelism, grid_path, out, select_only):
    """Run the hyperparameter grid on the subset and select one configuration."""
    pipeline = resolve_config(out=out, data=data, level=level, seed=seed, parallelism=parallelism,
                              subset_size=subset_size, test_fraction=test_fraction, grid_path=grid_path)
    tables, summaries, artifacts = {}, {}, []

    if select_only:
        for lvl in pipeline.levels:
            tables[lvl.value], summaries[lvl.value], paths = _read_level(pipeline, lvl)
            artifacts += paths
    else:
        features = preprocess(load_csv(data)) if data else load_features(pipeline)
        subset = study_data(features, pipeline)
        current_app.logger.info(f'Tuning over {pipeline.grid.cardinality} configurations on '
                                f'{len(subset)} records with {pipeline.parallelism} workers')
        for lvl in pipeline.levels:
            tables[lvl.value], summaries[lvl.value], paths = _run_level(pipeline, subset, lvl)
            artifacts += paths

    selection = select_optimal(tables, summaries)
    selected_path = write_json(os.path.join(stage_dir(pipeline, 'tune'), 'selected.json'), selection.to_dict())
    optimizers = {name: optimizer_settings(make_optimizer(name)) for name in pipeline.grid.optimizer}
    record(pipeline, 'tune', artifacts + [selected_path], select_only=select_only, optimizers=optimizers)

    current_app.logger.info(f'Selected configuration {selection.config.label()}')
    click.echo(f'Selected {selection.config.label()} -> {selected_path}')
