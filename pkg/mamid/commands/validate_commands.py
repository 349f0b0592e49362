import os

import click
import pandas as pd
from flask import Blueprint, current_app

from mamid.commands.options import (fraction_option, level_option, load_features, out_option, record,
                                    resolve_config, seed_option, stage_dir, study_data, subset_option)
from mamid.engine.optimizers import make_optimizer, optimizer_settings
from mamid.tuning.runner import fit_config, prepare_level_data, score
from mamid.tuning.selection import Selection
from mamid.utils.artifacts import ModelBundle, read_json, save_model, write_csv, write_json
from mamid.utils.error_handler import handle_errors

validate_bp = Blueprint('validate', __name__, cli_group=None)


def train_and_report(pipeline, features, level, config, scope):
    """Fit `config` on one level's train split; returns (report, bundle, history frame)."""
    data = prepare_level_data(features, level, pipeline.test_fraction, pipeline.seed)
    result = fit_config(config, data, pipeline.seed)
    report = score(result.network, data)
    bundle = ModelBundle(
        network=result.network,
        level=level,
        class_names=data.class_names,
        feature_names=list(data.train.columns),
        scaling=data.train.scaling_dict(),
        config={'hyperparameters': config.to_dict(), 'scope': scope, 'seed': pipeline.seed,
                'subset_size': pipeline.subset_size, 'test_fraction': pipeline.test_fraction,
                'optimizer': optimizer_settings(make_optimizer(config.optimizer))},
    )
    history = pd.DataFrame([h.to_dict() for h in result.history])
    return report, bundle, history


@validate_bp.cli.command('validate')
@click.option('--scope', type=click.Choice(['subset', 'full']), default='subset', show_default=True,
              help='Validate on the stratified subset or the whole dataset.')
@click.option('--selected', 'selected_path', default=None,
              help='Selected configuration (default: <out>/tune/selected.json).')
@level_option
@subset_option
@fraction_option
@seed_option
@out_option
@handle_errors
def validate_command(scope, selected_path, level, subset_size, test_fraction, seed, out):
    """Train the selected configuration per level and write its classification reports."""
    pipeline = resolve_config(out=out, level=level, seed=seed, subset_size=subset_size,
                              test_fraction=test_fraction)
    selected_path = selected_path or os.path.join(pipeline.output_dir, 'tune', 'selected.json')
    selection = Selection.from_dict(read_json(selected_path, 'selected configuration'))
    data = study_data(load_features(pipeline), pipeline, scope)
    current_app.logger.info(f'Validating {selection.config.label()} on {len(data)} records ({scope})')

    artifacts = []
    for lvl in pipeline.levels:
        report, bundle, history = train_and_report(pipeline, data, lvl, selection.config, scope)
        directory = stage_dir(pipeline, 'validate', lvl.value)
        table = report.to_frame().reset_index().rename(columns={'': 'average'})
        artifacts += [
            write_json(os.path.join(directory, 'report.json'), report.to_dict()),
            write_csv(os.path.join(directory, 'report.csv'), table),
            save_model(os.path.join(directory, 'model.json'), bundle),
            write_csv(os.path.join(directory, 'history.csv'), history),
        ]
        for name, flags in report.warnings.items():
            current_app.logger.warning(f"{lvl.value}: class {name} has undefined {', '.join(flags)}")
        click.echo(f'{lvl.value}: accuracy {report.accuracy_plain:.6f} '
                   f'(per-class mean {report.accuracy_eq3:.6f}) on {report.support} test records')
    record(pipeline, 'validate', artifacts, scope=scope, selected=selection.config.to_dict())
