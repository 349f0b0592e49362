import os

import click
import numpy as np
import pandas as pd
from flask import Blueprint, current_app

from mamid.commands.options import level_option, load_features, out_option, record, resolve_config, \
    stage_dir, study_data
from mamid.data.sampling import stratified_subset
from mamid.engine.propagation import predict_classes
from mamid.explain.attribution import (background_sample, explain_network, feature_importance, force_data,
                                       summary_frame, top_variance_features)
from mamid.explain.kernel_shap import MAX_EXACT_FEATURES
from mamid.tuning.runner import prepare_level_data
from mamid.utils.artifacts import load_model, write_csv, write_json
from mamid.utils.error_handler import SchemaError, UsageError, handle_errors

explain_bp = Blueprint('explain', __name__, cli_group=None)


def _force_rows(report):
    rows = []
    for i in range(report.n_samples):
        # explain the output the model actually predicted
        column = 0 if len(report.output_names) == 1 else int(predict_classes(report.predictions[i:i + 1])[0])
        rows += force_data(report, i, column).to_rows()
    return pd.DataFrame(rows, columns=['sample', 'class', 'base_value', 'prediction', 'feature', 'value', 'shap'])


def explain_level(pipeline, bundle, samples, n_features, coalitions, background_size):
    """Attribution report of a model bundle on its own test split."""
    scope = bundle.config.get('scope', 'subset')
    data = prepare_level_data(study_data(load_features(pipeline), pipeline, scope), bundle.level,
                              pipeline.test_fraction, pipeline.seed)
    if list(data.train.columns) != list(bundle.feature_names):
        raise SchemaError('Feature columns of the run directory do not match the model')

    features = top_variance_features(data.train.values, n_features) if n_features else None
    background = background_sample(data.train, background_size, pipeline.seed)
    instances = stratified_subset(data.test, min(samples, len(data.test)), pipeline.seed).values
    return explain_network(bundle.network, background, instances, bundle.feature_names, bundle.class_names,
                           features=features, n_coalition_samples=coalitions, seed=pipeline.seed)


@explain_bp.cli.command('explain')
@level_option
@click.option('--model', 'model_path', default=None,
              help='Model bundle (default: <out>/validate/<level>/model.json).')
@click.option('--samples', type=int, default=None, help='Test records to explain (default: MAMID_EXPLAIN_SAMPLES).')
@click.option('--features', 'n_features', type=int, default=None,
              help='Top-variance features to explain, 0 for all (default: MAMID_EXPLAIN_FEATURES).')
@click.option('--coalitions', type=int, default=None,
              help='Sampled coalitions above twelve features (default: MAMID_EXPLAIN_COALITIONS).')
@click.option('--background', 'background_size', type=int, default=None,
              help='Background rows (default: MAMID_BACKGROUND_SIZE).')
@out_option
@handle_errors
def explain_command(level, model_path, samples, n_features, coalitions, background_size, out):
    """Kernel SHAP attributions of the validated models."""
    config = current_app.config
    samples = samples if samples is not None else config['EXPLAIN_SAMPLES']
    n_features = n_features if n_features is not None else config['EXPLAIN_FEATURES']
    coalitions = coalitions if coalitions is not None else config['EXPLAIN_COALITIONS']
    background_size = background_size if background_size is not None else config['BACKGROUND_SIZE']
    if samples < 1 or background_size < 1 or coalitions < 2 or n_features < 0:
        raise UsageError('samples and background must be >= 1, coalitions >= 2, features >= 0')

    levels = resolve_config(out=out, level=level).levels
    if model_path and len(levels) != 1:
        raise UsageError('--model needs a single --level')

    artifacts = []
    for lvl in levels:
        root = out or config['OUTPUT_DIR']
        bundle = load_model(model_path or os.path.join(root, 'validate', lvl.value, 'model.json'))
        if bundle.level is not lvl:
            raise UsageError(f'Model was trained for {bundle.level.value}, not {lvl.value}')
        pipeline = resolve_config(out=out, level=lvl.value, seed=bundle.config.get('seed'),
                                  subset_size=bundle.config.get('subset_size'),
                                  test_fraction=bundle.config.get('test_fraction'))
        report = explain_level(pipeline, bundle, samples, n_features, coalitions, background_size)

        directory = stage_dir(pipeline, 'explain', lvl.value)
        exact = len(report.feature_names) <= MAX_EXACT_FEATURES
        artifacts += [
            write_csv(os.path.join(directory, 'importance.csv'), feature_importance(report)),
            write_csv(os.path.join(directory, 'summary.csv'), summary_frame(report)),
            write_csv(os.path.join(directory, 'force.csv'), _force_rows(report)),
            write_json(os.path.join(directory, 'base.json'), {
                'outputs': report.output_names,
                'base_value': report.base_value.tolist(),
                'features': report.feature_names,
                'samples': report.n_samples,
                'exact': exact,
                'efficiency_gap': report.efficiency_gap(),
                'mean_sample_base': np.mean(report.sample_base, axis=0).tolist() if report.n_samples else [],
            }),
        ]
        top = feature_importance(report)['feature'].head(3).tolist()
        click.echo(f"{lvl.value}: {report.n_samples} samples explained, top features {', '.join(top)}")

    record(resolve_config(out=out, level=level), 'explain', artifacts, samples=samples, features=n_features,
           coalitions=coalitions, background=background_size)
