"""Options shared by the pipeline commands and their resolution against app.config."""
import os

import click
from flask import current_app

from mamid import __version__
from mamid.data.sampling import stratified_subset
from mamid.models.pipeline import PipelineConfig, parse_levels
from mamid.tuning.grid import load_grid
from mamid.utils.artifacts import load_feature_matrix, update_manifest

out_option = click.option('--out', default=None, help='Output directory (default: MAMID_OUTPUT_DIR).')
data_option = click.option('--data', default=None, help='IoTID20-shaped CSV file.')
level_option = click.option('--level', default='all', show_default=True,
                            help='binary, category, subcategory or all.')
seed_option = click.option('--seed', type=int, default=None, help='Global seed (default: MAMID_SEED).')
parallelism_option = click.option('--parallelism', type=int, default=None,
                                  help='Worker processes (default: MAMID_THREADS).')
subset_option = click.option('--subset-size', type=int, default=None,
                             help='Stratified subset size (default: MAMID_SUBSET_SIZE).')
fraction_option = click.option('--test-fraction', type=float, default=None,
                               help='Test split fraction (default: MAMID_TEST_FRACTION).')
grid_option = click.option('--grid', 'grid_path', default=None, help='JSON file with the grid space.')


def resolve_config(out=None, data=None, level='all', seed=None, parallelism=None, subset_size=None,
                   test_fraction=None, grid_path=None):
    """Command flags over app.config defaults."""
    config = current_app.config
    return PipelineConfig(
        output_dir=out or config['OUTPUT_DIR'],
        data_path=data,
        levels=parse_levels(level),
        subset_size=subset_size if subset_size is not None else config['SUBSET_SIZE'],
        test_fraction=test_fraction if test_fraction is not None else config['TEST_FRACTION'],
        grid=load_grid(grid_path),
        seed=seed if seed is not None else config['SEED'],
        parallelism=parallelism if parallelism is not None else config['THREADS'],
    )


def stage_dir(pipeline, *parts):
    path = os.path.join(pipeline.output_dir, *parts)
    os.makedirs(path, exist_ok=True)
    return path


def load_features(pipeline):
    """The persisted preprocess output of this run directory."""
    return load_feature_matrix(os.path.join(pipeline.output_dir, 'preprocess'))


def study_data(features, pipeline, scope='subset'):
    """The rows a stage works on: the stratified subset, or everything for the full scope."""
    if scope == 'full' or pipeline.subset_size >= len(features):
        return features
    return stratified_subset(features, pipeline.subset_size, pipeline.seed)


def record(pipeline, stage, artifacts, **extra):
    config = pipeline.to_dict()
    config.update(extra)
    return update_manifest(pipeline.output_dir, stage, config, artifacts, __version__)
