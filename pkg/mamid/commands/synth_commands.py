import os

import click
from flask import Blueprint, current_app

from mamid.commands.options import out_option, record, resolve_config, seed_option
from mamid.data.synthetic import iotid20_spec, synth_generate, to_csv_frame
from mamid.utils.artifacts import write_csv
from mamid.utils.error_handler import handle_errors

synth_bp = Blueprint('synth', __name__, cli_group=None)


@synth_bp.cli.command('synth')
@click.option('--n', 'n_records', type=int, default=10000, show_default=True, help='Number of records.')
@click.option('--features', 'n_features', type=int, default=12, show_default=True,
              help='Informative feature columns.')
@click.option('--separation', type=float, default=8.0, show_default=True,
              help='Distance of each class centre from the origin.')
@click.option('--sigma', type=float, default=1.0, show_default=True, help='Per-feature noise.')
@seed_option
@out_option
@handle_errors
def synth_command(n_records, n_features, separation, sigma, seed, out):
    """Write a separable nine-class dataset in the IoTID20 CSV layout."""
    pipeline = resolve_config(out=out, seed=seed)
    spec = iotid20_spec(n_features=n_features, separation=separation, sigma=sigma)
    dataset = synth_generate(spec, n_records, pipeline.seed)
    path = write_csv(os.path.join(pipeline.output_dir, 'synthetic.csv'), to_csv_frame(dataset))
    record(pipeline, 'synth', [path], n=n_records, features=n_features, separation=separation, sigma=sigma)

    current_app.logger.info(f'Synthetic dataset written to {path}')
    click.echo(f'{len(dataset)} synthetic records -> {path}')
