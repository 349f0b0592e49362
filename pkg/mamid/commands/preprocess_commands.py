import click
from flask import Blueprint, current_app

from mamid.commands.options import data_option, out_option, record, resolve_config, stage_dir
from mamid.data.loader import load_csv
from mamid.data.preprocessing import preprocess
from mamid.utils.artifacts import save_feature_matrix
from mamid.utils.error_handler import UsageError, handle_errors

preprocess_bp = Blueprint('preprocess', __name__, cli_group=None)


@preprocess_bp.cli.command('preprocess')
@data_option
@out_option
@handle_errors
def preprocess_command(data, out):
    """Clean and scale a flow CSV into the feature matrix."""
    if not data:
        raise UsageError('preprocess needs --data')
    pipeline = resolve_config(out=out, data=data)
    dataset = load_csv(data)
    matrix = preprocess(dataset)
    artifacts = save_feature_matrix(matrix, stage_dir(pipeline, 'preprocess'))
    record(pipeline, 'preprocess', artifacts)

    provenance = matrix.provenance
    current_app.logger.info(f"Preprocessed {provenance['input_rows']} rows: "
                            f"{len(provenance['dropped'])} columns dropped, "
                            f"{provenance['output_columns']} kept")
    click.echo(f"{provenance['input_rows']} records, {provenance['output_columns']} features "
               f"({len(provenance['dropped'])} columns dropped) -> {artifacts[0]}")
