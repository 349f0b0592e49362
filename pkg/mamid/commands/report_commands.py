import os

import click
import pandas as pd
from flask import Blueprint, current_app

from mamid.commands.options import out_option, record, resolve_config
from mamid.evaluation.metrics import ClassificationReport
from mamid.models.flow import Level
from mamid.utils.artifacts import read_json
from mamid.utils.error_handler import handle_errors
from mamid.utils.report_generator import ReportGenerator

report_bp = Blueprint('report', __name__, cli_group=None)

PIPELINE_STAGES = ('preprocess', 'tune', 'validate', 'explain')


def _read_csv(path):
    return pd.read_csv(path) if os.path.isfile(path) else None


def collect(out_dir):
    """Everything earlier stages left in `out_dir`, keyed by stage then level."""
    found = {'preprocess': None, 'tune': {}, 'selected': None, 'validate': {}, 'explain': {}}
    provenance = os.path.join(out_dir, 'preprocess', 'provenance.json')
    if os.path.isfile(provenance):
        found['preprocess'] = read_json(provenance)
    selected = os.path.join(out_dir, 'tune', 'selected.json')
    if os.path.isfile(selected):
        found['selected'] = read_json(selected)
    for level in Level:
        tune_dir = os.path.join(out_dir, 'tune', level.value)
        tables = {name: _read_csv(os.path.join(tune_dir, f'{name}.csv'))
                  for name in ('top10', 'options', 'scatter', 'bands')}
        if tables['top10'] is not None:
            found['tune'][level.value] = tables
        report_path = os.path.join(out_dir, 'validate', level.value, 'report.json')
        if os.path.isfile(report_path):
            found['validate'][level.value] = ClassificationReport.from_dict(read_json(report_path))
        importance = _read_csv(os.path.join(out_dir, 'explain', level.value, 'importance.csv'))
        if importance is not None:
            found['explain'][level.value] = importance
    return found


def missing_stages(found):
    present = {
        'preprocess': found['preprocess'] is not None,
        'tune': bool(found['tune']) or found['selected'] is not None,
        'validate': bool(found['validate']),
        'explain': bool(found['explain']),
    }
    return [stage for stage in PIPELINE_STAGES if not present[stage]]


def summary_text(found):
    lines = ['MAMID run summary', '']
    missing = missing_stages(found)
    if missing:
        lines += [f"Missing stages: {', '.join(missing)}", '']

    if found['preprocess'] is not None:
        p = found['preprocess']
        lines += ['[preprocess]', f"records: {p['input_rows']}, input columns: {p['input_columns']}, "
                                  f"features kept: {p['output_columns']}, dropped: {len(p['dropped'])}", '']
    if found['tune']:
        lines.append('[tune]')
        for level, tables in found['tune'].items():
            top = tables['top10']
            best = (f"best {top.iloc[0]['Accuracy']:.2f}%" if len(top) else 'no successful experiments')
            scatter = tables['scatter']
            successes = int((scatter['status'] == 'success').sum()) if scatter is not None else len(top)
            total = len(scatter) if scatter is not None else '?'
            lines.append(f'{level}: {successes}/{total} succeeded, {best}')
        lines.append('')
    if found['selected'] is not None:
        cfg = found['selected']['config']
        lines += ['[selected]', ', '.join(f'{k}={v}' for k, v in cfg.items()), '']
    if found['validate']:
        lines.append('[validate]')
        for level, rep in found['validate'].items():
            lines.append(f'{level}: accuracy {rep.accuracy_plain:.6f}, macro f1 {rep.f1_macro_std:.6f}, '
                         f'weighted f1 {rep.f1_weighted_std:.6f}, support {rep.support}')
        lines.append('')
    if found['explain']:
        lines.append('[explain]')
        for level, importance in found['explain'].items():
            lines.append(f"{level}: {', '.join(importance['feature'].head(5).astype(str))}")
        lines.append('')
    return '\n'.join(lines)


def _sheets(found):
    sheets = {}
    for level, tables in found['tune'].items():
        for name in ('top10', 'options', 'bands'):
            if tables[name] is not None:
                sheets[f'{level} {name}'] = tables[name]
    for level, rep in found['validate'].items():
        sheets[f'{level} report'] = rep.to_frame().reset_index().rename(columns={'': 'average'})
    for level, importance in found['explain'].items():
        sheets[f'{level} importance'] = importance
    return sheets


def _charts(found, directory):
    charts = []
    for level, tables in found['tune'].items():
        if tables['scatter'] is not None:
            scatter = tables['scatter'].dropna(subset=['accuracy'])
            charts.append(ReportGenerator.generate_chart(
                scatter, 'scatter', f'{level}: accuracy per experiment',
                os.path.join(directory, f'{level}_scatter.png'), x='experiment', y='accuracy'))
        if tables['options'] is not None:
            options = tables['options'].dropna(subset=['axis']).astype({'option': str})
            charts.append(ReportGenerator.generate_chart(
                options, 'bar', f'{level}: mean accuracy per option',
                os.path.join(directory, f'{level}_options.png'), x='option', y='mean_accuracy', hue='axis'))
    return charts


@report_bp.cli.command('report')
@out_option
@handle_errors
def report_command(out):
    """Consolidate every stage output of a run directory into one summary."""
    pipeline = resolve_config(out=out)
    out_dir = pipeline.output_dir
    found = collect(out_dir) if os.path.isdir(out_dir) else None
    if found is None or len(missing_stages(found)) == len(PIPELINE_STAGES):
        current_app.logger.info(f'No stage outputs in {out_dir}')
        click.echo(f'nothing to report in {out_dir}')
        return

    directory = os.path.join(out_dir, 'report')
    os.makedirs(directory, exist_ok=True)
    text = summary_text(found)
    summary_path = os.path.join(directory, 'summary.txt')
    with open(summary_path, 'w') as f:
        f.write(text + '\n')

    sheets = _sheets(found)
    sections = [('Summary', text)] + list(sheets.items())
    artifacts = [summary_path, ReportGenerator.generate_pdf_report('MAMID run report', sections,
                                                                   os.path.join(directory, 'report.pdf'))]
    if sheets:
        artifacts.append(ReportGenerator.generate_excel_report(sheets, os.path.join(directory, 'report.xlsx')))
    artifacts += _charts(found, directory)
    record(pipeline, 'report', artifacts, missing=missing_stages(found))

    click.echo(text)
