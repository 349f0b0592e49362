import json
import os

import numpy as np
import pandas as pd
import pytest

from mamid.cli import main
from mamid.data.preprocessing import preprocess
from mamid.data.synthetic import iotid20_spec, synth_generate
from mamid.models.flow import Level
from mamid.models.hyperparameters import Hyperparameters
from mamid.tuning.runner import fit_config, prepare_level_data, score
from mamid.utils.artifacts import load_model
from mamid.utils.error_handler import EXIT_DATA, EXIT_OK, EXIT_USAGE

TINY_GRID = {
    'epochs': [5],
    'batch_size': [10],
    'neurons': [8],
    'optimizer': ['adam'],
    'activation_hidden': ['tanh'],
    'activation_output': ['softmax', 'sigmoid'],
}


def _invoke(runner, *args):
    result = runner.invoke(args=list(args))
    assert result.exit_code == EXIT_OK, result.output
    return result


def _manifest(out):
    with open(os.path.join(out, 'manifest.json')) as f:
        return json.load(f)


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / 'run')


@pytest.fixture
def prepared(runner, out):
    """A run directory holding a synthetic dataset and its preprocess output."""
    _invoke(runner, 'synth', '--n', '400', '--features', '10', '--seed', '3', '--out', out)
    _invoke(runner, 'preprocess', '--data', os.path.join(out, 'synthetic.csv'), '--out', out)
    return out


class TestPipeline:
    def test_end_to_end(self, runner, prepared, tmp_path):
        out = prepared
        grid = tmp_path / 'grid.json'
        grid.write_text(json.dumps(TINY_GRID))

        result = _invoke(runner, 'tune', '--grid', str(grid), '--out', out)
        assert 'Selected' in result.output
        for level in Level:
            directory = os.path.join(out, 'tune', level.value)
            for name in ('ledger.jsonl', 'top10.csv', 'options.csv', 'scatter.csv', 'bands.csv'):
                assert os.path.isfile(os.path.join(directory, name))
            with open(os.path.join(directory, 'ledger.jsonl')) as f:
                assert len(f.read().splitlines()) == 2
        with open(os.path.join(out, 'tune', 'selected.json')) as f:
            selected = json.load(f)
        assert Hyperparameters.from_dict(selected['config']).neurons == 8

        _invoke(runner, 'validate', '--out', out)
        for level in Level:
            directory = os.path.join(out, 'validate', level.value)
            report = pd.read_csv(os.path.join(directory, 'report.csv'))
            assert list(report['average'][:2]) == ['Macro', 'Weighted']
            bundle = load_model(os.path.join(directory, 'model.json'))
            assert bundle.level is level
            assert bundle.config['scope'] == 'subset'
            assert bundle.config['optimizer'] == {'kind': 'adam', 'lr': 0.001, 'beta1': 0.9, 'beta2': 0.999,
                                                  'eps': 1e-8}
            assert len(pd.read_csv(os.path.join(directory, 'history.csv'))) == 5

        _invoke(runner, 'explain', '--out', out, '--samples', '3', '--features', '4', '--background', '10')
        for level in Level:
            directory = os.path.join(out, 'explain', level.value)
            importance = pd.read_csv(os.path.join(directory, 'importance.csv'))
            assert len(importance) == 4
            assert importance['total'].is_monotonic_decreasing
            with open(os.path.join(directory, 'base.json')) as f:
                base = json.load(f)
            assert base['samples'] == 3 and base['exact']
            assert base['efficiency_gap'] < 1e-8
            force = pd.read_csv(os.path.join(directory, 'force.csv'))
            assert set(force['sample']) <= {0, 1, 2}

        result = _invoke(runner, 'report', '--out', out)
        assert 'Missing stages' not in result.output
        for name in ('summary.txt', 'report.pdf', 'report.xlsx', 'binary_scatter.png', 'category_options.png'):
            assert os.path.isfile(os.path.join(out, 'report', name))

        manifest = _manifest(out)
        assert manifest['tool'] == 'mamid'
        assert set(manifest['stages']) == {'synth', 'preprocess', 'tune', 'validate', 'explain', 'report'}
        assert 'tune/selected.json' in manifest['stages']['tune']['artifacts']
        assert manifest['stages']['tune']['config']['grid']['neurons'] == [8]
        assert manifest['stages']['tune']['config']['optimizers']['adam']['lr'] == 0.001

    def test_tune_resumes_from_ledger(self, runner, prepared, tmp_path):
        grid = tmp_path / 'grid.json'
        grid.write_text(json.dumps(TINY_GRID))
        _invoke(runner, 'tune', '--grid', str(grid), '--level', 'binary', '--out', prepared)
        ledger = os.path.join(prepared, 'tune', 'binary', 'ledger.jsonl')
        with open(ledger) as f:
            before = [json.loads(line) for line in f]
        _invoke(runner, 'tune', '--grid', str(grid), '--level', 'binary', '--out', prepared)
        with open(ledger) as f:
            after = [json.loads(line) for line in f]
        # reused results keep their original timing
        assert after == before

    def test_preprocess_is_reproducible(self, runner, prepared):
        directory = os.path.join(prepared, 'preprocess')
        with open(os.path.join(directory, 'features.csv'), 'rb') as f:
            features = f.read()
        with open(os.path.join(directory, 'provenance.json'), 'rb') as f:
            provenance = f.read()
        _invoke(runner, 'preprocess', '--data', os.path.join(prepared, 'synthetic.csv'), '--out', prepared)
        with open(os.path.join(directory, 'features.csv'), 'rb') as f:
            assert f.read() == features
        with open(os.path.join(directory, 'provenance.json'), 'rb') as f:
            assert f.read() == provenance
        assert len(json.loads(provenance)['dropped']) == 15

    def test_select_only_on_published_tables(self, runner, out, published_tables):
        for level, table in published_tables.items():
            directory = os.path.join(out, 'tune', level.value)
            os.makedirs(directory)
            table.to_csv(os.path.join(directory, 'top10.csv'), index=False)
        _invoke(runner, 'tune', '--select-only', '--out', out)
        with open(os.path.join(out, 'tune', 'selected.json')) as f:
            selected = json.load(f)
        assert Hyperparameters.from_dict(selected['config']) == \
            Hyperparameters(200, 100, 200, 'adam', 'tanh', 'softmax')


class TestReport:
    def test_empty_directory(self, runner, tmp_path):
        empty = tmp_path / 'empty'
        empty.mkdir()
        result = _invoke(runner, 'report', '--out', str(empty))
        assert f'nothing to report in {empty}' in result.output
        assert not os.path.exists(empty / 'report')

    def test_partial_run_lists_missing_stages(self, runner, prepared):
        result = _invoke(runner, 'report', '--out', prepared)
        assert 'Missing stages: tune, validate, explain' in result.output
        assert '[preprocess]' in result.output
        assert os.path.isfile(os.path.join(prepared, 'report', 'summary.txt'))


class TestExitCodes:
    def test_unknown_level_is_usage_error(self, tmp_path):
        assert main(['tune', '--level', 'family', '--out', str(tmp_path)]) == EXIT_USAGE

    def test_missing_data_file(self, tmp_path):
        code = main(['preprocess', '--data', str(tmp_path / 'absent.csv'), '--out', str(tmp_path)])
        assert code == EXIT_DATA

    def test_preprocess_needs_data(self, tmp_path):
        assert main(['preprocess', '--out', str(tmp_path)]) == EXIT_USAGE

    def test_unknown_option(self, tmp_path):
        assert main(['tune', '--bogus']) == EXIT_USAGE

    def test_validate_without_selection(self, runner, prepared):
        result = runner.invoke(args=['validate', '--out', prepared])
        assert result.exit_code == EXIT_DATA

    def test_select_only_without_tables(self, runner, out):
        result = runner.invoke(args=['tune', '--select-only', '--out', out])
        assert result.exit_code == EXIT_DATA

    def test_validate_unknown_level(self, runner, prepared):
        result = runner.invoke(args=['validate', '--level', 'family', '--out', prepared])
        assert result.exit_code == EXIT_USAGE

    def test_explain_without_model(self, runner, prepared):
        result = runner.invoke(args=['explain', '--level', 'binary', '--out', prepared])
        assert result.exit_code == EXIT_DATA


class TestValidate:
    def test_rerun_is_deterministic(self, runner, prepared):
        selection = {'config': Hyperparameters(3, 10, 6, 'adam', 'tanh', 'softmax').to_dict(), 'decisions': []}
        path = os.path.join(prepared, 'selected.json')
        with open(path, 'w') as f:
            json.dump(selection, f)

        report_path = os.path.join(prepared, 'validate', 'category', 'report.json')
        _invoke(runner, 'validate', '--selected', path, '--level', 'category', '--out', prepared)
        with open(report_path, 'rb') as f:
            first = f.read()
        _invoke(runner, 'validate', '--selected', path, '--level', 'category', '--out', prepared)
        with open(report_path, 'rb') as f:
            assert f.read() == first
        assert not os.path.exists(os.path.join(prepared, 'validate', 'binary'))

    def test_full_scope_uses_every_record(self, runner, prepared):
        selection = {'config': Hyperparameters(2, 10, 4, 'sgd', 'relu', 'sigmoid').to_dict()}
        path = os.path.join(prepared, 'selected.json')
        with open(path, 'w') as f:
            json.dump(selection, f)
        _invoke(runner, 'validate', '--selected', path, '--level', 'binary', '--scope', 'full',
                '--subset-size', '100', '--out', prepared)
        with open(os.path.join(prepared, 'validate', 'binary', 'report.json')) as f:
            assert json.load(f)['support'] == 100
        bundle = load_model(os.path.join(prepared, 'validate', 'binary', 'model.json'))
        assert bundle.network.output_dim == 1 and bundle.config['scope'] == 'full'


class TestSyntheticAccuracy:
    def test_subcategory_accuracy_on_separable_data(self):
        dataset = synth_generate(iotid20_spec(n_features=12), 4000, seed=0)
        data = prepare_level_data(preprocess(dataset), Level.SUBCATEGORY, 0.25, seed=0)
        config = Hyperparameters(100, 10, 100, 'adam', 'tanh', 'softmax')
        report = score(fit_config(config, data, seed=0).network, data)
        assert report.accuracy_plain >= 0.99
        assert report.support == 1000
        assert np.isclose(report.recall_weighted, report.accuracy_plain)


REDUCED_GRID = {
    'epochs': [1, 100],
    'batch_size': [10],
    'neurons': [100],
    'optimizer': ['adam'],
    'activation_hidden': ['tanh'],
    'activation_output': ['softmax', 'relu'],
}


@pytest.mark.slow
class TestSyntheticPipeline:
    def test_reduced_grid_selects_and_validates(self, runner, out, tmp_path):
        _invoke(runner, 'synth', '--n', '4000', '--features', '12', '--seed', '0', '--out', out)
        _invoke(runner, 'preprocess', '--data', os.path.join(out, 'synthetic.csv'), '--out', out)
        grid = tmp_path / 'grid.json'
        grid.write_text(json.dumps(REDUCED_GRID))
        _invoke(runner, 'tune', '--grid', str(grid), '--level', 'subcategory', '--seed', '0', '--out', out)

        with open(os.path.join(out, 'tune', 'selected.json')) as f:
            selection = json.load(f)
        assert Hyperparameters.from_dict(selection['config']) == Hyperparameters(100, 10, 100, 'adam', 'tanh',
                                                                                 'softmax')
        rules = {d['axis']: d['rule'] for d in selection['decisions']}
        assert rules['activation_output'] == 'majority'
        assert rules['neurons'] == 'only-option'

        _invoke(runner, 'validate', '--level', 'subcategory', '--seed', '0', '--out', out)
        with open(os.path.join(out, 'validate', 'subcategory', 'report.json')) as f:
            report = json.load(f)
        assert report['support'] == 1000
        assert report['accuracy_plain'] >= 0.99
