import math

import numpy as np
import pandas as pd
import pytest

from mamid.data.labels import encode_labels, targets_for_output
from mamid.data.loader import load_csv
from mamid.data.preprocessing import preprocess, rescale_split, sanitize_column
from mamid.data.sampling import apportion, stratified_split, stratified_subset
from mamid.data.synthetic import iotid20_spec, synth_generate
from mamid.models.flow import IOTID20_SUBCATEGORY_COUNTS, FeatureMatrix, FlowDataset, FlowRecord
from mamid.utils.artifacts import load_feature_matrix, save_feature_matrix
from mamid.utils.error_handler import (DataIOError, EmptyFeatureSpaceError, LabelingError, PreconditionError,
                                       SchemaError)

HEADER = 'Flow_Duration,Tot_Fwd_Pkts,Label,Cat,Sub_Cat\n'


def _write(tmp_path, text, name='flows.csv'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _labels(*rows):
    return pd.DataFrame(list(rows), columns=['Label', 'Cat', 'Sub_Cat'], dtype=object)


class TestLoader:
    def test_synthetic_csv_round_trip(self, flows_csv, flows):
        dataset = load_csv(flows_csv)
        assert len(dataset) == len(flows)
        assert sorted(dataset.text.columns) == ['Dst_IP', 'Flow_ID', 'Src_IP']
        pd.testing.assert_frame_equal(dataset.labels, flows.labels, check_dtype=False)
        np.testing.assert_allclose(dataset.features[flows.features.columns].to_numpy(),
                                   flows.features.to_numpy(), rtol=1e-12)
        assert dataset.malformed == []

    def test_missing_and_empty_files(self, tmp_path):
        with pytest.raises(DataIOError):
            load_csv(str(tmp_path / 'absent.csv'))
        with pytest.raises(DataIOError):
            load_csv(_write(tmp_path, ''))

    def test_missing_label_column(self, tmp_path):
        path = _write(tmp_path, 'Flow_Duration,Label,Cat\n1,Normal,Normal\n')
        with pytest.raises(SchemaError) as err:
            load_csv(path)
        assert err.value.details['column'] == 'Sub_Cat'

    def test_infinity_and_malformed_cells(self, tmp_path):
        path = _write(tmp_path, HEADER +
                      '1.5,Infinity,Normal,Normal,Normal\n'
                      'abc,2,Anomaly,DoS,DoS-Synflooding\n'
                      '3,-infinity,Anomaly,Mirai,Mirai-UDP Flooding\n')
        dataset = load_csv(path)
        assert np.isposinf(dataset.features['Tot_Fwd_Pkts'][0])
        assert np.isneginf(dataset.features['Tot_Fwd_Pkts'][2])
        assert np.isnan(dataset.features['Flow_Duration'][1])
        assert dataset.malformed == [{'row': 1, 'column': 'Flow_Duration', 'value': 'abc'}]

    def test_hierarchy_conflicts(self, tmp_path):
        with pytest.raises(LabelingError) as err:
            load_csv(_write(tmp_path, HEADER + '1,2,Normal,Normal,Normal\n1,2,Anomaly,Mirai,DoS-Synflooding\n'))
        assert err.value.row == 1
        with pytest.raises(LabelingError):
            load_csv(_write(tmp_path, HEADER + '1,2,Anomaly,A,x\n1,2,Anomaly,B,x\n', name='custom.csv'))

    def test_blank_label(self, tmp_path):
        with pytest.raises(LabelingError):
            load_csv(_write(tmp_path, HEADER + '1,2,Normal,Normal,\n'))


class TestPreprocess:
    def test_drops_identifiers_and_constants(self, flows, features):
        dropped = features.provenance['dropped']
        assert len(dropped) == 15
        assert {d['reason'] for d in dropped} == {'text', 'identifier', 'listed-constant'}
        assert features.n_features == 10
        assert features.provenance['input_columns'] == 25

    def test_values_in_unit_interval(self, features):
        assert features.values.min() >= 0.0
        assert features.values.max() <= 1.0
        np.testing.assert_allclose(features.values.min(axis=0), 0.0)
        np.testing.assert_allclose(features.values.max(axis=0), 1.0)

    def test_inverse_transform_recovers_raw(self, flows, features):
        raw = flows.features[features.columns].to_numpy()
        np.testing.assert_allclose(features.inverse_transform(), raw, rtol=1e-10, atol=1e-10)

    def test_sanitize_column(self):
        values, counts = sanitize_column([1.0, np.inf, -np.inf, np.nan, 3.0])
        np.testing.assert_array_equal(values, [1.0, 3.0, 1.0, 2.0, 3.0])
        assert counts == {'pos_inf': 1, 'neg_inf': 1, 'nan': 1}
        assert sanitize_column([np.nan, np.inf])[0] is None

    def test_idempotent(self, features):
        again = preprocess(features)
        assert again.columns == features.columns
        np.testing.assert_array_equal(again.values, features.values)
        np.testing.assert_allclose(again.scale_min, features.scale_min)
        np.testing.assert_allclose(again.scale_max, features.scale_max)

    def test_accepts_records(self):
        records = [FlowRecord({'a': 1.0, 'b': 5.0}, 'Normal', 'Normal', 'Normal'),
                   FlowRecord({'a': 3.0, 'b': 5.0}, 'Anomaly', 'DoS', 'DoS-Synflooding')]
        fm = preprocess(records)
        assert fm.columns == ['a']
        np.testing.assert_array_equal(fm.values[:, 0], [0.0, 1.0])

    def test_empty_feature_space(self):
        dataset = FlowDataset(features=pd.DataFrame({'a': [1.0, 1.0], 'b': [np.nan, np.nan]}),
                              labels=_labels(('Normal', 'Normal', 'Normal'), ('Normal', 'Normal', 'Normal')))
        with pytest.raises(EmptyFeatureSpaceError):
            preprocess(dataset)

    def test_rescale_split_clips_test_values(self):
        labels = _labels(('Normal', 'Normal', 'Normal'), ('Normal', 'Normal', 'Normal'))
        train = FeatureMatrix(['a'], [[0.0], [0.5]], [0.0], [10.0], labels)
        test = FeatureMatrix(['a'], [[1.0], [0.25]], [0.0], [10.0], labels)
        train, test = rescale_split(train, test)
        np.testing.assert_allclose(train.values[:, 0], [0.0, 1.0])
        np.testing.assert_allclose(test.values[:, 0], [1.0, 0.5])
        np.testing.assert_allclose(test.inverse_transform()[:, 0], [5.0, 2.5])

    @staticmethod
    def _gappy():
        labels = _labels(*[('Normal', 'Normal', 'Normal')] * 5)
        frame = pd.DataFrame({'a': [0.0, 4.0, np.nan, 10.0, np.nan], 'b': [1.0, 2.0, 3.0, 4.0, np.inf]})
        return preprocess(FlowDataset(features=frame, labels=labels))

    def test_imputed_cells_are_recorded(self):
        fm = self._gappy()
        np.testing.assert_array_equal(fm.imputed[:, 0], [0, 0, 3, 0, 3])
        np.testing.assert_array_equal(fm.imputed[:, 1], [0, 0, 0, 0, 1])
        assert fm.take([2, 4]).imputed.shape == (2, 2)
        np.testing.assert_array_equal(preprocess(fm).imputed, fm.imputed)

    def test_split_refills_from_train_rows_only(self):
        fm = self._gappy()
        # median over all rows is 4; over the observed train rows it is 2
        train, test = rescale_split(fm.take([0, 1, 2]), fm.take([3, 4]))
        np.testing.assert_allclose(train.inverse_transform()[:, 0], [0.0, 4.0, 2.0])
        np.testing.assert_allclose(train.values[:, 0], [0.0, 1.0, 0.5])
        np.testing.assert_allclose(test.values[:, 0], [1.0, 0.5])
        # +Inf in a test row takes the train maximum
        np.testing.assert_allclose(test.inverse_transform()[:, 1], [3.0, 3.0])

    def test_split_ignores_test_extremes(self):
        fm = self._gappy()
        train, _ = rescale_split(fm.take([0, 1, 2]), fm.take([3, 4]))
        other, _ = rescale_split(fm.take([0, 1, 2]), fm.take([4]))
        np.testing.assert_array_equal(train.values, other.values)

    def test_imputed_cells_survive_persistence(self, tmp_path):
        fm = self._gappy()
        paths = save_feature_matrix(fm, str(tmp_path))
        assert [p.rsplit('/', 1)[-1] for p in paths] == ['features.csv', 'provenance.json', 'imputed.csv']
        np.testing.assert_array_equal(load_feature_matrix(str(tmp_path)).imputed, fm.imputed)


class TestLabels:
    def test_alphabetical_classes(self, features):
        onehot, hierarchy = encode_labels(features, 'category')
        assert hierarchy.class_names == sorted(hierarchy.class_names)
        assert hierarchy.n_classes == 5
        np.testing.assert_array_equal(onehot.sum(axis=1), 1.0)
        assert sum(hierarchy.counts) == len(features)
        _, binary = encode_labels(features, 'binary')
        assert binary.class_names == ['Anomaly', 'Normal']

    def test_unknown_label_with_fixed_classes(self, features):
        with pytest.raises(LabelingError):
            encode_labels(features, 'binary', classes=['Anomaly'])

    def test_blank_label(self):
        dataset = FlowDataset(features=pd.DataFrame({'a': [1.0]}), labels=_labels(('', 'Normal', 'Normal')))
        with pytest.raises(LabelingError):
            encode_labels(dataset, 'binary')

    def test_single_unit_targets(self):
        onehot = np.eye(2)[[0, 1, 1]]
        np.testing.assert_array_equal(targets_for_output(onehot, 1), [[0.0], [1.0], [1.0]])
        assert targets_for_output(onehot, 2) is onehot


class TestSampling:
    def test_apportion_shares_are_floor_or_ceil(self, rng):
        for _ in range(200):
            sizes = rng.integers(0, 500, size=int(rng.integers(1, 10)))
            if sizes.sum() == 0:
                continue
            total = int(rng.integers(0, sizes.sum() + 1))
            shares = apportion(sizes, total)
            quota = sizes * total / sizes.sum()
            assert shares.sum() == total
            assert np.all((shares == np.floor(quota)) | (shares == np.ceil(quota)))
            assert np.all(shares <= sizes)

    def test_apportion_serves_starving_classes(self):
        np.testing.assert_array_equal(apportion([5, 5, 990], 100), [1, 0, 99])

    def test_apportion_full_dataset(self):
        counts = list(IOTID20_SUBCATEGORY_COUNTS.values())
        total = round(sum(counts) * 0.25)
        assert total == 156446
        assert apportion(counts, total).sum() == 156446

    def test_apportion_too_many(self):
        with pytest.raises(PreconditionError):
            apportion([1, 2], 4)

    def test_split_sizes_and_disjointness(self, features):
        train, test = stratified_split(features, 0.25, seed=0)
        assert len(test) == round(len(features) * 0.25)
        assert len(train) + len(test) == len(features)
        rows = {tuple(r) for r in features.values}
        train_rows = {tuple(r) for r in train.values}
        test_rows = {tuple(r) for r in test.values}
        assert not train_rows & test_rows
        assert train_rows | test_rows == rows

    def test_split_is_stratified_and_seeded(self, features):
        train, test = stratified_split(features, 0.25, seed=5)
        again, _ = stratified_split(features, 0.25, seed=5)
        np.testing.assert_array_equal(train.values, again.values)
        counts = features.label('subcategory').value_counts()
        test_counts = test.label('subcategory').value_counts()
        for name, size in counts.items():
            assert abs(test_counts.get(name, 0) - size * 0.25) < 1

    def test_bad_fraction(self, features):
        with pytest.raises(PreconditionError):
            stratified_split(features, 1.0, seed=0)

    def test_subset(self, features):
        subset = stratified_subset(features, 90, seed=2)
        assert len(subset) == 90
        with pytest.raises(PreconditionError):
            stratified_subset(features, len(features) + 1, seed=2)

    def test_subset_seeds_change_membership_not_counts(self, features):
        a = stratified_subset(features, 120, seed=1)
        b = stratified_subset(features, 120, seed=2)
        assert {tuple(r) for r in a.values} != {tuple(r) for r in b.values}
        assert a.label('subcategory').value_counts().to_dict() == b.label('subcategory').value_counts().to_dict()

    def test_subset_of_everything_keeps_every_row(self, features):
        subset = stratified_subset(features, len(features), seed=9)
        np.testing.assert_array_equal(subset.values, features.values)
        assert subset.labels.equals(features.labels)

    def test_split_needs_two_rows_per_class(self, features):
        sub = features.label('subcategory').to_numpy()
        lonely = np.flatnonzero(sub == sub[0])[:1]
        rest = np.flatnonzero(sub != sub[0])
        with pytest.raises(PreconditionError):
            stratified_split(features.take(np.concatenate([lonely, rest])), 0.25, seed=0)


class TestSynthetic:
    def test_class_counts_follow_proportions(self):
        spec = iotid20_spec(n_features=9)
        data = synth_generate(spec, 1000, seed=0)
        counts = data.label('subcategory').value_counts()
        for name, p in spec.proportions.items():
            assert abs(counts.get(name, 0) - 1000 * p) < 1

    def test_same_seed_same_data(self):
        spec = iotid20_spec(n_features=9)
        a, b = synth_generate(spec, 50, seed=4), synth_generate(spec, 50, seed=4)
        pd.testing.assert_frame_equal(a.features, b.features)
        pd.testing.assert_frame_equal(a.labels, b.labels)

    def test_hierarchy_is_consistent(self, flows):
        for record in flows.records():
            assert record.label_binary == ('Normal' if record.label_subcategory == 'Normal' else 'Anomaly')

    def test_too_few_features(self):
        with pytest.raises(PreconditionError):
            iotid20_spec(n_features=8)
        assert math.isclose(sum(iotid20_spec().proportions.values()), 1.0)
