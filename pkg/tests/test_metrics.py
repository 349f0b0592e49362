import numpy as np
import pytest

from mamid.evaluation.metrics import ClassificationReport, ConfusionMatrix, confusion, evaluate, report
from mamid.utils.error_handler import DimensionError, PreconditionError


def _loop_oracle(counts):
    """Per-class and averaged metrics by explicit loops."""
    k = len(counts)
    total = sum(sum(row) for row in counts)
    precision, recall, f1, support = [], [], [], []
    for i in range(k):
        tp = counts[i][i]
        predicted = sum(counts[t][i] for t in range(k))
        actual = sum(counts[i])
        p = tp / predicted if predicted else 0.0
        r = tp / actual if actual else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
        support.append(actual)
    weights = [s / total for s in support]
    correct = sum(counts[i][i] for i in range(k))
    eq3 = 0.0
    for i in range(k):
        tp = counts[i][i]
        fp = sum(counts[t][i] for t in range(k)) - tp
        fn = support[i] - tp
        eq3 += (total - fp - fn) / total
    return {
        'accuracy_plain': correct / total,
        'accuracy_eq3': eq3 / k,
        'precision_macro': sum(precision) / k,
        'recall_macro': sum(recall) / k,
        'f1_macro_std': sum(f1) / k,
        'precision_weighted': sum(p * w for p, w in zip(precision, weights)),
        'recall_weighted': sum(r * w for r, w in zip(recall, weights)),
        'f1_weighted_std': sum(f * w for f, w in zip(f1, weights)),
        'per_class_f1': f1,
    }


def _harmonic(p, r):
    return 2 * p * r / (p + r) if p + r else 0.0


class TestReport:
    @pytest.mark.parametrize('k', [2, 5, 9])
    def test_matches_loop_oracle(self, k, rng):
        for _ in range(200):
            counts = rng.integers(0, 50, size=(k, k))
            counts[0, 0] += 1
            rep = report(ConfusionMatrix(counts, [str(i) for i in range(k)]))
            expected = _loop_oracle(counts.tolist())
            for name in ('accuracy_plain', 'accuracy_eq3', 'precision_macro', 'recall_macro', 'f1_macro_std',
                         'precision_weighted', 'recall_weighted', 'f1_weighted_std'):
                assert abs(rep.metric(name) - expected[name]) <= 1e-12, name
            np.testing.assert_allclose([c.f1 for c in rep.per_class], expected['per_class_f1'], atol=1e-12)
            assert abs(rep.f1_macro_eq8 - _harmonic(expected['precision_macro'], expected['recall_macro'])) <= 1e-12
            assert abs(rep.f1_weighted_eq9 - _harmonic(expected['precision_weighted'],
                                                       expected['recall_weighted'])) <= 1e-12

    def test_weighted_recall_is_accuracy(self, rng):
        counts = rng.integers(0, 1000, size=(6, 6))
        rep = report(ConfusionMatrix(counts, list('abcdef')))
        assert rep.recall_weighted == np.trace(counts) / counts.sum()
        assert rep.recall_weighted == rep.accuracy_plain

    def test_binary_accuracy_forms(self):
        rep = report(ConfusionMatrix([[40, 10], [5, 45]], ['Anomaly', 'Normal']))
        assert rep.accuracy_plain == pytest.approx(0.85)
        # two classes share every error
        assert rep.accuracy_eq3 == pytest.approx(0.85)

    def test_undefined_ratios_are_zero_and_flagged(self):
        rep = report(ConfusionMatrix([[5, 0, 0], [3, 0, 0], [0, 0, 0]], ['a', 'b', 'c']))
        b, c = rep.per_class[1], rep.per_class[2]
        assert b.precision == 0.0 and 'precision' in b.undefined and 'f1' in b.undefined
        assert c.recall == 0.0 and set(c.undefined) == {'precision', 'recall', 'f1'}
        assert set(rep.warnings) == {'b', 'c'}
        assert rep.per_class[0].undefined == []

    def test_empty_matrix(self):
        with pytest.raises(PreconditionError):
            report(ConfusionMatrix(np.zeros((2, 2)), ['a', 'b']))

    def test_frame_layout(self):
        rep = evaluate([0, 1, 1, 2], [0, 1, 2, 2], ['x', 'y', 'z'])
        frame = rep.to_frame()
        assert list(frame.index) == ['Macro', 'Weighted', 'x', 'y', 'z']
        assert list(frame.columns) == ['Precision', 'Recall', 'f1-score', 'Support']
        assert frame.loc['Macro', 'f1-score'] == rep.f1_macro_std
        assert rep.to_frame('eq8').loc['Weighted', 'f1-score'] == rep.f1_weighted_eq9

    def test_dict_round_trip(self):
        rep = evaluate([0, 1, 1], [0, 1, 0], ['a', 'b'])
        again = ClassificationReport.from_dict(rep.to_dict())
        assert again.to_dict() == rep.to_dict()


class TestConfusion:
    def test_counts(self):
        cm = confusion([0, 1, 1, 2], [0, 1, 2, 2], 3)
        np.testing.assert_array_equal(cm.counts, [[1, 0, 0], [0, 1, 0], [0, 1, 1]])
        assert cm.total == 4
        assert cm.class_names == ['0', '1', '2']

    def test_errors(self):
        with pytest.raises(DimensionError):
            confusion([0, 1], [0], 2)
        with pytest.raises(PreconditionError):
            confusion([0, 2], [0, 1], 2)
        with pytest.raises(DimensionError):
            ConfusionMatrix([[1, 0]], ['a', 'b'])

    def test_absent_classes_keep_their_rows(self):
        cm = confusion([0, 0], [0, 0], 3)
        np.testing.assert_array_equal(cm.counts, [[2, 0, 0], [0, 0, 0], [0, 0, 0]])
        np.testing.assert_array_equal(confusion([], [], 2).counts, np.zeros((2, 2)))

    def test_per_class_matches_predictions(self, rng):
        truth = rng.integers(0, 4, size=300)
        preds = np.where(rng.random(300) < 0.7, np.minimum(truth, 2), rng.integers(0, 3, size=300))
        result = evaluate(preds, truth, ['a', 'b', 'c', 'd'])
        assert result.per_class[3].precision == 0.0
        assert result.per_class[3].undefined == ['precision', 'f1']
        for i, c in enumerate(result.per_class):
            hits = np.sum((preds == i) & (truth == i))
            assert c.support == np.sum(truth == i)
            assert c.recall == pytest.approx(hits / np.sum(truth == i), abs=1e-12)
