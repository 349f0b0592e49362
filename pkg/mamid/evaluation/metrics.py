"""Confusion matrices and the macro/weighted classification report.

Aggregates come in two forms: the harmonic-mean form, where macro and
weighted F1 are taken from the already averaged precision and recall, and
the conventional form, where per-class F1 scores are averaged. Reports carry
both (`f1_macro_eq8`/`f1_macro_std`, `f1_weighted_eq9`/`f1_weighted_std`).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from mamid.utils.error_handler import DimensionError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ConfusionMatrix:
    """counts[t][p] = samples of true class t predicted as p."""
    counts: np.ndarray
    class_names: List[str]

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if self.counts.shape != (k, k):
            raise DimensionError(f'Confusion counts {self.counts.shape} do not match {k} classes')
        if np.any(self.counts < 0):
            raise PreconditionError('Confusion counts must be nonnegative')

    @property
    def total(self):
        return int(self.counts.sum())

    def to_dict(self):
        return {'class_names': list(self.class_names), 'counts': self.counts.tolist()}

    @staticmethod
    def from_dict(cm_dict):
        return ConfusionMatrix(counts=np.array(cm_dict['counts']), class_names=list(cm_dict['class_names']))


def confusion(preds, truth, k, class_names=None):
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise DimensionError(f'{preds.shape[0]} predictions for {truth.shape[0]} labels')
    for name, idx in (('prediction', preds), ('label', truth)):
        if idx.size and (idx.min() < 0 or idx.max() >= k):
            raise PreconditionError(f'{name} index out of range [0, {k})')
    counts = confusion_matrix(truth, preds, labels=np.arange(k)) if truth.size else np.zeros((k, k))
    names = list(class_names) if class_names is not None else [str(i) for i in range(k)]
    return ConfusionMatrix(counts=counts, class_names=names)


def _per_class(counts):
    """sklearn precision/recall/F1 per class, with 0/0 reported as 0."""
    k = counts.shape[0]
    cells = np.repeat(np.arange(k * k), counts.ravel())
    precision, recall, f1, _ = precision_recall_fscore_support(cells // k, cells % k, labels=np.arange(k),
                                                               average=None, zero_division=0)
    return precision, recall, f1


def _harmonic(p, r):
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    support: int
    undefined: List[str] = field(default_factory=list)

    def to_dict(self):
        return {'name': self.name, 'precision': self.precision, 'recall': self.recall, 'f1': self.f1,
                'support': self.support, 'undefined': list(self.undefined)}


@dataclass
class ClassificationReport:
    accuracy_plain: float
    accuracy_eq3: float
    per_class: List[ClassMetrics]
    precision_macro: float
    recall_macro: float
    f1_macro_eq8: float
    f1_macro_std: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted_eq9: float
    f1_weighted_std: float
    support: int
    confusion: Optional[ConfusionMatrix] = None

    @property
    def warnings(self):
        return {c.name: c.undefined for c in self.per_class if c.undefined}

    def metric(self, name):
        return getattr(self, name)

    def to_dict(self):
        """Convert the report to a JSON-ready dictionary."""
        out = {
            'accuracy_plain': self.accuracy_plain,
            'accuracy_eq3': self.accuracy_eq3,
            'precision_macro': self.precision_macro,
            'recall_macro': self.recall_macro,
            'f1_macro_eq8': self.f1_macro_eq8,
            'f1_macro_std': self.f1_macro_std,
            'precision_weighted': self.precision_weighted,
            'recall_weighted': self.recall_weighted,
            'f1_weighted_eq9': self.f1_weighted_eq9,
            'f1_weighted_std': self.f1_weighted_std,
            'support': self.support,
            'per_class': [c.to_dict() for c in self.per_class],
        }
        if self.confusion is not None:
            out['confusion'] = self.confusion.to_dict()
        return out

    @staticmethod
    def from_dict(report_dict):
        keys = ['accuracy_plain', 'accuracy_eq3', 'precision_macro', 'recall_macro', 'f1_macro_eq8',
                'f1_macro_std', 'precision_weighted', 'recall_weighted', 'f1_weighted_eq9', 'f1_weighted_std',
                'support']
        cm = report_dict.get('confusion')
        return ClassificationReport(
            per_class=[ClassMetrics(**c) for c in report_dict['per_class']],
            confusion=ConfusionMatrix.from_dict(cm) if cm else None,
            **{k: report_dict[k] for k in keys},
        )

    def to_frame(self, f1_form='std'):
        """Table layout: Macro, Weighted, then one row per class."""
        f1_macro = self.f1_macro_std if f1_form == 'std' else self.f1_macro_eq8
        f1_weighted = self.f1_weighted_std if f1_form == 'std' else self.f1_weighted_eq9
        rows = [
            {'': 'Macro', 'Precision': self.precision_macro, 'Recall': self.recall_macro,
             'f1-score': f1_macro, 'Support': self.support},
            {'': 'Weighted', 'Precision': self.precision_weighted, 'Recall': self.recall_weighted,
             'f1-score': f1_weighted, 'Support': self.support},
        ]
        rows += [{'': c.name, 'Precision': c.precision, 'Recall': c.recall, 'f1-score': c.f1,
                  'Support': c.support} for c in self.per_class]
        return pd.DataFrame(rows).set_index('')


def report(cm):
    """Every macro/weighted quantity from a confusion matrix; 0/0 counts as 0 and is flagged."""
    counts = cm.counts
    total = counts.sum()
    if counts.size == 0 or total == 0:
        raise PreconditionError('Cannot report on an empty confusion matrix')
    k = counts.shape[0]
    tp = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    fp = predicted - tp
    fn = support - tp
    tn = total - tp - fp - fn

    precision, recall, f1 = _per_class(counts)
    per_class = []
    for i in range(k):
        undefined = [name for name, flag in (('precision', predicted[i] == 0), ('recall', support[i] == 0),
                                             ('f1', precision[i] + recall[i] == 0)) if flag]
        if undefined:
            logger.warning(f'Class {cm.class_names[i]}: {", ".join(undefined)} undefined (0/0), reported as 0')
        per_class.append(ClassMetrics(name=cm.class_names[i], precision=float(precision[i]),
                                      recall=float(recall[i]), f1=float(f1[i]), support=int(support[i]),
                                      undefined=undefined))

    weights = support / total
    precision_macro = float(np.mean(precision))
    recall_macro = float(np.mean(recall))
    precision_weighted = float(np.sum(precision * weights))
    # support-weighted recall collapses to trace / total
    recall_weighted = float(tp.sum() / total)
    return ClassificationReport(
        accuracy_plain=float(tp.sum() / total),
        accuracy_eq3=float(np.mean((tp + tn) / total)),
        per_class=per_class,
        precision_macro=precision_macro,
        recall_macro=recall_macro,
        f1_macro_eq8=_harmonic(precision_macro, recall_macro),
        f1_macro_std=float(np.mean(f1)),
        precision_weighted=precision_weighted,
        recall_weighted=recall_weighted,
        f1_weighted_eq9=_harmonic(precision_weighted, recall_weighted),
        f1_weighted_std=float(np.sum(f1 * weights)),
        support=int(total),
        confusion=cm,
    )


def evaluate(pred_indices, true_indices, class_names):
    """Confusion matrix and report in one call."""
    return report(confusion(pred_indices, true_indices, len(class_names), class_names))
