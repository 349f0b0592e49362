"""Reading a finished grid: ranked tables, per-option summaries and the final choice.

Two views feed the choice. The ranked view keeps the k best successful
experiments of a level; the option view averages accuracy over every
successful experiment that used an option. Optimizer and activations are
settled by how often an option appears in the ranked tables of all
levels; epochs, batch size and neurons by the option view.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd

from mamid.engine.activations import ActivationKind
from mamid.models.hyperparameters import (AXES, CATEGORICAL_AXES, NUMERIC_AXES, TABLE_COLUMNS, GridSpace,
                                          Hyperparameters, optimizer_name)
from mamid.utils.error_handler import PreconditionError, UsageError

logger = logging.getLogger(__name__)

ACCURACY_COLUMN = 'Accuracy'
TOP_K_COLUMNS = [ACCURACY_COLUMN] + [TABLE_COLUMNS[a] for a in
                                     ('neurons', 'batch_size', 'epochs', 'optimizer',
                                      'activation_hidden', 'activation_output')]

# choice when the option view cannot separate numeric options
PREFERRED_NUMERIC = {'epochs': 200, 'batch_size': 100, 'neurons': 200}
NUMERIC_TOLERANCE = 0.005

ACCURACY_BANDS = (0.99, 0.95, 0.90)


def top_k(results, k=10, metric='accuracy_plain'):
    """Successful results by accuracy descending, ties in grid order."""
    if k < 1:
        raise PreconditionError(f'k must be >= 1, got {k}')
    ranked = sorted((r for r in results if r.succeeded), key=lambda r: (-r.accuracy(metric), r.index))
    return ranked[:k]


def top_k_frame(results, k=10, metric='accuracy_plain'):
    """Ranked table with accuracy in percent, one column per hyperparameter."""
    rows = []
    for r in top_k(results, k, metric):
        row = {ACCURACY_COLUMN: 100.0 * r.accuracy(metric)}
        row.update({TABLE_COLUMNS[axis]: getattr(r.config, axis) for axis in AXES})
        rows.append(row)
    return pd.DataFrame(rows, columns=TOP_K_COLUMNS)


@dataclass
class OptionSummary:
    """Per axis and option: mean accuracy and number of successful experiments."""
    means: Dict[str, Dict[object, float]] = field(default_factory=dict)
    counts: Dict[str, Dict[object, int]] = field(default_factory=dict)
    metric: str = 'accuracy_plain'

    @property
    def empty(self):
        return not any(self.counts.values())

    def mean(self, axis, option):
        return self.means.get(axis, {}).get(option)

    def to_frame(self):
        if self.empty:
            return pd.DataFrame([{'axis': None, 'option': None, 'mean_accuracy': None, 'successes': 0,
                                  'note': 'no successful experiments'}])
        rows = [{'axis': axis, 'option': option, 'mean_accuracy': self.means[axis][option],
                 'successes': self.counts[axis][option], 'note': ''}
                for axis in AXES for option in self.means.get(axis, {})]
        return pd.DataFrame(rows)

    @staticmethod
    def from_frame(frame, metric='accuracy_plain'):
        summary = OptionSummary(metric=metric)
        for row in frame.dropna(subset=['axis']).itertuples(index=False):
            option = int(row.option) if row.axis in NUMERIC_AXES else str(row.option)
            summary.means.setdefault(row.axis, {})[option] = float(row.mean_accuracy)
            summary.counts.setdefault(row.axis, {})[option] = int(row.successes)
        return summary


def option_summary(results, metric='accuracy_plain'):
    rows = [dict(r.config.to_dict(), accuracy=r.accuracy(metric)) for r in results if r.succeeded]
    summary = OptionSummary(metric=metric)
    if not rows:
        logger.warning('No successful experiments; option summary is empty')
        return summary
    frame = pd.DataFrame(rows)
    for axis in AXES:
        grouped = frame.groupby(axis, sort=False)['accuracy']
        summary.means[axis] = {_plain(k): float(v) for k, v in grouped.mean().items()}
        summary.counts[axis] = {_plain(k): int(v) for k, v in grouped.count().items()}
    return summary


def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


def accuracy_bands(results, thresholds=ACCURACY_BANDS, metric='accuracy_plain'):
    """How many successful experiments reach each accuracy threshold."""
    accuracies = np.array([r.accuracy(metric) for r in results if r.succeeded])
    total = len(accuracies)
    rows = []
    for threshold in thresholds:
        count = int(np.sum(accuracies >= threshold)) if total else 0
        rows.append({'threshold': threshold, 'count': count, 'successes': total,
                     'percent': 100.0 * count / total if total else 0.0})
    return pd.DataFrame(rows)


def scatter_frame(results, metric='accuracy_plain'):
    """Experiment index against accuracy; failed experiments carry no accuracy."""
    return pd.DataFrame([{'experiment': r.index, 'status': r.status.value, 'accuracy': r.accuracy(metric),
                          'reason': r.reason.value if r.reason else ''} for r in results])


@dataclass
class Selection:
    config: Hyperparameters
    decisions: List[dict]

    def to_dict(self):
        return {'config': self.config.to_dict(), 'decisions': self.decisions}

    @staticmethod
    def from_dict(selection_dict):
        return Selection(config=Hyperparameters.from_dict(selection_dict['config']),
                         decisions=list(selection_dict.get('decisions', [])))


def _normalize(axis, value):
    if axis == 'optimizer':
        return optimizer_name(value)
    if axis in CATEGORICAL_AXES:
        return ActivationKind.parse(value).value
    return int(value)


def _table_options(table, axis):
    column = TABLE_COLUMNS[axis]
    if column not in table.columns:
        raise UsageError(f'Top-k table lacks column {column}')
    return [_normalize(axis, v) for v in table[column]]


def _mean_over_levels(summaries, axis, option):
    means = [s.mean(axis, option) for s in summaries if s.mean(axis, option) is not None]
    return float(np.mean(means)) if means else None


def _grid_rank(axis, option):
    order = getattr(GridSpace(), axis)
    return order.index(option) if option in order else len(order)


def select_optimal(tables, summaries=None, tolerance=NUMERIC_TOLERANCE):
    """Pick one configuration from the per-level top-k tables and option summaries.

    `tables` maps level -> top-k DataFrame (TOP_K_COLUMNS layout) and
    `summaries` maps level -> OptionSummary. Categorical axes go to the
    option counted most often across all tables (ties: higher mean
    accuracy in the summaries, then grid order). Numeric axes go to the
    option with the higher mean accuracy averaged over levels; when the
    lead is below `tolerance` or there are no summaries, the preferred
    value wins.
    """
    tables = [t for t in (tables or {}).values() if t is not None and len(t)]
    if not tables:
        raise PreconditionError('No successful experiments in any top-k table; nothing to select')
    summaries = [s for s in (summaries or {}).values() if s is not None and not s.empty]
    choice, decisions = {}, []

    for axis in CATEGORICAL_AXES:
        counts = Counter(option for t in tables for option in _table_options(t, axis))
        ranked = sorted(counts, key=lambda o: (-counts[o], -(_mean_over_levels(summaries, axis, o) or 0.0),
                                              _grid_rank(axis, o)))
        winner = ranked[0]
        tied = [o for o in ranked if counts[o] == counts[winner]]
        choice[axis] = winner
        decisions.append({
            'axis': axis,
            'choice': winner,
            'rule': 'majority' if len(tied) == 1 else 'majority-tie-broken',
            'counts': dict(counts.most_common()),
            'rows': int(sum(counts.values())),
        })

    for axis in NUMERIC_AXES:
        candidates = sorted({o for s in summaries for o in s.means.get(axis, {})} or
                            {o for t in tables for o in _table_options(t, axis)})
        means = {o: _mean_over_levels(summaries, axis, o) for o in candidates}
        scored = sorted((o for o in candidates if means[o] is not None), key=lambda o: -means[o])
        preferred = PREFERRED_NUMERIC[axis]
        if len(candidates) == 1:
            winner, rule = candidates[0], 'only-option'
        elif len(scored) >= 2 and means[scored[0]] - means[scored[1]] >= tolerance:
            winner, rule = scored[0], 'higher-mean'
        else:
            # preferred value first, then larger options
            winner = preferred if preferred in candidates else max(candidates)
            rule = 'preferred-on-tie' if scored else 'preferred-no-summary'
        choice[axis] = winner
        decisions.append({'axis': axis, 'choice': winner, 'rule': rule,
                          'means': {str(o): m for o, m in means.items()}})

    for d in decisions:
        logger.info(f"Selected {d['axis']}={d['choice']} ({d['rule']})")
    return Selection(config=Hyperparameters(**choice), decisions=decisions)
