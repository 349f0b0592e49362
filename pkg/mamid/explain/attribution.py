import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from mamid.data.sampling import stratified_subset
from mamid.engine.propagation import forward
from mamid.explain.kernel_shap import DEFAULT_COALITIONS, kernel_shap
from mamid.utils.error_handler import PreconditionError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class AttributionReport:
    """Attributions of n samples over d explained features for c model outputs.

    `base_value` is the mean output over the background. When only some
    features are explained, the others stay at each sample's own values,
    so every sample has its own starting point in `sample_base`.
    """
    base_value: np.ndarray
    shap_values: np.ndarray
    feature_names: List[str]
    data: np.ndarray
    predictions: np.ndarray
    sample_base: np.ndarray
    output_names: List[str] = field(default_factory=list)

    @property
    def n_samples(self):
        return self.shap_values.shape[0]

    def efficiency_gap(self):
        """Largest |base + sum(shap) - prediction| over samples and outputs."""
        if self.n_samples == 0:
            return 0.0
        return float(np.max(np.abs(self.sample_base + self.shap_values.sum(axis=1) - self.predictions)))


def output_names(network, class_names):
    # a one-unit sigmoid output scores the second class of the alphabetical pair
    if network.output_dim == 1 and len(class_names) == 2:
        return [class_names[1]]
    return list(class_names)


def top_variance_features(values, k):
    """Indices of the k columns with the largest variance, largest first, ties by column order."""
    variances = np.var(np.asarray(values, dtype=np.float64), axis=0)
    order = np.argsort(-variances, kind='stable')
    return [int(i) for i in order[:min(k, len(order))]]


def background_sample(train, size, seed):
    """Stratified background rows from the training split."""
    if len(train) == 0:
        raise PreconditionError('Background needs at least one training row')
    return stratified_subset(train, min(size, len(train)), seed).values


def explain_network(network, background, instances, feature_names, class_names, features=None,
                    n_coalition_samples=DEFAULT_COALITIONS, seed=0):
    """Kernel SHAP attributions of every row of `instances` for each network output."""
    background = np.asarray(background, dtype=np.float64)
    instances = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    features = list(range(instances.shape[1])) if features is None else list(features)
    names = output_names(network, class_names)

    def predict(x):
        return forward(network, x)

    shap_values, bases = [], []
    for i, row in enumerate(instances):
        phi, base, _ = kernel_shap(predict, background, row, n_coalition_samples=n_coalition_samples,
                                   seed=seed + i, features=features)
        shap_values.append(phi)
        bases.append(base)
    c = len(names)
    report = AttributionReport(
        base_value=forward(network, background).mean(axis=0),
        shap_values=np.array(shap_values) if shap_values else np.zeros((0, len(features), c)),
        feature_names=[feature_names[j] for j in features],
        data=instances[:, features],
        predictions=forward(network, instances) if len(instances) else np.zeros((0, c)),
        sample_base=np.array(bases) if bases else np.zeros((0, c)),
        output_names=names,
    )
    logger.info(f'Explained {report.n_samples} samples over {len(features)} features, '
                f'efficiency gap {report.efficiency_gap():.2e}')
    return report


def feature_importance(report):
    """Mean |shap| per output and in total, features ranked by the total."""
    magnitude = np.abs(report.shap_values).mean(axis=0) if report.n_samples else \
        np.zeros((len(report.feature_names), len(report.output_names)))
    frame = pd.DataFrame(magnitude, columns=report.output_names)
    frame.insert(0, 'feature', report.feature_names)
    frame['total'] = magnitude.sum(axis=1)
    frame = frame.sort_values('total', ascending=False, kind='stable').reset_index(drop=True)
    frame.insert(0, 'rank', np.arange(1, len(frame) + 1))
    return frame


def summary_frame(report):
    """Long table of (sample, feature, output) with feature value, its percentile, and shap."""
    if report.n_samples == 0:
        return pd.DataFrame(columns=['sample', 'feature', 'class', 'value', 'percentile', 'shap'])
    percentiles = pd.DataFrame(report.data).rank(pct=True, method='average').to_numpy()
    n, d, c = report.shap_values.shape
    sample, feature, output = np.meshgrid(np.arange(n), np.arange(d), np.arange(c), indexing='ij')
    sample, feature, output = sample.ravel(), feature.ravel(), output.ravel()
    return pd.DataFrame({
        'sample': sample,
        'feature': np.array(report.feature_names, dtype=object)[feature],
        'class': np.array(report.output_names, dtype=object)[output],
        'value': report.data[sample, feature],
        'percentile': percentiles[sample, feature],
        'shap': report.shap_values.ravel(),
    })


@dataclass
class ForceData:
    sample: int
    output: str
    base_value: float
    prediction: float
    contributions: List[dict]

    def to_rows(self):
        return [{'sample': self.sample, 'class': self.output, 'base_value': self.base_value,
                 'prediction': self.prediction, **c} for c in self.contributions]


def force_data(report, sample_index, class_index):
    """Non-zero contributions of one sample, largest magnitude first; base + sum = prediction."""
    if not 0 <= sample_index < report.n_samples:
        raise PreconditionError(f'sample index {sample_index} outside [0, {report.n_samples})')
    if not 0 <= class_index < len(report.output_names):
        raise PreconditionError(f'class index {class_index} outside [0, {len(report.output_names)})')
    phi = report.shap_values[sample_index, :, class_index]
    order = np.argsort(-np.abs(phi), kind='stable')
    contributions = [{'feature': report.feature_names[j], 'value': float(report.data[sample_index, j]),
                      'shap': float(phi[j])} for j in order if phi[j] != 0.0]
    return ForceData(
        sample=sample_index,
        output=report.output_names[class_index],
        base_value=float(report.sample_base[sample_index, class_index]),
        prediction=float(report.predictions[sample_index, class_index]),
        contributions=contributions,
    )
