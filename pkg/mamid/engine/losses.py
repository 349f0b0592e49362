from enum import Enum

import numpy as np

from mamid.engine.activations import ActivationKind
from mamid.utils.error_handler import DimensionError, IncompatibleConfigurationError

LOG_CLIP = 1e-12


class LossKind(str, Enum):
    BINARY_CROSS_ENTROPY = 'binary_cross_entropy'
    CATEGORICAL_CROSS_ENTROPY = 'categorical_cross_entropy'


# output activation -> loss whose gradient w.r.t. the output pre-activation is (p - t) / n
CANONICAL_PAIRS = {
    ActivationKind.SIGMOID: LossKind.BINARY_CROSS_ENTROPY,
    ActivationKind.SOFTMAX: LossKind.CATEGORICAL_CROSS_ENTROPY,
}


def loss_for(output_activation):
    """Return the loss paired with an output activation."""
    kind = ActivationKind.parse(output_activation)
    if kind not in CANONICAL_PAIRS:
        raise IncompatibleConfigurationError(
            f'Output activation {kind.value} has no classification loss',
            output_activation=kind.value)
    return CANONICAL_PAIRS[kind]


def check_pairing(output_activation, loss_kind):
    expected = loss_for(output_activation)
    if LossKind(loss_kind) is not expected:
        raise IncompatibleConfigurationError(
            f'{LossKind(loss_kind).value} cannot be paired with a {ActivationKind.parse(output_activation).value} output')
    return expected


def compute_loss(loss_kind, predictions, targets):
    """Mean over the batch of binary or categorical cross-entropy."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.ndim == 1:
        predictions = predictions[:, None]
    if targets.ndim == 1:
        targets = targets[:, None]
    if predictions.shape != targets.shape:
        raise DimensionError(f'predictions {predictions.shape} and targets {targets.shape} differ')
    if predictions.shape[0] == 0:
        raise DimensionError('empty batch')

    if LossKind(loss_kind) is LossKind.BINARY_CROSS_ENTROPY:
        p = np.clip(predictions, LOG_CLIP, 1.0 - LOG_CLIP)
        per_row = -np.sum(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p), axis=1)
    else:
        p = np.clip(predictions, LOG_CLIP, 1.0)
        per_row = -np.sum(targets * np.log(p), axis=1)
    return float(np.mean(per_row))
