import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from mamid.engine.losses import LossKind, check_pairing, compute_loss
from mamid.engine.optimizers import OptimizerState, optimizer_step
from mamid.engine.propagation import backward_from_cache, forward_cache, predict_classes
from mamid.utils.error_handler import PreconditionError, PropagationError, TrainingDivergedError
from mamid.utils.validation import require_finite, require_positive, require_shape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    shuffle_seed: int = 0
    loss: LossKind = LossKind.CATEGORICAL_CROSS_ENTROPY

    def __post_init__(self):
        require_positive('epochs', self.epochs)
        require_positive('batch_size', self.batch_size)
        object.__setattr__(self, 'loss', LossKind(self.loss))


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float

    def to_dict(self):
        return {'epoch': self.epoch, 'loss': self.loss, 'accuracy': self.accuracy}


@dataclass
class TrainResult:
    network: object
    history: List[EpochRecord] = field(default_factory=list)
    steps: int = 0


def _accuracy(outputs, targets):
    truth = predict_classes(targets) if targets.shape[1] > 1 else targets[:, 0].astype(np.int64)
    return float(np.mean(predict_classes(outputs) == truth))


def train(net, features, targets, cfg, optimizer, seed: Optional[int] = None):
    """Mini-batch training; history holds per-epoch loss and accuracy over the batches seen.

    Runs epochs * ceil(n / batch_size) optimizer steps, reshuffling each epoch
    from a generator seeded once, so (seed, data, cfg) fixes the weights.
    """
    features = require_finite('features', features)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    require_shape('features', features, (None, net.input_dim))
    n = features.shape[0]
    require_shape('targets', targets, (n, net.output_dim))
    if not 1 <= cfg.batch_size <= n:
        raise PreconditionError(f'batch_size must lie in [1, {n}], got {cfg.batch_size}')
    check_pairing(net.output_activation, cfg.loss)

    rng = np.random.default_rng(cfg.shuffle_seed if seed is None else seed)
    params = net.copy().parameters()
    state = OptimizerState.zeros(optimizer, params)
    history = []
    batches = math.ceil(n / cfg.batch_size)

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum, correct = 0.0, 0.0
        for b in range(batches):
            idx = order[b * cfg.batch_size:(b + 1) * cfg.batch_size]
            x, y = features[idx], targets[idx]
            current = net.with_parameters(params)
            try:
                pre, post = forward_cache(current, x)
            except PropagationError as e:
                raise TrainingDivergedError(f"Forward pass failed in epoch {epoch}: {e.message}", epoch=epoch)
            outputs = post[-1]
            batch_loss = compute_loss(cfg.loss, outputs, y)
            if not math.isfinite(batch_loss):
                raise TrainingDivergedError(f'Loss became {batch_loss} in epoch {epoch}', epoch=epoch)
            loss_sum += batch_loss * len(idx)
            correct += _accuracy(outputs, y) * len(idx)
            grads = backward_from_cache(current, pre, post, y)
            if not all(np.all(np.isfinite(g)) for g in grads):
                raise TrainingDivergedError(f'Gradients became non-finite in epoch {epoch}', epoch=epoch)
            params, state = optimizer_step(optimizer, state, params, grads)
            if not net.with_parameters(params).is_finite():
                raise TrainingDivergedError(f'Parameters became non-finite in epoch {epoch}', epoch=epoch)
        history.append(EpochRecord(epoch=epoch, loss=loss_sum / n, accuracy=correct / n))
        logger.debug(f'epoch {epoch}: loss={loss_sum / n:.6f} accuracy={correct / n:.6f}')

    return TrainResult(network=net.with_parameters(params), history=history, steps=state.t)
