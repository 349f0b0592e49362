"""Grid experiments: one network per configuration, trained and scored on a fixed split."""
import json
import logging
import multiprocessing
import os
import time
from collections import Counter
from dataclasses import dataclass
from typing import List

import numpy as np

from mamid.data.labels import encode_labels, targets_for_output
from mamid.data.preprocessing import rescale_split
from mamid.data.sampling import stratified_split
from mamid.engine.activations import ActivationKind
from mamid.engine.losses import loss_for
from mamid.engine.optimizers import make_optimizer
from mamid.engine.propagation import forward, init_network, predict_classes
from mamid.engine.trainer import TrainConfig, train
from mamid.evaluation.metrics import evaluate
from mamid.models.experiment import ExperimentResult, FailureReason, Status
from mamid.models.flow import FeatureMatrix, LabelHierarchy, Level
from mamid.tuning.grid import enumerate_grid
from mamid.utils.error_handler import (DataIOError, IncompatibleConfigurationError, PreconditionError,
                                       TrainingDivergedError, UsageError)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class LevelData:
    """Scaled train/test features with one-hot targets for one label level."""
    level: Level
    train: FeatureMatrix
    test: FeatureMatrix
    train_targets: np.ndarray
    test_targets: np.ndarray
    hierarchy: LabelHierarchy

    @property
    def class_names(self):
        return self.hierarchy.class_names

    @property
    def n_classes(self):
        return self.hierarchy.n_classes


def prepare_level_data(features, level, test_fraction, seed):
    """Stratified split, scaling refit on the train part, labels encoded over all classes."""
    level = Level.parse(level)
    train_fm, test_fm = stratified_split(features, test_fraction, seed)
    train_fm, test_fm = rescale_split(train_fm, test_fm)
    _, hierarchy = encode_labels(features, level)
    train_targets, _ = encode_labels(train_fm, level, classes=hierarchy.class_names)
    test_targets, _ = encode_labels(test_fm, level, classes=hierarchy.class_names)
    if hierarchy.n_classes < 2:
        raise PreconditionError(f'{level.value} labels have a single class; nothing to classify')
    logger.info(f'{level.value}: {len(train_fm)} train / {len(test_fm)} test rows, '
                f'{hierarchy.n_classes} classes')
    return LevelData(level=level, train=train_fm, test=test_fm, train_targets=train_targets,
                     test_targets=test_targets, hierarchy=hierarchy)


def output_units(output_activation, n_classes):
    """Output width for an activation; binary sigmoid is one unit, everything else one per class."""
    kind = ActivationKind.parse(output_activation)
    if kind is ActivationKind.SIGMOID and n_classes == 2:
        return 1
    return n_classes


def fit_config(config, data, seed):
    """Train the one-hidden-layer network for `config`; returns the TrainResult."""
    loss = loss_for(config.activation_output)
    units = output_units(config.activation_output, data.n_classes)
    net = init_network(data.train.n_features, [config.neurons], units,
                       config.activation_hidden, config.activation_output, seed=seed)
    batch_size = config.batch_size
    if batch_size > len(data.train):
        logger.warning(f'Batch size {batch_size} exceeds {len(data.train)} training rows; clamped')
        batch_size = len(data.train)
    cfg = TrainConfig(epochs=config.epochs, batch_size=batch_size, shuffle_seed=seed, loss=loss)
    targets = targets_for_output(data.train_targets, units)
    return train(net, data.train.values, targets, cfg, make_optimizer(config.optimizer))


def score(network, data):
    """Classification report of a trained network on the test split."""
    predictions = predict_classes(forward(network, data.test.values))
    truth = np.argmax(data.test_targets, axis=1)
    return evaluate(predictions, truth, data.class_names)


def run_experiment(config, data, seed, index=0):
    """Train and evaluate one configuration; incompatible or diverging configs come back as failed."""
    started = time.perf_counter()
    base = dict(index=index, config=config, level=data.level, seed=seed)
    try:
        result = fit_config(config, data, seed)
    except IncompatibleConfigurationError as e:
        return ExperimentResult(status=Status.FAILED, reason=FailureReason.INCOMPATIBLE_CONFIGURATION,
                                detail=e.message, **base)
    except TrainingDivergedError as e:
        logger.info(f'Experiment {index} ({config.label()}) diverged in epoch {e.epoch}')
        return ExperimentResult(status=Status.FAILED, reason=FailureReason.TRAINING_DIVERGED,
                                detail=e.message, **base)
    report = score(result.network, data)
    return ExperimentResult(status=Status.SUCCESS, report=report,
                            wall_time=time.perf_counter() - started, **base)


class Ledger:
    """Append-only JSONL record of finished experiments, one object per line."""

    def __init__(self, path):
        self.path = path

    def load(self):
        """Return {index: ExperimentResult}.

        A truncated last line is ignored and cut from the file, so later
        appends start on a clean line.
        """
        if not os.path.isfile(self.path):
            return {}
        results = {}
        with open(self.path) as f:
            lines = f.read().splitlines()
        for number, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                result = ExperimentResult.from_dict(json.loads(line))
            except (KeyError, TypeError, ValueError, UsageError) as e:
                if number == len(lines) - 1:
                    logger.warning(f'Dropping incomplete last ledger line in {self.path}')
                    self._truncate(lines[:number])
                    continue
                raise DataIOError(f'Corrupt ledger line {number + 1} in {self.path}: {str(e)}',
                                  path=str(self.path))
            results[result.index] = result
        return results

    def _truncate(self, lines):
        with open(self.path, 'w') as f:
            f.writelines(line + '\n' for line in lines)

    def _ends_cleanly(self):
        if not os.path.isfile(self.path) or os.path.getsize(self.path) == 0:
            return True
        with open(self.path, 'rb') as f:
            f.seek(-1, os.SEEK_END)
            return f.read(1) == b'\n'

    def append(self, result):
        prefix = '' if self._ends_cleanly() else '\n'
        with open(self.path, 'a') as f:
            f.write(prefix + json.dumps(result.to_dict(), sort_keys=True) + '\n')

    def rewrite(self, results):
        """Replace the ledger with `results` in grid order."""
        with open(self.path, 'w') as f:
            for result in results:
                f.write(json.dumps(result.to_dict(), sort_keys=True) + '\n')


_worker_data = None


def _init_worker(data):
    global _worker_data
    _worker_data = data


def _run_task(task):
    index, config, seed = task
    return run_experiment(config, _worker_data, seed, index=index)


def run_grid(space, data, seed, parallelism=1, ledger=None) -> List[ExperimentResult]:
    """Run every grid configuration; results come back in grid order whatever the scheduling.

    With a ledger, configurations already recorded (same config, level and
    seed) are reused and new results are appended as they finish.
    """
    if parallelism < 1:
        raise PreconditionError(f'parallelism must be >= 1, got {parallelism}')
    grid = enumerate_grid(space)
    done = {}
    if ledger is not None:
        for index, result in ledger.load().items():
            if (index < len(grid) and result.config == grid[index] and result.level == data.level
                    and result.seed == seed):
                done[index] = result
        if done:
            logger.info(f'Resuming {data.level.value}: {len(done)} of {len(grid)} experiments already in ledger')

    tasks = [(i, config, seed) for i, config in enumerate(grid) if i not in done]
    results = dict(done)

    def _collect(result):
        results[result.index] = result
        if ledger is not None:
            ledger.append(result)

    if parallelism == 1 or len(tasks) <= 1:
        for index, config, task_seed in tasks:
            _collect(run_experiment(config, data, task_seed, index=index))
    else:
        with multiprocessing.Pool(parallelism, initializer=_init_worker, initargs=(data,)) as pool:
            for result in pool.imap_unordered(_run_task, tasks):
                _collect(result)

    ordered = [results[i] for i in range(len(grid))]
    if ledger is not None:
        ledger.rewrite(ordered)
    counts = tally(ordered)
    logger.info(f"{data.level.value}: {counts['success']} of {len(ordered)} experiments succeeded, "
                f"{counts['incompatible-configuration']} incompatible, {counts['training-diverged']} diverged")
    return ordered


def tally(results):
    """Success and failure-reason counts of a result list."""
    counts = Counter(r.reason.value if r.reason else r.status.value for r in results)
    return {key: counts.get(key, 0) for key in
            [Status.SUCCESS.value] + [reason.value for reason in FailureReason]}
