"""Kernel SHAP for opaque models.

Attributions are the solution of a weighted least-squares problem over
feature coalitions. A coalition keeps the explained instance's values on
its features and takes the remaining features from the background rows;
its value is the model output averaged over the background. The
efficiency constraint (base + sum of attributions = f(x)) is imposed
exactly by eliminating the last feature from the regression.
"""
import logging
from dataclasses import dataclass
from math import comb

import numpy as np

from mamid.utils.error_handler import DimensionError, PreconditionError

logger = logging.getLogger(__name__)

# coalitions are enumerated exhaustively up to this many features
MAX_EXACT_FEATURES = 12
DEFAULT_COALITIONS = 2048
RIDGE = 1e-8
MAX_CONDITION = 1e12
ROWS_PER_CHUNK = 200_000


@dataclass(eq=False)
class Coalitions:
    masks: np.ndarray
    weights: np.ndarray
    exact: bool


def kernel_weight(d, s):
    """Shapley kernel weight of one coalition of size s out of d features (0 < s < d)."""
    return (d - 1) / (comb(d, s) * s * (d - s))


def enumerate_coalitions(d):
    """Every proper non-empty coalition with its kernel weight."""
    codes = np.arange(1, 2 ** d - 1)
    masks = ((codes[:, None] >> np.arange(d)) & 1).astype(bool)
    sizes = masks.sum(axis=1)
    weights = np.array([kernel_weight(d, int(s)) for s in sizes])
    return Coalitions(masks=masks, weights=weights, exact=True)


def sample_coalitions(d, n_samples, rng):
    """Paired coalitions with sizes drawn proportionally to the kernel's total weight per size."""
    sizes = np.arange(1, d)
    size_prob = (d - 1) / (sizes * (d - sizes))
    size_prob = size_prob / size_prob.sum()
    pairs = max(1, n_samples // 2)
    drawn = rng.choice(sizes, size=pairs, p=size_prob)
    masks = np.zeros((2 * pairs, d), dtype=bool)
    for i, s in enumerate(drawn):
        chosen = rng.choice(d, size=int(s), replace=False)
        masks[2 * i, chosen] = True
        masks[2 * i + 1] = ~masks[2 * i]
    return Coalitions(masks=masks, weights=np.full(2 * pairs, 1.0 / (2 * pairs)), exact=False)


def _as_outputs(values, rows):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != rows:
        raise DimensionError(f'Model returned {values.shape[0]} rows for {rows} inputs')
    return values


def coalition_values(predict, background, instance, features, masks):
    """Mean model output over the background for each coalition mask (rows of `masks`)."""
    nb = background.shape[0]
    per_chunk = max(1, ROWS_PER_CHUNK // nb)
    out = []
    for start in range(0, len(masks), per_chunk):
        chunk = masks[start:start + per_chunk]
        synthetic = np.repeat(background[None, :, :], len(chunk), axis=0)
        for j, feature in enumerate(features):
            on = chunk[:, j]
            synthetic[on, :, feature] = instance[feature]
        flat = synthetic.reshape(-1, background.shape[1])
        values = _as_outputs(predict(flat), flat.shape[0])
        out.append(values.reshape(len(chunk), nb, -1).mean(axis=1))
    return np.vstack(out)


def _solve(masks, weights, values, fx, base):
    """Weighted least squares with sum(phi) = fx - base enforced by substitution."""
    d = masks.shape[1]
    total = fx - base
    z = masks.astype(np.float64)
    if d == 1:
        return total[None, :]
    x = z[:, :-1] - z[:, -1:]
    y = values - base - z[:, -1:] * total
    xw = x * weights[:, None]
    a = x.T @ xw
    b = xw.T @ y
    try:
        if np.linalg.cond(a) > MAX_CONDITION:
            raise np.linalg.LinAlgError('ill-conditioned')
        head = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        logger.warning(f'Kernel SHAP system is singular over {len(masks)} coalitions; solving with ridge {RIDGE}')
        ridge = RIDGE * max(np.trace(a) / a.shape[0], 1.0)
        head = np.linalg.solve(a + ridge * np.eye(a.shape[0]), b)
    last = total - head.sum(axis=0)
    return np.vstack([head, last[None, :]])


def kernel_shap(predict, background, instance, n_coalition_samples=DEFAULT_COALITIONS, seed=0,
                features=None):
    """Attributions of one instance.

    `predict` maps an (n, width) array to n outputs (vector or (n, c)).
    `features` lists the explained column indices (default: all); the
    other columns stay at the instance's values in every coalition.
    Returns (phi of shape (len(features), c), base of shape (c,), f(x) of shape (c,)).
    """
    background = np.asarray(background, dtype=np.float64)
    instance = np.asarray(instance, dtype=np.float64).ravel()
    if background.ndim != 2 or background.shape[0] == 0:
        raise PreconditionError('Background set must be a non-empty matrix')
    if instance.shape[0] != background.shape[1]:
        raise DimensionError(f'Instance has {instance.shape[0]} features, background {background.shape[1]}')
    features = list(range(instance.shape[0])) if features is None else [int(f) for f in features]
    if not features:
        raise PreconditionError('No features to explain')

    # unexplained columns are fixed at the instance's values
    held = np.setdiff1d(np.arange(instance.shape[0]), features)
    background = background.copy()
    background[:, held] = instance[held]

    fx = _as_outputs(predict(instance[None, :]), 1)[0]
    base = _as_outputs(predict(background), background.shape[0]).mean(axis=0)
    d = len(features)
    if d == 1:
        return (fx - base)[None, :], base, fx

    if d <= MAX_EXACT_FEATURES or 2 ** d - 2 <= n_coalition_samples:
        coalitions = enumerate_coalitions(d)
    else:
        coalitions = sample_coalitions(d, n_coalition_samples, np.random.default_rng(seed))
    values = coalition_values(predict, background, instance, features, coalitions.masks)
    phi = _solve(coalitions.masks, coalitions.weights, values, fx, base)
    return phi, base, fx
