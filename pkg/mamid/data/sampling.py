import numpy as np
from sklearn.model_selection import train_test_split

from mamid.models.flow import Level
from mamid.utils.error_handler import PreconditionError
from mamid.utils.validation import require_fraction


def apportion(class_sizes, total):
    """Split `total` across classes proportionally; each share is floor or ceil of its quota.

    Largest remainder, except that classes whose quota is at least 0.5 but
    whose floor is 0 are served first so they are not left empty.
    """
    class_sizes = np.asarray(class_sizes, dtype=np.int64)
    n = int(class_sizes.sum())
    if total > n:
        raise PreconditionError(f'Cannot draw {total} records from {n}')
    if n == 0 or total == 0:
        return np.zeros_like(class_sizes)
    quota = class_sizes * (total / n)
    shares = np.floor(quota).astype(np.int64)
    remainder = quota - shares
    left = total - int(shares.sum())
    starving = (shares == 0) & (remainder >= 0.5)
    order = sorted(range(len(quota)), key=lambda i: (not starving[i], -remainder[i], i))
    for i in order[:left]:
        shares[i] += 1
    return np.minimum(shares, class_sizes)


def _strata(data):
    labels = data.label(Level.SUBCATEGORY).to_numpy()
    names = sorted(set(labels))
    return [np.flatnonzero(labels == name) for name in names]


def stratified_subset(data, n, seed):
    """Draw n records preserving subcategory proportions; membership depends on seed only."""
    if n < 0 or n > len(data):
        raise PreconditionError(f'Subset size must lie in [0, {len(data)}], got {n}')
    strata = _strata(data)
    shares = apportion([len(s) for s in strata], n)
    rng = np.random.default_rng(seed)
    chosen = [rng.choice(rows, size=share, replace=False) for rows, share in zip(strata, shares)]
    return data.take(np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=np.int64))


def stratified_split(data, test_fraction, seed):
    """Disjoint stratified (train, test) whose union is the input; test size is round(n * fraction).

    Every subcategory needs at least two rows, one for each side.
    """
    require_fraction('test_fraction', test_fraction)
    if len(data) == 0:
        raise PreconditionError('Cannot split an empty dataset')
    n_test = int(round(len(data) * test_fraction))
    try:
        train_idx, test_idx = train_test_split(np.arange(len(data)), test_size=n_test,
                                               stratify=data.label(Level.SUBCATEGORY).to_numpy(),
                                               random_state=seed)
    except ValueError as e:
        raise PreconditionError(f'Cannot split {len(data)} rows with test fraction {test_fraction}: {str(e)}')
    return data.take(np.sort(train_idx)), data.take(np.sort(test_idx))
