import numpy as np
import pandas as pd

from mamid.models.flow import LABEL_COLUMNS, FeatureMatrix, FlowDataset, LabelHierarchy, Level
from mamid.utils.error_handler import LabelingError


def _label_series(records, level):
    if isinstance(records, (FlowDataset, FeatureMatrix)):
        return records.label(level)
    return pd.Series([r.label(level) for r in records], dtype=object)


def encode_labels(records, level, classes=None):
    """One-hot encode one label level; class order is alphabetical unless `classes` is given.

    With explicit `classes`, any label outside them is a labeling error.
    """
    level = Level.parse(level)
    labels = _label_series(records, level).reset_index(drop=True)
    blank = labels.isna() | (labels.astype(str).str.strip() == '')
    if blank.any():
        row = int(np.flatnonzero(blank.to_numpy())[0])
        raise LabelingError(f'Row {row} has no {LABEL_COLUMNS[level]} label', row=row)

    class_names = sorted(labels.unique()) if classes is None else list(classes)
    index = {name: i for i, name in enumerate(class_names)}
    codes = labels.map(index)
    unknown = codes.isna().to_numpy()
    if unknown.any():
        row = int(np.flatnonzero(unknown)[0])
        raise LabelingError(f'Unknown {level.value} label {labels.iloc[row]!r} at row {row}', row=row)

    codes = codes.to_numpy(dtype=np.int64)
    onehot = np.zeros((len(codes), len(class_names)))
    onehot[np.arange(len(codes)), codes] = 1.0
    counts = np.bincount(codes, minlength=len(class_names))
    return onehot, LabelHierarchy(level=level, class_names=class_names, counts=counts.tolist())


def targets_for_output(onehot, output_dim):
    """Collapse a two-class one-hot matrix to a single 0/1 column for a one-unit output.

    Column 1 of the alphabetical binary order (Normal) is the positive unit.
    """
    if output_dim == 1 and onehot.shape[1] == 2:
        return onehot[:, 1:2].copy()
    return onehot
