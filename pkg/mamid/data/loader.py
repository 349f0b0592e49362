import logging
import os

import numpy as np
import pandas as pd

from mamid.models.flow import LABEL_COLUMNS, FlowDataset, Level, check_hierarchy
from mamid.utils.error_handler import DataIOError, LabelingError
from mamid.utils.validation import require_columns

logger = logging.getLogger(__name__)


def load_csv(path):
    """Parse an IoTID20-shaped CSV into a FlowDataset.

    Columns in which no cell parses as a number are kept aside as text
    (addresses, flow ids, timestamps). In numeric columns, non-empty cells
    that do not parse become NaN and are recorded with their row index.
    """
    if not os.path.isfile(path):
        raise DataIOError(f'Data file not found: {path}', path=str(path))
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataIOError(f'Data file is empty: {path}', path=str(path))
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise DataIOError(f'Cannot read {path}: {str(e)}', path=str(path))

    raw.columns = [str(c).strip() for c in raw.columns]
    label_columns = [LABEL_COLUMNS[level] for level in Level]
    require_columns(raw.columns, label_columns, source=path)

    labels = raw[label_columns].apply(lambda s: s.str.strip()).astype(object)
    _check_labels(labels)

    numeric, text, malformed = {}, {}, []
    for column in raw.columns:
        if column in label_columns:
            continue
        cells = raw[column].str.strip()
        parsed = pd.to_numeric(cells.str.replace(r'^([+-]?)infinity$', r'\1inf', case=False, regex=True),
                               errors='coerce')
        empty = cells.isin(['', 'NaN', 'nan', 'NA'])
        failed = parsed.isna() & ~empty
        if failed.any() and failed.sum() == (~empty).sum():
            text[column] = cells
            continue
        for row in np.flatnonzero(failed.to_numpy()):
            malformed.append({'row': int(row), 'column': column, 'value': cells.iloc[row]})
        numeric[column] = parsed.astype(np.float64)

    if malformed:
        logger.warning(f'{len(malformed)} malformed numeric cells in {path}')
    dataset = FlowDataset(
        features=pd.DataFrame(numeric, index=raw.index),
        labels=labels.reset_index(drop=True),
        text=pd.DataFrame(text, index=raw.index),
        malformed=malformed,
    )
    logger.info(f'Loaded {len(dataset)} records with {dataset.features.shape[1]} numeric '
                f'and {dataset.text.shape[1]} text columns from {path}')
    return dataset


def _check_labels(labels):
    """Every row labelled; each subcategory in one category, each category under one binary label."""
    b, c, s = (LABEL_COLUMNS[level] for level in Level)
    missing = labels.eq('').any(axis=1).to_numpy()
    if missing.any():
        row = int(np.flatnonzero(missing)[0])
        raise LabelingError(f'Row {row} has an empty label', row=row)

    for child, parent in ((s, c), (c, b)):
        parents = labels.groupby(child, sort=False)[parent].nunique()
        conflicted = parents[parents > 1]
        if len(conflicted):
            kid = conflicted.index[0]
            rows = labels[labels[child] == kid]
            row = int(rows.index[(rows[parent] != rows[parent].iloc[0]).to_numpy()][0])
            raise LabelingError(f"Row {row}: {child}={kid!r} appears under more than one {parent}", row=row)
    for row, bin_, cat, sub in labels[[b, c, s]].drop_duplicates().itertuples(index=True):
        check_hierarchy(bin_, cat, sub, row=int(row))
