import logging

import numpy as np
import pandas as pd
from sklearn.preprocessing import MinMaxScaler

from mamid.models.flow import FeatureMatrix, FlowDataset
from mamid.utils.error_handler import EmptyFeatureSpaceError, PreconditionError

logger = logging.getLogger(__name__)

IDENTIFIER_FEATURES = ['Flow_ID', 'Src_IP', 'Dst_IP', 'Dst_Port', 'Protocol']

# single-valued across the whole IoTID20 release
IOTID20_CONSTANT_FEATURES = [
    'Fwd_PSH_Flags', 'Fwd_URG_Flags', 'Fwd_Byts/b_Avg', 'Fwd_Pkts/b_Avg', 'Fwd_Blk_Rate_Avg',
    'Bwd_Byts/b_Avg', 'Bwd_Pkts/b_Avg', 'Bwd_Blk_Rate_Avg', 'Init_Fwd_Win_Byts', 'Fwd_Seg_Size_Min',
]

# imputation codes carried per cell on a FeatureMatrix
OBSERVED, POS_INF, NEG_INF, MISSING = 0, 1, 2, 3


def _as_frame(data):
    """Return (numeric frame, labels, text column names, malformed count, prior scaling, prior codes)."""
    if isinstance(data, FeatureMatrix):
        frame = pd.DataFrame(data.values, columns=data.columns)
        return frame, data.labels, [], 0, (data.scale_min, data.scale_max), data.imputed
    if not isinstance(data, FlowDataset):
        data = FlowDataset.from_records(data)
    return data.features.copy(), data.labels, list(data.text.columns), len(data.malformed), None, None


def imputation_codes(values):
    values = np.asarray(values, dtype=np.float64)
    codes = np.full(values.shape, OBSERVED, dtype=np.int8)
    codes[np.isposinf(values)] = POS_INF
    codes[np.isneginf(values)] = NEG_INF
    codes[np.isnan(values)] = MISSING
    return codes


def _fill(values, codes, observed):
    """Write the fill value of each code into `values`, taken from the `observed` reference."""
    values[codes == POS_INF] = observed.max()
    values[codes == NEG_INF] = observed.min()
    values[codes == MISSING] = np.median(observed)
    return values


def sanitize_column(values):
    """Replace +Inf/-Inf with the finite max/min and NaN with the finite median.

    Returns (clean values, counts) or (None, counts) when nothing is finite.
    """
    values = np.array(values, dtype=np.float64)
    codes = imputation_codes(values)
    counts = {'pos_inf': int(np.sum(codes == POS_INF)), 'neg_inf': int(np.sum(codes == NEG_INF)),
              'nan': int(np.sum(codes == MISSING))}
    finite = values[codes == OBSERVED]
    if finite.size == 0:
        return None, counts
    return _fill(values, codes, finite), counts


def preprocess(data):
    """Drop identifier and single-valued features, sanitize, and min-max scale to [0, 1].

    Accepts a FlowDataset, a list of FlowRecord, or an already preprocessed
    FeatureMatrix (in which case the result is unchanged). The position of
    every imputed cell is kept on the result so a later split can refill it
    from training rows only.
    """
    frame, labels, text_columns, malformed, prior, prior_codes = _as_frame(data)
    if len(frame) == 0:
        raise PreconditionError('Cannot preprocess an empty dataset')

    n_input = len(frame.columns) + len(text_columns)
    dropped = [{'column': c, 'reason': 'text'} for c in text_columns]
    for reason, names in (('identifier', IDENTIFIER_FEATURES), ('listed-constant', IOTID20_CONSTANT_FEATURES)):
        for column in names:
            if column in frame.columns:
                frame = frame.drop(columns=column)
                dropped.append({'column': column, 'reason': reason})

    sanitized, kept, codes, columns = [], [], [], []
    for column in frame.columns:
        raw = frame[column].to_numpy()
        values, counts = sanitize_column(raw)
        if values is None:
            dropped.append({'column': column, 'reason': 'no-finite-values'})
            continue
        if any(counts.values()):
            sanitized.append({'column': column, **counts})
        if values.min() == values.max():
            dropped.append({'column': column, 'reason': 'constant'})
            continue
        kept.append(values)
        codes.append(imputation_codes(raw))
        columns.append(column)

    if not columns:
        raise EmptyFeatureSpaceError('Every feature column was dropped; nothing left to learn from')

    raw = np.column_stack(kept)
    imputed = np.column_stack(codes)
    scaler = MinMaxScaler(clip=True)
    values = scaler.fit_transform(raw)
    lo, hi = scaler.data_min_, scaler.data_max_
    # column extremes land exactly on 0 and 1
    values = np.where(raw == lo, 0.0, np.where(raw == hi, 1.0, values))
    if prior is not None:
        # compose with the scaling the input already carried
        keep = [list(data.columns).index(c) for c in columns]
        p_lo, p_hi = prior[0][keep], prior[1][keep]
        lo, hi = (np.where(lo == 0, p_lo, p_lo + lo * (p_hi - p_lo)),
                  np.where(hi == 1, p_hi, p_lo + hi * (p_hi - p_lo)))
        if prior_codes is not None:
            imputed = prior_codes[:, keep]

    for entry in dropped:
        logger.info(f"Dropped column {entry['column']} ({entry['reason']})")
    for entry in sanitized:
        logger.info(f"Sanitized column {entry['column']}: {entry['pos_inf']} +Inf, "
                    f"{entry['neg_inf']} -Inf, {entry['nan']} NaN")

    provenance = {
        'input_rows': int(len(frame)),
        'input_columns': int(n_input),
        'output_columns': len(columns),
        'malformed_cells': int(malformed),
        'dropped': dropped,
        'sanitized': sanitized,
        'scaling': {'columns': columns, 'min': lo.tolist(), 'max': hi.tolist()},
    }
    return FeatureMatrix(
        columns=columns,
        values=values,
        scale_min=lo,
        scale_max=hi,
        labels=labels.reset_index(drop=True),
        provenance=provenance,
        imputed=imputed,
    )


def _refill(raw_train, raw_test, train_codes, test_codes):
    """Redo imputation in both splits from the observed train cells of each column."""
    raw_train, raw_test = raw_train.copy(), raw_test.copy()
    for j in range(raw_train.shape[1]):
        observed = raw_train[train_codes[:, j] == OBSERVED, j]
        if observed.size == 0:
            continue
        _fill(raw_train[:, j], train_codes[:, j], observed)
        _fill(raw_test[:, j], test_codes[:, j], observed)
    return raw_train, raw_test


def rescale_split(train, test):
    """Refit min-max scaling on the train split and apply it to both splits.

    Imputed cells are refilled from train rows first, so no statistic of the
    test rows leaks into either split. Test values outside the train range
    are clipped into [0, 1].
    """
    raw_train, raw_test = train.inverse_transform(), test.inverse_transform()
    if train.imputed is not None and test.imputed is not None:
        raw_train, raw_test = _refill(raw_train, raw_test, train.imputed, test.imputed)

    scaler = MinMaxScaler(clip=True).fit(raw_train)
    lo = scaler.data_min_
    span = np.where(scaler.data_range_ > 0, scaler.data_range_, 1.0)
    clipped = int(np.sum((raw_test < lo) | (raw_test > scaler.data_max_)))
    if clipped:
        logger.info(f'Clipped {clipped} test cells outside the train range')

    def _rebuild(fm, values):
        return FeatureMatrix(columns=list(fm.columns), values=values, scale_min=lo, scale_max=lo + span,
                             labels=fm.labels, provenance=fm.provenance, imputed=fm.imputed)

    return _rebuild(train, scaler.transform(raw_train)), _rebuild(test, scaler.transform(raw_test))
