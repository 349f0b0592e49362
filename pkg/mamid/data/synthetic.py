"""Synthetic IoTID20-shaped datasets with Gaussian class clusters."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd

from mamid.data.preprocessing import IOTID20_CONSTANT_FEATURES
from mamid.data.sampling import apportion
from mamid.models.flow import (IOTID20_CATEGORIES, IOTID20_SUBCATEGORIES, IOTID20_SUBCATEGORY_COUNTS,
                               LABEL_COLUMNS, FlowDataset, Level)
from mamid.utils.error_handler import PreconditionError

logger = logging.getLogger(__name__)

# numeric IoTID20 flow features used as synthetic column names
FLOW_FEATURE_NAMES = [
    'Flow_Duration', 'Tot_Fwd_Pkts', 'Tot_Bwd_Pkts', 'TotLen_Fwd_Pkts', 'TotLen_Bwd_Pkts',
    'Fwd_Pkt_Len_Max', 'Fwd_Pkt_Len_Min', 'Fwd_Pkt_Len_Mean', 'Bwd_Pkt_Len_Max', 'Bwd_Pkt_Len_Mean',
    'Flow_Byts/s', 'Flow_Pkts/s', 'Flow_IAT_Mean', 'Flow_IAT_Std', 'Flow_IAT_Max', 'Flow_IAT_Min',
    'Fwd_IAT_Tot', 'Fwd_IAT_Mean', 'Bwd_IAT_Tot', 'Bwd_IAT_Mean', 'Fwd_Header_Len', 'Bwd_Header_Len',
    'Fwd_Pkts/s', 'Bwd_Pkts/s', 'Pkt_Len_Min', 'Pkt_Len_Max', 'Pkt_Len_Mean', 'Pkt_Len_Std',
    'Pkt_Len_Var', 'SYN_Flag_Cnt', 'ACK_Flag_Cnt', 'Down/Up_Ratio', 'Pkt_Size_Avg', 'Init_Bwd_Win_Byts',
]


@dataclass
class SynthSpec:
    """Class proportions plus per-class Gaussian feature parameters."""
    proportions: Dict[str, float]
    means: Dict[str, List[float]]
    sigma: float = 1.0
    feature_names: List[str] = field(default_factory=list)
    subcategory_parent: Dict[str, str] = field(default_factory=lambda: dict(IOTID20_SUBCATEGORIES))
    category_parent: Dict[str, str] = field(default_factory=lambda: dict(IOTID20_CATEGORIES))
    iotid20_columns: bool = True

    def __post_init__(self):
        total = sum(self.proportions.values())
        if abs(total - 1.0) > 1e-9:
            raise PreconditionError(f'Class proportions must sum to 1, got {total}')
        if self.sigma <= 0:
            raise PreconditionError(f'sigma must be > 0, got {self.sigma}')
        widths = {len(m) for m in self.means.values()}
        if len(widths) != 1:
            raise PreconditionError('Every class needs a mean vector of the same length')
        width = widths.pop()
        if not self.feature_names:
            self.feature_names = FLOW_FEATURE_NAMES[:width] if width <= len(FLOW_FEATURE_NAMES) else \
                [f'feature_{j}' for j in range(width)]
        missing = set(self.proportions) - set(self.means)
        if missing:
            raise PreconditionError(f'No mean vector for classes {sorted(missing)}')

    @property
    def n_features(self):
        return len(self.feature_names)


def iotid20_spec(n_features=12, separation=8.0, sigma=1.0):
    """Nine-class spec with the IoTID20 subcategory proportions.

    Class i (alphabetical) is centred at `separation` on feature i, so class
    means sit sqrt(2) * separation apart.
    """
    names = sorted(IOTID20_SUBCATEGORY_COUNTS)
    if n_features < len(names):
        raise PreconditionError(f'Need at least {len(names)} features for separated classes')
    total = sum(IOTID20_SUBCATEGORY_COUNTS.values())
    proportions = {name: IOTID20_SUBCATEGORY_COUNTS[name] / total for name in names}
    # absorb float drift so the proportions sum to exactly 1
    proportions[names[-1]] = 1.0 - sum(proportions[name] for name in names[:-1])
    means = {}
    for i, name in enumerate(names):
        mean = [0.0] * n_features
        mean[i] = float(separation)
        means[name] = mean
    return SynthSpec(proportions=proportions, means=means, sigma=sigma)


def synth_generate(spec, n, seed):
    """Draw n records; class counts are within one record of n * proportion."""
    if n < 0:
        raise PreconditionError(f'n must be >= 0, got {n}')
    names = sorted(spec.proportions)
    weights = np.array([spec.proportions[name] for name in names])
    # apportion against a fine integer grid of the proportions
    counts = apportion(np.round(weights * 10 ** 9).astype(np.int64), n) if n else np.zeros(len(names), int)

    rng = np.random.default_rng(seed)
    blocks, subcats = [], []
    for name, count in zip(names, counts):
        mean = np.asarray(spec.means[name], dtype=np.float64)
        blocks.append(rng.normal(mean, spec.sigma, size=(int(count), len(mean))))
        subcats.extend([name] * int(count))
    values = np.vstack(blocks) if blocks else np.zeros((0, spec.n_features))
    order = rng.permutation(len(subcats))
    values = values[order]
    subcats = np.array(subcats, dtype=object)[order]

    categories = [spec.subcategory_parent.get(s, s) for s in subcats]
    binaries = [spec.category_parent.get(c, 'Anomaly') for c in categories]
    features = pd.DataFrame(values, columns=spec.feature_names)
    text = pd.DataFrame()
    if spec.iotid20_columns:
        features, text = _add_iotid20_columns(features, rng)
    labels = pd.DataFrame({
        LABEL_COLUMNS[Level.BINARY]: binaries,
        LABEL_COLUMNS[Level.CATEGORY]: categories,
        LABEL_COLUMNS[Level.SUBCATEGORY]: list(subcats),
    }, dtype=object)
    logger.info(f'Generated {len(labels)} synthetic records over {len(names)} classes')
    return FlowDataset(features=features, labels=labels, text=text)


def _add_iotid20_columns(features, rng):
    """Identifier columns and the always-constant columns of the real release."""
    n = len(features)
    hosts = rng.integers(1, 255, size=(n, 2))
    src = [f'192.168.0.{a}' for a in hosts[:, 0]]
    dst = [f'192.168.0.{b}' for b in hosts[:, 1]]
    dst_port = rng.integers(1, 65536, size=n)
    protocol = rng.choice([6, 17], size=n)
    text = pd.DataFrame({
        'Flow_ID': [f'{s}-{d}-{p}-{q}' for s, d, p, q in zip(src, dst, dst_port, protocol)],
        'Src_IP': src,
        'Dst_IP': dst,
    })
    numeric = pd.DataFrame({'Dst_Port': dst_port.astype(np.float64), 'Protocol': protocol.astype(np.float64)})
    constants = pd.DataFrame(0.0, index=range(n), columns=IOTID20_CONSTANT_FEATURES)
    return pd.concat([numeric, features, constants], axis=1), text


def to_csv_frame(dataset):
    """Flatten a FlowDataset into the IoTID20 column layout."""
    frame = pd.concat([dataset.text, dataset.features], axis=1)
    for column in dataset.labels.columns:
        frame[column] = dataset.labels[column].to_numpy()
    return frame
