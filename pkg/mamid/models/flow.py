from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from mamid.utils.error_handler import LabelingError, UsageError


class Level(str, Enum):
    BINARY = 'binary'
    CATEGORY = 'category'
    SUBCATEGORY = 'subcategory'

    @classmethod
    def parse(cls, value):
        try:
            return cls(getattr(value, 'value', value))
        except ValueError:
            raise UsageError(f'Unknown label level: {value}')


# label column of each level in the IoTID20 CSV
LABEL_COLUMNS = {
    Level.BINARY: 'Label',
    Level.CATEGORY: 'Cat',
    Level.SUBCATEGORY: 'Sub_Cat',
}

# published hierarchy: subcategory -> category -> binary
IOTID20_SUBCATEGORIES = {
    'Normal': 'Normal',
    'DoS-Synflooding': 'DoS',
    'Mirai-Ackflooding': 'Mirai',
    'Mirai-HTTP Flooding': 'Mirai',
    'Mirai-Hostbruteforceg': 'Mirai',
    'Mirai-UDP Flooding': 'Mirai',
    'MITM ARP Spoofing': 'MITM ARP Spoofing',
    'Scan Hostport': 'Scan',
    'Scan Port OS': 'Scan',
}
IOTID20_CATEGORIES = {
    'Normal': 'Normal',
    'DoS': 'Anomaly',
    'Mirai': 'Anomaly',
    'MITM ARP Spoofing': 'Anomaly',
    'Scan': 'Anomaly',
}

# full-dataset support per subcategory
IOTID20_SUBCATEGORY_COUNTS = {
    'Normal': 40073,
    'DoS-Synflooding': 59391,
    'Mirai-Ackflooding': 55124,
    'Mirai-HTTP Flooding': 55818,
    'Mirai-Hostbruteforceg': 121181,
    'Mirai-UDP Flooding': 183554,
    'MITM ARP Spoofing': 35377,
    'Scan Hostport': 22192,
    'Scan Port OS': 53073,
}


@dataclass
class FlowRecord:
    """One flow: numeric features plus its three-level label."""
    features: Dict[str, float]
    label_binary: str
    label_category: str
    label_subcategory: str

    def __post_init__(self):
        check_hierarchy(self.label_binary, self.label_category, self.label_subcategory)

    def label(self, level):
        return {
            Level.BINARY: self.label_binary,
            Level.CATEGORY: self.label_category,
            Level.SUBCATEGORY: self.label_subcategory,
        }[Level.parse(level)]


def check_hierarchy(binary, category, subcategory, row=None):
    """Known IoTID20 names must follow the published hierarchy."""
    expected_category = IOTID20_SUBCATEGORIES.get(subcategory)
    if expected_category is not None and category != expected_category:
        raise LabelingError(f'Subcategory {subcategory!r} belongs to {expected_category!r}, not {category!r}', row=row)
    expected_binary = IOTID20_CATEGORIES.get(category)
    if expected_binary is not None and binary != expected_binary:
        raise LabelingError(f'Category {category!r} is {expected_binary!r}, not {binary!r}', row=row)


@dataclass
class LabelHierarchy:
    level: Level
    class_names: List[str]
    counts: List[int]

    @property
    def n_classes(self):
        return len(self.class_names)

    def to_dict(self):
        return {
            'level': self.level.value,
            'class_names': list(self.class_names),
            'counts': [int(c) for c in self.counts],
        }

    @staticmethod
    def from_dict(hierarchy_dict):
        return LabelHierarchy(
            level=Level.parse(hierarchy_dict['level']),
            class_names=list(hierarchy_dict['class_names']),
            counts=list(hierarchy_dict['counts']),
        )


@dataclass(eq=False)
class FlowDataset:
    """Parsed CSV: numeric feature columns, text columns and the label columns."""
    features: pd.DataFrame
    labels: pd.DataFrame
    text: pd.DataFrame = field(default_factory=pd.DataFrame)
    malformed: List[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.labels)

    def label(self, level):
        return self.labels[LABEL_COLUMNS[Level.parse(level)]]

    def records(self):
        """Iterate rows as FlowRecord objects."""
        names = list(self.features.columns)
        b, c, s = (LABEL_COLUMNS[level] for level in Level)
        for values, (_, lab) in zip(self.features.itertuples(index=False, name=None), self.labels.iterrows()):
            yield FlowRecord(dict(zip(names, values)), lab[b], lab[c], lab[s])

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return FlowDataset(
            features=self.features.iloc[indices].reset_index(drop=True),
            labels=self.labels.iloc[indices].reset_index(drop=True),
            text=self.text.iloc[indices].reset_index(drop=True) if len(self.text.columns) else pd.DataFrame(),
            malformed=[],
        )

    @staticmethod
    def from_records(records):
        records = list(records)
        features = pd.DataFrame([r.features for r in records], dtype=np.float64)
        labels = pd.DataFrame({
            LABEL_COLUMNS[Level.BINARY]: [r.label_binary for r in records],
            LABEL_COLUMNS[Level.CATEGORY]: [r.label_category for r in records],
            LABEL_COLUMNS[Level.SUBCATEGORY]: [r.label_subcategory for r in records],
        }, dtype=object)
        return FlowDataset(features=features, labels=labels)


@dataclass(eq=False)
class FeatureMatrix:
    """Sanitized, min-max scaled features with labels and the scaling that produced them."""
    columns: List[str]
    values: np.ndarray
    scale_min: np.ndarray
    scale_max: np.ndarray
    labels: pd.DataFrame
    provenance: Dict = field(default_factory=dict)
    # per-cell imputation codes (0 observed, see mamid.data.preprocessing)
    imputed: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.scale_min = np.asarray(self.scale_min, dtype=np.float64)
        self.scale_max = np.asarray(self.scale_max, dtype=np.float64)
        if self.imputed is not None:
            self.imputed = np.asarray(self.imputed, dtype=np.int8)

    def __len__(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return len(self.columns)

    def label(self, level):
        return self.labels[LABEL_COLUMNS[Level.parse(level)]]

    def inverse_transform(self, values: Optional[np.ndarray] = None):
        """Recover the unscaled feature values."""
        values = self.values if values is None else values
        return values * (self.scale_max - self.scale_min) + self.scale_min

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            columns=list(self.columns),
            values=self.values[indices],
            scale_min=self.scale_min,
            scale_max=self.scale_max,
            labels=self.labels.iloc[indices].reset_index(drop=True),
            provenance=self.provenance,
            imputed=self.imputed[indices] if self.imputed is not None else None,
        )

    def scaling_dict(self):
        return {
            'columns': list(self.columns),
            'min': self.scale_min.tolist(),
            'max': self.scale_max.tolist(),
        }

    def to_frame(self):
        """Features and label columns as one DataFrame, for CSV persistence."""
        frame = pd.DataFrame(self.values, columns=self.columns)
        for column in self.labels.columns:
            frame[column] = self.labels[column].to_numpy()
        return frame

    @staticmethod
    def from_frame(frame, provenance, imputed=None):
        label_columns = [c for c in LABEL_COLUMNS.values() if c in frame.columns]
        scaling = provenance['scaling']
        columns = list(scaling['columns'])
        return FeatureMatrix(
            columns=columns,
            values=frame[columns].to_numpy(dtype=np.float64),
            scale_min=np.array(scaling['min'], dtype=np.float64),
            scale_max=np.array(scaling['max'], dtype=np.float64),
            labels=frame[label_columns].astype(object).reset_index(drop=True),
            provenance=provenance,
            imputed=imputed,
        )
