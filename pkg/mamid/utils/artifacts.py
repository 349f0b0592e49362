"""Stage outputs on disk: JSON files, the feature matrix, model bundles and the run manifest."""
import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import pandas as pd

from mamid.models.flow import FeatureMatrix, Level
from mamid.models.network import Network
from mamid.utils.error_handler import DataIOError, SchemaError

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
IMPUTED_COLUMNS = ['row', 'column', 'code']


def write_json(path, payload):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_json(path, what='file'):
    if not os.path.isfile(path):
        raise DataIOError(f'{what.capitalize()} not found: {path}', path=str(path))
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataIOError(f'{what.capitalize()} {path} is not valid JSON: {str(e)}', path=str(path))


def write_csv(path, frame):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def save_feature_matrix(matrix, directory):
    """features.csv, provenance.json and imputed.csv (one row per imputed cell); returns the paths."""
    os.makedirs(directory, exist_ok=True)
    features = write_csv(os.path.join(directory, 'features.csv'), matrix.to_frame())
    provenance = write_json(os.path.join(directory, 'provenance.json'), matrix.provenance)
    cells = pd.DataFrame(columns=IMPUTED_COLUMNS)
    if matrix.imputed is not None:
        rows, cols = np.nonzero(matrix.imputed)
        cells = pd.DataFrame({'row': rows, 'column': [matrix.columns[c] for c in cols],
                              'code': matrix.imputed[rows, cols]}, columns=IMPUTED_COLUMNS)
    imputed = write_csv(os.path.join(directory, 'imputed.csv'), cells)
    return [features, provenance, imputed]


def _load_imputed(path, columns, n_rows):
    if not os.path.isfile(path):
        return None
    cells = pd.read_csv(path, keep_default_na=False)
    imputed = np.zeros((n_rows, len(columns)), dtype=np.int8)
    if len(cells):
        position = {name: j for j, name in enumerate(columns)}
        unknown = set(cells['column']) - set(position)
        if unknown:
            raise SchemaError(f'{path} names unknown feature column {sorted(unknown)[0]}',
                              column=sorted(unknown)[0])
        imputed[cells['row'].to_numpy(), cells['column'].map(position).to_numpy()] = cells['code'].to_numpy()
    return imputed


def load_feature_matrix(directory):
    provenance = read_json(os.path.join(directory, 'provenance.json'), 'provenance log')
    path = os.path.join(directory, 'features.csv')
    if not os.path.isfile(path):
        raise DataIOError(f'Feature matrix not found: {path}; run preprocess first', path=path)
    frame = pd.read_csv(path, keep_default_na=False)
    columns = provenance['scaling']['columns']
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f'{path} lacks feature column {missing[0]}', column=missing[0])
    imputed = _load_imputed(os.path.join(directory, 'imputed.csv'), columns, len(frame))
    return FeatureMatrix.from_frame(frame, provenance, imputed)


@dataclass(eq=False)
class ModelBundle:
    """A trained network with everything needed to apply and explain it."""
    network: Network
    level: Level
    class_names: List[str]
    feature_names: List[str]
    scaling: Dict
    config: Dict

    def to_dict(self):
        return {
            'network': self.network.to_dict(),
            'level': self.level.value,
            'class_names': list(self.class_names),
            'feature_names': list(self.feature_names),
            'scaling': self.scaling,
            'config': self.config,
        }

    @staticmethod
    def from_dict(bundle_dict):
        return ModelBundle(
            network=Network.from_dict(bundle_dict['network']),
            level=Level.parse(bundle_dict['level']),
            class_names=list(bundle_dict['class_names']),
            feature_names=list(bundle_dict['feature_names']),
            scaling=bundle_dict.get('scaling', {}),
            config=bundle_dict.get('config', {}),
        )


def save_model(path, bundle):
    return write_json(path, bundle.to_dict())


def load_model(path):
    try:
        return ModelBundle.from_dict(read_json(path, 'model file'))
    except KeyError as e:
        raise SchemaError(f'Model file {path} lacks field {e.args[0]}', path=str(path))


def update_manifest(out_dir, stage, config, artifacts, version):
    """Record a stage's config and artifact paths (relative to out_dir) in manifest.json."""
    path = os.path.join(out_dir, MANIFEST)
    manifest = read_json(path, 'manifest') if os.path.isfile(path) else {'tool': 'mamid', 'stages': {}}
    manifest['version'] = version
    manifest['stages'][stage] = {
        'config': config,
        'artifacts': sorted(os.path.relpath(a, out_dir) for a in artifacts),
    }
    write_json(path, manifest)
    logger.info(f'Manifest updated with {len(artifacts)} {stage} artifacts')
    return path
