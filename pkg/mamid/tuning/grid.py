import itertools
import json
import os

from mamid.models.hyperparameters import AXES, GridSpace, Hyperparameters
from mamid.utils.error_handler import DataIOError, UsageError


def enumerate_grid(space):
    """All configurations in lexicographic order of the axes, each axis in its listed option order."""
    options = [getattr(space, axis) for axis in AXES]
    return [Hyperparameters(*values) for values in itertools.product(*options)]


def load_grid(path):
    """Read a GridSpace from a JSON file; missing axes keep their default options."""
    if path is None:
        return GridSpace()
    if not os.path.isfile(path):
        raise DataIOError(f'Grid file not found: {path}', path=str(path))
    try:
        with open(path) as f:
            space_dict = json.load(f)
    except json.JSONDecodeError as e:
        raise UsageError(f'Grid file {path} is not valid JSON: {str(e)}')
    if not isinstance(space_dict, dict):
        raise UsageError(f'Grid file {path} must hold an object of axis -> options')
    return GridSpace.from_dict(space_dict)
