from dataclasses import dataclass, field
from typing import List

from mamid.engine.activations import ActivationKind
from mamid.engine.optimizers import OptimizerKind
from mamid.utils.error_handler import IncompatibleConfigurationError, UsageError

# grid axes in enumeration order
AXES = ('epochs', 'batch_size', 'neurons', 'optimizer', 'activation_hidden', 'activation_output')
NUMERIC_AXES = ('epochs', 'batch_size', 'neurons')
CATEGORICAL_AXES = ('optimizer', 'activation_hidden', 'activation_output')

# column headers of the published top-10 tables
TABLE_COLUMNS = {
    'neurons': 'Neurons',
    'batch_size': 'Batch',
    'epochs': 'Epoch',
    'optimizer': 'Optimiser',
    'activation_hidden': 'Activation I',
    'activation_output': 'Activation II',
}


def optimizer_name(value):
    """Canonical optimizer name; accepts enum members and any capitalisation (AdaMax, Adam)."""
    return OptimizerKind(str(getattr(value, 'value', value)).lower()).value


@dataclass(frozen=True)
class Hyperparameters:
    """One grid point."""
    epochs: int
    batch_size: int
    neurons: int
    optimizer: str
    activation_hidden: str
    activation_output: str

    def __post_init__(self):
        for axis in NUMERIC_AXES:
            object.__setattr__(self, axis, int(getattr(self, axis)))
        object.__setattr__(self, 'optimizer', optimizer_name(self.optimizer))
        object.__setattr__(self, 'activation_hidden', ActivationKind.parse(self.activation_hidden).value)
        object.__setattr__(self, 'activation_output', ActivationKind.parse(self.activation_output).value)

    def key(self):
        return tuple(getattr(self, axis) for axis in AXES)

    def label(self):
        return (f'{self.epochs}ep/{self.batch_size}b/{self.neurons}n/{self.optimizer}/'
                f'{self.activation_hidden}/{self.activation_output}')

    def to_dict(self):
        return {axis: getattr(self, axis) for axis in AXES}

    @staticmethod
    def from_dict(hp_dict):
        try:
            return Hyperparameters(**{axis: hp_dict[axis] for axis in AXES})
        except KeyError as e:
            raise UsageError(f'Hyperparameters missing field {e.args[0]}')
        except (ValueError, IncompatibleConfigurationError) as e:
            raise UsageError(f'Invalid hyperparameters: {str(e)}')


def _default(values):
    return field(default_factory=lambda: list(values))


@dataclass
class GridSpace:
    epochs: List[int] = _default([100, 200])
    batch_size: List[int] = _default([10, 100])
    neurons: List[int] = _default([100, 200])
    optimizer: List[str] = _default([k.value for k in OptimizerKind])
    activation_hidden: List[str] = _default([k.value for k in ActivationKind])
    activation_output: List[str] = _default([k.value for k in ActivationKind])

    def __post_init__(self):
        try:
            self.optimizer = [optimizer_name(o) for o in self.optimizer]
            self.activation_hidden = [ActivationKind.parse(a).value for a in self.activation_hidden]
            self.activation_output = [ActivationKind.parse(a).value for a in self.activation_output]
            for axis in NUMERIC_AXES:
                setattr(self, axis, [int(v) for v in getattr(self, axis)])
        except (TypeError, ValueError, IncompatibleConfigurationError) as e:
            raise UsageError(f'Invalid grid option: {str(e)}')
        for axis in AXES:
            options = getattr(self, axis)
            if not options:
                raise UsageError(f'Grid axis {axis} has no options')
            if len(set(options)) != len(options):
                raise UsageError(f'Grid axis {axis} repeats an option')

    @property
    def cardinality(self):
        size = 1
        for axis in AXES:
            size *= len(getattr(self, axis))
        return size

    def to_dict(self):
        return {axis: list(getattr(self, axis)) for axis in AXES}

    @staticmethod
    def from_dict(space_dict):
        unknown = set(space_dict) - set(AXES)
        if unknown:
            raise UsageError(f'Unknown grid axes: {sorted(unknown)}')
        return GridSpace(**{axis: list(space_dict[axis]) for axis in AXES if axis in space_dict})
