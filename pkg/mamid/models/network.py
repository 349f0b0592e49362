from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from mamid.engine.activations import ActivationKind
from mamid.utils.error_handler import DimensionError, InvalidArchitectureError


@dataclass(eq=False)
class Network:
    """Dense feedforward network; weight i has shape (out_i, in_i)."""

    input_dim: int
    hidden_dims: List[int]
    output_dim: int
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    hidden_activation: ActivationKind
    output_activation: ActivationKind
    seed: Optional[int] = None
    _dims: List[int] = field(init=False, repr=False)

    def __post_init__(self):
        self.hidden_dims = [int(h) for h in self.hidden_dims]
        self.hidden_activation = ActivationKind.parse(self.hidden_activation)
        self.output_activation = ActivationKind.parse(self.output_activation)
        self._dims = [int(self.input_dim)] + self.hidden_dims + [int(self.output_dim)]
        if any(d < 1 for d in self._dims):
            raise InvalidArchitectureError(f'All layer sizes must be >= 1, got {self._dims}')
        if len(self.weights) != len(self._dims) - 1 or len(self.biases) != len(self._dims) - 1:
            raise DimensionError(f'Expected {len(self._dims) - 1} weight/bias pairs')
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            fan_in, fan_out = self._dims[i], self._dims[i + 1]
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise DimensionError(
                    f'Layer {i + 1}: weight {w.shape} / bias {b.shape}, expected ({fan_out}, {fan_in}) / ({fan_out},)')

    @property
    def layer_dims(self):
        return list(self._dims)

    @property
    def n_layers(self):
        return len(self.weights)

    def parameters(self):
        """Flat parameter list ordered [W1, b1, W2, b2, ...]."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        return params

    def with_parameters(self, params):
        """Return a copy of this network holding `params` (same order as parameters())."""
        params = list(params)
        return Network(
            input_dim=self.input_dim,
            hidden_dims=list(self.hidden_dims),
            output_dim=self.output_dim,
            weights=params[0::2],
            biases=params[1::2],
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
            seed=self.seed,
        )

    def copy(self):
        return self.with_parameters([p.copy() for p in self.parameters()])

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def to_dict(self):
        """Convert Network to a JSON-ready dictionary (row-major weights)."""
        return {
            'input_dim': int(self.input_dim),
            'hidden_dims': list(self.hidden_dims),
            'output_dim': int(self.output_dim),
            'hidden_activation': self.hidden_activation.value,
            'output_activation': self.output_activation.value,
            'seed': self.seed,
            'weights': [w.tolist() for w in self.weights],
            'biases': [b.tolist() for b in self.biases],
        }

    @staticmethod
    def from_dict(network_dict):
        """Create Network from dictionary."""
        return Network(
            input_dim=network_dict['input_dim'],
            hidden_dims=network_dict['hidden_dims'],
            output_dim=network_dict['output_dim'],
            weights=[np.array(w, dtype=np.float64) for w in network_dict['weights']],
            biases=[np.array(b, dtype=np.float64) for b in network_dict['biases']],
            hidden_activation=network_dict['hidden_activation'],
            output_activation=network_dict['output_activation'],
            seed=network_dict.get('seed'),
        )
