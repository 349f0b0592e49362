from enum import Enum

import numpy as np

from mamid.utils.error_handler import IncompatibleConfigurationError, PropagationError


class ActivationKind(str, Enum):
    RELU = 'relu'
    TANH = 'tanh'
    SIGMOID = 'sigmoid'
    SOFTPLUS = 'softplus'
    SOFTMAX = 'softmax'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise IncompatibleConfigurationError(f"Unknown activation: {value}")


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _softplus(z):
    return np.logaddexp(0.0, z)


_FORWARD = {
    ActivationKind.RELU: lambda z: np.maximum(z, 0.0),
    ActivationKind.TANH: np.tanh,
    ActivationKind.SIGMOID: _sigmoid,
    ActivationKind.SOFTPLUS: _softplus,
    ActivationKind.SOFTMAX: _softmax,
}


def apply_activation(kind, v):
    """Apply an activation to a vector, or row-wise to a matrix."""
    kind = ActivationKind.parse(kind)
    v = np.asarray(v, dtype=np.float64)
    nan = np.argwhere(np.isnan(v))
    if nan.size:
        index = tuple(int(i) for i in nan[0])
        raise PropagationError(f'NaN input to {kind.value} at index {index}',
                               index=index[0] if len(index) == 1 else index)
    if kind is ActivationKind.SOFTMAX and v.shape[-1] < 2:
        raise PropagationError('softmax needs at least 2 units')
    return _FORWARD[kind](v)


def activation_backward(kind, z, a, grad_a):
    """Gradient w.r.t. pre-activation z given the upstream gradient on a = g(z)."""
    kind = ActivationKind.parse(kind)
    if kind is ActivationKind.RELU:
        return grad_a * (z > 0)
    if kind is ActivationKind.TANH:
        return grad_a * (1.0 - a * a)
    if kind is ActivationKind.SIGMOID:
        return grad_a * a * (1.0 - a)
    if kind is ActivationKind.SOFTPLUS:
        return grad_a * _sigmoid(z)
    # softmax Jacobian-vector product, row-wise
    return a * (grad_a - np.sum(grad_a * a, axis=-1, keepdims=True))
