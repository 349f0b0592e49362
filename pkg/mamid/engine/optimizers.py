"""The five optimizers of the search grid, as pure update functions over numpy arrays.

Each optimizer is an immutable settings object; its mutable part lives in an
`OptimizerState` that `optimizer_step` returns updated alongside the new
parameters.
"""
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, List

import numpy as np

from mamid.utils.error_handler import IncompatibleConfigurationError, OptimizerError


class OptimizerKind(str, Enum):
    SGD = 'sgd'
    ADAM = 'adam'
    ADAMAX = 'adamax'
    ADAGRAD = 'adagrad'
    RMSPROP = 'rmsprop'


def _check_lr(lr):
    if not lr > 0:
        raise IncompatibleConfigurationError(f'learning rate must be > 0, got {lr}')


def _check_beta(name, beta):
    if not 0 <= beta < 1:
        raise IncompatibleConfigurationError(f'{name} must lie in [0, 1), got {beta}')


def _check_eps(eps):
    if not eps > 0:
        raise IncompatibleConfigurationError(f'epsilon must be > 0, got {eps}')


@dataclass(frozen=True)
class SGD:
    lr: float = 0.01
    kind = OptimizerKind.SGD
    slots = ()

    def __post_init__(self):
        _check_lr(self.lr)

    def update(self, p, g, slots, t):
        return p - self.lr * g, {}


@dataclass(frozen=True)
class Adam:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    kind = OptimizerKind.ADAM
    slots = ('m', 'v')

    def __post_init__(self):
        _check_lr(self.lr)
        _check_beta('beta1', self.beta1)
        _check_beta('beta2', self.beta2)
        _check_eps(self.eps)

    def update(self, p, g, slots, t):
        m = self.beta1 * slots['m'] + (1.0 - self.beta1) * g
        v = self.beta2 * slots['v'] + (1.0 - self.beta2) * g * g
        m_hat = m / (1.0 - self.beta1 ** t)
        v_hat = v / (1.0 - self.beta2 ** t)
        return p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps), {'m': m, 'v': v}


@dataclass(frozen=True)
class Adamax:
    """Adam variant whose second moment is an exponentially weighted infinity norm."""
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    kind = OptimizerKind.ADAMAX
    slots = ('m', 'u')

    def __post_init__(self):
        _check_lr(self.lr)
        _check_beta('beta1', self.beta1)
        _check_beta('beta2', self.beta2)
        _check_eps(self.eps)

    def update(self, p, g, slots, t):
        m = self.beta1 * slots['m'] + (1.0 - self.beta1) * g
        u = np.maximum(self.beta2 * slots['u'], np.abs(g))
        step = self.lr / (1.0 - self.beta1 ** t)
        return p - step * m / (u + self.eps), {'m': m, 'u': u}


@dataclass(frozen=True)
class Adagrad:
    lr: float = 0.01
    eps: float = 1e-8
    kind = OptimizerKind.ADAGRAD
    slots = ('sum_sq',)

    def __post_init__(self):
        _check_lr(self.lr)
        _check_eps(self.eps)

    def update(self, p, g, slots, t):
        sum_sq = slots['sum_sq'] + g * g
        return p - self.lr * g / (np.sqrt(sum_sq) + self.eps), {'sum_sq': sum_sq}


@dataclass(frozen=True)
class RMSprop:
    lr: float = 0.001
    rho: float = 0.9
    eps: float = 1e-8
    kind = OptimizerKind.RMSPROP
    slots = ('v',)

    def __post_init__(self):
        _check_lr(self.lr)
        _check_beta('rho', self.rho)
        _check_eps(self.eps)

    def update(self, p, g, slots, t):
        v = self.rho * slots['v'] + (1.0 - self.rho) * g * g
        return p - self.lr * g / (np.sqrt(v) + self.eps), {'v': v}


OPTIMIZERS = {
    OptimizerKind.SGD: SGD,
    OptimizerKind.ADAM: Adam,
    OptimizerKind.ADAMAX: Adamax,
    OptimizerKind.ADAGRAD: Adagrad,
    OptimizerKind.RMSPROP: RMSprop,
}


def make_optimizer(name, **overrides):
    """Build an optimizer from its grid name with default or overridden coefficients."""
    try:
        kind = OptimizerKind(str(getattr(name, 'value', name)).lower())
    except ValueError:
        raise IncompatibleConfigurationError(f'Unknown optimizer: {name}')
    return OPTIMIZERS[kind](**overrides)


def optimizer_settings(optimizer):
    """Coefficients of an optimizer, for provenance records."""
    settings = {'kind': optimizer.kind.value}
    settings.update({f.name: getattr(optimizer, f.name) for f in fields(optimizer)})
    return settings


@dataclass
class OptimizerState:
    """Per-parameter accumulators plus the step counter."""
    slots: Dict[str, List[np.ndarray]] = field(default_factory=dict)
    t: int = 0

    @staticmethod
    def zeros(optimizer, params):
        return OptimizerState(
            slots={name: [np.zeros_like(p, dtype=np.float64) for p in params] for name in optimizer.slots},
            t=0,
        )


def optimizer_step(optimizer, state, params, grads):
    """Apply one update; returns (new_params, new_state). Inputs are not modified."""
    if len(params) != len(grads):
        raise OptimizerError(f'{len(params)} parameters but {len(grads)} gradients')
    for i, (p, g) in enumerate(zip(params, grads)):
        if np.shape(p) != np.shape(g):
            raise OptimizerError(f'Parameter {i} has shape {np.shape(p)}, gradient {np.shape(g)}')
        bad = np.argwhere(~np.isfinite(np.atleast_1d(g)))
        if bad.size:
            raise OptimizerError(
                f'Non-finite gradient in parameter {i} at {tuple(int(j) for j in bad[0])}; step refused',
                parameter=i)
    if state is None:
        state = OptimizerState.zeros(optimizer, params)

    t = state.t + 1
    new_params = []
    new_slots = {name: [] for name in optimizer.slots}
    for i, (p, g) in enumerate(zip(params, grads)):
        slots = {name: state.slots[name][i] for name in optimizer.slots}
        updated, slots = optimizer.update(np.asarray(p, dtype=np.float64), np.asarray(g, dtype=np.float64),
                                          slots, t)
        new_params.append(updated)
        for name in optimizer.slots:
            new_slots[name].append(slots[name])
    return new_params, OptimizerState(slots=new_slots, t=t)
