"""Initialization, forward pass and backpropagation for `Network`."""
import numpy as np

from mamid.engine.activations import ActivationKind, activation_backward, apply_activation
from mamid.engine.losses import check_pairing
from mamid.models.network import Network
from mamid.utils.error_handler import IncompatibleConfigurationError, InvalidArchitectureError
from mamid.utils.validation import require_shape


def init_network(input_dim, hidden_dims, output_dim, hidden_act, output_act, seed=0):
    """Glorot-uniform weights, zero biases, deterministic for a fixed seed."""
    hidden_act = ActivationKind.parse(hidden_act)
    output_act = ActivationKind.parse(output_act)
    dims = [int(input_dim)] + [int(h) for h in hidden_dims] + [int(output_dim)]
    if any(d < 1 for d in dims):
        raise InvalidArchitectureError(f'All layer sizes must be >= 1, got {dims}')
    if output_act is ActivationKind.SOFTMAX and dims[-1] < 2:
        raise IncompatibleConfigurationError('softmax output needs at least 2 units',
                                             output_dim=dims[-1])
    if hidden_act is ActivationKind.SOFTMAX and min(dims[1:-1], default=2) < 2:
        raise IncompatibleConfigurationError('softmax hidden layer needs at least 2 units')

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))

    return Network(
        input_dim=dims[0],
        hidden_dims=dims[1:-1],
        output_dim=dims[-1],
        weights=weights,
        biases=biases,
        hidden_activation=hidden_act,
        output_activation=output_act,
        seed=seed,
    )


def _check_batch(net, batch):
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    return require_shape('batch', batch, (None, net.input_dim))


def forward_cache(net, batch):
    """Forward pass keeping pre-activations and activations of every layer."""
    a = _check_batch(net, batch)
    pre, post = [], [a]
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        kind = net.output_activation if i == last else net.hidden_activation
        a = apply_activation(kind, z)
        pre.append(z)
        post.append(a)
    return pre, post


def forward(net, batch):
    """Per-row network outputs; rows are independent."""
    return forward_cache(net, batch)[1][-1]


def backward(net, batch, targets, loss_kind):
    """Gradients of the mean batch loss, returned as [dW1, db1, dW2, db2, ...]."""
    check_pairing(net.output_activation, loss_kind)
    pre, post = forward_cache(net, batch)
    return backward_from_cache(net, pre, post, targets)


def backward_from_cache(net, pre, post, targets):
    """Backpropagate through activations already computed by forward_cache."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    predictions = post[-1]
    require_shape('targets', targets, predictions.shape)

    n = predictions.shape[0]
    # canonical pairs: dL/dz_out = (p - t) / n
    delta = (predictions - targets) / n
    grads = [None] * (2 * net.n_layers)
    for i in range(net.n_layers - 1, -1, -1):
        grads[2 * i] = delta.T @ post[i]
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            grad_a = delta @ net.weights[i]
            delta = activation_backward(net.hidden_activation, pre[i - 1], post[i], grad_a)
    return grads


def predict_classes(outputs):
    """Class indices from network outputs; a single unit thresholds at 0.5."""
    outputs = np.asarray(outputs)
    if outputs.shape[1] == 1:
        return (outputs[:, 0] >= 0.5).astype(np.int64)
    return np.argmax(outputs, axis=1)
