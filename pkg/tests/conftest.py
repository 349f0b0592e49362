import numpy as np
import pandas as pd
import pytest

from mamid import create_app
from mamid.data.preprocessing import preprocess
from mamid.data.synthetic import iotid20_spec, synth_generate, to_csv_frame
from mamid.engine.propagation import init_network
from mamid.models.flow import Level
from mamid.tuning.selection import TOP_K_COLUMNS

# published top-10 tables per level: Accuracy, Neurons, Batch, Epoch, Optimiser, Activation I, Activation II
BINARY_TOP10 = [
    (99.88, 100, 10, 200, 'Adam', 'tanh', 'sigmoid'),
    (99.86, 100, 100, 200, 'rmsprop', 'tanh', 'sigmoid'),
    (99.85, 200, 100, 200, 'Adam', 'tanh', 'sigmoid'),
    (99.84, 200, 10, 100, 'Adam', 'tanh', 'sigmoid'),
    (99.84, 100, 10, 100, 'Adam', 'tanh', 'sigmoid'),
    (99.84, 200, 100, 100, 'Adam', 'tanh', 'sigmoid'),
    (99.83, 100, 100, 200, 'Adam', 'tanh', 'sigmoid'),
    (99.83, 200, 100, 200, 'rmsprop', 'tanh', 'softmax'),
    (99.82, 200, 100, 100, 'Adam', 'tanh', 'softmax'),
    (99.82, 200, 100, 200, 'rmsprop', 'tanh', 'sigmoid'),
]
CATEGORY_TOP10 = [
    (99.04, 200, 10, 200, 'Adamax', 'tanh', 'softmax'),
    (99.03, 100, 100, 200, 'Adam', 'tanh', 'softmax'),
    (99.00, 200, 10, 100, 'Adam', 'sigmoid', 'softmax'),
    (98.98, 100, 10, 200, 'Adam', 'sigmoid', 'softmax'),
    (98.96, 100, 10, 200, 'AdaMax', 'tanh', 'softmax'),
    (98.93, 200, 100, 200, 'Adam', 'tanh', 'softmax'),
    (98.93, 200, 100, 100, 'Adam', 'tanh', 'softmax'),
    (98.92, 200, 10, 100, 'Adam', 'tanh', 'softmax'),
    (98.92, 200, 10, 100, 'AdaMax', 'tanh', 'softmax'),
    (98.89, 200, 10, 200, 'AdaMax', 'ReLU', 'softmax'),
]
SUBCATEGORY_TOP10 = [
    (95.65, 100, 10, 200, 'AdaMax', 'tanh', 'softmax'),
    (95.63, 200, 10, 100, 'Adam', 'sigmoid', 'softmax'),
    (95.62, 100, 10, 200, 'Adam', 'sigmoid', 'softmax'),
    (95.61, 100, 100, 200, 'Adam', 'tanh', 'softmax'),
    (95.58, 100, 10, 100, 'Adam', 'tanh', 'softmax'),
    (95.56, 100, 100, 200, 'rmsprop', 'tanh', 'softmax'),
    (95.55, 200, 100, 100, 'Adam', 'tanh', 'softmax'),
    (95.53, 100, 10, 100, 'Adam', 'sigmoid', 'softmax'),
    (95.50, 200, 10, 200, 'AdaMax', 'tanh', 'softmax'),
    (95.49, 100, 10, 100, 'rmsprop', 'tanh', 'softmax'),
]


@pytest.fixture
def app(tmp_path):
    app = create_app({
        'TESTING': True,
        'OUTPUT_DIR': str(tmp_path / 'runs'),
        'THREADS': 1,
        'SEED': 0,
        'LOG_LEVEL': 'WARNING',
    })
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture(scope='session')
def flows():
    """A small nine-class synthetic dataset in the IoTID20 layout."""
    return synth_generate(iotid20_spec(n_features=10), 400, seed=3)


@pytest.fixture(scope='session')
def features(flows):
    return preprocess(flows)


@pytest.fixture
def flows_csv(tmp_path, flows):
    path = tmp_path / 'flows.csv'
    to_csv_frame(flows).to_csv(path, index=False)
    return str(path)


@pytest.fixture
def published_tables():
    return {level: pd.DataFrame(rows, columns=TOP_K_COLUMNS) for level, rows in
            ((Level.BINARY, BINARY_TOP10), (Level.CATEGORY, CATEGORY_TOP10),
             (Level.SUBCATEGORY, SUBCATEGORY_TOP10))}


@pytest.fixture
def small_net():
    return init_network(4, [5], 3, 'tanh', 'softmax', seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
