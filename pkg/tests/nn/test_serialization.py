import numpy as np
import pytest

from src.nn.config import TrainConfig
from src.nn.network import LayerOrigin, init_network
from src.nn.serialization import load_network, save_network
from src.utils.errors import SerializationError


def test_roundtrip_preserves_parameters_and_origins(tmp_path):
    config = TrainConfig(seed=4)
    net = init_network([5, 3, 5], activation='sigmoid', config=config)
    net.layers[0].origin = LayerOrigin.edge(2, 1)
    path = save_network(net, tmp_path / 'model.bin', seed=4, config=config.to_dict(), extra={'note': 'x'})

    loaded, header = load_network(path)
    assert loaded.param_hash() == net.param_hash()
    assert [l.activation for l in loaded.layers] == ['sigmoid', 'identity']
    assert loaded.layers[0].origin == LayerOrigin.edge(2, 1)
    assert header['seed'] == 4
    assert header['extra'] == {'note': 'x'}
    assert header['config']['activation'] == 'tanh'


def test_bad_magic(tmp_path):
    path = tmp_path / 'junk.bin'
    path.write_bytes(b'NOPE' + bytes(20))
    with pytest.raises(SerializationError, match='bad magic'):
        load_network(path)


def test_truncated_file(tmp_path):
    path = save_network(init_network([4, 2, 4]), tmp_path / 'model.bin')
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(SerializationError, match='truncated'):
        load_network(path)


def test_trailing_bytes(tmp_path):
    path = save_network(init_network([4, 2, 4]), tmp_path / 'model.bin')
    path.write_bytes(path.read_bytes() + np.zeros(1).tobytes())
    with pytest.raises(SerializationError, match='trailing'):
        load_network(path)
