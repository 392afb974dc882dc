import numpy as np
import pytest

from src.data.dataset import SplitPair
from src.data.preprocessing import partition_edges
from src.federated.config import PRESETS, FLConfig
from src.federated.fedavg import (
    FLTrace,
    fl_aggregate,
    fl_broadcast,
    fl_local_update,
    fl_run,
    local_seed,
    server_update,
)
from src.nn.network import DenseLayer, Network, init_network
from src.nn.training import train
from src.utils.errors import ConfigurationError, EmptyDatasetError, ShapeError


def constant_net(value: float) -> Network:
    return Network([DenseLayer(np.full((2, 2), value), np.full(2, value))])


@pytest.fixture
def fl_config():
    return FLConfig(clients=2, rounds=2, local_epochs=1, edge_lr=0.05, central_lr=1.0,
                    hidden=[4, 3, 4], batch_size=32, seed=0)


def test_equal_counts_average():
    avg = fl_aggregate([constant_net(2.0), constant_net(4.0)], [10, 10])
    np.testing.assert_allclose(avg.layers[0].weights, 3.0)
    np.testing.assert_allclose(avg.layers[0].biases, 3.0)


def test_counts_weight_the_average():
    avg = fl_aggregate([constant_net(0.0), constant_net(4.0)], [1, 3])
    np.testing.assert_allclose(avg.layers[0].weights, 3.0)


def test_single_client_is_returned_exactly():
    net = init_network([3, 2, 3])
    assert fl_aggregate([net], [7]).param_hash() == net.param_hash()


def test_identical_clients_reproduce_parameters():
    net = init_network([4, 3, 4])
    copies = fl_broadcast(net, 3)
    assert fl_aggregate(copies, [5, 17, 2]).param_hash() == net.param_hash()


def test_broadcast_copies_are_independent():
    net = init_network([3, 2, 3])
    copies = fl_broadcast(net, 2)
    copies[0].layers[0].weights[0, 0] += 1.0
    assert copies[1].param_hash() == net.param_hash()


def test_aggregate_rejects_bad_inputs():
    with pytest.raises(ShapeError):
        fl_aggregate([init_network([3, 2, 3]), init_network([3, 4, 3])], [1, 1])
    with pytest.raises(ShapeError):
        fl_aggregate([constant_net(1.0)], [1, 2])
    with pytest.raises(ConfigurationError):
        fl_aggregate([constant_net(1.0), constant_net(2.0)], [0, 0])


def test_server_update_steps_toward_aggregate():
    updated = server_update(constant_net(0.0), constant_net(4.0), 0.25)
    np.testing.assert_allclose(updated.layers[0].weights, 1.0)
    aggregate = constant_net(4.0)
    assert server_update(constant_net(0.0), aggregate, 1.0) is aggregate


def test_local_seeds_are_distinct():
    seeds = {local_seed(7, r, i) for r in range(1, 20) for i in range(1, 9)}
    assert len(seeds) == 19 * 8


def test_local_update_trains_in_place(dataset, fl_config):
    net = init_network([dataset.n_features, 4, 3, 4, dataset.n_features])
    before = net.param_hash()
    updated, loss = fl_local_update(net, dataset.features[:100], fl_config, seed=3)
    assert updated is net
    assert net.param_hash() != before
    assert np.isfinite(loss) and loss > 0

    with pytest.raises(EmptyDatasetError):
        fl_local_update(net, np.empty((0, dataset.n_features)), fl_config, seed=3)


def test_single_client_single_round_equals_centralized_training(dataset):
    split = SplitPair(dataset.subset(np.arange(300)), dataset.subset(np.arange(300, 400)))
    part = partition_edges(split, m=1, s_train=200, s_test=50)
    config = FLConfig(clients=1, rounds=1, local_epochs=3, edge_lr=0.05, central_lr=1.0, hidden=[4, 3, 4], seed=5)

    _, global_net = fl_run(part, config)

    net = init_network(config.resolve_shape(dataset.n_features), config=config.init_config())
    train(net, part.edge(1).train.features, None, config.local_train_config(local_seed(5, 1, 1)))
    assert global_net.param_hash() == net.param_hash()


def test_run_records_every_round(partition, fl_config):
    trace, net = fl_run(partition, fl_config, train_normal_only=True)
    assert trace.rounds == 2
    assert len(trace.client_losses[0]) == 2
    assert all(np.isfinite(trace.val_loss))
    assert trace.bytes_exchanged == 2 * net.n_params * 2 * 8 * 2
    assert trace.bytes_until(1) * 2 == trace.bytes_exchanged


def test_run_is_deterministic_and_parallel_safe(partition, fl_config):
    serial, _ = fl_run(partition, fl_config)
    again, _ = fl_run(partition, fl_config)
    threaded, _ = fl_run(partition, fl_config.replace(parallel=True))
    assert serial.digest() == again.digest() == threaded.digest()


def test_client_count_must_match_partition(partition, fl_config):
    with pytest.raises(ConfigurationError):
        fl_run(partition, fl_config.replace(clients=3))


def test_trace_csv_roundtrip(tmp_path, partition, fl_config):
    trace, _ = fl_run(partition, fl_config)
    loaded = FLTrace.load_csv(trace.save_csv(tmp_path / 'fl.csv'), shape=trace.shape, local_epochs=1)
    assert loaded.clients == 2
    np.testing.assert_array_equal(loaded.val_loss, trace.val_loss)
    np.testing.assert_array_equal(loaded.client_losses, trace.client_losses)


def test_presets_resolve_to_autoencoders():
    shape = FLConfig(preset='fl8').resolve_shape(20)
    assert shape == [20] + PRESETS['fl8'] + [20]
    assert FLConfig(hidden=[5]).resolve_shape(3) == [3, 5, 3]
    with pytest.raises(ConfigurationError):
        FLConfig(shape=[4, 2, 4]).resolve_shape(5)


def test_config_from_dict():
    config = FLConfig.from_dict({'clients': '3', 'edge_lr': '0.01', 'hidden': [4, '2']}, rounds=5, seed=None)
    assert (config.clients, config.edge_lr, config.hidden, config.rounds, config.seed) == (3, 0.01, [4, 2], 5, 0)
    with pytest.raises(ConfigurationError):
        FLConfig.from_dict({'momentum': 0.9})


@pytest.mark.parametrize('changes', [{'rounds': 0}, {'edge_lr': -1.0}, {'preset': 'fl5'}, {'local_optimizer': 'rmsprop'}])
def test_invalid_config(changes):
    with pytest.raises(ConfigurationError):
        FLConfig(**changes).validate()


def test_local_config_uses_edge_rate():
    local = FLConfig(edge_lr=0.3, l2_reg=0.01, local_epochs=4).local_train_config(9)
    assert (local.learning_rate, local.l2_lambda, local.epochs, local.seed) == (0.3, 0.01, 4, 9)
    assert local.optimizer == 'sgd' and local.regularize_bias
