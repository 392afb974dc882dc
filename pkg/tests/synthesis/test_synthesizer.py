import numpy as np
import pytest

from src.analytics.selection import SelectionMask, select_layers
from src.edge.trainer import EdgeModelSet
from src.nn.config import TrainConfig
from src.nn.network import autoencoder_shape, init_network, predict
from src.synthesis.plan import SynthesisPlan, plan_options
from src.synthesis.synthesizer import (
    REFERENCE_PARAMS,
    REFERENCE_SYNTHESIZED_WIDTHS,
    check_disjoint,
    describe,
    fine_tune,
    reference_shape,
    synthesize,
    verify_provenance,
)
from src.utils.errors import ConfigurationError, LeakageError, SynthesisError

N = 6
HIDDEN = [5, 4, 4, 5]


def make_edges(m=2, hidden=HIDDEN, n_features=N):
    models = [init_network(autoencoder_shape(n_features, hidden), config=TrainConfig(seed=k)) for k in range(1, m + 1)]
    return EdgeModelSet(models=models, traces=[])


def test_stack_copies_selected_layers_bit_exactly():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1), (1, 2), (2, 3)], hidden_counts=[4, 4])
    model = synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N)

    origins = [layer.origin.tag() for layer in model.net.layers]
    assert origins == ['fresh', 'edge(1:1)', 'edge(1:2)', 'edge(2:3)', 'fresh']
    assert model.net.shape == [6, 6, 5, 4, 4, 6]
    expected = sum(edges.model(k).layers[i - 1].n_params for k, i in [(1, 1), (1, 2), (2, 3)])
    assert model.copied_params == expected == 79
    assert verify_provenance(model, edges) == []
    assert sorted(model.source_hashes) == [2, 3, 4]


def test_edge_is_reproduced_without_input_layer(rng):
    edges = make_edges()
    refs = [(1, i) for i in range(1, len(HIDDEN) + 2)]
    mask = SelectionMask.from_refs(refs[:-1], hidden_counts=[4, 4])
    plan = SynthesisPlan(mask=mask, layer_order=refs, input_layer=False)
    model = synthesize(edges, plan, input_dim=N)

    batch = rng.normal(size=(5, N))
    np.testing.assert_array_equal(predict(model.net, batch), predict(edges.model(1), batch))
    assert model.fraction_pretrained == 1.0


def test_glue_layer_bridges_width_mismatch():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1), (2, 4)], hidden_counts=[4, 4])
    model = synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N)
    # edge layer 4 maps 4 -> 5, so a 5 -> 4 glue layer sits between
    assert model.net.shape == [6, 6, 5, 4, 5, 6]
    # layer 4 is model 2's last hidden layer, so its own decoder closes the model
    assert [l.origin.tag() for l in model.net.layers] == ['fresh', 'edge(1:1)', 'fresh', 'edge(2:4)', 'edge(2:5)']

    plain = synthesize(edges, SynthesisPlan.from_mask(mask, reuse_decoders=False), input_dim=N)
    assert [l.origin.kind for l in plain.net.layers] == ['fresh', 'edge', 'fresh', 'edge', 'fresh']


def test_bridge_none_rejects_mismatch():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1), (2, 3)], hidden_counts=[4, 4])
    with pytest.raises(SynthesisError, match='no bridge'):
        synthesize(edges, SynthesisPlan.from_mask(mask, bridge='none'), input_dim=N)


def test_widen_builds_block_diagonal_layers():
    hidden = [60] * 10
    edges = make_edges(m=6, hidden=hidden)
    mask = select_layers([[1.0] * 10] * 6, 'all')
    plan = SynthesisPlan.from_mask(mask, strategy='widen', input_layer=False, cross_scale=0.0)
    model = synthesize(edges, plan, input_dim=N)
    description = describe(model, edges)

    assert description.hidden_widths == [360] * 10
    assert verify_provenance(model, edges) == []
    second = model.net.layers[1].weights
    assert np.all(second[:60, 60:] == 0.0)
    np.testing.assert_array_equal(second[60:120, 60:120], edges.model(2).layers[1].weights)
    assert model.net.layers[-1].origin.kind == 'averaged'
    assert model.net.layers[-1].weights.shape == (N, 360)


def test_stack_of_whole_models_chains_the_autoencoders(rng):
    edges = make_edges()
    mask = select_layers([[1.0] * 4, [1.0] * 4], 'all')
    model = synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N)

    tags = [layer.origin.tag() for layer in model.net.layers]
    assert tags == ['fresh'] + [f"edge(1:{i})" for i in range(1, 6)] + [f"edge(2:{i})" for i in range(1, 6)]
    np.testing.assert_array_equal(model.net.layers[0].weights, np.eye(N))
    assert model.net.layers[0].activation == 'identity'
    assert model.copied_params == edges.model(1).n_params + edges.model(2).n_params
    assert verify_provenance(model, edges) == []

    batch = rng.normal(size=(5, N))
    chained = predict(edges.model(2), predict(edges.model(1), batch))
    np.testing.assert_allclose(predict(model.net, batch), chained, rtol=1e-12, atol=1e-12)


def test_random_input_layer_changes_the_function(rng):
    edges = make_edges()
    mask = select_layers([[1.0] * 4, [1.0] * 4], 'all')
    model = synthesize(edges, SynthesisPlan.from_mask(mask, input_init='uniform_pm1'), input_dim=N)
    assert model.net.layers[0].activation != 'identity'
    batch = rng.normal(size=(5, N))
    chained = predict(edges.model(2), predict(edges.model(1), batch))
    assert not np.allclose(predict(model.net, batch), chained)


def test_widen_of_whole_models_averages_the_autoencoders(rng):
    edges = make_edges()
    mask = select_layers([[1.0] * 4, [1.0] * 4], 'all')
    plan = SynthesisPlan.from_mask(mask, strategy='widen', input_layer=False, cross_scale=0.0)
    model = synthesize(edges, plan, input_dim=N)

    assert model.net.shape == [N, 10, 8, 8, 10, N]
    assert model.net.layers[-1].origin.tag() == 'averaged(1:5+2:5)'
    # block-diagonal layers count only their diagonal blocks as copied
    assert model.copied_params == 70 + 48 + 40 + 50 + 66 == 274
    assert verify_provenance(model, edges) == []

    batch = rng.normal(size=(5, N))
    mean = (predict(edges.model(1), batch) + predict(edges.model(2), batch)) / 2
    np.testing.assert_allclose(predict(model.net, batch), mean, rtol=1e-10, atol=1e-12)

    model.net.layers[-1].biases[0] += 1e-9
    assert verify_provenance(model, edges) == ['layer 5 is not the mean of decoders [(1, 5), (2, 5)]']


def test_widen_identity_input_fans_out_the_features(rng):
    edges = make_edges()
    mask = select_layers([[1.0] * 4, [1.0] * 4], 'all')
    plan = SynthesisPlan.from_mask(mask, strategy='widen', cross_scale=0.0)
    model = synthesize(edges, plan, input_dim=N)

    assert model.net.shape == [N, 2 * N, 10, 8, 8, 10, N]
    np.testing.assert_array_equal(model.net.layers[0].weights, np.vstack([np.eye(N), np.eye(N)]))
    assert verify_provenance(model, edges) == []
    batch = rng.normal(size=(5, N))
    mean = (predict(edges.model(1), batch) + predict(edges.model(2), batch)) / 2
    np.testing.assert_allclose(predict(model.net, batch), mean, rtol=1e-10, atol=1e-12)


def test_widen_rejects_unequal_blocks():
    edges = EdgeModelSet(models=[init_network(autoencoder_shape(N, [5, 4])),
                                 init_network(autoencoder_shape(N, [5, 3]))], traces=[])
    mask = SelectionMask.from_refs([(1, 2), (2, 2)], hidden_counts=[2, 2])
    with pytest.raises(SynthesisError, match='block sizes differ'):
        synthesize(edges, SynthesisPlan.from_mask(mask, strategy='widen'), input_dim=N)


def test_plan_order_must_match_mask():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1), (1, 2)], hidden_counts=[4, 4])
    with pytest.raises(SynthesisError, match='does not match'):
        synthesize(edges, SynthesisPlan(mask=mask, layer_order=[(1, 1)]), input_dim=N)
    with pytest.raises(SynthesisError, match='more than once'):
        synthesize(edges, SynthesisPlan(mask=mask, layer_order=[(1, 1), (1, 2), (1, 2)]), input_dim=N)


def test_output_layer_must_close_the_plan():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1)], hidden_counts=[4, 4])
    plan = SynthesisPlan(mask=mask, layer_order=[(1, 5), (1, 1)])
    with pytest.raises(SynthesisError, match='must be last'):
        synthesize(edges, plan, input_dim=N)


def test_feature_count_must_match():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1)], hidden_counts=[4, 4])
    with pytest.raises(SynthesisError):
        synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N + 1)


def test_tampering_is_detected():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 2)], hidden_counts=[4, 4])
    model = synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N)
    model.net.layers[1].weights[0, 0] += 1e-9
    assert verify_provenance(model, edges) == ['layer 2 differs from edge layer (1, 2)']


def test_same_seed_same_model():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1), (2, 2)], hidden_counts=[4, 4])
    plan = SynthesisPlan.from_mask(mask)
    a = synthesize(edges, plan, N, TrainConfig(seed=3))
    b = synthesize(edges, plan, N, TrainConfig(seed=3))
    assert a.net.param_hash() == b.net.param_hash()


def test_describe_reports_reference_difference():
    edges = make_edges()
    mask = SelectionMask.from_refs([(1, 1)], hidden_counts=[4, 4])
    model = synthesize(edges, SynthesisPlan.from_mask(mask), input_dim=N)
    description = describe(model, edges, reference_params=100)
    assert description.n_params == model.net.n_params
    assert description.reference_difference == model.net.n_params - 100
    assert description.copied_params == 35
    assert 'Copied from edges' in description.to_text()


def test_plan_roundtrip(tmp_path):
    mask = SelectionMask.from_refs([(1, 1), (2, 2)], hidden_counts=[4, 4])
    plan = SynthesisPlan.from_mask(mask, strategy='widen', name='wide', output_head=[3],
                                   input_init='uniform_pm1', reuse_decoders=False)
    assert plan.layer_order == [(1, 1), (2, 2)]
    loaded = SynthesisPlan.load(plan.save(tmp_path / 'plan.json'))
    assert loaded.to_dict() == plan.to_dict()


def test_plan_options_rejects_unknown_keys():
    assert plan_options({'name': 'x', 'policy': 'all', 'strategy': 'widen'}) == {'strategy': 'widen'}
    assert plan_options({'input_init': 'identity', 'reuse_decoders': False}) == \
        {'input_init': 'identity', 'reuse_decoders': False}
    with pytest.raises(ConfigurationError):
        plan_options({'strategy': 'stack', 'depth': 3})


def test_zero_epoch_fine_tune_leaves_model(partition):
    edges = make_edges()
    model = synthesize(edges, SynthesisPlan.from_mask(SelectionMask.from_refs([(1, 1)], [4, 4])), N)
    before = model.net.param_hash()
    trace = fine_tune(model, partition.central.train, partition.central.test, TrainConfig(epochs=0), partition)
    assert trace.n_epochs == 0
    assert model.net.param_hash() == before


def test_fine_tune_updates_every_layer(partition, trained_edges):
    mask = select_layers([[1.0] * 4, [1.0] * 4], 'top_k_per_model:2')
    model = synthesize(trained_edges, SynthesisPlan.from_mask(mask), N)
    before = [layer.param_hash() for layer in model.net.layers]
    trace = fine_tune(model, partition.central.train, partition.central.test,
                      TrainConfig(epochs=3, seed=0), partition)
    assert trace.n_epochs == 3
    assert all(layer.param_hash() != h for layer, h in zip(model.net.layers, before))
    assert verify_provenance(model, trained_edges)


def test_edge_rows_in_central_data_are_rejected(partition):
    with pytest.raises(LeakageError):
        check_disjoint(partition, partition.edge(1).train)
    check_disjoint(partition, partition.central.train, partition.central.test)


def test_reference_synthesized_widths_against_reference_count():
    net = init_network(reference_shape('synthesized', 20))
    description = describe(net, reference_params=REFERENCE_PARAMS['synthesized'])
    assert description.hidden_widths == REFERENCE_SYNTHESIZED_WIDTHS
    # 20-60, eight 60-60, 60-90, 90-90, 90-20 dense layers with biases
    assert description.n_params == 1260 + 8 * 3660 + 5490 + 8190 + 1820 == 46040
    assert description.reference_difference == 46040 - 27275
    assert 'difference +18765' in description.to_text()


def test_reference_baseline_shape():
    shape = reference_shape('baseline', 20)
    assert shape == [20, 180, 90, 60, 30, 30, 60, 90, 180, 20]
    description = describe(init_network(shape), reference_params=REFERENCE_PARAMS['baseline'])
    assert description.reference_difference == description.n_params - 31521
    with pytest.raises(ConfigurationError):
        reference_shape('wide', 20)


def test_unknown_input_init_is_rejected():
    mask = SelectionMask.from_refs([(1, 1)], hidden_counts=[4, 4])
    with pytest.raises(ConfigurationError):
        SynthesisPlan.from_mask(mask, input_init='zeros')
