"""
Central-model synthesis from trained edge layers, provenance reporting and
fine-tuning on central-cloud data.

Two composition strategies are supported:

- stack: input layer, selected layers in plan order, an edge's own output
  layer or a fresh glue layer wherever widths disagree, and a closing layer
  back to the input width.
- widen: selected layers sharing a layer index are merged into one wider
  block-diagonal layer; cross-block weights start near zero. A final group
  of last hidden layers closes with the edge decoders averaged.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.data.dataset import Dataset, EdgePartition
from src.edge.trainer import EdgeModelSet
from src.nn.config import TrainConfig
from src.nn.network import DenseLayer, LayerOrigin, Network, init_weights
from src.nn.training import TrainTrace, train
from src.synthesis.plan import LayerRef, SynthesisPlan
from src.utils.errors import ConfigurationError, LeakageError, ShapeError, SynthesisError

logger = logging.getLogger(__name__)

# Trainable parameter counts of the published 8-layer baseline and 12-layer synthesized models
REFERENCE_PARAMS = {'baseline': 31521, 'synthesized': 27275}
REFERENCE_SYNTHESIZED_WIDTHS = [60] * 9 + [90] * 2
REFERENCE_BASELINE_WIDTHS = [180, 90, 60, 30, 30, 60, 90, 180]


def reference_shape(kind: str, input_dim: int) -> List[int]:
    """Layer widths of the reference ``baseline`` or ``synthesized`` model over ``input_dim`` features."""
    widths = {'baseline': REFERENCE_BASELINE_WIDTHS, 'synthesized': REFERENCE_SYNTHESIZED_WIDTHS}
    if kind not in widths:
        raise ConfigurationError(f"Unknown reference model {kind!r}; use one of {sorted(widths)}")
    return [input_dim, *widths[kind], input_dim]


@dataclass
class SynthesizedModel:
    net: Network
    plan: SynthesisPlan
    fraction_pretrained: float
    # position (1-indexed) -> hashes of the source edge layers at synthesis time
    source_hashes: Dict[int, List[str]] = field(default_factory=dict)

    @property
    def copied_params(self) -> int:
        return int(round(self.fraction_pretrained * self.net.n_params))


def _fresh_layer(rng: np.random.Generator, in_dim: int, out_dim: int, scheme: str,
                 activation: str, cross_scale: float) -> DenseLayer:
    if scheme == 'near_zero':
        weights = rng.uniform(-cross_scale, cross_scale, size=(out_dim, in_dim)) if cross_scale else \
            np.zeros((out_dim, in_dim))
    else:
        weights = init_weights(rng, in_dim, out_dim, scheme)
    return DenseLayer(weights, np.zeros(out_dim), activation, LayerOrigin.fresh())


def _identity_weights(in_dim: int, out_dim: int) -> np.ndarray:
    """Pass-through weights, tiled when ``out_dim`` is a multiple of ``in_dim``."""
    if out_dim % in_dim == 0:
        return np.tile(np.eye(in_dim), (out_dim // in_dim, 1))
    return np.eye(out_dim, in_dim)


def _source(edges: EdgeModelSet, ref: LayerRef) -> DenseLayer:
    k, i = ref
    return edges.model(k).layers[i - 1]


def _copied_params(layer: DenseLayer, edges: EdgeModelSet) -> int:
    if not layer.origin.is_copied:
        return 0
    if layer.origin.kind == 'averaged':
        return layer.n_params
    return sum(_source(edges, ref).n_params for ref in layer.origin.sources)


def _averaged_params(blocks: Sequence[DenseLayer]) -> tuple:
    """Output layers side by side over a concatenated input, scaled to their mean."""
    weights = np.hstack([b.weights for b in blocks]) / len(blocks)
    biases = np.mean(np.stack([b.biases for b in blocks]), axis=0)
    return weights, biases


class _Builder:
    """Appends layers while tracking the running width."""

    def __init__(self, input_dim: int, plan: SynthesisPlan, config: TrainConfig):
        self.plan = plan
        self.config = config
        self.width = input_dim
        self.layers: List[DenseLayer] = []
        self.rng = np.random.default_rng(config.seed)

    def fresh(self, out_dim: int, scheme: str, activation: Optional[str] = None) -> None:
        self.layers.append(_fresh_layer(self.rng, self.width, out_dim, scheme,
                                        activation or self.config.activation, self.plan.cross_scale))
        self.width = out_dim

    def input(self, out_dim: int) -> None:
        if self.plan.input_init != 'identity':
            self.fresh(out_dim, self.plan.input_init)
            return
        self.layers.append(DenseLayer(_identity_weights(self.width, out_dim), np.zeros(out_dim),
                                      'identity', LayerOrigin.fresh()))
        self.width = out_dim

    def bridge(self, needed: int, refs: Sequence[LayerRef]) -> None:
        """Insert a glue layer when the running width differs from ``needed``."""
        if needed == self.width:
            return
        if self.plan.bridge == 'none':
            raise SynthesisError(f"Layers {list(refs)} expect {needed} inputs but the previous layer "
                                 f"produces {self.width}, and plan {self.plan.name} declares no bridge")
        logger.info(f"Glue layer {self.width} -> {needed} before {list(refs)}")
        self.fresh(needed, self.plan.glue_init)

    def append(self, layer: DenseLayer) -> None:
        self.layers.append(layer)
        self.width = layer.out_dim

    def close(self, input_dim: int) -> None:
        for width in self.plan.output_head:
            self.fresh(width, self.plan.glue_init)
        self.fresh(input_dim, self.plan.glue_init, self.config.output_activation)


def _decoder_ref(ref: LayerRef, hidden_counts: Sequence[int]) -> Optional[LayerRef]:
    """The output layer of ref's model when ref is that model's last hidden layer."""
    k, i = ref
    return (k, i + 1) if i == hidden_counts[k - 1] else None


def _build_stack(edges: EdgeModelSet, plan: SynthesisPlan, builder: _Builder, input_dim: int,
                 hidden_counts: Sequence[int]) -> None:
    order = plan.layer_order
    if plan.input_layer:
        builder.input(_source(edges, order[0]).in_dim)
    previous: Optional[LayerRef] = None
    for ref in order:
        src = _source(edges, ref)
        decoder = _decoder_ref(previous, hidden_counts) if previous and plan.reuse_decoders else None
        if decoder and builder.width != src.in_dim and _source(edges, decoder).out_dim == src.in_dim:
            logger.info(f"Reusing decoder {decoder} before {ref}")
            builder.append(_source(edges, decoder).copy(origin=LayerOrigin.edge(*decoder)))
        builder.bridge(src.in_dim, [ref])
        builder.append(src.copy(origin=LayerOrigin.edge(*ref)))
        previous = ref

    k, i = order[-1]
    decoder = _decoder_ref(order[-1], hidden_counts)
    if i == hidden_counts[k - 1] + 1:
        if builder.width != input_dim:
            raise SynthesisError(f"Output layer of model {k} produces {builder.width} values, "
                                 f"central input has {input_dim}")
    elif plan.reuse_decoders and decoder and not plan.output_head:
        builder.append(_source(edges, decoder).copy(origin=LayerOrigin.edge(*decoder)))
    else:
        builder.close(input_dim)


def _merge_group(refs: List[LayerRef], blocks: List[DenseLayer], builder: _Builder) -> DenseLayer:
    """
    One wide layer from equal-size blocks.

    As the very first layer the blocks fan out from the shared input
    (stacked rows); anywhere else they sit block-diagonally with near-zero
    cross-block weights.
    """
    in_b, out_b = blocks[0].in_dim, blocks[0].out_dim
    r = len(blocks)
    weights_b = [b.weights for b in blocks]
    biases = np.concatenate([b.biases for b in blocks])
    if not builder.layers and builder.width == in_b:
        weights = np.vstack(weights_b)
    else:
        builder.bridge(r * in_b, refs)
        weights = _fresh_layer(builder.rng, r * in_b, r * out_b, 'near_zero', 'identity',
                               builder.plan.cross_scale).weights
        for j, w in enumerate(weights_b):
            weights[j * out_b:(j + 1) * out_b, j * in_b:(j + 1) * in_b] = w
    return DenseLayer(weights, biases, blocks[0].activation, LayerOrigin.widened(refs))


def _close_widen(edges: EdgeModelSet, refs: List[LayerRef], builder: _Builder, input_dim: int,
                 hidden_counts: Sequence[int]) -> None:
    """Close with the edges' own decoders when the last group ends every source model."""
    decoders = [_decoder_ref(ref, hidden_counts) for ref in refs]
    plan = builder.plan
    if not plan.reuse_decoders or plan.output_head or not all(decoders):
        builder.close(input_dim)
        return
    blocks = [_source(edges, ref) for ref in decoders]
    if len({(b.in_dim, b.out_dim, b.activation) for b in blocks}) > 1 \
            or builder.width != len(blocks) * blocks[0].in_dim or blocks[0].out_dim != input_dim:
        builder.close(input_dim)
        return
    if len(blocks) == 1:
        builder.append(blocks[0].copy(origin=LayerOrigin.edge(*decoders[0])))
        return
    weights, biases = _averaged_params(blocks)
    logger.info(f"Closing with decoders {decoders} averaged")
    builder.append(DenseLayer(weights, biases, blocks[0].activation, LayerOrigin.averaged(decoders)))


def _build_widen(edges: EdgeModelSet, plan: SynthesisPlan, builder: _Builder, input_dim: int,
                 hidden_counts: Sequence[int]) -> None:
    groups: Dict[int, List[LayerRef]] = OrderedDict()
    for ref in plan.layer_order:
        groups.setdefault(ref[1], []).append(ref)

    for position, refs in groups.items():
        blocks = [_source(edges, ref) for ref in refs]
        dims = {(b.in_dim, b.out_dim) for b in blocks}
        if len(dims) > 1:
            detail = ', '.join(f"{ref}: {b.in_dim}->{b.out_dim}" for ref, b in zip(refs, blocks))
            raise SynthesisError(f"Cannot widen layer {position}: block sizes differ ({detail})")
        activations = {b.activation for b in blocks}
        if len(activations) > 1:
            raise SynthesisError(f"Cannot widen layer {position}: activations differ {sorted(activations)} "
                                 f"across {refs}")
        if plan.input_layer and not builder.layers:
            builder.input(len(refs) * blocks[0].in_dim)
        if len(refs) == 1:
            builder.bridge(blocks[0].in_dim, refs)
            builder.append(blocks[0].copy(origin=LayerOrigin.edge(*refs[0])))
        else:
            builder.append(_merge_group(refs, blocks, builder))
    _close_widen(edges, list(groups.values())[-1], builder, input_dim, hidden_counts)


def synthesize(edges: EdgeModelSet, plan: SynthesisPlan, input_dim: int,
               config: Optional[TrainConfig] = None) -> SynthesizedModel:
    """
    Build the central autoencoder from selected edge layers.

    Copied parameters are bit-equal to the source layers; fresh layers use
    ``config.seed``, the input layer ``plan.input_init`` and glue/head layers
    ``plan.glue_init``.

    Args:
        edges: Trained edge models
        plan: Synthesis recipe
        input_dim: Feature count of the central data
        config: Supplies seed, init scheme and activations

    Returns:
        SynthesizedModel
    """
    config = config or TrainConfig()
    hidden_counts = [net.depth - 1 for net in edges.models]
    plan.validate(hidden_counts)
    for net in edges.models:
        if net.input_dim != input_dim:
            raise SynthesisError(f"Edge models take {net.input_dim} features, central data has {input_dim}")

    logger.info("=" * 60)
    logger.info(f"Synthesizing plan {plan.name} ({plan.strategy}) from {plan.mask.n_selected} edge layers")
    logger.info("=" * 60)

    builder = _Builder(input_dim, plan, config)
    if plan.strategy == 'stack':
        _build_stack(edges, plan, builder, input_dim, hidden_counts)
    else:
        _build_widen(edges, plan, builder, input_dim, hidden_counts)

    try:
        net = Network(builder.layers)
    except ShapeError as e:
        raise SynthesisError(f"Plan {plan.name} does not compose: {e}") from e

    copied = sum(_copied_params(layer, edges) for layer in net.layers)
    hashes = {
        position: [_source(edges, ref).param_hash() for ref in layer.origin.sources]
        for position, layer in enumerate(net.layers, start=1) if layer.origin.is_copied
    }
    model = SynthesizedModel(net, plan, copied / net.n_params, hashes)
    logger.info(f"Central model shape {net.shape}, {net.n_params} parameters, "
                f"{model.fraction_pretrained:.1%} copied from edges")
    return model


def _layer_blocks(layer: DenseLayer, sources: List[DenseLayer], position: int) -> List[tuple]:
    """(weights, biases) slices of a widened layer, one per source."""
    out = []
    fan_out = position == 1
    for j, src in enumerate(sources):
        rows = slice(j * src.out_dim, (j + 1) * src.out_dim)
        cols = slice(None) if fan_out else slice(j * src.in_dim, (j + 1) * src.in_dim)
        out.append((layer.weights[rows, cols], layer.biases[rows]))
    return out


def verify_provenance(model: Union[SynthesizedModel, Network], edges: EdgeModelSet) -> List[str]:
    """
    Compare every copied layer (or block) with its source edge layer.

    Returns:
        Mismatch descriptions; empty when all copies are bit-equal
    """
    net = model.net if isinstance(model, SynthesizedModel) else model
    problems = []
    for position, layer in enumerate(net.layers, start=1):
        if layer.origin.kind == 'edge':
            ref = layer.origin.sources[0]
            if layer.param_hash() != _source(edges, ref).param_hash():
                problems.append(f"layer {position} differs from edge layer {ref}")
        elif layer.origin.kind == 'widened':
            sources = [_source(edges, ref) for ref in layer.origin.sources]
            for ref, src, (w, b) in zip(layer.origin.sources, sources, _layer_blocks(layer, sources, position)):
                if not (np.array_equal(w, src.weights) and np.array_equal(b, src.biases)):
                    problems.append(f"layer {position} block {ref} differs from its edge layer")
        elif layer.origin.kind == 'averaged':
            weights, biases = _averaged_params([_source(edges, ref) for ref in layer.origin.sources])
            if not (np.array_equal(layer.weights, weights) and np.array_equal(layer.biases, biases)):
                problems.append(f"layer {position} is not the mean of decoders {list(layer.origin.sources)}")
    return problems


@dataclass
class SynthesisDescription:
    layers: pd.DataFrame
    n_params: int
    copied_params: int
    reference_params: Optional[int] = None

    @property
    def fraction_pretrained(self) -> float:
        return self.copied_params / self.n_params if self.n_params else 0.0

    @property
    def hidden_widths(self) -> List[int]:
        return self.layers['out_dim'].tolist()[:-1]

    @property
    def reference_difference(self) -> Optional[int]:
        return None if self.reference_params is None else self.n_params - self.reference_params

    def to_dict(self) -> Dict:
        return {
            'n_params': self.n_params,
            'copied_params': self.copied_params,
            'fraction_pretrained': self.fraction_pretrained,
            'hidden_widths': self.hidden_widths,
            'reference_params': self.reference_params,
            'reference_difference': self.reference_difference,
            'layers': self.layers.to_dict(orient='records'),
        }

    def to_text(self) -> str:
        lines = [self.layers.to_string(index=False), '',
                 f"Trainable parameters: {self.n_params}",
                 f"Copied from edges:    {self.copied_params} ({self.fraction_pretrained:.1%})"]
        if self.reference_params is not None:
            lines.append(f"Reference count:      {self.reference_params} (difference {self.reference_difference:+d})")
        return '\n'.join(lines)


def describe(model: Union[SynthesizedModel, Network], edges: Optional[EdgeModelSet] = None,
             reference_params: Optional[int] = None) -> SynthesisDescription:
    """
    Per-layer provenance table: origin, dims, activation, parameter counts and hash.

    Without ``edges`` the copied count of a widened layer is its block
    parameters: all of a first-layer fan-out, the diagonal blocks plus
    biases elsewhere.
    """
    net = model.net if isinstance(model, SynthesizedModel) else model
    rows = []
    for position, layer in enumerate(net.layers, start=1):
        if edges is not None:
            copied = _copied_params(layer, edges)
        elif layer.origin.kind == 'widened' and position > 1:
            copied = layer.weights.size // len(layer.origin.sources) + layer.biases.size
        else:
            copied = layer.n_params if layer.origin.is_copied else 0
        rows.append({
            'layer': position,
            'origin': layer.origin.tag(),
            'in_dim': layer.in_dim,
            'out_dim': layer.out_dim,
            'activation': layer.activation,
            'params': layer.n_params,
            'copied_params': copied,
            'param_hash': layer.param_hash()[:12],
        })
    table = pd.DataFrame(rows)
    copied_total = int(table['copied_params'].sum())
    description = SynthesisDescription(table, net.n_params, copied_total, reference_params)
    if reference_params is not None and description.reference_difference:
        logger.info(f"Model has {net.n_params} parameters vs reference {reference_params}")
    return description


def _as_features(data: Union[Dataset, np.ndarray, None]) -> Optional[np.ndarray]:
    if data is None:
        return None
    return data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def check_disjoint(partition: EdgePartition, *datasets: Dataset) -> None:
    """Raise LeakageError if any central row was also used by an edge."""
    edge_ids = partition.edge_row_ids()
    for ds in datasets:
        if ds is None or not isinstance(ds, Dataset):
            continue
        overlap = np.intersect1d(edge_ids, ds.row_ids)
        if overlap.size:
            raise LeakageError(f"{overlap.size} central rows overlap edge blocks (e.g. row {int(overlap[0])})")


def fine_tune(model: SynthesizedModel, central_train: Union[Dataset, np.ndarray],
              central_val: Union[Dataset, np.ndarray, None], config: TrainConfig,
              partition: Optional[EdgePartition] = None) -> TrainTrace:
    """
    Continue training the whole synthesized model (no layer is frozen).

    Args:
        model: Synthesized model, updated in place
        central_train: Central-cloud training rows
        central_val: Validation rows (optional)
        config: Hyperparameters; ``epochs == 0`` leaves the model unchanged
        partition: Edge bookkeeping used to reject overlapping rows

    Returns:
        TrainTrace in the edge trace format
    """
    if partition is not None:
        check_disjoint(partition, central_train, central_val)
    if config.epochs == 0:
        logger.info("Fine-tune with 0 epochs: model unchanged")
        return TrainTrace(shape=model.net.shape, config=config.to_dict())
    return train(model.net, _as_features(central_train), _as_features(central_val), config,
                 desc=f"Fine-tune {model.plan.name}")
