"""
Synthesis plans: which edge layers go into the central model, in what order
and how width mismatches are bridged.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.analytics.selection import SelectionMask
from src.utils.errors import ConfigurationError, SynthesisError
from src.utils.helpers import load_json, save_json

logger = logging.getLogger(__name__)

STRATEGIES = ('stack', 'widen')
GLUE_INITS = ('uniform_pm1', 'uniform_scaled', 'near_zero')
BRIDGES = ('glue', 'none')
INPUT_INITS = ('identity', 'uniform_pm1', 'uniform_scaled')

LayerRef = Tuple[int, int]


@dataclass
class SynthesisPlan:
    """
    Recipe for a central model.

    ``layer_order`` lists (model, layer) refs; every layer selected in
    ``mask`` appears exactly once. Under ``stack`` the order may also end
    with an edge's output layer (index hidden + 1), which then closes the
    autoencoder instead of a fresh head. ``output_head`` holds the widths of
    fresh hidden layers placed before the closing layer. ``cross_scale`` is
    the half-width of the near-zero draw for cross-block weights in widen
    mode (0 gives exact zeros).

    ``input_init`` seeds the fresh input layer; ``identity`` passes the
    features through unchanged (tiled when the layer fans out). With
    ``reuse_decoders`` an edge's output layer follows that edge's last
    hidden layer wherever the running width must return to the input
    width, both between stacked models and when closing the model. Under
    widen, a final group of last hidden layers closes with the edge output
    layers averaged.
    """
    mask: SelectionMask
    layer_order: List[LayerRef]
    strategy: str = 'stack'
    glue_init: str = 'uniform_scaled'
    cross_scale: float = 1e-3
    output_head: List[int] = field(default_factory=list)
    input_layer: bool = True
    bridge: str = 'glue'
    input_init: str = 'identity'
    reuse_decoders: bool = True
    name: str = 'plan'

    def __post_init__(self):
        self.layer_order = [(int(k), int(i)) for k, i in self.layer_order]
        self.output_head = [int(w) for w in self.output_head]
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"Unknown synthesis strategy {self.strategy!r}; use one of {STRATEGIES}")
        if self.glue_init not in GLUE_INITS:
            raise ConfigurationError(f"Unknown glue init {self.glue_init!r}; use one of {GLUE_INITS}")
        if self.bridge not in BRIDGES:
            raise ConfigurationError(f"Unknown bridge rule {self.bridge!r}; use one of {BRIDGES}")
        if self.input_init not in INPUT_INITS:
            raise ConfigurationError(f"Unknown input init {self.input_init!r}; use one of {INPUT_INITS}")
        if self.cross_scale < 0:
            raise ConfigurationError(f"cross_scale must be >= 0, got {self.cross_scale}")
        if any(w < 1 for w in self.output_head):
            raise ConfigurationError(f"Head widths must be positive, got {self.output_head}")

    @classmethod
    def from_mask(cls, mask: SelectionMask, strategy: str = 'stack', **options: Any) -> 'SynthesisPlan':
        """
        Plan with the default order: model then layer for stack, layer then
        model for widen.
        """
        refs = mask.selected()
        if strategy == 'widen':
            refs = sorted(refs, key=lambda ref: (ref[1], ref[0]))
        return cls(mask=mask, layer_order=refs, strategy=strategy, **options)

    def hidden_refs(self, hidden_counts: Sequence[int]) -> List[LayerRef]:
        return [(k, i) for k, i in self.layer_order if i <= hidden_counts[k - 1]]

    def validate(self, hidden_counts: Sequence[int]) -> 'SynthesisPlan':
        """
        Check the plan against edge models with ``hidden_counts[k - 1]`` hidden layers.

        Raises:
            SynthesisError naming the offending refs
        """
        self.mask.check_against(hidden_counts)
        for k, i in self.layer_order:
            if not (1 <= k <= len(hidden_counts) and 1 <= i <= hidden_counts[k - 1] + 1):
                raise SynthesisError(f"Plan {self.name} references layer {i} of model {k}, which does not exist")
        if len(set(self.layer_order)) != len(self.layer_order):
            dupes = sorted({r for r in self.layer_order if self.layer_order.count(r) > 1})
            raise SynthesisError(f"Plan {self.name} lists layers more than once: {dupes}")

        hidden = self.hidden_refs(hidden_counts)
        missing = sorted(set(self.mask.selected()) - set(hidden))
        extra = sorted(set(hidden) - set(self.mask.selected()))
        if missing or extra:
            raise SynthesisError(f"Plan {self.name} order does not match its mask: "
                                 f"missing {missing}, not selected {extra}")

        outputs = [ref for ref in self.layer_order if ref not in hidden]
        if outputs:
            if self.strategy != 'stack':
                raise SynthesisError(f"Output layers {outputs} can only be reused by the stack strategy")
            if outputs != self.layer_order[-1:] or self.output_head:
                raise SynthesisError(f"Output layer {outputs} must be last in plan {self.name} "
                                     f"and cannot be followed by a head")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'strategy': self.strategy,
            'layer_order': [list(r) for r in self.layer_order],
            'glue_init': self.glue_init,
            'cross_scale': self.cross_scale,
            'output_head': list(self.output_head),
            'input_layer': self.input_layer,
            'bridge': self.bridge,
            'input_init': self.input_init,
            'reuse_decoders': self.reuse_decoders,
            'mask': self.mask.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthesisPlan':
        return cls(
            mask=SelectionMask.from_dict(data['mask']),
            layer_order=[tuple(r) for r in data['layer_order']],
            strategy=data.get('strategy', 'stack'),
            glue_init=data.get('glue_init', 'uniform_scaled'),
            cross_scale=float(data.get('cross_scale', 1e-3)),
            output_head=list(data.get('output_head', [])),
            input_layer=bool(data.get('input_layer', True)),
            bridge=data.get('bridge', 'glue'),
            input_init=data.get('input_init', 'identity'),
            reuse_decoders=bool(data.get('reuse_decoders', True)),
            name=data.get('name', 'plan'),
        )

    def save(self, path: str) -> Path:
        save_json(self.to_dict(), str(path))
        return Path(path)

    @classmethod
    def load(cls, path: str) -> 'SynthesisPlan':
        return cls.from_dict(load_json(str(path)))


def plan_options(spec: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Plan keyword options from a config ``plans`` entry (policy and name excluded)."""
    spec = dict(spec or {})
    allowed = {'strategy', 'glue_init', 'cross_scale', 'output_head', 'input_layer', 'bridge',
               'input_init', 'reuse_decoders'}
    unknown = set(spec) - allowed - {'name', 'policy', 'layer_order'}
    if unknown:
        raise ConfigurationError(f"Unknown plan keys: {sorted(unknown)}")
    return {k: v for k, v in spec.items() if k in allowed}
