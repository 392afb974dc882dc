"""
Selection of trained edge layers for the central model.

A SelectionMask holds S[k, i] in {0, 1} for edge model k and hidden layer i
(both 1-indexed). The result depends only on the scores and the policy.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.analytics.ranking import ContributionScores
from src.utils.errors import ConfigurationError, SelectionError
from src.utils.helpers import load_json, save_json

logger = logging.getLogger(__name__)

POLICIES = ('top_k_per_model', 'top_k_global', 'threshold', 'all')

LayerRef = Tuple[int, int]


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str
    k: Optional[int] = None
    tau: Optional[float] = None

    def validate(self) -> 'SelectionPolicy':
        if self.kind not in POLICIES:
            raise ConfigurationError(f"Unknown selection policy {self.kind!r}; use one of {POLICIES}")
        if self.kind.startswith('top_k') and (self.k is None or self.k < 1):
            raise ConfigurationError(f"{self.kind} needs k >= 1, got {self.k}")
        if self.kind == 'threshold' and (self.tau is None or not np.isfinite(self.tau)):
            raise ConfigurationError(f"threshold policy needs a finite tau, got {self.tau}")
        return self

    @classmethod
    def parse(cls, spec: Union[str, 'SelectionPolicy']) -> 'SelectionPolicy':
        """Parse ``top_k_per_model:2``, ``top_k_global:3``, ``threshold:0.05`` or ``all``."""
        if isinstance(spec, SelectionPolicy):
            return spec.validate()
        name, _, arg = str(spec).strip().partition(':')
        try:
            if name in ('top_k_per_model', 'top_k_global'):
                return cls(name, k=int(arg)).validate()
            if name == 'threshold':
                return cls(name, tau=float(arg)).validate()
        except ValueError as e:
            raise ConfigurationError(f"Bad selection policy {spec!r}: {e}") from e
        if name == 'all' and not arg:
            return cls('all')
        raise ConfigurationError(f"Unknown selection policy {spec!r}; use one of {POLICIES}")

    def __str__(self) -> str:
        if self.kind.startswith('top_k'):
            return f"{self.kind}:{self.k}"
        if self.kind == 'threshold':
            return f"threshold:{self.tau}"
        return 'all'


@dataclass
class SelectionMask:
    """``entries[k - 1][i - 1]`` is S[k, i]."""
    entries: List[np.ndarray]
    policy: str
    scores: List[List[float]] = field(default_factory=list)
    rule: Optional[str] = None
    variant: Optional[str] = None

    def __post_init__(self):
        self.entries = [np.asarray(e, dtype=bool) for e in self.entries]
        if not any(e.any() for e in self.entries):
            raise SelectionError(f"Policy {self.policy} selected no layers")

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n_selected(self) -> int:
        return int(sum(e.sum() for e in self.entries))

    def is_selected(self, k: int, i: int) -> bool:
        return bool(self.entries[k - 1][i - 1])

    def selected(self) -> List[LayerRef]:
        """Selected (model, layer) refs in model then layer order."""
        return [(k, int(i) + 1) for k, e in enumerate(self.entries, start=1) for i in np.flatnonzero(e)]

    def as_matrix(self) -> np.ndarray:
        """0/1 matrix padded with zeros to the deepest model."""
        width = max(len(e) for e in self.entries)
        out = np.zeros((self.m, width), dtype=np.int64)
        for k, e in enumerate(self.entries):
            out[k, :len(e)] = e
        return out

    def check_against(self, hidden_counts: Sequence[int]) -> None:
        """Every selected ref must name an existing hidden layer."""
        for k, i in self.selected():
            if k > len(hidden_counts) or i > hidden_counts[k - 1]:
                raise SelectionError(f"Mask selects layer {i} of model {k}, which does not exist")

    def to_dict(self) -> Dict:
        return {
            'policy': self.policy,
            'rule': self.rule,
            'variant': self.variant,
            'entries': [e.astype(int).tolist() for e in self.entries],
            'selected': [list(ref) for ref in self.selected()],
            'scores': self.scores,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> 'SelectionMask':
        return cls(entries=[np.asarray(e, dtype=bool) for e in data['entries']],
                   policy=data.get('policy', 'manual'), scores=data.get('scores', []),
                   rule=data.get('rule'), variant=data.get('variant'))

    @classmethod
    def from_refs(cls, refs: Sequence[LayerRef], hidden_counts: Sequence[int],
                  policy: str = 'manual') -> 'SelectionMask':
        """Mask from explicit (model, layer) refs."""
        entries = [np.zeros(n, dtype=bool) for n in hidden_counts]
        for k, i in refs:
            if not (1 <= k <= len(entries) and 1 <= i <= len(entries[k - 1])):
                raise SelectionError(f"Layer ref ({k}, {i}) does not exist")
            entries[k - 1][i - 1] = True
        return cls(entries, policy)

    def save(self, path: str) -> Path:
        save_json(self.to_dict(), str(path))
        return Path(path)

    @classmethod
    def load(cls, path: str) -> 'SelectionMask':
        return cls.from_dict(load_json(str(path)))


def _as_score_arrays(scores: Sequence[Union[ContributionScores, Sequence[float]]]) -> List[np.ndarray]:
    arrays = []
    for s in scores:
        values = s.scores if isinstance(s, ContributionScores) else s
        arr = np.asarray(values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise SelectionError("A model has no hidden-layer scores")
        if not np.all(np.isfinite(arr)):
            raise SelectionError("Contribution scores must be finite")
        arrays.append(arr)
    if not arrays:
        raise SelectionError("No edge models to select from")
    return arrays


def select_layers(scores: Sequence[Union[ContributionScores, Sequence[float]]],
                  policy: Union[str, SelectionPolicy]) -> SelectionMask:
    """
    Apply a selection policy to the per-model contribution scores.

    Ties are broken toward the lower model id, then the lower layer index.

    Args:
        scores: One entry per edge model, in model order (model 1 first)
        policy: SelectionPolicy or its string form

    Returns:
        SelectionMask
    """
    policy = SelectionPolicy.parse(policy)
    arrays = _as_score_arrays(scores)
    entries = [np.zeros(a.size, dtype=bool) for a in arrays]

    if policy.kind == 'all':
        for e in entries:
            e[:] = True
    elif policy.kind == 'threshold':
        for a, e in zip(arrays, entries):
            e[:] = a >= policy.tau
    elif policy.kind == 'top_k_per_model':
        for a, e in zip(arrays, entries):
            # stable sort on -score keeps lower layer first among ties
            e[np.argsort(-a, kind='stable')[:policy.k]] = True
    else:
        refs = [(-float(v), k, i) for k, a in enumerate(arrays) for i, v in enumerate(a)]
        for _, k, i in sorted(refs)[:policy.k]:
            entries[k][i] = True

    first = scores[0] if len(scores) else None
    rule = first.rule if isinstance(first, ContributionScores) else None
    variant = first.variant if isinstance(first, ContributionScores) else None
    mask = SelectionMask(entries, str(policy), [a.tolist() for a in arrays], rule, variant)
    logger.info(f"Policy {policy} selected {mask.n_selected} layers: {mask.selected()}")
    return mask
