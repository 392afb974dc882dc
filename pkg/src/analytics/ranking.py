"""
Training-contribution scores per hidden layer and ranking tables.

A layer whose share of the total hidden-layer weight moves a lot during
training contributed more to learning. Two rules are available:

- ``endpoint_delta``: |alpha(final epoch) - alpha(first epoch)|
- ``total_variation``: sum over epochs of |alpha(e+1) - alpha(e)|
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.analytics.layer_stats import VARIANTS, LayerStats
from src.utils.errors import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

RULES = ('endpoint_delta', 'total_variation')


@dataclass
class ContributionScores:
    """Score per hidden layer of one model (``scores[l - 1]`` is layer l)."""
    model_id: int
    scores: np.ndarray
    variant: str = 'l1'
    rule: str = 'endpoint_delta'
    # (first, last) epochs actually used, 1-indexed
    endpoints: tuple = (1, 1)
    fallback: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.scores)

    def to_dict(self) -> Dict:
        return {
            'model_id': self.model_id,
            'scores': [float(s) for s in self.scores],
            'variant': self.variant,
            'rule': self.rule,
            'endpoints': list(self.endpoints),
            'fallback': self.fallback,
            'notes': list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ContributionScores':
        return cls(
            model_id=int(data['model_id']),
            scores=np.asarray(data['scores'], dtype=np.float64),
            variant=data.get('variant', 'l1'),
            rule=data.get('rule', 'endpoint_delta'),
            endpoints=tuple(data.get('endpoints', (1, 1))),
            fallback=bool(data.get('fallback', False)),
            notes=list(data.get('notes', [])),
        )


def contribution_score(stats: LayerStats, variant: str = 'l1',
                       rule: str = 'endpoint_delta') -> ContributionScores:
    """
    Score each hidden layer by how much its alpha ratio changed in training.

    Epochs whose ratio is undefined (signed variant with a vanishing total)
    are skipped; endpoint_delta then uses the nearest defined epoch to each
    end and sets ``fallback``.

    Args:
        stats: Layer statistics with at least 2 epochs
        variant: 'l1' (default) or 'signed'
        rule: 'endpoint_delta' (default) or 'total_variation'

    Returns:
        ContributionScores
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"Unknown ratio variant {variant!r}; use one of {VARIANTS}")
    if rule not in RULES:
        raise ConfigurationError(f"Unknown contribution rule {rule!r}; use one of {RULES}")
    if stats.n_epochs < 2:
        raise ShapeError(f"Contribution scores need at least 2 epochs, model {stats.model_id} has {stats.n_epochs}")

    alpha = stats.alpha(variant)
    defined = np.flatnonzero(np.all(np.isfinite(alpha), axis=1))
    if defined.size < 2:
        raise ShapeError(f"Model {stats.model_id}: fewer than 2 epochs with defined {variant} ratios")

    first, last = int(defined[0]), int(defined[-1])
    fallback = first != 0 or last != stats.n_epochs - 1
    notes = []
    if fallback:
        notes.append(f"endpoints moved to epochs {first + 1} and {last + 1} (undefined ratios)")
        logger.warning(f"Model {stats.model_id}: {notes[-1]}")

    if rule == 'endpoint_delta':
        scores = np.abs(alpha[last] - alpha[first])
    else:
        scores = np.abs(np.diff(alpha[defined], axis=0)).sum(axis=0)

    return ContributionScores(stats.model_id, scores, variant, rule, (first + 1, last + 1), fallback, notes)


def rank_layers(all_scores: Sequence[ContributionScores], top_n: Optional[int] = None,
                ascending: bool = False) -> pd.DataFrame:
    """
    Rank (model, layer) pairs by contribution score.

    Ties keep the lower model id first, then the lower layer index.

    Args:
        all_scores: One ContributionScores per edge model
        top_n: Number of rows to return (all when None)
        ascending: Lowest scores first

    Returns:
        DataFrame with rank, model_id, layer, score, variant, rule
    """
    rows = [
        {'model_id': s.model_id, 'layer': l, 'score': float(v), 'variant': s.variant, 'rule': s.rule}
        for s in all_scores
        for l, v in enumerate(s.scores, start=1)
    ]
    df = pd.DataFrame(rows, columns=['model_id', 'layer', 'score', 'variant', 'rule'])
    if df.empty:
        return df.assign(rank=pd.Series(dtype=int))[['rank'] + list(df.columns)]

    key = df['score'] if ascending else -df['score']
    df = df.assign(_key=key).sort_values(['_key', 'model_id', 'layer'], kind='mergesort').drop(columns='_key')
    if top_n is not None:
        df = df.head(top_n)
    df = df.reset_index(drop=True)
    df.insert(0, 'rank', range(1, len(df) + 1))
    return df
