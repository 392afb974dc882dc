"""
Layer analysis for trained edge models.

This module provides functions for:
- Per-layer weight sums and alpha/beta ratios (layer_stats)
- Contribution scores and ranking tables (ranking)
- Layer selection policies and masks (selection)
"""

from .layer_stats import LayerStats, compute_layer_stats, STATS_COLUMNS
from .ranking import ContributionScores, contribution_score, rank_layers, RULES
from .selection import SelectionPolicy, SelectionMask, select_layers, POLICIES

__all__ = [
    # Layer statistics
    'LayerStats',
    'compute_layer_stats',
    'STATS_COLUMNS',

    # Scoring and ranking
    'ContributionScores',
    'contribution_score',
    'rank_layers',
    'RULES',

    # Selection
    'SelectionPolicy',
    'SelectionMask',
    'select_layers',
    'POLICIES',
]
