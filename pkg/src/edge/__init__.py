"""
Edge-cloud model training and evaluation.
"""
from .trainer import (
    EdgeModelSet,
    EdgeEvaluation,
    edge_seed,
    train_single_edge,
    train_edges,
    evaluate_edge,
    save_edge_models,
    load_edge_models,
)

__all__ = [
    'EdgeModelSet',
    'EdgeEvaluation',
    'edge_seed',
    'train_single_edge',
    'train_edges',
    'evaluate_edge',
    'save_edge_models',
    'load_edge_models',
]
