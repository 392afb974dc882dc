"""
Central-cloud model synthesis from trained edge layers.
"""
from .plan import SynthesisPlan, plan_options, STRATEGIES, GLUE_INITS, BRIDGES, INPUT_INITS
from .synthesizer import (
    SynthesizedModel,
    SynthesisDescription,
    synthesize,
    fine_tune,
    describe,
    verify_provenance,
    check_disjoint,
    REFERENCE_PARAMS,
    REFERENCE_SYNTHESIZED_WIDTHS,
    REFERENCE_BASELINE_WIDTHS,
    reference_shape,
)

__all__ = [
    'SynthesisPlan',
    'plan_options',
    'STRATEGIES',
    'GLUE_INITS',
    'BRIDGES',
    'INPUT_INITS',
    'SynthesizedModel',
    'SynthesisDescription',
    'synthesize',
    'fine_tune',
    'describe',
    'verify_provenance',
    'check_disjoint',
    'REFERENCE_PARAMS',
    'REFERENCE_SYNTHESIZED_WIDTHS',
    'REFERENCE_BASELINE_WIDTHS',
    'reference_shape',
]
