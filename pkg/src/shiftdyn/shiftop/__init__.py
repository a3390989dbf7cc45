"""Weighted backward shifts on truncated sequence spaces."""

from .chaos import (
    ChaosVerdict,
    HypercyclicConstruction,
    ProbeResult,
    chaos_criterion,
    construct_hypercyclic_vector,
    dense_periodic_probe,
    periodic_extension,
    reset_indices,
)
from .orbit import (
    OrbitRecord,
    apply_power,
    apply_shift,
    forward_shift,
    orbit,
    power_subsample,
    return_set,
)
from .weights import (
    ConstantWeights,
    CounterexampleWeights,
    ExplicitWeights,
    WeightRule,
    counterexample_mask,
    counterexample_set,
    in_counterexample_set,
    parse_rule,
    running_product_exponent,
)

__all__ = [
    "ChaosVerdict",
    "HypercyclicConstruction",
    "ProbeResult",
    "chaos_criterion",
    "construct_hypercyclic_vector",
    "dense_periodic_probe",
    "periodic_extension",
    "reset_indices",
    "OrbitRecord",
    "apply_power",
    "apply_shift",
    "forward_shift",
    "orbit",
    "power_subsample",
    "return_set",
    "ConstantWeights",
    "CounterexampleWeights",
    "ExplicitWeights",
    "WeightRule",
    "counterexample_mask",
    "counterexample_set",
    "in_counterexample_set",
    "parse_rule",
    "running_product_exponent",
]
