"""Generalized-bias opinion dynamics on influence graphs."""

from .bias import (
    Constant,
    Counterexample,
    Degroot,
    Disagreement,
    DisagreementBias,
    GroupPartition,
    Intergroup,
    Overridden,
    Product,
    SamplingPlan,
    eval_bias,
    from_disagreement,
    intergroup_assessment,
    validate_bias_conditions,
)
from .dynamics import (
    OpinionModel,
    SimulationTrace,
    build_update_matrix,
    detect_consensus,
    disagreement_norm,
    simulate,
    step,
)
from .dynsys import iterate_orbit, logistic_map, omega_limit_estimate
from .graph import (
    InfluenceGraph,
    in_neighbors,
    is_strongly_connected,
    new_influence_graph,
    normalized_influence,
)
from .spectral import (
    analyze_matrix,
    is_irreducible,
    is_primitive,
    is_row_stochastic,
    second_eigenvalue_modulus,
    spectral_radius,
)

__version__ = "0.1.0"
