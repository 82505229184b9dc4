"""Exact distances between probability distributions on finite carriers.

Couples of constructions for the same distance: optimal couplings
(transport plans) on one side, nonexpansive price functions on the other,
with the equalities between them checked by explicit witnesses rather than
assumed.  Includes the Levy-Prokhorov distance, distances between convex
sets of distributions, and behavioural distances on finite transition
systems, all in rational arithmetic.
"""

from .behavioural import (
    Coalgebra,
    Lifting,
    MetricIterate,
    bdist_step,
    behavioural_distance,
)
from .convex_powerset import (
    ConvexSet,
    HkResult,
    PointToSetResult,
    dhk_composite,
    dhk_dual,
    dhk_spanning_tree,
    point_to_set_distance,
)
from .distributions import (
    Coupling,
    Distribution,
    FuzzyPredicate,
    convex_combine,
    expectation,
    pushforward,
)
from .errors import (
    GuardLimitError,
    InternalCheckError,
    LiftlabError,
    PreconditionError,
    ValidationError,
)
from .levy_prokhorov import (
    CrispPricePair,
    DualityWitness,
    LevyProkhorovValue,
    crisp_price_pair,
    duality_witness,
    ky_fan,
    lp_direct,
)
from .liftings import (
    LiftedValue,
    NonexpansivePair,
    PairingRelation,
    ThresholdCoupling,
    hausdorff_distance,
    kantorovich,
    kantorovich_grid_oracle,
    kantorovich_relational,
    wasserstein,
)
from .lp import (
    Constraint,
    LinearProgram,
    LpSolution,
    TransportPlan,
    check_solution,
    solve_lp,
    solve_transport,
)
from .modalities import (
    GenerallyRepresentations,
    Modality,
    WellBehavedReport,
    check_well_behaved,
    dual_eval,
    eval_modality,
    generally_representations,
    generally_value,
    parse_modality,
)
from .spaces import (
    AxiomViolation,
    CrispRelation,
    FuzzyRelation,
    PseudometricSpace,
    crisp_threshold,
    epsilon_expansion,
    metric_quotient,
    relation_of_metric,
    require_valid,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomViolation",
    "Coalgebra",
    "Constraint",
    "ConvexSet",
    "Coupling",
    "CrispPricePair",
    "CrispRelation",
    "Distribution",
    "DualityWitness",
    "FuzzyPredicate",
    "FuzzyRelation",
    "GenerallyRepresentations",
    "GuardLimitError",
    "HkResult",
    "InternalCheckError",
    "LevyProkhorovValue",
    "LiftedValue",
    "Lifting",
    "LiftlabError",
    "LinearProgram",
    "LpSolution",
    "MetricIterate",
    "Modality",
    "NonexpansivePair",
    "PairingRelation",
    "PointToSetResult",
    "PreconditionError",
    "PseudometricSpace",
    "ThresholdCoupling",
    "TransportPlan",
    "ValidationError",
    "WellBehavedReport",
    "bdist_step",
    "behavioural_distance",
    "check_solution",
    "check_well_behaved",
    "convex_combine",
    "crisp_price_pair",
    "crisp_threshold",
    "dhk_composite",
    "dhk_dual",
    "dhk_spanning_tree",
    "dual_eval",
    "duality_witness",
    "epsilon_expansion",
    "eval_modality",
    "expectation",
    "generally_representations",
    "generally_value",
    "hausdorff_distance",
    "kantorovich",
    "kantorovich_grid_oracle",
    "kantorovich_relational",
    "ky_fan",
    "lp_direct",
    "metric_quotient",
    "parse_modality",
    "point_to_set_distance",
    "pushforward",
    "relation_of_metric",
    "require_valid",
    "solve_lp",
    "solve_transport",
    "validate",
    "wasserstein",
]
