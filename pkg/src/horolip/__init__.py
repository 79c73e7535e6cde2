"""Thurston's Lipschitz metric on the once-punctured torus, generic
horofunction-boundary machinery, and exact closed forms for detour costs
between lamination horofunctions."""

from .errors import ContractError, DegenerateError, EvaluationError
from .horoboundary import (
    AsymmetricSpace,
    DigraphSpace,
    SampledFunction,
    almost_geodesic_defect,
    detour_cost_along,
    detour_metric,
    digraph_brute_oracle,
    horolimit_estimate,
    psi,
    rebase,
)
from .laminations import (
    ErgodicBasis,
    FormalLamination,
    TestCurveModel,
    detour_cost_closed,
    detour_metric_closed,
    lfactor_model,
    ll_relation,
    model_from_torus,
    ratio_sup_bound,
)
from .torus import (
    BASE,
    CurveSlope,
    DistanceResult,
    HoroResult,
    MeasuredLam,
    ProjectiveSlope,
    TracePoint,
    attracting_slope,
    convergence_report,
    curve_length,
    curve_trace,
    default_probes,
    horofunction,
    intersection,
    intersection_curves,
    lipschitz_distance,
    matrix_word,
    maxset,
    mcg_apply,
    mcg_apply_slope,
    pa_sequence,
    realize_matrices,
    space,
    teich_from_xy,
    twist_matrix,
    twist_sequence,
)

__version__ = "0.1.0"
