"""Limit cones, growth indicators and deformation experiments for subgroups of SL(n, R)."""

from .cartan import (
    AmbientGroup,
    LinearForm,
    WeylElement,
    cartan_projection,
    fold_to_chamber,
    jordan_projection,
    opposition_involution,
    p_theta,
    random_sl,
)
from .cones import (
    HalfSpaceCone,
    SampledCone,
    construct_admissible_cone,
    is_convex_cone,
    projectivized_hausdorff,
    verify_admissible,
)
from .deformation import (
    FoldedNeighbourhood,
    RepresentationFamily,
    build_section7_family,
    build_sym3_family,
    build_sym3_schottky,
    run_continuity_experiment,
    run_growth_continuity,
    symmetric_power,
)
from .errors import (
    BudgetExceededError,
    EmptyEstimateError,
    InfeasibleError,
    InvalidFormError,
    InvalidInputError,
    LimitConeError,
)
from .invariants import (
    anosov_certificate,
    estimate_critical_exponent,
    estimate_growth_indicator,
    estimate_limit_cone,
)
from .subgroups import folded_plane_sl3_in_sl4, reductive_subgroup_cone, sharpness_test
from .words import Ball, MarkedGroup, compute_ball, enumerate_ball

__version__ = "0.1.0"
