"""Exact computations in transportation cost spaces of finite metric spaces.

The package solves transportation problems exactly, finds minimum perfect
matchings with laminar odd-cut duals, and builds norm-one projections onto the
span of molecules of a suitable pair sequence, together with certificates that
re-check every claimed property in rational arithmetic.
"""

from __future__ import annotations

from . import errors as _errors
from .errors import *  # noqa: F401,F403
from .harness import (
    GeneratorSpec,
    TrialReport,
    gen_greedy_pair_sequence,
    gen_random_metric,
    oracle_tc_norm_integer,
    run_property_suite,
)
from .lp import Constraint, LinearProgram, LPOutcome, solve_lp, verify_lp_certificate
from .matching import (
    LaminarDual,
    Matching,
    MatchingInstance,
    RawOddCutDual,
    brute_force_min_matching,
    check_prefix_matching_criterion,
    solve_dual_lp,
    solve_matching_lp,
    uncross_to_laminar,
    verify_dual_certificate,
)
from .metric import FiniteMetricSpace, parse_space, serialize_space, validate_metric
from .projection import (
    DualStructure,
    ProjectionOperator,
    apply_projection,
    build_projection,
    certify_projection,
    eval_t,
    eval_t_via_s,
)
from .transport import LipschitzFunction, Molecule, TransportationProblem, tc_norm

__version__ = "0.1.0"

__all__ = [
    "Constraint",
    "DualStructure",
    "FiniteMetricSpace",
    "GeneratorSpec",
    "LPOutcome",
    "LaminarDual",
    "LinearProgram",
    "LipschitzFunction",
    "Matching",
    "MatchingInstance",
    "Molecule",
    "ProjectionOperator",
    "RawOddCutDual",
    "TransportationProblem",
    "TrialReport",
    "apply_projection",
    "brute_force_min_matching",
    "build_projection",
    "certify_projection",
    "check_prefix_matching_criterion",
    "eval_t",
    "eval_t_via_s",
    "gen_greedy_pair_sequence",
    "gen_random_metric",
    "oracle_tc_norm_integer",
    "parse_space",
    "run_property_suite",
    "serialize_space",
    "solve_dual_lp",
    "solve_lp",
    "solve_matching_lp",
    "tc_norm",
    "uncross_to_laminar",
    "validate_metric",
    "verify_dual_certificate",
    "verify_lp_certificate",
] + list(_errors.__all__)
