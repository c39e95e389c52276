"""Abstract economies, gap functions and leader-follower games on finite grids."""

from .economy import (ActionSpace, EconomyProfile, TabulatedConstraintMap, TabulatedPreferenceMap,
                      ToleranceConfig, parse_problem, serialize_problem, validate_economy)
from .equilibrium import Certificate, EquilibriumSet, certify, ne_oracle, ne_via_gap
from .errors import (AEKitError, ConsistencyError, ImprovementSetMismatch, InvalidInputError,
                     ParseError, ValidationError)
from .gapfun import gap, gap_sweep, gmap, improvement_membership
from .profiles import (ProfileFamily, check_regularity, estimate_alpha, estimate_tau, limit_profile,
                       lsc_probe, rho, stability_experiment)
from .reductions import GNEPSpec, RelationSpec, enumerate_eps_equilibria, from_gnep, from_relation
from .setval import FiniteCloud, displacement, excess, hausdorff, pk_limit_check
from .slmfg import SLMFGProblem, build_graph, signal_continuity_probe, solve_slmfg

__version__ = "0.1.0"

__all__ = [
    "AEKitError", "ActionSpace", "Certificate", "ConsistencyError", "EconomyProfile",
    "EquilibriumSet", "FiniteCloud", "GNEPSpec", "ImprovementSetMismatch", "InvalidInputError",
    "ParseError", "ProfileFamily", "RelationSpec", "SLMFGProblem", "TabulatedConstraintMap",
    "TabulatedPreferenceMap", "ToleranceConfig", "ValidationError", "build_graph", "certify",
    "check_regularity", "displacement", "enumerate_eps_equilibria", "estimate_alpha",
    "estimate_tau", "excess", "from_gnep", "from_relation", "gap", "gap_sweep", "gmap",
    "hausdorff", "improvement_membership", "limit_profile", "lsc_probe", "ne_oracle",
    "ne_via_gap", "parse_problem", "pk_limit_check", "rho", "serialize_problem",
    "signal_continuity_probe", "solve_slmfg", "stability_experiment", "validate_economy",
]
