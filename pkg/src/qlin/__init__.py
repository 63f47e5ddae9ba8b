"""Linearizations of zero-one quadratic programs: bounds, models, cuts, solvers."""

from qlin.instance import ProblemInstance, GeneratorConfig, load_instance, save_instance, evaluate_point, generate_random
from qlin.simplex import LpProblem, LpSolution, solve_lp
from qlin.bounds import BoundSet, BoundOptions, compute_bound_set, choose_theta, row_extremes, enhanced_region
from qlin.models import LinearModel, Variant, Cuts, build_model, add_cuts, lp_relaxation, canonical_lift
from qlin.bnb import MilpSolution, solve_milp
from qlin.oracle import enumerate_optimum, verify_equivalence, compare_relaxations

__all__ = [
    "ProblemInstance", "GeneratorConfig", "load_instance", "save_instance", "evaluate_point",
    "generate_random", "LpProblem", "LpSolution", "solve_lp", "BoundSet", "BoundOptions",
    "compute_bound_set", "choose_theta", "row_extremes", "enhanced_region", "LinearModel",
    "Variant", "Cuts", "build_model", "add_cuts", "lp_relaxation", "canonical_lift",
    "MilpSolution", "solve_milp", "enumerate_optimum", "verify_equivalence", "compare_relaxations",
]
