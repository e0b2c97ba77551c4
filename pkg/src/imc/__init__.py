"""Imprecise Markov chains on finite state spaces.

Credal-set local models, upper transition operators, backwards recursion,
state classification under upper accessibility, and convergence of the
marginal upper expectations to the unique invariant one.
"""

from imc.settings import Settings, get_settings, set_settings
from imc.errors import (
    IMCError,
    DimensionError,
    InfeasibleError,
    ModelError,
    SizeCapError,
    ConvergenceError,
)
from imc.core import (
    StateSpace,
    CredalPolytope,
    expectation,
    enumerate_vertices,
    upper_expectation_lp,
)
from imc.models import (
    Precise,
    Vacuous,
    Contamination,
    Belief,
    Interval,
    Polytope,
    upper,
    lower,
    as_polytope,
    upper_support,
    lower_hits,
)
from imc.operators import (
    UpperTransitionOperator,
    TimeIndexedOperators,
    apply,
    lower_apply,
    power_apply,
    lower_power_apply,
    tree_step,
    matrix_of,
)
from imc.recursion import (
    ImpreciseMarkovChain,
    joint_upper,
    joint_lower,
    conditional_upper,
    conditional_lower,
    path_bounds,
    marginal_upper,
    marginal_lower,
)
from imc.classify import (
    SupportDigraph,
    ClassificationReport,
    support_digraph,
    n_step_accessible,
    classify,
    regularly_absorbing,
)
from imc.limits import (
    ConvergenceResult,
    invariant_upper_expectation,
    marginal_sequence,
    contamination_marginal,
    contamination_limit,
)
from imc.setchain import (
    MatrixSet,
    extreme_matrices,
    max_product_expectation,
    min_product_expectation,
    ergodicity_coefficient,
    product_scrambling_check,
    strict_inclusion_demo,
)
from imc.reliability import (
    ReliabilitySpec,
    build_embedded_chain,
    failure_bounds,
    failure_closed_form,
    reliability_sweep,
)

__version__ = "0.1.0"
