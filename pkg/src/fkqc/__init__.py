"""Frenkel-Kontorova chains on one-dimensional substitution quasicrystals.

Substrate chains with exact quadratic-field coordinates, tower hierarchies
with exact transverse measures, short-range substrate potentials, global
segment minimization, counting checks on minimizers, rotation-number
estimation and targeting, and the induced area-preserving phase-space map.
"""

from .quadratic import QuadraticField, QuadraticNumber, golden_field
from .substitution import (
    LocalPattern,
    QuasicrystalChain,
    SubstitutionRule,
    build_chain,
    crystal_rule,
    equivalent_windows,
    expand_word,
    fibonacci_rule,
    letter_frequencies,
    letter_frequencies_exact,
    local_window,
    thue_morse_rule,
)
from .towers import (
    SkeletonPoint,
    TowerHierarchy,
    TowerLevel,
    build_hierarchy,
    coarsen,
    dense_set_value,
    dense_set_value_exact,
    loop_occupancy,
    project,
)
from .energy import (
    BumpSpec,
    EnergyModel,
    InteractionPotential,
    SubstratePotential,
    default_model,
    energy_gradient,
    eval_V,
    eval_V1,
    eval_V2,
    mean_tile_length,
    segment_energy,
)
from .minimize import (
    LoopMarks,
    MinimizeOptions,
    SegmentProblem,
    SegmentResult,
    minimize_loop_segment,
    minimize_segment,
    verify_critical,
)
from .order_checks import (
    CountReport,
    TranslateFamily,
    check_loop_spread,
    check_translate_bounds,
    count_atoms,
    find_translates,
)
from .rotation import (
    Configuration,
    ContinuityReport,
    RotationEstimate,
    TowerBound,
    continuity_probe,
    deepest_midpoint,
    estimate_rotation,
    rotation_summary,
    tower_bounds,
)
from .builder import (
    BuilderState,
    MarkedSkeleton,
    approximate_rho,
    build_for_counts,
    lift,
    mark_level,
    refine,
    start_builder,
)
from .twistmap import (
    PhasePoint,
    from_configuration,
    jacobian_check,
    orbit,
    shadow_error,
    step,
    step_back,
)
from .errors import ApproximationError, ConvergenceError, DomainError, RangeError

__version__ = "0.1.0"
