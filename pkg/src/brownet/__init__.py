"""Brownian network control: workload reduction, effective cost, policy search.

The pipeline: validate a network instance, verify its structural
assumptions by linear programming, reduce the control problem to its
workload formulation, build the effective holding cost and a continuous
minimizer selection on workload fibers, then simulate — reflecting
barrier policies on the reduced problem, lifted controls on the original
one — and demonstrate that both cost levels agree up to a closed-form
offset.
"""

from ._kernels import HAVE_NUMBA, active_backend, path_generator
from .assumptions import (
    AssumptionReport,
    AssumptionViolation,
    check_assumptions,
    check_full_displacement,
    check_no_arbitrage,
    compute_gamma_eta,
)
from .effective_cost import (
    CurvePoint,
    EffectiveCost,
    InfeasibleFiberError,
    NumericalError,
    ProbeRow,
    UnsupportedCostError,
    discontinuity_probe,
    effective_cost_curve,
    eval_g,
    minimize_on_fiber,
    quasiconvex_level_eval,
    two_server_selection,
)
from .model import (
    InstanceError,
    NetworkData,
    Polytope,
    PolytopeError,
    QuadraticCost,
    ReducedNetworkData,
    ValidationReport,
    bundled_instance_path,
    load_instance,
    network_from_dict,
    network_to_dict,
    two_server_network,
    validate_network,
)
from .pathsim import (
    BallControlResult,
    CostBreakdown,
    PathBundle,
    TimeGrid,
    baseline_ball_control,
    check_bundle_admissible,
    cost_bcp,
    cost_rbcp,
    discounted_stieltjes,
    extend_workload_bm,
    lift_control,
    offset_I,
    simulate_bm,
    stieltjes_consistency,
    two_sided_regulator,
)
from .policy import (
    BarrierPolicy,
    ControllabilityError,
    EquivalenceResult,
    ModeReduction,
    OptimizeResult,
    PolicyTables,
    build_policy_tables,
    equivalence_order_study,
    mode_reduction,
    optimize_barrier,
    run_equivalence,
    simulate_barrier_paths,
    simulate_barrier_policy,
    translate_policy_to_bcp,
)
from .reduction import (
    ReductionError,
    WorkloadReduction,
    dual_prices,
    effort_matrix_G,
    null_space_basis,
    pseudo_inverse_K,
    pseudo_inverse_R,
    recover_control,
    reduce_network,
    reversible_basis,
    workload_matrix,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
