"""Joint optimization of edge offloading decisions and generation step
allocation under a shared edge step budget."""

from .errors import ConfigError, SolverError, StepAllocError
from .model import (
    Allocation,
    FeasibilityReport,
    SystemConfig,
    ToleranceSettings,
    UeProfile,
    average_error,
    check_feasibility,
    computation_time,
    energy,
    net_cost,
    net_cost_deriv,
    objective,
    utility,
)
from .surrogate import (
    AuxiliaryState,
    penalized_surrogate,
    penalty_linearized,
    surrogate_edge_constraint,
    surrogate_objective,
    update_auxiliaries,
)
from .kkt import Multipliers, a_hat, delta_star, s_tilde, solve_kkt, zeta_hat
from .sca import (
    Components,
    SolveReport,
    TraceRow,
    inter_solve,
    intra_solve,
    objective_breakdown,
    round_and_repair,
)
from .oracle import OracleResult, brute_force, inner_fixed_assignment
from .experiments import (
    ExperimentRecord,
    SweepSpec,
    default_config,
    random_baseline,
    read_records,
    run_sweep,
    sample_instance,
    write_records,
)

__version__ = "0.1.0"
