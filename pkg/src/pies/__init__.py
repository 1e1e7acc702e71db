"""Joint placement and scheduling of multi-implementation edge services.

Edge clouds host concrete implementations of services under storage
budgets; users are scheduled onto placed implementations to maximise
total QoS. The package provides the QoS model, an exact solver, greedy
placement algorithms with an approximation guarantee, knapsack and
random baselines, scenario generation, a neural-network cost extension,
and a batch experiment harness with a CLI.
"""

from .ann import (
    AnnArchitecture,
    AnnData,
    AnnGenParams,
    AnnHyperparams,
    AnnModel,
    AnnModelType,
    AnnUserLink,
    UnreachableUserError,
    ann_comm_delay,
    ann_comp_delay,
    ann_objective,
    ann_scenario,
    derive_pnn,
    derive_snn,
    user_bps,
)
from .generator import (
    GENERATOR_VERSION,
    REAL_WORLD_MODELS,
    ExpParamMode,
    GenParams,
    generate,
    real_world_fixture,
)
from .harness import (
    RatioSummary,
    TrialRecord,
    approximation_summary,
    derive_seeds,
    fixture_comparison,
    run_comparison,
    sweep,
    write_trials_csv,
)
from .model import (
    Constraint,
    EdgeCloud,
    Placement,
    Scenario,
    Schedule,
    Service,
    ServiceModelSpec,
    UserRequest,
    Violation,
    accuracy_satisfaction,
    assignment_value,
    delay_satisfaction,
    expected_delay,
    objective_value,
    qos,
    thresholds_met,
    validate,
)
from .placement import (
    Algorithm,
    InstanceTooLargeError,
    SolveReport,
    agp,
    egp,
    exact,
    rnd,
    sck,
    solve,
)
from .scenario_io import ScenarioFormatError, load, save, scenario_from_dict, scenario_to_dict
from .scheduling import (
    AuxiliaryMultigraph,
    build_auxiliary_multigraph,
    mst_oracle,
    oms,
    sigma,
    sigma_u,
)

__version__ = "0.1.0"
