"""Rate certification and simulation for gradient-based cooperative source seeking."""

from .certify import (
    CertificationProblem,
    RateCertificate,
    assemble_full_lmi,
    assemble_single_agent_lmi,
    bisect_alpha,
    bisect_feasible,
    load_certificate,
    replay_violation,
    save_certificate,
    solve_feasibility,
    sweep,
    write_sweep_csv,
)
from .field import (
    CustomField,
    FieldGraph,
    QuadraticField,
    RadialField,
    certify_sector,
    check_minimizer_geometry,
    check_path_to_informed,
    f_value,
    grad_f,
    grounded_laplacians,
    laplacian,
    load_scenario,
    minimize_f,
    save_scenario,
    smoothed_huber_field,
)
from .sdp import CvxpyBackend, SdpReport, SdpRequest, default_backend
from .sim import (
    DecayEstimate,
    FrictionVehicle,
    NoisePolicy,
    SimScenario,
    SimTrajectory,
    check_initial_ball,
    estimate_decay_rate,
    sample_noise,
    simulate,
    stacked_equilibrium,
    write_trajectory_csv,
)
from .statespace import (
    AugmentedPlant,
    ParamGrid,
    ParamStateSpace,
    StateSpace,
    augment_with_filter,
    check_equilibrium_family,
    double_integrator_plant,
    equilibrium_state,
    friction_vehicle_base,
    load_matrix,
    load_model,
    save_matrix,
    save_model,
    stack_agents,
)
from .zf import ZfMultiplier, ZfVariableSet, build_multiplier, build_variable_constraints, iqc_residual

__version__ = "0.1.0"
