"""Certified upper bounds and Holevo lower bounds on the distillable
randomness of bipartite quantum states."""

from .operators import (
    BipartiteOperator,
    DensityMatrix,
    HermitianOperator,
    dephase,
    fidelity,
    matrix_function,
    partial_trace,
    partial_transpose,
    schatten_norm,
    tensor,
)
from .states import (
    CQState,
    QuantumChannel,
    apply_local_channels,
    isotropic,
    load_state,
    max_classically_correlated,
    max_entangled,
    random_channel,
    random_density_matrix,
    save_state,
)
from .conic import ConicProgram, SolverOptions, SolverReport, embed_hermitian, solve, verify_feasible
from .measures import (
    BoundResult,
    FeasibleTriple,
    beta_a,
    beta_b,
    c_beta,
    c_gamma,
    comm_bound_map_triple,
    dimension_feasible_point,
    dp_map_triple,
    fidelity_bound_check,
    gamma_heuristic,
    product_feasible_point,
    tensor_triple,
)
from .entropic import (
    FWConfig,
    UpsilonResult,
    holevo_of_measured_ensemble,
    isotropic_holevo_closed_form,
    one_shot_upper_bound,
    relative_entropy,
    sandwiched_renyi,
    upper_bound_min,
    upsilon_a,
    upsilon_b,
)

__version__ = "0.1.0"
