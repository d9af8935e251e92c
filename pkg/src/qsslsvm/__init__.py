"""Semi-supervised least-squares kernel SVM with a desk-scale,
density-matrix simulation of its quantum training pipeline."""

from .channels import (
    EvolutionConfig,
    EvolutionResult,
    ProgramState,
    controlled_partial_swap_evolution,
    cyclic_permutation,
    glmr_step,
    lmr_step,
    make_program_state_k,
    make_program_state_kk,
    make_program_state_klk,
    mix_program_states,
    simulate_evolution,
    swap_operator,
)
from .classical import (
    AssembledSystem,
    KernelSpec,
    ModelSolution,
    assemble_system,
    kernel_matrix,
    predict,
    solve_classical,
    train_semi_supervised,
)
from .datasets import (
    LaplacianMatrix,
    SampleGraph,
    TrainingSet,
    build_knn_graph,
    combinatorial_laplacian,
    incidence_matrix,
    load_dataset,
    load_graph,
    load_points,
    normalized_laplacian,
)
from .encodings import (
    DensityMatrix,
    StateVector,
    data_state,
    incidence_state,
    kernel_density,
    label_state,
    laplacian_density,
)
from .hhl import (
    HHLResult,
    QPEConfig,
    conditional_rotation_invert,
    conditional_rotation_multiply,
    glmr_phase_estimation,
    hhl_solve,
    phase_estimation,
    quantum_multiply,
)
from .linalg import (
    SpectralDecomposition,
    TensorLayout,
    filtered_pseudo_inverse,
    hermitian_eig,
    hermitian_exp,
    kron,
    partial_trace,
    state_fidelity,
)
from .pipeline import (
    CostModelParams,
    RunConfig,
    RunReport,
    bench_lmr,
    cost_model,
    emit_report,
    run_classical,
    run_pipeline,
)
from .swap_test import classify, expansion_state, overlap_probability, query_state

__version__ = "0.1.0"
