"""Open-system quantum process tomography with explicit state preparation.

Simulates tomography experiments for the two standard preparation procedures
(stochastic pin-then-rotate and preparation by measurement), reconstructs
linear and bi-linear process maps from the resulting records, and classifies
a process as Linear, Bilinear, or Neither from a 12-projection protocol.
"""

from .bilinear_tomo import (
    BilinearProcessMap,
    MElementTable,
    NINE_STATE_LABELS,
    apply_bilinear,
    build_M_from_dynamics,
    element_table_from_map,
    nine_state_inputs,
    predict_output,
    solve_M_elements,
)
from .dynamics import (
    ProcessSpec,
    correlated_pair_state,
    dynamical_map_fixed_env,
    heisenberg_hamiltonian,
    run_process,
    unitary_from_hamiltonian,
)
from .linear_tomo import (
    DualFrame,
    LinearProcessMap,
    NotAFrame,
    apply_linear_map,
    compute_duals,
    map_diagnostics,
    reconstruct_linear_map,
)
from .prep import (
    GeneralizedMeasurement,
    InvalidMeasurement,
    OutcomeMap,
    PreparedState,
    ZeroProbabilityOutcome,
    apply_pin_map,
    build_dilation,
    measure_generalized_via_dilation,
    measure_generalized_via_maps,
    prepare_generalized,
    prepare_projective,
    prepare_stochastic,
)
from .records import Dataset, MissingRecord, TomographyRecord
from .verify import (
    TWELVE_STATE_LABELS,
    VerificationReport,
    bilinear_consistency_residuals,
    classify,
    gamma_completeness,
    linear_sum_rule_residuals,
    twelve_state_inputs,
)

__version__ = "0.1.0"
