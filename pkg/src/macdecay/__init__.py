"""Decay curves and constructive bound witnesses for multiuser matrix-lattice codes."""

from .decay import (
    BoundReport,
    DecayCurve,
    DecaySample,
    bound_report,
    brute_force_decay,
    decay_samples_to_csv,
    decay_samples_to_json,
    fit_log_slope,
)
from .lattices import (
    DEFAULT_ENUM_BUDGET,
    CodebookWindow,
    CodeEnsemble,
    EnumerationBudgetError,
    LatticeBasis,
    SchemaError,
    ensemble_from_json,
    ensemble_to_json,
    enumerate_nonzero,
    load_ensemble,
    materialize,
    random_ensemble,
    sample_coeffs,
    save_ensemble,
    window_coefficients,
)
from .linalg import (
    NegativeGramDeterminant,
    Subspace,
    gram_det,
    orthonormal_complement,
    orthonormalize,
    project_onto,
    real_embed,
    real_unembed,
)
from .pigeonhole import (
    DEFAULT_SEARCH_BUDGET,
    ExponentSpec,
    SearchResult,
    SubspaceChainStep,
    Witness,
    build_chain_step,
    construct_witness,
    exponent_alpha,
    exponent_beta,
    pick_small_base,
    short_projection_search,
)
from .projected_basis import (
    ProjectedBasis,
    SwapRecord,
    coordinates_in,
    run_projection_suite,
    select_projected_basis,
)
from .row_reduction import (
    ReductionReport,
    RowSystem,
    random_row_system,
    reduce_rows,
    run_reduction_suite,
    verify_reduction_identity,
)

__version__ = "0.1.0"
