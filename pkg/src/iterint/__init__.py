"""Multiple Fourier series expansions of iterated Ito and Stratonovich integrals."""

from .basis import (
    BasisSystem,
    DomainError,
    QuadratureError,
    TimeInterval,
    WeightFunction,
    eval_basis,
    gram_matrix,
    inner_product,
    weight_eval,
)
from .coeffs import (
    CoefficientTable,
    KernelSpec,
    MultiIndex,
    TableSizeError,
    build_table,
    compute_coefficient,
    kernel_norm_sq,
    load_table,
    parseval_residual,
    trace_sum,
    trace_sum_exact,
)
from .exact import ExactScalar
from .expansion import (
    ComponentVector,
    CorrectionPattern,
    GaussianDraws,
    HypothesisError,
    correction_patterns,
    ito_expand,
    ito_strat_convert,
    sample_draws,
    strat_expand,
    truncation_mse_distinct,
)
from .identities import TraceCheckReport, check_pair_trace, check_quad_traces, check_triple_traces
from .oracle import (
    MCConfig,
    MCResult,
    WienerPath,
    discrete_iterated_ito,
    discrete_multiple,
    discrete_stratonovich,
    extract_draws,
    mc_mse,
    simulate_path,
    simulate_paths,
)

__version__ = "0.1.0"
