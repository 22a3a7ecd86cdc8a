"""Random Apollonian Networks: generation and degree-sequence verification."""
from .core import (
    ChoiceTrace,
    DegreeHistogram,
    RanState,
    apply_step,
    degree_histogram,
    generate,
    init_state,
    max_degree,
    replay,
    sample_index,
)
from .errors import CapacityError, DomainError, RanError, TraceError
from .expectations import (
    ExpectationTable,
    azuma_bound,
    limit_coefficient,
    recurrence_table,
    verify_error_bound,
)
from .montecarlo import (
    SimulationConfig,
    check_limits,
    concentration_check,
    fit_exponent,
    max_degree_scaling,
    run_replicates,
)
from .oracle import (
    CoupledPair,
    coupled_difference,
    exact_expectations,
    recurrence_discrepancy,
    sampled_coupling_check,
)
from .rng import RngState

__version__ = "0.1.0"
