"""Selected-mapping PAPR reduction for OFDM with adaptive candidate generation."""

__version__ = "0.1.0"

from .ofdm import (  # noqa: E402
    PhaseVector,
    SignalSequence,
    SymbolSequence,
    map_qam16,
    oversample,
    papr,
    papr_db,
    random_phase_vector,
    random_symbols,
)
from .ifft import ButterflyGraph, CPointMeter, full_ifft, k_of_a, stage_split_ifft  # noqa: E402
from .report import ComplexityReport  # noqa: E402
from .schemes import (  # noqa: E402
    ConfigError,
    Scheme,
    SlmConfig,
    SlmResult,
    run_slm,
    slm_baxley,
    slm_baxley_ag,
    slm_conventional,
    slm_conventional_ag,
    slm_lim,
    slm_lim_ag,
    slm_wang,
    slm_wang_ag,
)
from .analytics import expected_ag_cost, pmf_au  # noqa: E402
from .harness import ExperimentSpec, fig7_compare, reproduce_table, run_experiment  # noqa: E402
