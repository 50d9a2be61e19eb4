"""Exact adiabatic decoherence of a quantum system in a thermal boson bath."""

__version__ = "0.1.0"

from .continuum import (
    DecoherenceCurve,
    FitModel,
    Regime,
    RegimeKind,
    SpectralFunction,
    analyze_regimes,
    continuum_curve,
    decoherence_complete,
    discrete_curve,
    discretize_spectral,
    fit_asymptotic_exponent,
    gamma_continuum,
    regime,
    spectral_weight,
    thermal_window,
)
from .core import (
    BathMode,
    DensityMatrix,
    DiscreteBath,
    SystemSpec,
    Temperature,
    free_evolution,
    gamma_discrete,
    p_factor,
    reduced_density_matrix,
    s_factor,
    validate_system,
)
from .oracle import (
    HermitianOperator,
    TruncationSpec,
    build_total_hamiltonian,
    converge_truncation,
    evolve_and_trace,
    thermal_mode_state,
)
