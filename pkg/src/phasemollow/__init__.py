"""Phase-dependent resonance fluorescence and probe absorption of a two-level
atom driven by a coherent field plus a weak amplitude-fluctuating field."""

from .model import (
    AffineBlochGenerator,
    BlochState,
    DressedRates,
    DressedState,
    GeneratorCoefficients,
    ModelParams,
    QuadratureRates,
    RegimeWarning,
    SqueezedParams,
    build_csf_generator,
    build_isv_generator,
    build_stochastic_generator,
    compute_coefficients,
    dressed_rates,
    quadrature_rates,
    to_dressed,
)
from .spectra import (
    FrequencyGrid,
    SpectrumSeries,
    absorption_spectrum,
    figure_grid,
    fluorescence_analytic,
    fluorescence_numeric,
    peak_metrics,
    phase_sweep,
    regression_correlation,
    steady_state,
)
from .stochastic import (
    EnsembleResult,
    OUConfig,
    OUTrajectory,
    ensemble_average,
    fit_quadrature_decay,
    generate_ou,
    integrate_trajectory,
)

__version__ = "0.1.0"
