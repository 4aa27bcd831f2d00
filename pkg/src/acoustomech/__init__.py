"""Magnet acoustomechanics: center-of-mass motion, Kittel magnon and acoustic phonon
of a trapped micromagnet as a three-mode Gaussian open system."""

from .gaussian import (
    CovarianceState,
    IntegrationError,
    LindbladChannel,
    NotHurwitzError,
    QuadraticModel,
    SpectrumResult,
    build_drift_diffusion,
    evolve_covariance,
    hurwitz_margin,
    lyapunov_steady_state,
    mode_occupations,
    spectrum,
)
from .lamb import AcousticMode, ElasticMaterial, find_modes, spheroidal_determinant
from .model import (
    BathParams,
    FieldDrive,
    MagnetParams,
    NormalModeSystem,
    SystemParams,
    bogoliubov,
    build_full_model,
    build_rwa_model,
    coupling_Gx,
    tune_fields,
    validate_regime,
)

__version__ = "0.1.0"
