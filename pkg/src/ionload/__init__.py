"""Two-step photoionization loading simulator for trapped Ba+ ions.

Models ablation-plume neutral production, resonant 554 nm excitation,
second-step ionization (autoionizing Fano resonance or non-resonant
continuum), capture into an RF trap, and the statistics pipeline that
turns pulse campaigns into loading-rate curves and fits.
"""

from .analysis import (
    FitError,
    FitResult,
    enhancement_ratio,
    fit_linear,
    fit_saturation,
    normalize_rate,
    poisson_mle,
    selectivity_bound,
    sem,
)
from .campaign import CampaignConfig, PulseOutcome, run_campaign, run_pulse, sweep
from .catalog import AtomicCatalog, default_catalog, load_catalog
from .config import ConfigError, RunConfig, default_config_dict, load_config
from .ionization import (
    FirstStepConfig,
    IonizationResult,
    SchemeConfig,
    SecondStepConfig,
    SecondStepMode,
    expected_ions_per_pulse,
    ionization_probability,
)
from .lineshape import FanoProfile, fano_cross_section, saturation_intensity
from .plume import NeutralAtom, PlumeModel

__version__ = "0.1.0"

__all__ = [
    "AtomicCatalog",
    "CampaignConfig",
    "ConfigError",
    "FanoProfile",
    "FirstStepConfig",
    "FitError",
    "FitResult",
    "IonizationResult",
    "NeutralAtom",
    "PlumeModel",
    "PulseOutcome",
    "RunConfig",
    "SchemeConfig",
    "SecondStepConfig",
    "SecondStepMode",
    "default_catalog",
    "default_config_dict",
    "enhancement_ratio",
    "expected_ions_per_pulse",
    "fano_cross_section",
    "fit_linear",
    "fit_saturation",
    "ionization_probability",
    "load_catalog",
    "load_config",
    "normalize_rate",
    "poisson_mle",
    "run_campaign",
    "run_pulse",
    "saturation_intensity",
    "selectivity_bound",
    "sem",
    "sweep",
    "__version__",
]
