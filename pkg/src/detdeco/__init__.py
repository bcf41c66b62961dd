"""Noisy single-photon counters: POVM models, tomography, Wigner negativity
and heralded state preparation."""

__version__ = "0.1.0"

from .decoherence import (
    DENSE_NU_GRID,
    NOISE_LEVELS,
    NegativityCurve,
    Threshold,
    apd_origin_value,
    negativity_curve,
    origin_value,
    threshold,
    threshold_exact,
    tmd_origin_value,
)
from .detectors import (
    DetectorKind,
    DetectorSpec,
    DiagonalPovm,
    apd_povm,
    build_povm,
    click_probabilities,
    dark_count_convolve,
    tmd_povm,
)
from .errors import (
    ConditioningWarning,
    DomainError,
    QuadratureError,
    TruncationError,
    TruncationWarning,
)
from .fock import (
    IDENTITY_WIGNER,
    WIGNER_CONVENTION,
    WignerSection,
    alternating_origin_sum,
    coherent_weights,
    fock_wigner_value,
    povm_wigner_section,
)
from .herald import (
    HeraldedState,
    TmsvResource,
    gaussian_integral_oracle,
    herald_state,
    heralded_wigner_section,
    retrodicted_state,
    trace_distance,
)
from .tomography import (
    ClickRecord,
    FitReport,
    ProbeSet,
    default_probes,
    ml_reconstruct,
    simulate_clicks,
    uncertainty_envelope,
)
