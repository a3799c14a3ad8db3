"""Stability, two-mode squeezing spectra and phase compensation for a dual-NOPA coherent-feedback network."""

from .model import (
    ConfigError,
    PhaseDecomposition,
    Rates,
    StateSpace,
    SystemConfig,
    build_state_space,
    decompose_phases,
    load_config,
    state_space_from_rates,
    validate_config,
    wrap_angle,
)
from .stability import (
    StabilityError,
    StabilityReport,
    closed_form_stable,
    hurwitz_check,
    max_real_eigen_formula,
    stability_report,
)
from .spectra import (
    Entanglement,
    SingularResolventError,
    Spectra,
    classify_entanglement,
    rotated_spectra,
    squeezing_spectra,
    transfer_matrix,
)
from .closedform import (
    Branch,
    LosslessCoeffs,
    LossyCoeffs,
    PhasePlan,
    diagnostic_f,
    diagnostic_g,
    diagnostic_h,
    lossless_coeffs,
    lossy_coeffs,
    optimal_phi,
    v_im_curve,
    v_pm,
    v_pm_lossless,
    v_pm_lossy,
)
from .analysis import (
    AxisSpec,
    BoundaryRoots,
    NoBoundaryError,
    Quantity,
    SweepGrid,
    entanglement_region,
    find_boundary,
    reproduce_table,
    sweep,
)

__version__ = "0.1.0"
