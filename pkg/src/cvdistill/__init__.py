"""Two-mode Gaussian entanglement measures and measurement-based NLA distillation."""

from .errors import (
    DecompositionError,
    DegenerateStateError,
    DivergenceError,
    InsufficientDataError,
    PhysicalityError,
    QuadratureConvergenceError,
    StarvationError,
    SymmetryError,
)
from .measures import (
    EofResult,
    MeasureReport,
    SteeringResult,
    coherent_information,
    duan_sum,
    entanglement_entropy,
    entropy_g,
    eof_quadrature_symmetric,
    log_negativity,
    max_extractable_squeezing,
    ppt_separable,
    reid_steering,
    reverse_coherent_information,
    tmss_entropy,
    vn_entropy,
)
from .nla import (
    EffectiveState,
    FilterParams,
    acceptance_mask,
    acceptance_probability,
    ideal_nla_state,
    mc_distill,
    rescale,
    success_probability,
)
from .pipeline import (
    CovEstimate,
    ShotRecords,
    bootstrap_errorbars,
    estimate_covariance,
    jarque_bera,
    read_shots,
    synth_shots,
    write_shots,
)
from .ree import (
    FockStateMatrix,
    GreeResult,
    fock_lossy_tmsv,
    fock_quadrature_symmetric,
    fock_relative_entropy,
    gaussian_relative_entropy,
    gree,
)
from .report import build_report, evaluate_measures
from .squashed import ExtendedState, channel_purification, squashed_upper_bound, symmetrize
from .symplectic import (
    OMEGA,
    PtSpectrum,
    StandardFormParams,
    add_symmetric_noise,
    beamsplitter,
    choi_bound,
    ensure_physical,
    is_physical,
    load_covariance,
    loss_channel,
    omega,
    partial_transpose,
    pt_spectrum,
    random_physical_state,
    random_symplectic,
    save_covariance,
    standard_form,
    standard_form_matrix,
    symplectic_eigenvalues,
    tmss,
    to_standard_form,
    two_mode_squeezer,
    williamson,
)

__version__ = "0.1.0"
