"""EP optomechanical gravimeter: supermode spectra, backaction, classical
dynamics, gravitational frequency shifts, and inversion for G."""

__version__ = "0.1.0"

from .params import EffectiveModeParams, SystemParams
from .spectra import (
    BranchTracks,
    SupermodeSpectrum,
    discriminant,
    eigenvalues_degenerate,
    eigenvalues_general,
    ep_drive_amplitude,
    track_branches,
)
from .backaction import (
    BackactionResult,
    LimitCycleAnsatz,
    bessel_j,
    extract_eta,
    optical_damping,
    spring_shift,
)
from .dynamics import (
    StateVector,
    Trajectory,
    effective_rate_check,
    extract_lock_frequency,
    integrate,
)
from .gravity import (
    G_CODATA_2014,
    G_CODATA_2014_SIGMA,
    PerturbedSpectrum,
    SourceSphere,
    frequency_shift,
    gravitational_force,
    invert_g,
    perturbed_eigenvalues,
    shift_at_ep,
    shift_magnitude_vs_G,
)
from .harness import (
    CASE_X,
    CASE_Y,
    CASE_Z,
    CASES,
    CaseDefinition,
    GammaReport,
    SweepResult,
    run_coalescence,
    run_g_curves,
    run_gamma_study,
    run_shift_sweep,
)
