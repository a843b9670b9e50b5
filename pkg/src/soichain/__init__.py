"""Correlation-induced spin-orbit coupling in a three-orbital chain.

Vertex flow in the orbital basis, symmetry-channel susceptibilities,
the mean-field order parameter with its quasiparticle bands, and Monte
Carlo estimates of the underlying Coulomb couplings, all behind one
command-line entry point.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    GapClosedError,
    NumericsError,
    QuadratureError,
    StiffnessError,
    SymmetryLeakageError,
)
from .model import (
    Band,
    ModelParams,
    band_gap,
    continuum_chi0,
    dispersion,
    fermi,
    momentum_grid,
)
from .flow import CLASS_NAMES, FlowSettings, FlowTrajectory, integrate_flow
from .channels import (
    CHANNELS,
    ChannelCombination,
    ChannelLabel,
    SymmetrySignature,
    classify,
    clebsch_gordan_half_half,
    effective_coupling,
    spin_orbit_combination,
    table_rows,
)
from .susceptibility import (
    DIVERGED,
    channel_susceptibilities,
    chi_rpa,
    chi_spin_orbit,
    temperature_sweep,
)
from .meanfield import (
    GLCoefficients,
    OrderParameter,
    gl_coefficients,
    mean_field_hamiltonian,
    order_amplitude,
    quasiparticle_spectrum,
    small_gap_amplitude,
    soi_band_edge,
    soi_strength_k,
    zeeman_selection,
)
from .coulomb import (
    InteractionEstimate,
    MCEstimate,
    WannierParams,
    coulomb_matrix_element,
    estimate_couplings,
    extract_couplings,
    wannier_amplitude,
    zeta_sweep,
)
