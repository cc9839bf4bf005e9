"""Transition analysis for lattice-periodic Cahn-Hilliard models.

Pipeline: dual lattice -> minimal unstable shell -> center-manifold reduced
amplitude system -> continuous/jump classification -> equilibrium patterns
with stability -> full pseudo-spectral PDE validation -> rendered figures.
"""

from .classifier import (
    BOUNDARY,
    TYPE_I,
    TYPE_II,
    StraightLine,
    TransitionVerdict,
    classify,
    straight_line_report,
)
from .equilibria import (
    Equilibrium,
    StabilityReport,
    closed_form_eigenvalues,
    fixed_points,
    jacobian_matrix,
    jacobian_spectrum,
    stability_report,
    symmetric_spectrum,
    validity_radius,
)
from .errors import (
    BlowUp,
    CardinalityOutOfModel,
    ChLatticeError,
    ConfigError,
    DegenerateCoefficients,
    DegenerateLattice,
    InvalidConcentration,
    IoFailure,
    NotConverged,
    PesViolation,
    PreTransition,
    QuadratureUnderResolved,
    ResonantDenominator,
    UnderResolved,
    UnsupportedCase,
    WrongMultiplicity,
    ZeroMode,
)
from .lattice import (
    CriticalSet,
    DualLattice,
    LatticeSpec,
    bragg_williams_coefficients,
    detect_resonance,
    dual_lattice,
    integer_combination,
    minimal_shell,
    nondimensionalize,
)
from .reduction import (
    CASE_LONG_RANGE_MULT2,
    CASE_MULT2,
    CASE_MULT4,
    CASE_MULT6_NONRESONANT,
    CASE_MULT6_RESONANT_EVEN,
    CASE_MULT6_RESONANT_GENERAL,
    ManifoldCoefficient,
    ReducedCoefficients,
    manifold_coefficients,
    manifold_quadrature_oracle,
    reduced_coefficients,
    reduced_field,
    state_dimension,
)
from .renderer import (
    FieldRaster,
    RasterSpec,
    classify_pattern,
    export,
    find_peaks,
    load_field,
    peak_lattice_angle,
    rasterize,
    save_field,
    synthesize_stationary,
)
from .simulator import (
    SimConfig,
    SimResult,
    SpectralField,
    compare_full_vs_reduced,
    discrete_energy,
    quasi_steady_drift,
    run_pde,
    run_reduced,
    shell_amplitude,
    step_pde,
)
from .spectrum import (
    ModelParams,
    PesReport,
    eigenvalue,
    eigenvalue_of_norm_sq,
    growth_ordering,
    verify_pes,
)

__version__ = "0.1.0"
