"""Pseudo-spectral incompressible MHD with dyadic-shell regularity diagnostics.

Layers, lowest first:

- ``spectral``: fields as Fourier coefficients on the periodic cube,
  projection, calculus, dealiasing, norms.
- ``dyadic``: smooth dyadic shell decomposition, Besov/Sobolev norms,
  paraproduct splits and commutators with alias-free products.
- ``solver``: integrating-factor time stepping for the coupled
  velocity/magnetic system, energy ledger, initial data.
- ``diagnostics``: per-snapshot shell norms, dissipation wavenumber,
  low-mode sums, threshold times.
- ``criteria``: windowed criterion integrals, the eight alternative
  smallness conditions, inequality-chain and growth-bound monitors.
- ``io`` / ``cli`` / ``verify``: snapshots, manifests, configs, CSV
  emission, command-line front end, built-in check suites.
"""

from .criteria import (
    ChainStep,
    ConditionResult,
    CriterionReport,
    GronwallSeries,
    InconsistencyError,
    LimsupSurrogate,
    evaluate_conditions,
    evaluate_report,
    gronwall_monitor,
    inequality_chain_check,
)
from .diagnostics import (
    CriterionConfig,
    DiagnosticRecord,
    WindowError,
    build_record,
    build_records,
    criterion_integral,
    dissipation_wavenumber,
    f_of_t,
    shell_norms,
    threshold_times,
)
from .dyadic import (
    CutoffProfile,
    DyadicPartition,
    ProfileError,
    UndefinedRatioError,
    advect_padded,
    bernstein_ratio,
    besov_norm,
    bony_all_shells,
    bony_decompose,
    build_partition,
    commutator,
    lam,
    low_pass,
    project_shell,
    shell_decompose,
    smooth_bump_profile,
    sobolev_norm,
)
from .io import (
    ConfigError,
    RunConfig,
    SnapshotFormatError,
    read_manifest,
    read_snapshot,
    write_snapshot,
)
from .solver import (
    EnergyLedger,
    RunResult,
    SolverConfig,
    SolverState,
    StepRejectedError,
    initial_data,
    nonlinear_terms,
    run,
    step,
)
from .spectral import (
    Grid3,
    SpectralScalarField,
    SpectralVectorField,
    SymmetryError,
    curl,
    dealias,
    divergence,
    gradient,
    l2_norm,
    lebesgue_norm,
    leray_project,
    random_vector,
    solenoidal_defect,
    to_physical,
    to_spectral,
    vector_from_physical,
    vector_to_physical,
)
from .verify import SUITES, CheckRow, run_suite

__version__ = "0.1.0"
