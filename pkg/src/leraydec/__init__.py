"""Pseudo-spectral solver and analysis tools for filtered-deconvolution flow models.

The package is organized around a handful of small modules:

- spectral:     grids, coefficient-space fields, norms, projections
- filtering:    the inverse-Helmholtz smoother and its truncated inverse
- fields:       initial conditions and forcings
- solver:       time integration of the regularized momentum equation
- diagnostics:  energy records, consistency measures, trajectory errors
- experiments:  parameter sweeps with rate fits
- config / snapshots / tables / cli:  file formats and the command line
"""

from .spectral import (
    BOX_VOLUME,
    Grid,
    SpectralField,
    curl,
    divergence,
    energy,
    from_physical,
    gradient,
    hs_norm,
    inner,
    laplacian,
    leray_project,
    project_ball,
    project_pn,
    shell_spectrum,
    solenoidal_defect,
    symmetry_defect,
    to_physical,
    validate_field,
    zeros,
)
from .filtering import (
    FilterSpec,
    TransferTable,
    apply_dn,
    apply_filter,
    apply_hn,
    cutoff_frequency,
    cutoff_frequency_exact,
    deconv_error_field,
    deconv_error_multiplier,
    operator_norm_dn,
    smoothing_constant,
    transfer_dn,
    transfer_exact,
    transfer_g,
    transfer_hn,
    van_cittert,
)
from .fields import FieldSpec, abc_flow, evaluate_field, random_solenoidal, single_mode, taylor_green
from .solver import (
    BlowUpError,
    CFLAdvisory,
    ModelKind,
    RunStats,
    SolverConfig,
    Trajectory,
    cfl_max_dt,
    nonlinear_term,
    recover_pressure,
    run,
    step,
)
from .diagnostics import (
    ConsistencyReport,
    DiagRecord,
    ModelError,
    ReynoldsReport,
    consistency_report,
    energy_inequality_monitor,
    energy_record,
    model_error,
    reynolds_report,
    tau_tensor,
    time_average,
)
from .experiments import RateFit, StudyReport, StudySpec, fit_rate, run_study
from .config import ConfigError, RunConfig, parse_config, parse_config_text, render_effective
from .snapshots import SnapshotError, SnapshotMeta, read_snapshot, write_snapshot
from .tables import TableError, read_diag_csv, write_diag_csv, write_manifest, write_study_tables

__version__ = "0.1.0"

__all__ = [
    "BOX_VOLUME",
    "BlowUpError",
    "CFLAdvisory",
    "ConfigError",
    "ConsistencyReport",
    "DiagRecord",
    "FieldSpec",
    "FilterSpec",
    "Grid",
    "ModelError",
    "ModelKind",
    "RateFit",
    "RunConfig",
    "RunStats",
    "SnapshotError",
    "SnapshotMeta",
    "SolverConfig",
    "SpectralField",
    "StudyReport",
    "StudySpec",
    "TableError",
    "Trajectory",
    "TransferTable",
    "abc_flow",
    "apply_dn",
    "apply_filter",
    "apply_hn",
    "cfl_max_dt",
    "consistency_report",
    "curl",
    "cutoff_frequency",
    "cutoff_frequency_exact",
    "deconv_error_field",
    "deconv_error_multiplier",
    "divergence",
    "energy",
    "energy_inequality_monitor",
    "energy_record",
    "evaluate_field",
    "fit_rate",
    "from_physical",
    "gradient",
    "hs_norm",
    "inner",
    "laplacian",
    "leray_project",
    "model_error",
    "nonlinear_term",
    "operator_norm_dn",
    "parse_config",
    "parse_config_text",
    "project_ball",
    "project_pn",
    "random_solenoidal",
    "read_diag_csv",
    "read_snapshot",
    "recover_pressure",
    "render_effective",
    "reynolds_report",
    "run",
    "run_study",
    "shell_spectrum",
    "single_mode",
    "smoothing_constant",
    "solenoidal_defect",
    "step",
    "symmetry_defect",
    "tau_tensor",
    "taylor_green",
    "time_average",
    "to_physical",
    "transfer_dn",
    "transfer_exact",
    "transfer_g",
    "transfer_hn",
    "validate_field",
    "van_cittert",
    "write_diag_csv",
    "write_manifest",
    "write_snapshot",
    "write_study_tables",
    "zeros",
]
