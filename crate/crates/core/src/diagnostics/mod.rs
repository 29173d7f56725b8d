//! Checks of the analytic statements on simulated runs.

mod boundary;
mod contact;
mod energy;
mod kernel;
mod monotonicity;

pub use boundary::{
    boundary_energy_budget, nonconcentration_profile, trace_gap, BudgetReport, ConcentrationRow, TRACE_DEPTH,
    WETTING_FRACTION,
};
pub use contact::{
    contact_angle_extract, zero_crossings, AngleExtraction, ContactAngle, MIN_POINTS, WINDOW_INNER, WINDOW_OUTER,
};
pub use energy::{
    dissipation_residual, max_energy_increase, semi_decreasing_check, SemiDecreasingSeries, SEMI_DECREASING_TOL,
};
pub use kernel::{
    kernel_boundary_identity, truncated_kernels, BoundaryIdentity, Cutoff, HeatKernel, KernelJet, KernelPair,
    KernelVariant,
};
pub use monotonicity::{
    constant_grid, monotonicity_check, KernelSpec, MonotonicityForm, MonotonicityReport, MonotonicitySample,
    CONSTANT_RANGE, MIN_LAG_STEPS, POINTS_PER_DECADE, QUADRATURE_TOL,
};
