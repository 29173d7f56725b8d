//! Allen-Cahn gradient flow with a contact-angle boundary energy.
//!
//! The crate discretises
//!
//! ```text
//! eps u_t = eps Δu - W'(u) / eps      in Ω
//! eps ∂_ν u = -sigma'(u)             on ∂Ω
//! ```
//!
//! on an interval, a periodic channel and a disk, and provides the diffuse
//! measures and checks used to study the sharp-interface limit: energy
//! dissipation, semi-decreasing test-function integrals, the first variation
//! of the associated varifold, boundary energy budgets, contact angles and a
//! boundary monotonicity inequality.
//!
//! ```
//! use contactflow::geometry::{DomainSpec, Grid};
//! use contactflow::energetics::EnergyModel;
//! use contactflow::solver::{initialize, step, BcOrder, InitialSpec, Problem};
//!
//! let grid = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 32, ny: 16 }).unwrap();
//! let model = EnergyModel::quartic(std::f64::consts::FRAC_PI_3).unwrap();
//! let problem = Problem::new(grid, model, 0.1, BcOrder::First).unwrap();
//! let u0 = initialize(&problem, &InitialSpec::Constant { value: 1.0 }, 0).unwrap();
//! let u1 = step(&u0, 1e-4).unwrap();
//! assert!((u1.energy().total() - 0.9428090).abs() < 1e-6);
//! ```

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod energetics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod solver;

pub use error::{Error, Result};
