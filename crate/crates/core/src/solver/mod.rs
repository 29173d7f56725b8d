//! Linearly implicit time stepping for the Allen-Cahn flow with a nonlinear
//! Robin boundary condition.
//!
//! One step solves
//!
//! ```text
//! (V + dt K) u_new = V (u - dt W'(u) / eps^2) - dt A sigma'(u_b) / eps
//! ```
//!
//! where `K` is the finite-volume Laplacian with natural boundary conditions,
//! `A` the boundary face weight and `u_b` the boundary trace. Diffusion is
//! implicit, the reaction and boundary terms explicit. For time steps below
//! [`Problem::stability_cap`] the discrete energy of [`Problem::energy`] is
//! non-increasing.

mod initial;
mod linear;
mod run;

pub use initial::{initialize, InitialSpec, InterfaceSpec};
pub use run::{run, RunRecord, SeriesRow, SnapshotPolicy, Snapshot};

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::energetics::{EnergyModel, STATE_BOUND};
use crate::error::{param, Error, Result};
use crate::geometry::Grid;
use linear::ImplicitSolver;

/// Fraction of the explicit stability limits used as the default step cap.
pub const CAP_SAFETY: f64 = 0.4;
/// Maximum number of step halvings before a step is a hard error.
pub const MAX_HALVINGS: u32 = 8;
/// Energy increase tolerated per step, relative to `max(1, E0)`.
pub const ENERGY_TOL: f64 = 1e-10;

/// How the boundary trace is obtained from the adjacent cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcOrder {
    /// Trace equals the adjacent cell value.
    #[default]
    First,
    /// Trace extrapolated half a cell with the Robin slope.
    Second,
}

/// Grid, model and interface width shared by every state of a run.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid,
    pub model: EnergyModel,
    pub epsilon: f64,
    pub bc_order: BcOrder,
}

/// Interior and boundary parts of the discrete energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts {
    pub interior: f64,
    pub boundary: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.interior + self.boundary
    }
}

impl Problem {
    pub fn new(grid: Grid, model: EnergyModel, epsilon: f64, bc_order: BcOrder) -> Result<Arc<Self>> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(param(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Arc::new(Self { grid, model, epsilon, bc_order }))
    }

    /// Largest admissible time step.
    ///
    /// `0.4 eps^2 / max|W''|` from the explicit reaction term, and
    /// `0.4 eps d / max|sigma''|` from the explicit boundary term, where `d` is
    /// the boundary cell depth.
    pub fn stability_cap(&self) -> f64 {
        let eps = self.epsilon;
        let bulk = CAP_SAFETY * eps * eps / self.model.bulk_lipschitz().max(1e-300);
        let lb = self.model.boundary_lipschitz();
        if lb > 0.0 {
            bulk.min(CAP_SAFETY * eps * self.grid.boundary_cell_depth() / lb)
        } else {
            bulk
        }
    }

    /// Boundary trace at every boundary node.
    pub fn trace(&self, u: &[f64]) -> Vec<f64> {
        self.grid
            .boundary
            .iter()
            .map(|b| {
                let uc = u[b.cell];
                match self.bc_order {
                    BcOrder::First => uc,
                    BcOrder::Second => uc - b.depth * self.model.sigma_prime(uc) / self.epsilon,
                }
            })
            .collect()
    }

    /// Interior energy density `eps |grad u|^2 / 2 + W(u) / eps` per cell.
    pub fn energy_density(&self, u: &[f64]) -> Vec<f64> {
        let eps = self.epsilon;
        self.grid
            .cell_grad_sq(u)
            .iter()
            .zip(u)
            .map(|(g, &s)| 0.5 * eps * g + self.model.w(s) / eps)
            .collect()
    }

    /// Discrete energy split into interior and boundary parts.
    pub fn energy(&self, u: &[f64]) -> EnergyParts {
        let interior = self
            .energy_density(u)
            .iter()
            .zip(&self.grid.volumes)
            .map(|(e, v)| e * v)
            .sum();
        let boundary = self
            .trace(u)
            .iter()
            .zip(&self.grid.boundary)
            .map(|(t, b)| b.weight * self.model.sigma(*t))
            .sum();
        EnergyParts { interior, boundary }
    }

    /// Discrete right-hand side `u_t` of the flow, including the boundary flux.
    pub fn time_derivative(&self, u: &[f64]) -> Vec<f64> {
        let eps = self.epsilon;
        let g = &self.grid;
        let mut lap = vec![0.0; g.len()];
        for f in &g.faces {
            let flux = f.trans * (u[f.b] - u[f.a]);
            lap[f.a] += flux;
            lap[f.b] -= flux;
        }
        for (b, t) in g.boundary.iter().zip(self.trace(u)) {
            lap[b.cell] -= b.weight * self.model.sigma_prime(t) / eps;
        }
        lap.iter()
            .zip(&g.volumes)
            .zip(u)
            .map(|((l, v), &s)| l / v - self.model.w_prime(s) / (eps * eps))
            .collect()
    }
}

/// A phase field on a grid at a given time.
#[derive(Clone, Debug)]
pub struct PhaseField {
    pub values: Vec<f64>,
    pub time: f64,
    /// Number of completed macro steps.
    pub step: u64,
    problem: Arc<Problem>,
}

impl PhaseField {
    pub fn new(problem: Arc<Problem>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != problem.grid.len() {
            return Err(param(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                problem.grid.len()
            )));
        }
        Ok(Self { values, time, step: 0, problem })
    }

    pub fn problem(&self) -> &Arc<Problem> {
        &self.problem
    }

    pub fn epsilon(&self) -> f64 {
        self.problem.epsilon
    }

    pub fn energy(&self) -> EnergyParts {
        self.problem.energy(&self.values)
    }
}

/// Stateful integrator that caches factorised operators per step size.
pub struct Stepper {
    problem: Arc<Problem>,
    cache: Vec<(u64, ImplicitSolver)>,
    energy_tol: f64,
}

impl Stepper {
    /// `e0` sets the energy tolerance `1e-10 max(1, e0)`.
    pub fn new(problem: Arc<Problem>, e0: f64) -> Self {
        Self { problem, cache: Vec::new(), energy_tol: ENERGY_TOL * e0.max(1.0) }
    }

    pub fn problem(&self) -> &Arc<Problem> {
        &self.problem
    }

    fn solver(&mut self, dt: f64) -> Result<&ImplicitSolver> {
        let key = dt.to_bits();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return Ok(&self.cache[pos].1);
        }
        if self.cache.len() > 12 {
            self.cache.remove(0);
        }
        let s = ImplicitSolver::new(self.problem.grid.spec(), dt)?;
        self.cache.push((key, s));
        Ok(&self.cache.last().expect("just pushed").1)
    }

    /// One attempt; `Ok(Err(reason))` marks a rejected step.
    fn attempt(&mut self, u: &[f64], dt: f64) -> Result<std::result::Result<Vec<f64>, String>> {
        let p = Arc::clone(&self.problem);
        let eps = p.epsilon;
        let mut rhs: Vec<f64> = u
            .iter()
            .zip(&p.grid.volumes)
            .map(|(&s, v)| v * (s - dt * p.model.w_prime(s) / (eps * eps)))
            .collect();
        for (b, t) in p.grid.boundary.iter().zip(p.trace(u)) {
            rhs[b.cell] -= dt * b.weight * p.model.sigma_prime(t) / eps;
        }
        if let Err(e) = self.solver(dt)?.solve(&mut rhs) {
            return Ok(Err(e.to_string()));
        }
        if let Some(v) = rhs.iter().find(|v| v.abs() > STATE_BOUND) {
            return Ok(Err(format!("value {v} exceeds the bound {STATE_BOUND}")));
        }
        let (e_old, e_new) = (p.energy(u).total(), p.energy(&rhs).total());
        if e_new > e_old + self.energy_tol {
            return Ok(Err(format!("energy increased from {e_old} to {e_new}")));
        }
        Ok(Ok(rhs))
    }

    fn advance_values(&mut self, u: &[f64], dt: f64, depth: u32, time: f64) -> Result<Vec<f64>> {
        match self.attempt(u, dt)? {
            Ok(v) => Ok(v),
            Err(reason) if depth >= MAX_HALVINGS => Err(Error::Step { time, reason }),
            Err(reason) => {
                log::debug!("step rejected at t = {time} (dt = {dt}): {reason}");
                let half = 0.5 * dt;
                let mid = self.advance_values(u, half, depth + 1, time)?;
                self.advance_values(&mid, half, depth + 1, time + half)
            }
        }
    }

    /// Advances `field` by `dt`, halving internally on rejection.
    pub fn advance(&mut self, field: &PhaseField, dt: f64) -> Result<PhaseField> {
        if !Arc::ptr_eq(&field.problem, &self.problem) && field.problem.grid.len() != self.problem.grid.len() {
            return Err(param("field does not belong to this stepper's problem"));
        }
        let cap = self.problem.stability_cap();
        if !(dt > 0.0 && dt.is_finite()) || dt > cap * (1.0 + 1e-12) {
            return Err(param(format!("time step {dt} outside (0, {cap}]")));
        }
        let values = self.advance_values(&field.values, dt, 0, field.time)?;
        Ok(PhaseField {
            values,
            time: field.time + dt,
            step: field.step + 1,
            problem: Arc::clone(&self.problem),
        })
    }
}

/// Advances a field by one step of size `dt`.
pub fn step(field: &PhaseField, dt: f64) -> Result<PhaseField> {
    let e0 = field.energy().total();
    Stepper::new(Arc::clone(field.problem()), e0).advance(field, dt)
}

impl Problem {
    /// Discrepancy density `eps |grad u|^2 / 2 - W(u) / eps` per cell.
    pub fn discrepancy(&self, u: &[f64]) -> Vec<f64> {
        let eps = self.epsilon;
        self.grid
            .cell_grad_sq(u)
            .iter()
            .zip(u)
            .map(|(g, &s)| 0.5 * eps * g - self.model.w(s) / eps)
            .collect()
    }

    /// Gradient at boundary nodes: the normal part from the Robin condition,
    /// the tangential part from differences of the trace.
    pub fn boundary_gradients(&self, u: &[f64]) -> Vec<crate::geometry::Point> {
        let trace = self.trace(u);
        self.grid
            .boundary
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let dn = -self.model.sigma_prime(trace[k]) / self.epsilon;
                b.normal * dn + b.tangent * self.grid.boundary_tangential_derivative(&trace, k)
            })
            .collect()
    }

    /// Interior energy density evaluated on the boundary.
    pub fn boundary_energy_density(&self, u: &[f64]) -> Vec<f64> {
        let eps = self.epsilon;
        self.trace(u)
            .iter()
            .zip(self.boundary_gradients(u))
            .map(|(&t, g)| 0.5 * eps * g.norm_squared() + self.model.w(t) / eps)
            .collect()
    }
}
