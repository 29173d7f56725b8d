//! Diffuse energy measures, discrepancy and varifolds of a phase field.
//!
//! For a state `u` the interior measure has density
//! `e = eps |grad u|^2 / 2 + W(u) / eps`, the boundary measure has density
//! `sigma(u)` on the boundary, and the discrepancy has density
//! `eps |grad u|^2 / 2 - W(u) / eps`. The interior varifold places the
//! projection `I - a (x) a`, `a = grad u / |grad u|`, at cells with
//! non-vanishing gradient; the boundary varifold places the tangential
//! projection at boundary nodes.

mod dictionary;
mod first_variation;

pub use dictionary::{
    standard_test_functions, AffineField, ConstantField, ConstantFunction, CosineMode, FieldDictionary,
    GaussianBump, GaussianField, Swirl, TestFunction, VectorField, WallShear, TANGENCY_TOL,
};
pub use first_variation::{
    first_variation_direct, first_variation_formula, first_variation_norm_estimate, FirstVariationTerms,
};

use nalgebra::Matrix2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::solver::{PhaseField, Problem, RunRecord};

/// Gradients below this fraction of the largest gradient count as zero.
pub const GRAD_THRESHOLD: f64 = 1e-12;

/// Per-cell and per-node data needed by every measure of one state.
#[derive(Clone, Debug)]
pub struct MeasurePack {
    pub time: f64,
    problem: Arc<Problem>,
    pub values: Vec<f64>,
    /// Interior energy density per cell.
    pub density: Vec<f64>,
    /// Discrepancy density per cell.
    pub discrepancy: Vec<f64>,
    /// Centred-difference gradient per cell.
    pub gradient: Vec<Point>,
    /// Discrete right-hand side of the flow per cell.
    pub time_derivative: Vec<f64>,
    pub trace: Vec<f64>,
    /// Interior energy density at boundary nodes.
    pub boundary_density: Vec<f64>,
    /// Cells with `|grad u|` below [`GRAD_THRESHOLD`] times the maximum count as critical.
    pub grad_cutoff: f64,
}

/// Computes the measures of a phase field; fails on non-finite values.
pub fn measures(field: &PhaseField) -> Result<MeasurePack> {
    if let Some(i) = field.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("non-finite value in cell {i}")));
    }
    let p = Arc::clone(field.problem());
    let u = &field.values;
    let gradient = p.grid.cell_gradients(u);
    let gmax = gradient.iter().map(|g| g.norm()).fold(0.0, f64::max);
    Ok(MeasurePack {
        time: field.time,
        values: u.clone(),
        density: p.energy_density(u),
        discrepancy: p.discrepancy(u),
        gradient,
        time_derivative: p.time_derivative(u),
        trace: p.trace(u),
        boundary_density: p.boundary_energy_density(u),
        grad_cutoff: GRAD_THRESHOLD * gmax,
        problem: p,
    })
}

impl MeasurePack {
    pub fn problem(&self) -> &Arc<Problem> {
        &self.problem
    }

    pub fn epsilon(&self) -> f64 {
        self.problem.epsilon
    }

    /// `int f d mu_1`.
    pub fn interior_with(&self, f: impl Fn(&Point) -> f64) -> f64 {
        let g = &self.problem.grid;
        g.centers
            .iter()
            .zip(&g.volumes)
            .zip(&self.density)
            .map(|((x, v), e)| f(x) * v * e)
            .sum()
    }

    /// `int f d mu_2 = int f sigma(u)` over the boundary.
    pub fn boundary_with(&self, f: impl Fn(&Point) -> f64) -> f64 {
        let g = &self.problem.grid;
        g.boundary
            .iter()
            .zip(&self.trace)
            .map(|(b, &t)| f(&b.point) * b.weight * self.problem.model.sigma(t))
            .sum()
    }

    pub fn interior(&self, phi: &dyn TestFunction) -> f64 {
        self.interior_with(|x| phi.value(x))
    }

    pub fn boundary(&self, phi: &dyn TestFunction) -> f64 {
        self.boundary_with(|x| phi.value(x))
    }

    /// `mu = mu_1 + mu_2` applied to `phi`.
    pub fn total(&self, phi: &dyn TestFunction) -> f64 {
        self.interior(phi) + self.boundary(phi)
    }

    /// `int f d xi`.
    pub fn discrepancy_with(&self, f: impl Fn(&Point) -> f64) -> f64 {
        let g = &self.problem.grid;
        g.centers
            .iter()
            .zip(&g.volumes)
            .zip(&self.discrepancy)
            .map(|((x, v), d)| f(x) * v * d)
            .sum()
    }

    /// `int |xi|`.
    pub fn abs_discrepancy(&self) -> f64 {
        self.discrepancy.iter().zip(&self.problem.grid.volumes).map(|(d, v)| d.abs() * v).sum()
    }

    /// Unit gradient direction at a cell, if the gradient is above the cutoff.
    pub fn direction(&self, cell: usize) -> Option<Point> {
        let g = self.gradient[cell];
        let n = g.norm();
        (n > self.grad_cutoff && n > 0.0).then(|| g / n)
    }

    /// Varifold `V = V_1 + V_2` applied to a function of position and projection.
    pub fn varifold(&self, f: impl Fn(&Point, &Matrix2<f64>) -> f64) -> f64 {
        let g = &self.problem.grid;
        let id = g.identity();
        let mut total = 0.0;
        for c in 0..g.len() {
            if let Some(a) = self.direction(c) {
                let s = id - a * a.transpose();
                total += f(&g.centers[c], &s) * g.volumes[c] * self.density[c];
            }
        }
        for (b, &t) in g.boundary.iter().zip(&self.trace) {
            let s = id - b.normal * b.normal.transpose();
            total += f(&b.point, &s) * b.weight * self.problem.model.sigma(t);
        }
        total
    }

    /// Interior energy within distance `delta` of the boundary.
    pub fn tubular_mass(&self, delta: f64) -> Result<f64> {
        let g = &self.problem.grid;
        let w = g.tubular_weights(delta)?;
        Ok(w.iter().zip(&g.volumes).zip(&self.density).map(|((w, v), e)| w * v * e).sum())
    }

    /// Total variation of `Phi(u)`, bounded by the interior energy.
    ///
    /// Uses the chain rule `|grad Phi(u)| = sqrt(2 W(u)) |grad u|` per cell with
    /// the same `|grad u|^2` as the energy, so the bound holds cell by cell.
    pub fn phase_variation(&self) -> f64 {
        let p = &self.problem;
        let g = &p.grid;
        g.cell_grad_sq(&self.values)
            .iter()
            .zip(&self.values)
            .zip(&g.volumes)
            .map(|((q, &s), v)| (2.0 * p.model.w(s).max(0.0)).sqrt() * q.sqrt() * v)
            .sum()
    }
}

/// `int psi(t) mu_t(phi) dt` over the stored snapshots (trapezoid rule).
pub fn spacetime_integral(record: &RunRecord, phi: &dyn TestFunction, psi: impl Fn(f64) -> f64) -> Result<f64> {
    let mut prev: Option<(f64, f64)> = None;
    let mut acc = 0.0;
    for s in &record.snapshots {
        let pack = measures(&record.field(s))?;
        let v = psi(s.time) * pack.total(phi);
        if let Some((t0, v0)) = prev {
            acc += 0.5 * (s.time - t0) * (v + v0);
        }
        prev = Some((s.time, v));
    }
    Ok(acc)
}
