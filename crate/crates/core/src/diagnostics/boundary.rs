//! Boundary energy budget, trace gap and concentration near the boundary.

use serde::Serialize;

use crate::error::{param, Result};
use crate::measures::{measures, MeasurePack};
use crate::solver::RunRecord;

/// Interior depth, in units of `eps`, at which the sign of `u` is sampled for the trace gap.
pub const TRACE_DEPTH: f64 = 4.0;
/// Fraction of the interior energy in the thinnest collar above which a state is flagged as wetting.
pub const WETTING_FRACTION: f64 = 0.2;

/// Time integral of the boundary energy density.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BudgetReport {
    pub horizon: f64,
    /// `int_0^T int_bdry (eps |grad u|^2 / 2 + W(u) / eps)`.
    pub integral: f64,
    /// `integral / (1 + T)`.
    pub constant: f64,
}

/// Trapezoid rule over the per-step series up to `horizon`.
pub fn boundary_energy_budget(record: &RunRecord, horizon: f64) -> Result<BudgetReport> {
    let rows: Vec<_> = record.series.iter().filter(|r| r.time <= horizon * (1.0 + 1e-12)).collect();
    let reached = rows.last().map(|r| r.time).unwrap_or(f64::NEG_INFINITY);
    if rows.len() < 2 || reached < horizon * (1.0 - 1e-9) {
        return Err(param(format!("the run ends before the horizon {horizon}")));
    }
    let integral = rows
        .windows(2)
        .map(|w| 0.5 * (w[1].time - w[0].time) * (w[0].boundary_layer_energy + w[1].boundary_layer_energy))
        .sum::<f64>();
    Ok(BudgetReport { horizon, integral, constant: integral / (1.0 + horizon) })
}

/// Mean over the boundary of `|u_b - sign(u(x_b - 4 eps nu))|`.
pub fn trace_gap(pack: &MeasurePack) -> f64 {
    let grid = &pack.problem().grid;
    let depth = TRACE_DEPTH * pack.epsilon();
    let mut total = 0.0;
    let mut weight = 0.0;
    for (b, &t) in grid.boundary.iter().zip(&pack.trace) {
        let x = b.point - b.normal * depth;
        let inner = grid.interpolate(&pack.values, &x);
        let s = if inner > 0.0 {
            1.0
        } else if inner < 0.0 {
            -1.0
        } else {
            0.0
        };
        total += b.weight * (t - s).abs();
        weight += b.weight;
    }
    total / weight
}

/// One row of a concentration profile.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConcentrationRow {
    pub time: f64,
    pub delta: f64,
    pub tubular_mass: f64,
    pub interior_mass: f64,
    pub abs_discrepancy: f64,
    /// Set when the thinnest collar still holds more than [`WETTING_FRACTION`] of the energy.
    pub wetting: bool,
}

/// Tubular masses for every requested width at the snapshots nearest to `times`.
pub fn nonconcentration_profile(record: &RunRecord, deltas: &[f64], times: &[f64]) -> Result<Vec<ConcentrationRow>> {
    if deltas.is_empty() {
        return Err(param("at least one collar width is needed"));
    }
    let thinnest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    for &t in times {
        let snap = record.snapshot_near(t).ok_or_else(|| param("the run has no snapshots"))?;
        let pack = measures(&record.field(snap))?;
        let interior = pack.interior_with(|_| 1.0);
        let wetting = pack.tubular_mass(thinnest)? > WETTING_FRACTION * interior;
        let abs = pack.abs_discrepancy();
        for &delta in deltas {
            rows.push(ConcentrationRow {
                time: snap.time,
                delta,
                tubular_mass: pack.tubular_mass(delta)?,
                interior_mass: interior,
                abs_discrepancy: abs,
                wetting,
            });
        }
    }
    Ok(rows)
}
