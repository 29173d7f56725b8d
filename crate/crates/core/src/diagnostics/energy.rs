//! Energy dissipation and semi-decreasing test-function integrals.

use serde::Serialize;

use crate::error::{param, Result};
use crate::measures::{measures, TestFunction};
use crate::solver::RunRecord;

/// Tolerance of the semi-decreasing check relative to `E0`.
pub const SEMI_DECREASING_TOL: f64 = 1e-6;

/// `|(E_k - E_{k-1}) / dt + int eps u_t^2|` for the step ending at row `k`.
pub fn dissipation_residual(record: &RunRecord, k: usize) -> Result<f64> {
    if k == 0 || k >= record.series.len() {
        return Err(param(format!("step index {k} outside 1..{}", record.series.len())));
    }
    let (a, b) = (&record.series[k - 1], &record.series[k]);
    Ok(((b.energy - a.energy) / b.dt + b.dissipation).abs())
}

/// Largest energy increase between consecutive steps (zero or negative if monotone).
pub fn max_energy_increase(record: &RunRecord) -> f64 {
    record
        .series
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Values of `mu_t(phi) - E0 |phi|_{C^2} t` for one test function.
#[derive(Clone, Debug, Serialize)]
pub struct SemiDecreasingSeries {
    pub name: String,
    pub c2_norm: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `f(t_j) - f(t_i)` over `t_i < t_j`.
    pub worst_increase: f64,
    /// Number of pairs whose increase exceeds the tolerance.
    pub violations: usize,
}

/// Checks that `t -> mu_t(phi) - E0 |phi|_{C^2} t` is non-increasing over all snapshot pairs.
pub fn semi_decreasing_check(record: &RunRecord, tests: &[Box<dyn TestFunction>]) -> Result<Vec<SemiDecreasingSeries>> {
    let packs = record
        .snapshots
        .iter()
        .map(|s| measures(&record.field(s)))
        .collect::<Result<Vec<_>>>()?;
    let tol = SEMI_DECREASING_TOL * record.e0;
    let mut out = Vec::with_capacity(tests.len());
    for phi in tests {
        let norm = phi.c2_norm();
        let times: Vec<f64> = packs.iter().map(|p| p.time).collect();
        let values: Vec<f64> = packs
            .iter()
            .map(|p| p.total(phi.as_ref()) - record.e0 * norm * p.time)
            .collect();
        let mut worst = f64::NEG_INFINITY;
        let mut violations = 0;
        let mut running_min = f64::INFINITY;
        for (j, &v) in values.iter().enumerate() {
            if j > 0 {
                let inc = v - running_min;
                worst = worst.max(inc);
                for &w in &values[..j] {
                    if v - w > tol {
                        violations += 1;
                    }
                }
            }
            running_min = running_min.min(v);
        }
        out.push(SemiDecreasingSeries { name: phi.name(), c2_norm: norm, times, values, worst_increase: worst, violations });
    }
    Ok(out)
}
