//! Driving a field to a final time while recording snapshots and scalar series.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{PhaseField, Problem, Stepper};
use crate::error::{param, Error, Result};

/// When to keep full snapshots. The initial and final states are always kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SnapshotPolicy {
    /// Every `steps` macro steps.
    Every { steps: u64 },
    /// The first step at or after each listed time.
    Times { times: Vec<f64> },
    /// Times `first * ratio^m`.
    Geometric { first: f64, ratio: f64 },
}

impl SnapshotPolicy {
    fn targets(&self, t_final: f64) -> Result<Vec<f64>> {
        match self {
            SnapshotPolicy::Every { steps } if *steps == 0 => Err(param("snapshot stride must be positive")),
            SnapshotPolicy::Every { .. } => Ok(Vec::new()),
            SnapshotPolicy::Times { times } => {
                let mut t = times.clone();
                t.sort_by(f64::total_cmp);
                Ok(t)
            }
            SnapshotPolicy::Geometric { first, ratio } => {
                if !(*first > 0.0 && *ratio > 1.0) {
                    return Err(param("geometric snapshots need first > 0 and ratio > 1"));
                }
                let mut out = Vec::new();
                let mut t = *first;
                while t <= t_final {
                    out.push(t);
                    t *= ratio;
                }
                Ok(out)
            }
        }
    }
}

/// A stored state.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub step: u64,
    pub values: Vec<f64>,
}

/// Scalars recorded after every macro step.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeriesRow {
    pub step: u64,
    pub time: f64,
    /// Length of the step that ended here (0 for the first row).
    pub dt: f64,
    pub energy: f64,
    pub interior_energy: f64,
    pub boundary_energy: f64,
    /// `sum V eps ((u_new - u_old) / dt)^2` over the step that ended here.
    pub dissipation: f64,
    /// `sum V |eps |grad u|^2 / 2 - W(u) / eps|`.
    pub abs_discrepancy: f64,
    /// Boundary integral of the interior energy density.
    pub boundary_layer_energy: f64,
}

/// Everything a run produces in memory.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub problem: Arc<Problem>,
    /// Nominal macro step.
    pub dt: f64,
    pub e0: f64,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesRow>,
}

impl RunRecord {
    pub fn field(&self, snapshot: &Snapshot) -> PhaseField {
        let mut f = PhaseField::new(Arc::clone(&self.problem), snapshot.values.clone(), snapshot.time)
            .expect("snapshot matches its grid");
        f.step = snapshot.step;
        f
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run keeps at least its initial state")
    }
}

fn series_row(p: &Problem, u: &[f64], prev: Option<(&[f64], f64)>, step: u64, time: f64) -> SeriesRow {
    let parts = p.energy(u);
    let (dt, dissipation) = match prev {
        Some((old, dt)) => {
            let d: f64 = u
                .iter()
                .zip(old)
                .zip(&p.grid.volumes)
                .map(|((a, b), v)| {
                    let r = (a - b) / dt;
                    v * p.epsilon * r * r
                })
                .sum();
            (dt, d)
        }
        None => (0.0, 0.0),
    };
    SeriesRow {
        step,
        time,
        dt,
        energy: parts.total(),
        interior_energy: parts.interior,
        boundary_energy: parts.boundary,
        dissipation,
        abs_discrepancy: p.discrepancy(u).iter().zip(&p.grid.volumes).map(|(x, v)| v * x.abs()).sum(),
        boundary_layer_energy: p
            .boundary_energy_density(u)
            .iter()
            .zip(&p.grid.boundary)
            .map(|(e, b)| e * b.weight)
            .sum(),
    }
}

/// Integrates from `start` to `t_final` with macro steps ending at `k * dt`.
///
/// Macro step `k` always ends at `min((k + 1) dt, t_final)` so that a run
/// resumed from a stored step reproduces an uninterrupted run bit for bit.
pub fn run(
    start: &PhaseField,
    t_final: f64,
    dt: f64,
    policy: &SnapshotPolicy,
    e0: f64,
) -> Result<RunRecord> {
    let problem = Arc::clone(start.problem());
    let cap = problem.stability_cap();
    if !(dt > 0.0 && dt <= cap * (1.0 + 1e-12)) {
        return Err(param(format!("time step {dt} outside (0, {cap}]")));
    }
    if !(t_final >= start.time) {
        return Err(param(format!("final time {t_final} precedes the start time {}", start.time)));
    }
    let energy0 = start.energy().total();
    if start.step == 0 && energy0 > e0 * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "initial energy {energy0} exceeds the declared bound E0 = {e0}"
        )));
    }
    let targets = policy.targets(t_final)?;
    let mut next_target = targets.partition_point(|&t| t <= start.time);
    let mut stepper = Stepper::new(Arc::clone(&problem), e0);
    let n_total = ((t_final / dt) - 1e-9).ceil().max(0.0) as u64;

    let mut field = start.clone();
    let mut series = vec![series_row(&problem, &field.values, None, field.step, field.time)];
    let mut snapshots = vec![Snapshot { time: field.time, step: field.step, values: field.values.clone() }];
    for k in start.step..n_total {
        let grid_time = ((k + 1) as f64) * dt;
        // A final time within rounding of the step grid lands on the grid, so
        // that runs stopped there and resumed repeat the same step lengths.
        let t_next = if (grid_time - t_final).abs() <= 1e-9 * dt { grid_time } else { grid_time.min(t_final) };
        let h = t_next - field.time;
        if h <= 0.0 {
            continue;
        }
        let mut next = stepper.advance(&field, h)?;
        next.time = t_next;
        next.step = k + 1;
        series.push(series_row(&problem, &next.values, Some((&field.values, h)), next.step, next.time));
        let mut keep = k + 1 == n_total;
        if let SnapshotPolicy::Every { steps } = policy {
            keep |= (k + 1) % steps == 0;
        }
        while next_target < targets.len() && targets[next_target] <= t_next * (1.0 + 1e-12) {
            keep = true;
            next_target += 1;
        }
        if keep {
            snapshots.push(Snapshot { time: next.time, step: next.step, values: next.values.clone() });
        }
        field = next;
    }
    Ok(RunRecord { problem, dt, e0, snapshots, series })
}
