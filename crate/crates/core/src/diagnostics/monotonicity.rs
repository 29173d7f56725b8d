//! Discrete check of the localized boundary monotonicity inequality.
//!
//! For a kernel centre `y` near the boundary the quantity
//! `G(t) = exp(C1 tau^{1/4}) mu_t(rho_1 + rho_2)`, `tau = s - t`, must satisfy
//! `G' <= exp(C1 tau^{1/4}) (int (rho_1 + rho_2) / (2 tau) dxi + C2)`.
//! For centres away from the boundary the interior form
//! `d/dt mu_{t,1}(rho_1) <= int rho_1 / (2 tau) dxi + C2` is used. The
//! smallest constants on a logarithmic grid are fitted from the snapshots.

use serde::Serialize;

use super::kernel::{KernelPair, KernelVariant};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measures::{measures, MeasurePack};
use crate::solver::RunRecord;

/// Lower and upper end of the constant grid.
pub const CONSTANT_RANGE: (f64, f64) = (1e-3, 1e6);
/// Grid points per decade.
pub const POINTS_PER_DECADE: usize = 32;
/// A sample must end at least this many time steps before the terminal time.
pub const MIN_LAG_STEPS: f64 = 4.0;
/// Relative tolerance below which an excess is not a violation.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// Kernel centre and terminal time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub center: [f64; 2],
    pub terminal: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityForm {
    Boundary,
    Interior,
}

/// Raw data for one pair of adjacent snapshots.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MonotonicitySample {
    pub t0: f64,
    pub t1: f64,
    /// Kernel mass `mu_t(rho)` at both ends.
    pub mass0: f64,
    pub mass1: f64,
    /// `int rho / (2 tau) dxi` at the midpoint time, with the discrepancy averaged.
    pub discrepancy_term: f64,
}

/// Outcome of a monotonicity check for one kernel.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub kernel: KernelSpec,
    pub form: MonotonicityForm,
    pub tag: String,
    pub samples: Vec<MonotonicitySample>,
    /// Fitted constants; `None` when no grid value works. `c1` is zero for the interior form.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Violations at user supplied constants, if given.
    pub user_violations: Option<usize>,
}

impl MonotonicitySample {
    fn tau(&self, s: f64) -> (f64, f64, f64) {
        (s - self.t0, s - self.t1, s - 0.5 * (self.t0 + self.t1))
    }

    /// Left side `(G(t1) - G(t0)) / dt` and right side for given constants.
    pub fn sides(&self, terminal: f64, form: MonotonicityForm, c1: f64, c2: f64) -> (f64, f64) {
        let (ta, tb, tm) = self.tau(terminal);
        let w = |tau: f64| match form {
            MonotonicityForm::Boundary => (c1 * tau.powf(0.25)).exp(),
            MonotonicityForm::Interior => 1.0,
        };
        let lhs = (w(tb) * self.mass1 - w(ta) * self.mass0) / (self.t1 - self.t0);
        (lhs, w(tm) * (self.discrepancy_term + c2))
    }

    fn violated(&self, terminal: f64, form: MonotonicityForm, c1: f64, c2: f64) -> bool {
        let (l, r) = self.sides(terminal, form, c1, c2);
        l - r > QUADRATURE_TOL * 1f64.max(l.abs()).max(r.abs())
    }
}

impl MonotonicityReport {
    pub fn violations(&self, c1: f64, c2: f64) -> usize {
        self.samples
            .iter()
            .filter(|s| s.violated(self.kernel.terminal, self.form, c1, c2))
            .count()
    }
}

/// The constant grid `1e-3 * 10^(k/32)` up to `1e6`.
pub fn constant_grid() -> Vec<f64> {
    let decades = (CONSTANT_RANGE.1 / CONSTANT_RANGE.0).log10().round() as usize;
    (0..=decades * POINTS_PER_DECADE)
        .map(|k| CONSTANT_RANGE.0 * 10f64.powf(k as f64 / POINTS_PER_DECADE as f64))
        .collect()
}

fn kernel_mass(pack: &MeasurePack, pair: &KernelPair, form: MonotonicityForm, t: f64) -> Result<f64> {
    let grid = &pack.problem().grid;
    let variant = match form {
        MonotonicityForm::Boundary => KernelVariant::Pair,
        MonotonicityForm::Interior => KernelVariant::Direct,
    };
    let mut total = 0.0;
    for c in 0..grid.len() {
        let r = pair.value(variant, &grid.centers[c], t)?;
        if r != 0.0 {
            total += r * grid.volumes[c] * pack.density[c];
        }
    }
    if form == MonotonicityForm::Boundary {
        for (b, &tr) in grid.boundary.iter().zip(&pack.trace) {
            let r = pair.value(variant, &b.point, t)?;
            if r != 0.0 {
                total += r * b.weight * pack.problem().model.sigma(tr);
            }
        }
    }
    Ok(total)
}

fn discrepancy_term(p0: &MeasurePack, p1: &MeasurePack, pair: &KernelPair, form: MonotonicityForm, t: f64) -> Result<f64> {
    let grid = &p0.problem().grid;
    let variant = match form {
        MonotonicityForm::Boundary => KernelVariant::Pair,
        MonotonicityForm::Interior => KernelVariant::Direct,
    };
    let tau = pair.kernel.terminal - t;
    let mut total = 0.0;
    for c in 0..grid.len() {
        let r = pair.value(variant, &grid.centers[c], t)?;
        if r != 0.0 {
            total += r * grid.volumes[c] * 0.5 * (p0.discrepancy[c] + p1.discrepancy[c]);
        }
    }
    Ok(total / (2.0 * tau))
}

/// Evaluates the inequality on all adjacent snapshot pairs in `window` and fits constants.
pub fn monotonicity_check(
    record: &RunRecord,
    kernel: KernelSpec,
    window: (f64, f64),
    user: Option<(f64, f64)>,
    tag: &str,
) -> Result<MonotonicityReport> {
    let problem = &record.problem;
    let grid = &problem.grid;
    if !problem.model.sigma_nonnegative() {
        return Err(Error::Hypothesis("the boundary density must be non-negative on [-1, 1]".into()));
    }
    let y = Point::new(kernel.center[0], kernel.center[1]);
    let dy = grid.signed_distance(&y)?;
    let form = if dy < 0.5 * grid.kappa() { MonotonicityForm::Boundary } else { MonotonicityForm::Interior };
    let snaps: Vec<_> = record
        .snapshots
        .iter()
        .filter(|s| s.time >= window.0 && s.time <= window.1)
        .collect();
    if snaps.len() < 2 {
        return Err(Error::Resolution(format!(
            "window [{}, {}] holds {} snapshots, at least 2 are needed",
            window.0,
            window.1,
            snaps.len()
        )));
    }
    let last = snaps.last().expect("non-empty").time;
    if kernel.terminal - last < MIN_LAG_STEPS * record.dt {
        return Err(Error::Resolution(format!(
            "sample at t = {last} is closer than {MIN_LAG_STEPS} time steps to the terminal time {}",
            kernel.terminal
        )));
    }
    let pair = KernelPair::new(grid, y, kernel.terminal);
    let packs: Vec<MeasurePack> = snaps.iter().map(|s| measures(&record.field(s))).collect::<Result<_>>()?;
    let masses: Vec<f64> = packs
        .iter()
        .zip(&snaps)
        .map(|(p, s)| kernel_mass(p, &pair, form, s.time))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(snaps.len() - 1);
    for k in 0..snaps.len() - 1 {
        let (t0, t1) = (snaps[k].time, snaps[k + 1].time);
        samples.push(MonotonicitySample {
            t0,
            t1,
            mass0: masses[k],
            mass1: masses[k + 1],
            discrepancy_term: discrepancy_term(&packs[k], &packs[k + 1], &pair, form, 0.5 * (t0 + t1))?,
        });
    }
    let mut report = MonotonicityReport {
        kernel,
        form,
        tag: tag.to_string(),
        samples,
        c1: None,
        c2: None,
        user_violations: None,
    };
    let grid_values = constant_grid();
    let c1_values: Vec<f64> = match form {
        MonotonicityForm::Boundary => grid_values.clone(),
        MonotonicityForm::Interior => vec![0.0],
    };
    'outer: for &c1 in &c1_values {
        for &c2 in &grid_values {
            if report.violations(c1, c2) == 0 {
                report.c1 = Some(c1);
                report.c2 = Some(c2);
                break 'outer;
            }
        }
    }
    if let Some((c1, c2)) = user {
        report.user_violations = Some(report.violations(c1, c2));
    }
    Ok(report)
}
