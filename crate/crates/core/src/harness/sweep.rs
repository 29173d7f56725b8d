//! Runs one configuration for a decreasing list of `epsilon` values and
//! tabulates the cross-`epsilon` trends.

use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

use super::analyze::{default_kernel_centers, default_terminal_times, monotonicity_fits};
use super::config::SweepConfig;
use super::runner::execute;
use super::table::{num, Table};
use crate::diagnostics::{boundary_energy_budget, contact_angle_extract, trace_gap, KernelSpec};
use crate::error::{Error, Result};
use crate::measures::measures;
use crate::solver::RunRecord;

/// Cross-`epsilon` tables, one row per run (per kernel for the monotonicity table).
#[derive(Clone, Debug, Default)]
pub struct SweepTables {
    pub trend: Table,
    pub tubular_mass: Table,
    pub trace_gap: Table,
    pub angle: Table,
    pub budget: Table,
    pub monotonicity: Table,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub config_hash: String,
    pub epsilons: Vec<f64>,
    pub runs: Vec<String>,
    pub eval_time: f64,
    pub delta: f64,
}

pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub tables: SweepTables,
    pub summary: SweepSummary,
}

/// Directory of the `i`-th run inside a sweep directory.
pub fn run_dir(out: &Path, i: usize, epsilon: f64) -> PathBuf {
    out.join(format!("eps_{i:02}_{epsilon}"))
}

/// Default job count: one per run, capped at the hardware parallelism.
pub fn default_jobs(cfg: &SweepConfig) -> usize {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    cfg.epsilons.len().min(hw).max(1)
}

/// Builds the cross-`epsilon` tables from finished runs.
pub fn sweep_tables(cfg: &SweepConfig, records: &[RunRecord]) -> Result<SweepTables> {
    let hash = cfg.hash();
    let a = &cfg.analysis;
    let mut t = SweepTables {
        trend: Table::new(&hash, &["epsilon", "time", "abs_discrepancy"]),
        tubular_mass: Table::new(&hash, &["epsilon", "time", "delta", "tubular_mass"]),
        trace_gap: Table::new(&hash, &["epsilon", "time", "trace_gap"]),
        angle: Table::new(&hash, &["epsilon", "time", "contacts", "target_deg", "mean_angle_deg", "worst_error_deg"]),
        budget: Table::new(&hash, &["epsilon", "horizon", "integral", "constant"]),
        monotonicity: Table::new(&hash, &["epsilon", "center_x", "center_y", "terminal", "c1", "c2"]),
    };
    for (eps, rec) in cfg.epsilons.iter().zip(records) {
        let e = num(*eps);
        let snap = rec.snapshot_near(a.eval_time).ok_or_else(|| Error::Resolution("run has no snapshots".into()))?;
        let pack = measures(&rec.field(snap))?;
        let ts = num(snap.time);
        t.trend.push(vec![e.clone(), ts.clone(), num(pack.abs_discrepancy())]);
        t.tubular_mass.push(vec![e.clone(), ts.clone(), num(a.delta), num(pack.tubular_mass(a.delta)?)]);
        t.trace_gap.push(vec![e.clone(), ts.clone(), num(trace_gap(&pack))]);

        let target = rec.problem.model.contact_angle()?.to_degrees();
        let contacts = match contact_angle_extract(&pack) {
            Ok(a) => a.contacts().to_vec(),
            Err(Error::Resolution(m)) => {
                log::warn!("epsilon {eps}: angle not measured: {m}");
                Vec::new()
            }
            Err(e) => return Err(e),
        };
        let (mean, worst) = if contacts.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let degs: Vec<f64> = contacts.iter().map(|c| c.angle.to_degrees()).collect();
            (
                degs.iter().sum::<f64>() / degs.len() as f64,
                degs.iter().map(|d| (d - target).abs()).fold(0.0, f64::max),
            )
        };
        t.angle.push(vec![e.clone(), ts, contacts.len().to_string(), num(target), num(mean), num(worst)]);

        let horizon = rec.series.last().map_or(0.0, |r| r.time);
        let b = boundary_energy_budget(rec, horizon)?;
        t.budget.push(vec![e.clone(), num(b.horizon), num(b.integral), num(b.constant)]);

        if rec.problem.model.sigma_nonnegative() {
            let kernels: Vec<KernelSpec> = if a.kernels.is_empty() {
                let terminals = default_terminal_times(rec);
                default_kernel_centers(rec.problem.grid.spec())
                    .into_iter()
                    .flat_map(|c| terminals.iter().map(move |&s| KernelSpec { center: c, terminal: s }))
                    .collect()
            } else {
                a.kernels.iter().map(|k| KernelSpec { center: k.center, terminal: k.terminal }).collect()
            };
            let mut scratch = Table::new(&hash, &["time", "name", "value"]);
            for (k, c1, c2) in monotonicity_fits(rec, &kernels, &mut scratch)? {
                t.monotonicity.push(vec![
                    e.clone(),
                    num(k.center[0]),
                    num(k.center[1]),
                    num(k.terminal),
                    num(c1.unwrap_or(f64::INFINITY)),
                    num(c2.unwrap_or(f64::INFINITY)),
                ]);
            }
        }
    }
    Ok(t)
}

/// Runs every `epsilon` on up to `jobs` threads, then writes the summary tables into `out`.
pub fn execute_sweep(cfg: &SweepConfig, out: &Path, jobs: usize) -> Result<SweepOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let results: Vec<Result<RunRecord>> = pool.install(|| {
        (0..cfg.epsilons.len())
            .into_par_iter()
            .map(|i| execute(&cfg.run_config(i), &run_dir(out, i, cfg.epsilons[i]), None))
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let tables = sweep_tables(cfg, &records)?;
    tables.trend.write(&out.join("trend.csv"))?;
    tables.tubular_mass.write(&out.join("tubular_mass.csv"))?;
    tables.trace_gap.write(&out.join("trace_gap.csv"))?;
    tables.angle.write(&out.join("angle_vs_eps.csv"))?;
    tables.budget.write(&out.join("budget.csv"))?;
    tables.monotonicity.write(&out.join("monotonicity_constants.csv"))?;
    let summary = SweepSummary {
        config_hash: cfg.hash(),
        epsilons: cfg.epsilons.clone(),
        runs: (0..cfg.epsilons.len())
            .map(|i| run_dir(Path::new(""), i, cfg.epsilons[i]).display().to_string())
            .collect(),
        eval_time: cfg.analysis.eval_time,
        delta: cfg.analysis.delta,
    };
    std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(SweepOutcome { records, tables, summary })
}
