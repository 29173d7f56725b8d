//! Run directories: execute a configuration, persist it, load it back.
//!
//! A run directory holds `config.json`, `run.json`, `series.csv`,
//! `snapshots/step_<9 digits>.ckpt` and `final.ckpt`.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader};
use super::config::RunConfig;
use super::table::{num, Table};
use crate::error::{Error, Result};
use crate::solver::{run, PhaseField, Problem, RunRecord, SeriesRow, Snapshot};

pub const SERIES_COLUMNS: [&str; 9] = [
    "step",
    "time",
    "dt",
    "energy",
    "interior_energy",
    "boundary_energy",
    "dissipation",
    "abs_discrepancy",
    "boundary_layer_energy",
];

/// Step size and energy bound used by a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config_hash: String,
    pub dt: f64,
    pub e0: f64,
    pub stability_cap: f64,
    pub t_final: f64,
}

fn header(cfg: &RunConfig, hash: &str, problem: &Problem, time: f64, step: u64) -> CheckpointHeader {
    let shape = problem.grid.shape();
    CheckpointHeader {
        domain_kind: cfg.domain.kind_name().to_string(),
        dim: problem.grid.dim(),
        shape,
        domain: cfg.domain.clone(),
        epsilon: cfg.epsilon,
        time,
        step,
        model: cfg.model.clone(),
        bc_order: cfg.bc_order,
        config_hash: hash.to_string(),
        trajectory_hash: cfg.trajectory_hash(),
    }
}

pub fn snapshot_path(dir: &Path, step: u64) -> PathBuf {
    dir.join("snapshots").join(format!("step_{step:09}.ckpt"))
}

fn series_table(hash: &str, rows: &[SeriesRow]) -> Table {
    let mut t = Table::new(hash, &SERIES_COLUMNS);
    for r in rows {
        t.push(vec![
            r.step.to_string(),
            num(r.time),
            num(r.dt),
            num(r.energy),
            num(r.interior_energy),
            num(r.boundary_energy),
            num(r.dissipation),
            num(r.abs_discrepancy),
            num(r.boundary_layer_energy),
        ]);
    }
    t
}

fn parse_series(t: &Table) -> Result<Vec<SeriesRow>> {
    let steps = t.floats("step")?;
    let cols: Vec<Vec<f64>> = SERIES_COLUMNS[1..].iter().map(|c| t.floats(c)).collect::<Result<_>>()?;
    Ok((0..steps.len())
        .map(|i| SeriesRow {
            step: steps[i] as u64,
            time: cols[0][i],
            dt: cols[1][i],
            energy: cols[2][i],
            interior_energy: cols[3][i],
            boundary_energy: cols[4][i],
            dissipation: cols[5][i],
            abs_discrepancy: cols[6][i],
            boundary_layer_energy: cols[7][i],
        })
        .collect())
}

/// Energy bound of a configuration: the declared one, checked against the initial state.
pub fn energy_bound(cfg: &RunConfig, start: &PhaseField) -> Result<f64> {
    let measured = start.energy().total();
    match cfg.e0 {
        Some(e0) if measured > e0 * (1.0 + 1e-12) => Err(Error::Config {
            path: "e0".into(),
            message: format!("declared bound {e0} is below the initial energy {measured}"),
        }),
        Some(e0) => Ok(e0),
        None => Ok(measured),
    }
}

/// Loads a checkpoint as the starting state of `cfg`.
pub fn resume_field(cfg: &RunConfig, problem: &Arc<Problem>, path: &Path) -> Result<PhaseField> {
    let (h, values) = read_checkpoint(path)?;
    let key = cfg.trajectory_hash();
    if h.trajectory_hash != key {
        return Err(Error::Checkpoint(format!(
            "checkpoint follows trajectory {}, this configuration follows {key}",
            h.trajectory_hash
        )));
    }
    if h.shape != problem.grid.shape() {
        return Err(Error::Checkpoint(format!("shape {:?} does not match the grid {:?}", h.shape, problem.grid.shape())));
    }
    let mut f = PhaseField::new(Arc::clone(problem), values, h.time)?;
    f.step = h.step;
    Ok(f)
}

/// Runs `cfg`, optionally from a checkpoint, and writes the run directory `out`.
pub fn execute(cfg: &RunConfig, out: &Path, resume: Option<&Path>) -> Result<RunRecord> {
    cfg.validate()?;
    let hash = cfg.hash();
    let problem = cfg.problem()?;
    let dt = cfg.time_step(&problem)?;
    let initial = cfg.initial_field(&problem)?;
    let e0 = energy_bound(cfg, &initial)?;
    let start = match resume {
        Some(p) => resume_field(cfg, &problem, p)?,
        None => initial,
    };
    log::info!("run {hash}: dt = {dt:e}, E0 = {e0:e}, from t = {}", start.time);
    let record = run(&start, cfg.t_final, dt, &cfg.snapshots, e0)?;

    // Rows before the resume point are kept when the directory holds the same trajectory.
    let mut rows = Vec::new();
    let series_path = out.join("series.csv");
    if resume.is_some() && series_path.exists() {
        let same = RunConfig::load(&out.join("config.json")).is_ok_and(|c| c.trajectory_hash() == cfg.trajectory_hash());
        if same {
            rows.extend(parse_series(&Table::read(&series_path)?)?.into_iter().filter(|r| r.step <= start.step));
        }
    }

    std::fs::create_dir_all(out.join("snapshots"))?;
    std::fs::write(out.join("config.json"), cfg.echo() + "\n")?;
    let manifest = RunManifest { config_hash: hash.clone(), dt, e0, stability_cap: problem.stability_cap(), t_final: cfg.t_final };
    std::fs::write(out.join("run.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    // The stored row of the resume step carries its step length and dissipation.
    let skip = usize::from(rows.last().is_some_and(|r| r.step == start.step));
    rows.extend_from_slice(&record.series[skip..]);
    series_table(&hash, &rows).write(&series_path)?;

    for s in &record.snapshots {
        write_checkpoint(&snapshot_path(out, s.step), &header(cfg, &hash, &problem, s.time, s.step), &s.values)?;
    }
    let last = record.last();
    write_checkpoint(&out.join("final.ckpt"), &header(cfg, &hash, &problem, last.time, last.step), &last.values)?;
    Ok(record)
}

/// A run directory read back from disk.
pub struct LoadedRun {
    pub config: RunConfig,
    pub manifest: RunManifest,
    pub record: RunRecord,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let config = RunConfig::load(&dir.join("config.json"))?;
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("run.json"))?)?;
    let hash = config.hash();
    if manifest.config_hash != hash {
        return Err(Error::Checkpoint(format!("run.json hash {} does not match config.json", manifest.config_hash)));
    }
    let problem = config.problem()?;
    let series = parse_series(&Table::read(&dir.join("series.csv"))?)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir.join("snapshots"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ckpt"))
        .collect();
    files.sort();
    let mut snapshots = Vec::with_capacity(files.len());
    for f in files {
        let (h, values) = read_checkpoint(&f)?;
        if h.config_hash != hash || h.shape != problem.grid.shape() {
            return Err(Error::Checkpoint(format!("{} does not belong to this run", f.display())));
        }
        snapshots.push(Snapshot { time: h.time, step: h.step, values });
    }
    if snapshots.is_empty() {
        return Err(Error::Checkpoint(format!("{} holds no snapshots", dir.display())));
    }
    let record = RunRecord { problem, dt: manifest.dt, e0: manifest.e0, snapshots, series };
    Ok(LoadedRun { config, manifest, record })
}
