//! Post-processing checks over a stored run.
//!
//! Every check writes `<check>.csv` in long `(time, name, value)` format and
//! contributes one entry to `summary.json`.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::table::Table;
use crate::diagnostics::{
    boundary_energy_budget, contact_angle_extract, dissipation_residual, max_energy_increase, monotonicity_check,
    nonconcentration_profile, semi_decreasing_check, trace_gap, KernelSpec,
};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::measures::{
    first_variation_direct, first_variation_formula, measures, standard_test_functions, FieldDictionary,
};
use crate::solver::{RunRecord, ENERGY_TOL};

/// Relative tolerance of the first-variation check, against `max(1, max |direct|)`.
pub const FIRST_VARIATION_TOL: f64 = 0.05;
/// Largest accepted contact angle error in degrees.
pub const ANGLE_TOL_DEG: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Energy,
    Semidecreasing,
    BoundaryBudget,
    FirstVariation,
    Angle,
    Trace,
    Nonconcentration,
    Monotonicity,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Energy,
        Check::Semidecreasing,
        Check::BoundaryBudget,
        Check::FirstVariation,
        Check::Angle,
        Check::Trace,
        Check::Nonconcentration,
        Check::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Energy => "energy",
            Check::Semidecreasing => "semidecreasing",
            Check::BoundaryBudget => "boundary-budget",
            Check::FirstVariation => "first-variation",
            Check::Angle => "angle",
            Check::Trace => "trace",
            Check::Nonconcentration => "nonconcentration",
            Check::Monotonicity => "monotonicity",
        }
    }

    /// Parses a check name; `all` expands to every check.
    pub fn parse_list(name: &str) -> Result<Vec<Check>> {
        if name == "all" {
            return Ok(Check::ALL.to_vec());
        }
        Ok(vec![name.parse()?])
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config {
            path: "check".into(),
            message: format!("unknown check {s:?}"),
        })
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub pass: bool,
    /// Largest residual, when the check has one.
    pub worst_residual: Option<f64>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisSummary {
    pub config_hash: String,
    pub checks: Vec<CheckSummary>,
}

impl AnalysisSummary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Outcome {
    summary: CheckSummary,
    table: Table,
}

impl Outcome {
    fn new(check: Check, hash: &str) -> Self {
        Self {
            summary: CheckSummary {
                check: check.name().to_string(),
                pass: true,
                worst_residual: None,
                constants: BTreeMap::new(),
                note: String::new(),
            },
            table: Table::new(hash, &["time", "name", "value"]),
        }
    }
}

/// Default kernel centres: three in the boundary collar, two in the interior.
pub fn default_kernel_centers(spec: &DomainSpec) -> Vec<[f64; 2]> {
    match *spec {
        DomainSpec::Interval { a, b, .. } => {
            let k = 0.5 * (b - a);
            vec![[a, 0.0], [b, 0.0], [a + 0.25 * k, 0.0], [a + k, 0.0], [a + 1.25 * k, 0.0]]
        }
        DomainSpec::Channel { lx, ly, .. } => vec![
            [lx / 6.0, 0.0],
            [0.5 * lx, ly / 8.0],
            [5.0 * lx / 6.0, ly],
            [0.25 * lx, 0.5 * ly],
            [0.75 * lx, 0.5 * ly],
        ],
        DomainSpec::Disk { radius: r, .. } => {
            vec![[r, 0.0], [0.0, 0.9 * r], [-0.8 * r, 0.0], [0.0, 0.0], [0.3 * r, 0.0]]
        }
    }
}

/// Three terminal times after the last sample.
pub fn default_terminal_times(record: &RunRecord) -> Vec<f64> {
    let t = record.last().time;
    let gap = (4.04 * record.dt).max(0.1 * t);
    (1..=3).map(|j| t + gap * j as f64).collect()
}

fn energy(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let mut worst: f64 = 0.0;
    for (k, r) in record.series.iter().enumerate() {
        o.table.push_long(r.time, "energy", r.energy);
        o.table.push_long(r.time, "dissipation", r.dissipation);
        if k > 0 {
            let res = dissipation_residual(record, k)?;
            worst = worst.max(res);
            o.table.push_long(r.time, "dissipation_residual", res);
        }
    }
    let rise = if record.series.len() > 1 { max_energy_increase(record) } else { 0.0 };
    o.summary.pass = rise <= ENERGY_TOL * record.e0.max(1.0);
    o.summary.worst_residual = Some(worst);
    o.summary.constants.insert("max_energy_increase".into(), rise);
    Ok(())
}

fn semidecreasing(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let tests = standard_test_functions(&record.problem.grid);
    let series = semi_decreasing_check(record, &tests)?;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for s in &series {
        for (t, v) in s.times.iter().zip(&s.values) {
            o.table.push_long(*t, s.name.clone(), *v);
        }
        worst = worst.max(s.worst_increase);
        violations += s.violations;
    }
    o.summary.pass = violations == 0;
    o.summary.worst_residual = Some(worst);
    o.summary.constants.insert("violations".into(), violations as f64);
    Ok(())
}

fn budget(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let horizon = record.series.last().map_or(0.0, |r| r.time);
    for r in &record.series {
        o.table.push_long(r.time, "boundary_layer_energy", r.boundary_layer_energy);
    }
    let b = boundary_energy_budget(record, horizon)?;
    o.summary.pass = b.integral.is_finite();
    o.summary.constants.insert("horizon".into(), b.horizon);
    o.summary.constants.insert("integral".into(), b.integral);
    o.summary.constants.insert("constant".into(), b.constant);
    Ok(())
}

fn first_variation(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let snap = record.last();
    let pack = measures(&record.field(snap))?;
    let dict = FieldDictionary::standard(&record.problem.grid)?;
    let (mut worst, mut scale) = (0.0f64, 1.0f64);
    for g in &dict.fields {
        let direct = first_variation_direct(&pack, g.as_ref());
        let formula = first_variation_formula(&pack, g.as_ref(), g.tangential()).total();
        o.table.push_long(snap.time, format!("direct[{}]", g.name()), direct);
        o.table.push_long(snap.time, format!("formula[{}]", g.name()), formula);
        worst = worst.max((direct - formula).abs());
        scale = scale.max(direct.abs());
    }
    o.summary.pass = worst <= FIRST_VARIATION_TOL * scale;
    o.summary.worst_residual = Some(worst);
    o.summary.constants.insert("scale".into(), scale);
    Ok(())
}

fn angle(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let snap = record.last();
    let pack = measures(&record.field(snap))?;
    let target = record.problem.model.contact_angle()?.to_degrees();
    o.summary.constants.insert("target_deg".into(), target);
    let contacts = match contact_angle_extract(&pack) {
        Ok(a) => a.contacts().to_vec(),
        Err(e) => {
            o.summary.pass = false;
            o.summary.note = e.to_string();
            return Ok(());
        }
    };
    let mut worst: f64 = 0.0;
    for (i, c) in contacts.iter().enumerate() {
        let deg = c.angle.to_degrees();
        o.table.push_long(snap.time, format!("angle_deg[{i}]"), deg);
        o.table.push_long(snap.time, format!("error_deg[{i}]"), (deg - target).abs());
        worst = worst.max((deg - target).abs());
    }
    o.summary.constants.insert("contacts".into(), contacts.len() as f64);
    o.summary.worst_residual = Some(worst);
    o.summary.pass = worst <= ANGLE_TOL_DEG;
    if contacts.is_empty() {
        o.summary.note = "no contact".into();
    }
    Ok(())
}

fn trace(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let mut worst: f64 = 0.0;
    for s in &record.snapshots {
        let g = trace_gap(&measures(&record.field(s))?);
        o.table.push_long(s.time, "trace_gap", g);
        worst = worst.max(g);
    }
    o.summary.pass = worst.is_finite();
    o.summary.worst_residual = Some(worst);
    Ok(())
}

fn nonconcentration(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    let kappa = record.problem.grid.kappa();
    let deltas = [kappa / 8.0, kappa / 4.0, kappa / 2.0];
    let times: Vec<f64> = record.snapshots.iter().map(|s| s.time).collect();
    let rows = nonconcentration_profile(record, &deltas, &times)?;
    let mut wetting = false;
    for r in &rows {
        o.table.push_long(r.time, format!("tubular_mass[delta={}]", r.delta), r.tubular_mass);
        if r.delta == deltas[0] {
            o.table.push_long(r.time, "abs_discrepancy", r.abs_discrepancy);
            o.table.push_long(r.time, "interior_mass", r.interior_mass);
        }
    }
    if let Some(last) = rows.last() {
        wetting = rows.iter().filter(|r| r.time == last.time).any(|r| r.wetting);
    }
    o.summary.pass = !wetting;
    o.summary.constants.insert("wetting".into(), if wetting { 1.0 } else { 0.0 });
    if wetting {
        o.summary.note = "interface energy accumulates in the boundary collar".into();
    }
    Ok(())
}

/// A kernel with its fitted `(c1, c2)`.
pub type KernelFit = (KernelSpec, Option<f64>, Option<f64>);

/// Runs the monotonicity fit for each kernel.
pub fn monotonicity_fits(record: &RunRecord, kernels: &[KernelSpec], table: &mut Table) -> Result<Vec<KernelFit>> {
    let window = (0.0, record.last().time);
    let mut out = Vec::with_capacity(kernels.len());
    for k in kernels {
        let r = monotonicity_check(record, *k, window, None, "")?;
        let label = format!("y=({},{}),s={}", k.center[0], k.center[1], k.terminal);
        if let (Some(c1), Some(c2)) = (r.c1, r.c2) {
            for s in &r.samples {
                let (lhs, rhs) = s.sides(k.terminal, r.form, c1, c2);
                let tm = 0.5 * (s.t0 + s.t1);
                table.push_long(tm, format!("lhs[{label}]"), lhs);
                table.push_long(tm, format!("rhs[{label}]"), rhs);
            }
        }
        out.push((*k, r.c1, r.c2));
    }
    Ok(out)
}

fn monotonicity(record: &RunRecord, o: &mut Outcome) -> Result<()> {
    if !record.problem.model.sigma_nonnegative() {
        o.summary.pass = false;
        o.summary.note = "boundary density changes sign; the inequality does not apply".into();
        return Ok(());
    }
    let kernels: Vec<KernelSpec> = default_kernel_centers(record.problem.grid.spec())
        .into_iter()
        .flat_map(|c| default_terminal_times(record).into_iter().map(move |s| KernelSpec { center: c, terminal: s }))
        .collect();
    let fits = monotonicity_fits(record, &kernels, &mut o.table)?;
    let mut all_finite = true;
    for (k, c1, c2) in fits {
        let label = format!("y=({},{}),s={}", k.center[0], k.center[1], k.terminal);
        match (c1, c2) {
            (Some(c1), Some(c2)) => {
                o.summary.constants.insert(format!("c1[{label}]"), c1);
                o.summary.constants.insert(format!("c2[{label}]"), c2);
            }
            _ => all_finite = false,
        }
    }
    o.summary.pass = all_finite;
    Ok(())
}

/// Runs `checks` on `record` and writes CSVs plus `summary.json` into `out`.
pub fn analyze(record: &RunRecord, config_hash: &str, checks: &[Check], out: &Path) -> Result<AnalysisSummary> {
    std::fs::create_dir_all(out)?;
    let mut summary = AnalysisSummary { config_hash: config_hash.to_string(), checks: Vec::new() };
    let mut checks = checks.to_vec();
    checks.sort();
    checks.dedup();
    for c in checks {
        let mut o = Outcome::new(c, config_hash);
        let res = match c {
            Check::Energy => energy(record, &mut o),
            Check::Semidecreasing => semidecreasing(record, &mut o),
            Check::BoundaryBudget => budget(record, &mut o),
            Check::FirstVariation => first_variation(record, &mut o),
            Check::Angle => angle(record, &mut o),
            Check::Trace => trace(record, &mut o),
            Check::Nonconcentration => nonconcentration(record, &mut o),
            Check::Monotonicity => monotonicity(record, &mut o),
        };
        if let Err(e) = res {
            o.summary.pass = false;
            o.summary.note = e.to_string();
        }
        o.table.write(&out.join(format!("{}.csv", c.name())))?;
        log::info!("check {}: {}", c.name(), if o.summary.pass { "pass" } else { "fail" });
        summary.checks.push(o.summary);
    }
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}
