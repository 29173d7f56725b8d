//! Double-well potentials, boundary energy densities and their structural checks.
//!
//! A model pairs a bulk potential `W` with a boundary density `sigma`. The
//! built-in quartic model is `W(s) = (1 - s^2)^2 / 4` with
//! `sigma = cos(theta) * Phi`, where `Phi(s) = int_{-1}^s sqrt(2 W)` is the
//! phase transform. Polynomial models are given by coefficient lists and are
//! checked numerically.

mod quadrature;

pub use quadrature::integrate;

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

/// Bound used for the overshoot guard and for Lipschitz constants.
pub const STATE_BOUND: f64 = 1.1;
/// Above this value of `sigma(1) / c0` the contact angle is reported as near wetting.
pub const NEAR_WETTING_COS: f64 = 0.99;

/// Model description as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Quartic well with the contact angle `theta` in `(0, pi/2]`.
    Quartic { theta: f64 },
    /// Coefficients in ascending powers. `sigma` is shifted so that `sigma(-1) = 0`.
    Polynomial { w: Vec<f64>, sigma: Vec<f64> },
}

#[derive(Clone, Debug)]
enum Kind {
    Quartic { cos: f64 },
    Polynomial {
        w: Vec<f64>,
        sigma: Vec<f64>,
        phi_table: Vec<f64>,
        profile: Profile,
    },
}

/// Bulk potential and boundary density with derived constants.
#[derive(Clone, Debug)]
pub struct EnergyModel {
    spec: ModelSpec,
    kind: Kind,
    c0: f64,
    c1: f64,
    gamma: f64,
    bulk_lipschitz: f64,
    boundary_lipschitz: f64,
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

const PHI_PANELS: usize = 4096;

impl EnergyModel {
    /// The quartic model. `theta` must lie in `(0, pi/2]`.
    pub fn quartic(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 0.5 * PI + 1e-15) {
            return Err(Error::Parameter(format!(
                "contact angle {theta} must lie in (0, pi/2]"
            )));
        }
        Self::from_spec(&ModelSpec::Quartic { theta })
    }

    /// Builds a model without checking the structural assumptions.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let kind = match spec {
            ModelSpec::Quartic { theta } => {
                if !theta.is_finite() {
                    return Err(Error::Parameter("theta must be finite".into()));
                }
                Kind::Quartic { cos: theta.cos() }
            }
            ModelSpec::Polynomial { w, sigma } => {
                if w.len() < 3 || w.iter().chain(sigma).any(|c| !c.is_finite()) {
                    return Err(Error::Model(
                        "polynomial model needs finite coefficients and deg W >= 2".into(),
                    ));
                }
                let mut sigma = sigma.clone();
                if sigma.is_empty() {
                    sigma.push(0.0);
                }
                sigma[0] -= horner(&sigma, -1.0);
                let w = w.clone();
                let density = |s: f64| (2.0 * horner(&w, s).max(0.0)).sqrt();
                let step = 2.0 / PHI_PANELS as f64;
                let mut phi_table = Vec::with_capacity(PHI_PANELS + 1);
                let mut acc = 0.0;
                phi_table.push(0.0);
                for k in 0..PHI_PANELS {
                    let a = -1.0 + k as f64 * step;
                    acc += integrate(&density, a, a + step, 1e-15);
                    phi_table.push(acc);
                }
                let profile = Profile::new(&w);
                Kind::Polynomial { w, sigma, phi_table, profile }
            }
        };
        let mut model = EnergyModel {
            spec: spec.clone(),
            kind,
            c0: 0.0,
            c1: 0.0,
            gamma: 0.0,
            bulk_lipschitz: 0.0,
            boundary_lipschitz: 0.0,
        };
        model.c0 = match &model.kind {
            Kind::Quartic { .. } => 2.0 * SQRT_2 / 3.0,
            Kind::Polynomial { phi_table, .. } => phi_table[PHI_PANELS],
        };
        let samples = sample_points(-STATE_BOUND, STATE_BOUND, 4401);
        model.bulk_lipschitz = samples.iter().map(|&s| model.w_second(s).abs()).fold(0.0, f64::max);
        model.boundary_lipschitz =
            samples.iter().map(|&s| model.sigma_second(s).abs()).fold(0.0, f64::max);
        let report = validate_assumptions(&model, 20_001);
        model.c1 = report.c1;
        model.gamma = report.gamma;
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            ModelSpec::Quartic { .. } => "quartic",
            ModelSpec::Polynomial { .. } => "polynomial",
        }
    }

    pub fn w(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { .. } => {
                let a = 1.0 - s * s;
                0.25 * a * a
            }
            Kind::Polynomial { w, .. } => horner(w, s),
        }
    }

    pub fn w_prime(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { .. } => s * s * s - s,
            Kind::Polynomial { w, .. } => horner(&derivative(w), s),
        }
    }

    pub fn w_second(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { .. } => 3.0 * s * s - 1.0,
            Kind::Polynomial { w, .. } => horner(&derivative(&derivative(w)), s),
        }
    }

    pub fn sigma(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { cos } => cos * FRAC_1_SQRT_2 * (s + 1.0).powi(2) * (2.0 - s) / 3.0,
            Kind::Polynomial { sigma, .. } => horner(sigma, s),
        }
    }

    pub fn sigma_prime(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { cos } => cos * FRAC_1_SQRT_2 * (1.0 - s * s),
            Kind::Polynomial { sigma, .. } => horner(&derivative(sigma), s),
        }
    }

    pub fn sigma_second(&self, s: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { cos } => -cos * SQRT_2 * s,
            Kind::Polynomial { sigma, .. } => horner(&derivative(&derivative(sigma)), s),
        }
    }

    /// `Phi(s) = int_{-1}^s sqrt(2 W)`, held constant outside `[-1, 1]`.
    pub fn phase_transform(&self, s: f64) -> f64 {
        let s = s.clamp(-1.0, 1.0);
        match &self.kind {
            Kind::Quartic { .. } => FRAC_1_SQRT_2 * (s + 1.0).powi(2) * (2.0 - s) / 3.0,
            Kind::Polynomial { w, phi_table, .. } => {
                let step = 2.0 / PHI_PANELS as f64;
                let x = (s + 1.0) / step;
                let k = (x.floor() as usize).min(PHI_PANELS - 1);
                let t = x - k as f64;
                let d = |s: f64| (2.0 * horner(w, s).max(0.0)).sqrt() * step;
                let (y0, y1) = (phi_table[k], phi_table[k + 1]);
                let (m0, m1) = (d(-1.0 + k as f64 * step), d(-1.0 + (k + 1) as f64 * step));
                let (t2, t3) = (t * t, t * t * t);
                (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * m1
            }
        }
    }

    /// Optimal-profile constant `Phi(1)`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Tightest constant with `|sigma'| <= c1 sqrt(2 W)`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Largest `|s|` at which `W''(s) <= 0`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `max |W''|` on `[-1.1, 1.1]`.
    pub fn bulk_lipschitz(&self) -> f64 {
        self.bulk_lipschitz
    }

    /// `max |sigma''|` on `[-1.1, 1.1]`.
    pub fn boundary_lipschitz(&self) -> f64 {
        self.boundary_lipschitz
    }

    /// Equilibrium contact angle `arccos(sigma(1) / c0)`, measured through the `-1` phase.
    pub fn contact_angle(&self) -> Result<f64> {
        let c = self.sigma(1.0) / self.c0;
        if !(c.abs() < 1.0) {
            return Err(Error::Model(format!(
                "|sigma(1)| / c0 = {} is not below 1, no partial wetting angle",
                c.abs()
            )));
        }
        if c > NEAR_WETTING_COS {
            log::warn!("contact angle {:.4} rad is close to complete wetting", c.acos());
        }
        Ok(c.acos())
    }

    /// True when `sigma(1) / c0` exceeds [`NEAR_WETTING_COS`].
    pub fn near_wetting(&self) -> bool {
        self.sigma(1.0) / self.c0 > NEAR_WETTING_COS
    }

    /// Whether `sigma >= 0` on `[-1, 1]`.
    pub fn sigma_nonnegative(&self) -> bool {
        sample_points(-1.0, 1.0, 2001).iter().all(|&s| self.sigma(s) >= -1e-14)
    }

    /// Standing-wave profile `q` with `q' = sqrt(2 W(q))`, `q(0) = 0`.
    pub fn heteroclinic(&self, z: f64) -> f64 {
        match &self.kind {
            Kind::Quartic { .. } => (z * FRAC_1_SQRT_2).tanh(),
            Kind::Polynomial { profile, .. } => profile.eval(z),
        }
    }
}

fn sample_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Tabulated heteroclinic for polynomial wells.
#[derive(Clone, Debug)]
struct Profile {
    step: f64,
    values: Vec<f64>,
}

const PROFILE_RANGE: f64 = 40.0;

impl Profile {
    fn new(w: &[f64]) -> Self {
        let step = 1e-3;
        let n = (PROFILE_RANGE / step) as usize;
        let rhs = |q: f64| (2.0 * horner(w, q).max(0.0)).sqrt();
        let mut forward = vec![0.0; n + 1];
        let mut backward = vec![0.0; n + 1];
        for (out, sign) in [(&mut forward, 1.0), (&mut backward, -1.0)] {
            let mut q = 0.0f64;
            for slot in out.iter_mut().skip(1) {
                let f = |q: f64| sign * rhs(q);
                let k1 = f(q);
                let k2 = f(q + 0.5 * step * k1);
                let k3 = f(q + 0.5 * step * k2);
                let k4 = f(q + step * k3);
                q = (q + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(-1.0, 1.0);
                *slot = q;
            }
        }
        let mut values: Vec<f64> = backward.iter().rev().copied().collect();
        values.extend_from_slice(&forward[1..]);
        Self { step, values }
    }

    fn eval(&self, z: f64) -> f64 {
        let x = (z + PROFILE_RANGE) / self.step;
        if x <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if x >= last as f64 {
            return self.values[last];
        }
        let k = x.floor() as usize;
        let t = x - k as f64;
        (1.0 - t) * self.values[k] + t * self.values[k + 1]
    }
}

/// One line of an assumption check.
#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Result of checking the structural assumptions on a model.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub clauses: Vec<Clause>,
    pub c0: f64,
    pub c1: f64,
    pub gamma: f64,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.clauses.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Checks the well and boundary-density assumptions on `samples` points.
///
/// The tightest `c1` is `sup |sigma'| / sqrt(2 W)`; at the wells the ratio is
/// replaced by its limit `|sigma''(+-1)| / sqrt(W''(+-1))`, or infinity when
/// `sigma'(+-1) != 0`.
pub fn validate_assumptions(model: &EnergyModel, samples: usize) -> AssumptionReport {
    let samples = samples.max(1001);
    let mut clauses = Vec::new();
    let mut push = |name: &'static str, pass: bool, detail: String| {
        clauses.push(Clause { name, pass, detail })
    };

    let wide = sample_points(-4.0, 4.0, samples);
    let min_w = wide.iter().map(|&s| model.w(s)).fold(f64::INFINITY, f64::min);
    push("W >= 0", min_w >= -1e-14, format!("min W = {min_w:e}"));
    let (wm, wp) = (model.w(-1.0), model.w(1.0));
    push(
        "W(+-1) = 0",
        wm.abs() <= 1e-12 && wp.abs() <= 1e-12,
        format!("W(-1) = {wm:e}, W(1) = {wp:e}"),
    );
    let (am, ap) = (model.w_second(-1.0), model.w_second(1.0));
    push("W''(+-1) > 0", am > 0.0 && ap > 0.0, format!("W''(-1) = {am}, W''(1) = {ap}"));

    let mut gamma: f64 = 0.0;
    for &s in &wide {
        if model.w_second(s) <= 0.0 {
            gamma = gamma.max(s.abs());
        }
    }
    let bad = |t: f64| model.w_second(t) <= 0.0 || model.w_second(-t) <= 0.0;
    if gamma > 0.0 {
        let mut lo = gamma;
        let mut hi = gamma + 8.0 / (samples - 1) as f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bad(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        gamma = lo;
    }
    push("gamma < 1", gamma < 1.0, format!("gamma = {gamma}"));
    let edge_ok = model.w_second(3.9) > 0.0 && model.w_second(-3.9) > 0.0;
    push("W'' > 0 beyond gamma", edge_ok, String::new());

    let limit = |s: f64| {
        if model.sigma_prime(s).abs() > 1e-12 {
            f64::INFINITY
        } else if model.w_second(s) > 0.0 {
            model.sigma_second(s).abs() / model.w_second(s).sqrt()
        } else {
            f64::INFINITY
        }
    };
    let mut c1 = limit(-1.0).max(limit(1.0));
    for &s in &sample_points(-STATE_BOUND, STATE_BOUND, samples) {
        let w = model.w(s);
        if w > 1e-10 {
            c1 = c1.max(model.sigma_prime(s).abs() / (2.0 * w).sqrt());
        }
    }
    push("c1 < 1", c1 < 1.0, format!("c1 = {c1}"));

    let s1 = model.sigma(1.0);
    push(
        "|sigma(1)| < c0",
        s1.abs() < model.c0(),
        format!("sigma(1) = {s1}, c0 = {}", model.c0()),
    );

    AssumptionReport { clauses, c0: model.c0(), c1, gamma }
}

/// Builds a model and rejects it unless every assumption holds.
pub fn make_model(spec: &ModelSpec) -> Result<EnergyModel> {
    let model = match spec {
        ModelSpec::Quartic { theta } => EnergyModel::quartic(*theta)?,
        _ => EnergyModel::from_spec(spec)?,
    };
    let report = validate_assumptions(&model, 20_001);
    if !report.passed() {
        return Err(Error::Model(format!("failed: {}", report.failures().join(", "))));
    }
    Ok(model)
}
