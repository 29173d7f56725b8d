//! Initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{PhaseField, Problem};
use crate::energetics::STATE_BOUND;
use crate::error::{param, Result};
use crate::geometry::Point;

/// Initial interface; the `+1` phase is on the side where the signed distance is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterfaceSpec {
    /// Line through `point`; the `+1` phase lies on the side `normal` points to.
    HalfPlane { point: [f64; 2], normal: [f64; 2] },
    /// Band of half width `half_width` around the line through `center` orthogonal to `normal`.
    Strip { center: [f64; 2], normal: [f64; 2], half_width: f64 },
    /// Disk with the `+1` phase inside.
    Circle { center: [f64; 2], radius: f64 },
}

impl InterfaceSpec {
    pub fn signed_distance(&self, x: &Point) -> f64 {
        let unit = |n: &[f64; 2]| {
            let v = Point::new(n[0], n[1]);
            v / v.norm()
        };
        match self {
            InterfaceSpec::HalfPlane { point, normal } => {
                (x - Point::new(point[0], point[1])).dot(&unit(normal))
            }
            InterfaceSpec::Strip { center, normal, half_width } => {
                half_width - (x - Point::new(center[0], center[1])).dot(&unit(normal)).abs()
            }
            InterfaceSpec::Circle { center, radius } => {
                radius - (x - Point::new(center[0], center[1])).norm()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad_normal = |n: &[f64; 2]| !(n[0].hypot(n[1]) > 0.0);
        match self {
            InterfaceSpec::HalfPlane { normal, .. } if bad_normal(normal) => {
                Err(param("interface normal must be non-zero"))
            }
            InterfaceSpec::Strip { normal, half_width, .. } if bad_normal(normal) || *half_width <= 0.0 => {
                Err(param("strip needs a non-zero normal and a positive half width"))
            }
            InterfaceSpec::Circle { radius, .. } if *radius <= 0.0 => {
                Err(param("circle radius must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Initial profile kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `q(d / eps)` with the heteroclinic `q` of the model.
    WellPreparedInterface {
        interface: InterfaceSpec,
        #[serde(default)]
        invert: bool,
    },
    /// `tanh(d / width)`.
    SmoothedIndicator {
        interface: InterfaceSpec,
        width: f64,
        #[serde(default)]
        invert: bool,
    },
    Constant { value: f64 },
    /// `mean + amplitude * U(-1, 1)`, independent per cell, from the run seed.
    RandomSeeded {
        amplitude: f64,
        #[serde(default)]
        mean: f64,
    },
}

impl InitialSpec {
    /// The interface this profile is built around, if any.
    pub fn interface(&self) -> Option<&InterfaceSpec> {
        match self {
            InitialSpec::WellPreparedInterface { interface, .. }
            | InitialSpec::SmoothedIndicator { interface, .. } => Some(interface),
            _ => None,
        }
    }
}

/// Samples the initial profile at the cell centres.
pub fn initialize(problem: &Arc<Problem>, spec: &InitialSpec, seed: u64) -> Result<PhaseField> {
    let centers = &problem.grid.centers;
    let values: Vec<f64> = match spec {
        InitialSpec::WellPreparedInterface { interface, invert } => {
            interface.validate()?;
            let sign = if *invert { -1.0 } else { 1.0 };
            centers
                .iter()
                .map(|x| problem.model.heteroclinic(sign * interface.signed_distance(x) / problem.epsilon))
                .collect()
        }
        InitialSpec::SmoothedIndicator { interface, width, invert } => {
            interface.validate()?;
            if !(*width > 0.0) {
                return Err(param("indicator width must be positive"));
            }
            let sign = if *invert { -1.0 } else { 1.0 };
            centers.iter().map(|x| (sign * interface.signed_distance(x) / width).tanh()).collect()
        }
        InitialSpec::Constant { value } => vec![*value; centers.len()],
        InitialSpec::RandomSeeded { amplitude, mean } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            centers.iter().map(|_| mean + amplitude * rng.gen_range(-1.0..=1.0)).collect()
        }
    };
    if values.iter().any(|v| !v.is_finite() || v.abs() > STATE_BOUND) {
        return Err(param(format!("initial values must lie in [-{STATE_BOUND}, {STATE_BOUND}]")));
    }
    PhaseField::new(Arc::clone(problem), values, 0.0)
}
