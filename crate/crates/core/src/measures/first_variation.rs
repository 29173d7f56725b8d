//! First variation of the diffuse varifold, directly and through the flow.

use serde::Serialize;

use super::{FieldDictionary, MeasurePack, VectorField};
use crate::error::{param, Result};

/// Terms of the first variation rewritten with the equation.
#[derive(Clone, Copy, Debug, Default, Serialize, PartialEq)]
pub struct FirstVariationTerms {
    /// `int_{grad u != 0} grad g : a (x) a dxi`.
    pub transverse: f64,
    /// `int_{grad u = 0} div g dxi`.
    pub critical: f64,
    /// `int eps u_t (g . grad u)`.
    pub velocity: f64,
    /// `int_bdry (e - sigma'(u)^2 / eps) (g . nu)`.
    pub boundary: f64,
    /// `-int_bdry sigma(u) (g . H)`, zero on flat boundaries.
    pub curvature: f64,
}

impl FirstVariationTerms {
    pub fn total(&self) -> f64 {
        self.transverse + self.critical + self.velocity + self.boundary + self.curvature
    }

    /// Sum of absolute values, a scale for relative residuals.
    pub fn magnitude(&self) -> f64 {
        self.transverse.abs() + self.critical.abs() + self.velocity.abs() + self.boundary.abs() + self.curvature.abs()
    }
}

/// `delta V (g) = int grad g : S dV`.
pub fn first_variation_direct(pack: &MeasurePack, g: &dyn VectorField) -> f64 {
    pack.varifold_jacobian(g)
}

impl MeasurePack {
    fn varifold_jacobian(&self, g: &dyn VectorField) -> f64 {
        let grid = &self.problem().grid;
        let id = grid.identity();
        let mut total = 0.0;
        for c in 0..grid.len() {
            if let Some(a) = self.direction(c) {
                let j = g.eval(&grid.centers[c]).1;
                let s = id - a * a.transpose();
                total += j.component_mul(&s).sum() * grid.volumes[c] * self.density[c];
            }
        }
        let model = &self.problem().model;
        for (b, &t) in grid.boundary.iter().zip(&self.trace) {
            let j = g.eval(&b.point).1;
            let s = id - b.normal * b.normal.transpose();
            total += j.component_mul(&s).sum() * b.weight * model.sigma(t);
        }
        total
    }
}

/// First variation expressed through the discrete flow at the snapshot.
///
/// `tangential` asserts `g . nu = 0` on the boundary, which drops the
/// boundary and curvature terms.
pub fn first_variation_formula(pack: &MeasurePack, g: &dyn VectorField, tangential: bool) -> FirstVariationTerms {
    let p = pack.problem();
    let grid = &p.grid;
    let id = grid.identity();
    let eps = p.epsilon;
    let mut t = FirstVariationTerms::default();
    for c in 0..grid.len() {
        let (gv, j) = g.eval(&grid.centers[c]);
        let v = grid.volumes[c];
        match pack.direction(c) {
            Some(a) => t.transverse += j.component_mul(&(a * a.transpose())).sum() * pack.discrepancy[c] * v,
            None => t.critical += j.component_mul(&id).sum() * pack.discrepancy[c] * v,
        }
        t.velocity += eps * pack.time_derivative[c] * gv.dot(&pack.gradient[c]) * v;
    }
    if !tangential {
        for (k, b) in grid.boundary.iter().enumerate() {
            let gv = g.eval(&b.point).0;
            let s = pack.trace[k];
            let sp = p.model.sigma_prime(s);
            t.boundary += (pack.boundary_density[k] - sp * sp / eps) * gv.dot(&b.normal) * b.weight;
            t.curvature -= p.model.sigma(s) * gv.dot(&b.curvature) * b.weight;
        }
    }
    t
}

/// `max_g |delta V(g)| / sup|g|` over a dictionary of at least ten fields.
pub fn first_variation_norm_estimate(pack: &MeasurePack, dictionary: &FieldDictionary) -> Result<(f64, String)> {
    if dictionary.len() < 10 {
        return Err(param(format!("dictionary has {} fields, at least 10 are needed", dictionary.len())));
    }
    let mut best = (f64::NEG_INFINITY, String::new());
    for f in &dictionary.fields {
        let v = first_variation_direct(pack, f.as_ref()).abs() / f.sup_norm();
        if v > best.0 {
            best = (v, f.name());
        }
    }
    Ok(best)
}
