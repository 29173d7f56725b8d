use nalgebra::Matrix2;

use super::{DomainSpec, Grid, Point};
use crate::error::{param, Result};

/// `g = chi(d) nu(xi(x))` with `chi(d) = (1 - d/delta)^3` on the collar of width `delta`.
///
/// Equal to the outward normal on the boundary, bounded by one, supported in
/// the closed `delta`-collar and twice continuously differentiable.
#[derive(Clone, Debug)]
pub struct NormalExtension {
    spec: DomainSpec,
    delta: f64,
}

impl NormalExtension {
    pub(super) fn new(grid: &Grid, delta: f64) -> Result<Self> {
        let max = match grid.spec() {
            DomainSpec::Disk { radius, .. } => 0.5 * radius,
            _ => grid.kappa(),
        };
        if !(delta > 0.0 && delta <= max) {
            return Err(param(format!("extension width {delta} must lie in (0, {max}]")));
        }
        Ok(Self { spec: grid.spec().clone(), delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn chi(&self, d: f64) -> (f64, f64) {
        if d >= self.delta {
            return (0.0, 0.0);
        }
        let s = 1.0 - d / self.delta;
        (s * s * s, -3.0 * s * s / self.delta)
    }

    /// Value and Jacobian `J[i][j] = d g_i / d x_j`.
    pub fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        match self.spec {
            DomainSpec::Interval { a, b, .. } => {
                let (c0, d0) = self.chi(x.x - a);
                let (c1, d1) = self.chi(b - x.x);
                (Point::new(c1 - c0, 0.0), Matrix2::new(-d0 - d1, 0.0, 0.0, 0.0))
            }
            DomainSpec::Channel { ly, .. } => {
                let (c0, d0) = self.chi(x.y);
                let (c1, d1) = self.chi(ly - x.y);
                (Point::new(0.0, c1 - c0), Matrix2::new(0.0, 0.0, 0.0, -d0 - d1))
            }
            DomainSpec::Disk { radius, .. } => {
                let r = x.norm();
                let (c, dc) = self.chi(radius - r);
                if c == 0.0 {
                    return (Point::zeros(), Matrix2::zeros());
                }
                let n = x / r;
                let nn = n * n.transpose();
                (n * c, (Matrix2::identity() - nn) * (c / r) - nn * dc)
            }
        }
    }

    /// Bound on the operator norm of the Jacobian over the domain.
    pub fn gradient_bound(&self) -> f64 {
        match self.spec {
            DomainSpec::Disk { radius, .. } => 3.0 / self.delta + 1.0 / (radius - self.delta),
            _ => 3.0 / self.delta,
        }
    }
}
