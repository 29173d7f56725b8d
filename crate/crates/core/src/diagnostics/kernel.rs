//! Backwards heat kernels, the radial cutoff and the reflected kernel pair.

use nalgebra::Matrix2;
use std::f64::consts::PI;

use crate::error::{param, Result};
use crate::geometry::{DomainSpec, Grid, Point};

/// `rho(x, t) = (4 pi (s - t))^{-(n-1)/2} exp(-|x - y|^2 / (4 (s - t)))` for `t < s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatKernel {
    pub center: Point,
    pub terminal: f64,
    /// Ambient dimension `n`.
    pub dim: usize,
}

/// Value and derivatives of a kernel at one point.
#[derive(Clone, Copy, Debug)]
pub struct KernelJet {
    pub value: f64,
    pub gradient: Point,
    pub hessian: Matrix2<f64>,
    pub time: f64,
}

impl HeatKernel {
    pub fn new(center: Point, terminal: f64, dim: usize) -> Self {
        Self { center, terminal, dim }
    }

    fn lag(&self, t: f64) -> Result<f64> {
        let tau = self.terminal - t;
        if !(tau > 0.0) {
            return Err(param(format!("kernel time {t} is not before the terminal time {}", self.terminal)));
        }
        Ok(tau)
    }

    pub fn value(&self, x: &Point, t: f64) -> Result<f64> {
        let tau = self.lag(t)?;
        let r2 = (x - self.center).norm_squared();
        let k = 0.5 * (self.dim as f64 - 1.0);
        Ok((4.0 * PI * tau).powf(-k) * (-r2 / (4.0 * tau)).exp())
    }

    pub fn jet(&self, x: &Point, t: f64) -> Result<KernelJet> {
        let tau = self.lag(t)?;
        let value = self.value(x, t)?;
        let d = x - self.center;
        let id = identity(self.dim);
        let r2 = d.norm_squared();
        Ok(KernelJet {
            value,
            gradient: -d * (value / (2.0 * tau)),
            hessian: (d * d.transpose() / (4.0 * tau * tau) - id / (2.0 * tau)) * value,
            time: value * ((self.dim as f64 - 1.0) / (2.0 * tau) - r2 / (4.0 * tau * tau)),
        })
    }

    /// `(a . grad rho)^2 / rho + (I - a (x) a) : hess rho + rho_t` for a unit vector `a`,
    /// relative to the sum of the absolute values of the three terms.
    pub fn ilmanen_residual(&self, x: &Point, t: f64, a: &Point) -> Result<f64> {
        let j = self.jet(x, t)?;
        let id = identity(self.dim);
        let a = if self.dim == 1 { Point::new(a.x.signum(), 0.0) } else { a.normalize() };
        let ag = a.dot(&j.gradient);
        let t1 = if j.value > 0.0 { ag * ag / j.value } else { 0.0 };
        let t2 = (id - a * a.transpose()).component_mul(&j.hessian).sum();
        let t3 = j.time;
        let scale = t1.abs() + t2.abs() + t3.abs();
        Ok(if scale > 0.0 { (t1 + t2 + t3).abs() / scale } else { 0.0 })
    }
}

fn identity(dim: usize) -> Matrix2<f64> {
    if dim == 1 {
        Matrix2::new(1.0, 0.0, 0.0, 0.0)
    } else {
        Matrix2::identity()
    }
}

/// `rho_t + Laplace-Beltrami rho` compared with
/// `-((x - y) . nu)^2 rho / (4 tau^2) - ((x - y) . H) rho / (2 tau)` at a boundary point.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundaryIdentity {
    /// `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / 1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }
}

/// Evaluates both sides of the boundary identity at `x`, which is projected onto the boundary.
pub fn kernel_boundary_identity(kernel: &HeatKernel, grid: &Grid, x: &Point, t: f64) -> Result<BoundaryIdentity> {
    let xb = grid.nearest_boundary_point(x)?;
    let (nu, tangent, h) = grid.boundary_frame(&xb);
    let tau = kernel.terminal - t;
    let j = kernel.jet(&xb, t)?;
    let lap = (tangent.transpose() * j.hessian * tangent)[(0, 0)] + h.dot(&j.gradient);
    let d = xb - kernel.center;
    let dn = d.dot(&nu);
    Ok(BoundaryIdentity {
        lhs: j.time + lap,
        rhs: -dn * dn * j.value / (4.0 * tau * tau) - d.dot(&h) * j.value / (2.0 * tau),
    })
}

fn smooth_step_base(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / x).exp();
    let x2 = x * x;
    (f, f / x2, f * (1.0 - 2.0 * x) / (x2 * x2))
}

/// Radial cutoff: one on `[0, kappa/4]`, zero from `kappa/2`, non-increasing, smooth.
#[derive(Clone, Copy, Debug)]
pub struct Cutoff {
    inner: f64,
    outer: f64,
}

impl Cutoff {
    pub fn new(kappa: f64) -> Self {
        Self { inner: 0.25 * kappa, outer: 0.5 * kappa }
    }

    /// Value, first and second derivative in `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.inner {
            return (1.0, 0.0, 0.0);
        }
        if r >= self.outer {
            return (0.0, 0.0, 0.0);
        }
        let (f, f1, f2) = smooth_step_base(self.outer - r);
        let (g, g1, g2) = smooth_step_base(r - self.inner);
        let (fp, fpp) = (-f1, f2);
        let (gp, gpp) = (g1, g2);
        let d = f + g;
        let dp = fp + gp;
        let dpp = fpp + gpp;
        let num = fp * d - f * dp;
        let v = f / d;
        let v1 = num / (d * d);
        let v2 = (fpp * d - f * dpp) / (d * d) - 2.0 * dp * num / (d * d * d);
        (v, v1, v2)
    }

    /// Value, gradient and Hessian of `eta(|z|)`.
    pub fn jet(&self, z: &Point) -> (f64, Point, Matrix2<f64>) {
        let r = z.norm();
        let (v, d1, d2) = self.radial(r);
        if r <= self.inner || r >= self.outer {
            return (v, Point::zeros(), Matrix2::zeros());
        }
        let n = z / r;
        let nn = n * n.transpose();
        (v, n * d1, nn * d2 + (Matrix2::identity() - nn) * (d1 / r))
    }
}

/// Which truncated kernel to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelVariant {
    /// `eta(x - y) rho(x)`.
    Direct,
    /// `eta(x~ - y) rho(x~)` with the reflected point `x~`, zero outside the collar.
    Reflected,
    /// Sum of both.
    Pair,
}

/// Truncated kernels centred at `y` with terminal time `s` on a grid.
#[derive(Clone, Debug)]
pub struct KernelPair<'a> {
    pub kernel: HeatKernel,
    pub cutoff: Cutoff,
    grid: &'a Grid,
}

impl<'a> KernelPair<'a> {
    pub fn new(grid: &'a Grid, center: Point, terminal: f64) -> Self {
        Self {
            kernel: HeatKernel::new(center, terminal, grid.dim()),
            cutoff: Cutoff::new(grid.kappa()),
            grid,
        }
    }

    /// Value, gradient and Hessian of `eta(x - y) rho(x, t)`.
    pub fn direct_jet(&self, x: &Point, t: f64) -> Result<(f64, Point, Matrix2<f64>)> {
        let (e, eg, eh) = self.cutoff.jet(&(x - self.kernel.center));
        if e == 0.0 {
            return Ok((0.0, Point::zeros(), Matrix2::zeros()));
        }
        let j = self.kernel.jet(x, t)?;
        Ok((
            e * j.value,
            j.gradient * e + eg * j.value,
            j.hessian * e + eg * j.gradient.transpose() + j.gradient * eg.transpose() + eh * j.value,
        ))
    }

    fn reflection_jacobian(&self, x: &Point) -> Matrix2<f64> {
        match *self.grid.spec() {
            DomainSpec::Interval { .. } => Matrix2::new(-1.0, 0.0, 0.0, 0.0),
            DomainSpec::Channel { .. } => Matrix2::new(1.0, 0.0, 0.0, -1.0),
            DomainSpec::Disk { radius, .. } => {
                let r = x.norm();
                let n = x / r;
                Matrix2::identity() * (2.0 * radius / r - 1.0) - n * n.transpose() * (2.0 * radius / r)
            }
        }
    }

    /// Value and gradient of the reflected kernel.
    pub fn reflected_jet(&self, x: &Point, t: f64) -> Result<(f64, Point)> {
        let d = self.grid.signed_distance(x)?;
        if d >= self.grid.kappa() {
            return Ok((0.0, Point::zeros()));
        }
        let xr = self.grid.reflect(x)?;
        let (v, g, _) = self.direct_jet(&xr, t)?;
        Ok((v, self.reflection_jacobian(x).transpose() * g))
    }

    pub fn value(&self, variant: KernelVariant, x: &Point, t: f64) -> Result<f64> {
        Ok(match variant {
            KernelVariant::Direct => self.direct_jet(x, t)?.0,
            KernelVariant::Reflected => self.reflected_jet(x, t)?.0,
            KernelVariant::Pair => self.direct_jet(x, t)?.0 + self.reflected_jet(x, t)?.0,
        })
    }
}

/// `(rho_1(x, t), rho_2(x, t))` for the kernel centred at `y` with terminal time `s`.
pub fn truncated_kernels(grid: &Grid, y: &Point, s: f64, x: &Point, t: f64) -> Result<(f64, f64)> {
    let pair = KernelPair::new(grid, *y, s);
    Ok((pair.value(KernelVariant::Direct, x, t)?, pair.value(KernelVariant::Reflected, x, t)?))
}
