//! Direct solver for `(V + dt K) u = r`, with `K` the finite-volume Laplacian.
//!
//! The channel and the disk are diagonalised by a DFT along the periodic
//! direction, leaving one tridiagonal system per Fourier mode.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Pre-factored tridiagonal matrix (Thomas algorithm).
#[derive(Clone, Debug)]
struct Tridiag {
    lower: Vec<f64>,
    cprime: Vec<f64>,
    inv: Vec<f64>,
}

impl Tridiag {
    fn new(lower: Vec<f64>, diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut cprime = vec![0.0; n];
        let mut inv = vec![0.0; n];
        for j in 0..n {
            let denom = if j == 0 { diag[0] } else { diag[j] - lower[j] * cprime[j - 1] };
            if !(denom.is_finite() && denom > 0.0) {
                return Err(Error::LinearSolve(format!("non-positive pivot {denom} in row {j}")));
            }
            inv[j] = 1.0 / denom;
            cprime[j] = upper[j] * inv[j];
        }
        Ok(Self { lower, cprime, inv })
    }

    fn solve_real(&self, x: &mut [f64]) {
        let n = self.inv.len();
        x[0] *= self.inv[0];
        for j in 1..n {
            x[j] = (x[j] - self.lower[j] * x[j - 1]) * self.inv[j];
        }
        for j in (0..n - 1).rev() {
            x[j] -= self.cprime[j] * x[j + 1];
        }
    }

    fn solve_strided(&self, x: &mut [Complex64], offset: usize, stride: usize) {
        let n = self.inv.len();
        let at = |j: usize| offset + j * stride;
        x[at(0)] *= self.inv[0];
        for j in 1..n {
            x[at(j)] = (x[at(j)] - x[at(j - 1)] * self.lower[j]) * self.inv[j];
        }
        for j in (0..n - 1).rev() {
            x[at(j)] = x[at(j)] - x[at(j + 1)] * self.cprime[j];
        }
    }
}

/// Factored implicit operator for one grid and one time step.
pub(crate) struct ImplicitSolver {
    inner: Inner,
}

enum Inner {
    Line(Tridiag),
    Spectral {
        fft: Arc<dyn Fft<f64>>,
        ifft: Arc<dyn Fft<f64>>,
        /// Number of cells along the periodic direction.
        period: usize,
        /// One tridiagonal system per Fourier mode, along the other direction.
        modes: Vec<Tridiag>,
    },
}

fn eigen(k: usize, n: usize) -> f64 {
    let s = (PI * k as f64 / n as f64).sin();
    4.0 * s * s
}

impl ImplicitSolver {
    pub(crate) fn new(spec: &DomainSpec, dt: f64) -> Result<Self> {
        let inner = match *spec {
            DomainSpec::Interval { a, b, n } => {
                let h = (b - a) / n as f64;
                let t = dt / h;
                let diag: Vec<f64> = (0..n)
                    .map(|i| h + t * if i == 0 || i == n - 1 { 1.0 } else { 2.0 })
                    .collect();
                let mut lower = vec![-t; n];
                lower[0] = 0.0;
                let mut upper = vec![-t; n];
                upper[n - 1] = 0.0;
                Inner::Line(Tridiag::new(lower, &diag, &upper)?)
            }
            DomainSpec::Channel { lx, ly, nx, ny } => {
                let (hx, hy) = (lx / nx as f64, ly / ny as f64);
                let (tx, ty) = (dt * hy / hx, dt * hx / hy);
                let mut modes = Vec::with_capacity(nx);
                for k in 0..nx {
                    let lam = eigen(k, nx);
                    let diag: Vec<f64> = (0..ny)
                        .map(|j| {
                            let nb = if j == 0 || j == ny - 1 { 1.0 } else { 2.0 };
                            hx * hy + tx * lam + ty * nb
                        })
                        .collect();
                    let mut lower = vec![-ty; ny];
                    lower[0] = 0.0;
                    let mut upper = vec![-ty; ny];
                    upper[ny - 1] = 0.0;
                    modes.push(Tridiag::new(lower, &diag, &upper)?);
                }
                Self::spectral(nx, modes)
            }
            DomainSpec::Disk { radius, nr, ntheta } => {
                let dr = radius / nr as f64;
                let dth = 2.0 * PI / ntheta as f64;
                let vol = |i: usize| (i as f64 + 0.5) * dr * dr * dth;
                let radial = |i: usize| (i + 1) as f64 * dth;
                let angular = |i: usize| 1.0 / ((i as f64 + 0.5) * dth);
                let mut modes = Vec::with_capacity(ntheta);
                for k in 0..ntheta {
                    let lam = eigen(k, ntheta);
                    let mut diag = vec![0.0; nr];
                    let mut lower = vec![0.0; nr];
                    let mut upper = vec![0.0; nr];
                    for i in 0..nr {
                        let inner = if i > 0 { radial(i - 1) } else { 0.0 };
                        let outer = if i + 1 < nr { radial(i) } else { 0.0 };
                        diag[i] = vol(i) + dt * (angular(i) * lam + inner + outer);
                        lower[i] = -dt * inner;
                        upper[i] = -dt * outer;
                    }
                    modes.push(Tridiag::new(lower, &diag, &upper)?);
                }
                Self::spectral(ntheta, modes)
            }
        };
        Ok(Self { inner })
    }

    fn spectral(period: usize, modes: Vec<Tridiag>) -> Inner {
        let mut planner = FftPlanner::new();
        Inner::Spectral {
            fft: planner.plan_fft_forward(period),
            ifft: planner.plan_fft_inverse(period),
            period,
            modes,
        }
    }

    /// Overwrites `rhs` with the solution.
    pub(crate) fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        match &self.inner {
            Inner::Line(t) => t.solve_real(rhs),
            Inner::Spectral { fft, ifft, period, modes } => {
                let n = *period;
                let mut buf: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft.process(&mut buf);
                for (k, mode) in modes.iter().enumerate() {
                    mode.solve_strided(&mut buf, k, n);
                }
                ifft.process(&mut buf);
                let scale = 1.0 / n as f64;
                for (r, c) in rhs.iter_mut().zip(&buf) {
                    *r = c.re * scale;
                }
            }
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("non-finite solution".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    fn apply(grid: &Grid, dt: f64, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = u.iter().zip(&grid.volumes).map(|(a, v)| a * v).collect();
        for f in &grid.faces {
            let flux = dt * f.trans * (u[f.a] - u[f.b]);
            out[f.a] += flux;
            out[f.b] -= flux;
        }
        out
    }

    #[test]
    fn solves_against_face_operator() {
        let specs = [
            DomainSpec::Interval { a: 0.0, b: 1.0, n: 37 },
            DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 24, ny: 11 },
            DomainSpec::Disk { radius: 1.0, nr: 9, ntheta: 20 },
        ];
        for spec in specs {
            let grid = Grid::new(&spec).unwrap();
            let dt = 3e-3;
            let u: Vec<f64> = (0..grid.len()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
            let mut r = apply(&grid, dt, &u);
            ImplicitSolver::new(&spec, dt).unwrap().solve(&mut r).unwrap();
            let err = r.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-11, "{spec:?}: {err}");
        }
    }
}
