//! Domains, cell-centred finite-volume grids and boundary geometry.
//!
//! Three domain kinds are supported: an interval, a channel that is periodic
//! in `x` with solid walls at `y = 0` and `y = ly`, and a disk discretised on
//! a polar grid. Every grid exposes the same flat description (cell centres,
//! volumes, interior faces and boundary nodes) so that energies and measures
//! are written once; the implicit solver uses the tensor structure directly.

mod extension;

pub use extension::NormalExtension;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{param, Error, Result};

/// A point or vector in the plane. One-dimensional domains use the `x` slot.
pub type Point = Vector2<f64>;

/// Relative slack used when deciding whether a point lies in the closed domain.
const CLOSURE_SLACK: f64 = 1e-12;

/// Domain and resolution, as written in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `[a, b]` split into `n` equal cells.
    Interval { a: f64, b: f64, n: usize },
    /// `[0, lx) x [0, ly]`, periodic in `x`, walls at `y = 0` and `y = ly`.
    Channel { lx: f64, ly: f64, nx: usize, ny: usize },
    /// Disk of the given radius centred at the origin, `nr` rings of `ntheta` cells.
    Disk { radius: f64, nr: usize, ntheta: usize },
}

impl DomainSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DomainSpec::Interval { .. } => "interval",
            DomainSpec::Channel { .. } => "channel",
            DomainSpec::Disk { .. } => "disk",
        }
    }

    /// Spatial dimension of the domain.
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Row-major array shape of a field on this grid.
    pub fn shape(&self) -> [usize; 2] {
        match *self {
            DomainSpec::Interval { n, .. } => [n, 1],
            DomainSpec::Channel { nx, ny, .. } => [ny, nx],
            DomainSpec::Disk { nr, ntheta, .. } => [nr, ntheta],
        }
    }

    /// Same domain with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> DomainSpec {
        match *self {
            DomainSpec::Interval { a, b, n } => DomainSpec::Interval { a, b, n: n * factor },
            DomainSpec::Channel { lx, ly, nx, ny } => DomainSpec::Channel {
                lx,
                ly,
                nx: nx * factor,
                ny: ny * factor,
            },
            DomainSpec::Disk { radius, nr, ntheta } => DomainSpec::Disk {
                radius,
                nr: nr * factor,
                ntheta: ntheta * factor,
            },
        }
    }
}

/// Interior face between two cells.
#[derive(Clone, Copy, Debug)]
pub struct Face {
    pub a: usize,
    pub b: usize,
    /// Face area divided by the centre-to-centre distance.
    pub trans: f64,
    /// `x_b - x_a`, unwrapped across periodic seams.
    pub offset: Point,
}

/// A boundary quadrature node attached to the outer face of one cell.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryNode {
    pub point: Point,
    /// Outward unit normal.
    pub normal: Point,
    /// Unit tangent (zero in one dimension).
    pub tangent: Point,
    /// Mean curvature vector; `-normal / R` on a circle of radius `R`.
    pub curvature: Point,
    /// Quadrature weight (face length, or 1 for interval end points).
    pub weight: f64,
    /// Adjacent cell.
    pub cell: usize,
    /// Distance from the adjacent cell centre to the boundary.
    pub depth: f64,
    /// Connected boundary component.
    pub component: usize,
    /// Neighbouring nodes along the boundary, if any.
    pub prev: Option<usize>,
    pub next: Option<usize>,
    /// Arc length between this node and its neighbours.
    pub spacing: f64,
}

/// A discretised domain.
#[derive(Clone, Debug)]
pub struct Grid {
    spec: DomainSpec,
    pub centers: Vec<Point>,
    pub volumes: Vec<f64>,
    pub faces: Vec<Face>,
    pub boundary: Vec<BoundaryNode>,
    kappa: f64,
    spacing: f64,
}

impl Grid {
    pub fn new(spec: &DomainSpec) -> Result<Grid> {
        match *spec {
            DomainSpec::Interval { a, b, n } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(param(format!("interval needs a < b, got [{a}, {b}]")));
                }
                if n < 3 {
                    return Err(param("interval needs at least 3 cells"));
                }
                Ok(Self::interval(spec.clone(), a, b, n))
            }
            DomainSpec::Channel { lx, ly, nx, ny } => {
                if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                    return Err(param("channel lengths must be positive"));
                }
                if nx < 3 || ny < 3 {
                    return Err(param("channel needs at least 3 cells per direction"));
                }
                Ok(Self::channel(spec.clone(), lx, ly, nx, ny))
            }
            DomainSpec::Disk { radius, nr, ntheta } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(param("disk radius must be positive"));
                }
                if nr < 3 || ntheta < 8 || ntheta % 2 != 0 {
                    return Err(param("disk needs nr >= 3 and an even ntheta >= 8"));
                }
                Ok(Self::disk(spec.clone(), radius, nr, ntheta))
            }
        }
    }

    fn interval(spec: DomainSpec, a: f64, b: f64, n: usize) -> Grid {
        let h = (b - a) / n as f64;
        let centers = (0..n).map(|i| Point::new(a + (i as f64 + 0.5) * h, 0.0)).collect();
        let faces = (0..n - 1)
            .map(|i| Face { a: i, b: i + 1, trans: 1.0 / h, offset: Point::new(h, 0.0) })
            .collect();
        let end = |point: f64, normal: f64, cell: usize, component: usize| BoundaryNode {
            point: Point::new(point, 0.0),
            normal: Point::new(normal, 0.0),
            tangent: Point::zeros(),
            curvature: Point::zeros(),
            weight: 1.0,
            cell,
            depth: 0.5 * h,
            component,
            prev: None,
            next: None,
            spacing: 0.0,
        };
        Grid {
            spec,
            centers,
            volumes: vec![h; n],
            faces,
            boundary: vec![end(a, -1.0, 0, 0), end(b, 1.0, n - 1, 1)],
            kappa: 0.5 * (b - a),
            spacing: h,
        }
    }

    fn channel(spec: DomainSpec, lx: f64, ly: f64, nx: usize, ny: usize) -> Grid {
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        let idx = |i: usize, j: usize| j * nx + i;
        let mut centers = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                centers.push(Point::new((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy));
            }
        }
        let mut faces = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                faces.push(Face {
                    a: idx(i, j),
                    b: idx((i + 1) % nx, j),
                    trans: hy / hx,
                    offset: Point::new(hx, 0.0),
                });
                if j + 1 < ny {
                    faces.push(Face {
                        a: idx(i, j),
                        b: idx(i, j + 1),
                        trans: hx / hy,
                        offset: Point::new(0.0, hy),
                    });
                }
            }
        }
        let mut boundary = Vec::with_capacity(2 * nx);
        for (component, (y, ny_sign, row)) in [(0.0, -1.0, 0), (ly, 1.0, ny - 1)].into_iter().enumerate() {
            let base = component * nx;
            for i in 0..nx {
                boundary.push(BoundaryNode {
                    point: Point::new((i as f64 + 0.5) * hx, y),
                    normal: Point::new(0.0, ny_sign),
                    tangent: Point::new(1.0, 0.0),
                    curvature: Point::zeros(),
                    weight: hx,
                    cell: idx(i, row),
                    depth: 0.5 * hy,
                    component,
                    prev: Some(base + (i + nx - 1) % nx),
                    next: Some(base + (i + 1) % nx),
                    spacing: hx,
                });
            }
        }
        Grid {
            spec,
            centers,
            volumes: vec![hx * hy; nx * ny],
            faces,
            boundary,
            kappa: 0.5 * ly,
            spacing: hx.max(hy),
        }
    }

    fn disk(spec: DomainSpec, radius: f64, nr: usize, nt: usize) -> Grid {
        let dr = radius / nr as f64;
        let dth = 2.0 * PI / nt as f64;
        let idx = |i: usize, j: usize| i * nt + j;
        let mut centers = Vec::with_capacity(nr * nt);
        let mut volumes = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            let (r_in, r_out) = (i as f64 * dr, (i + 1) as f64 * dr);
            for j in 0..nt {
                let th = (j as f64 + 0.5) * dth;
                centers.push(Point::new(r * th.cos(), r * th.sin()));
                volumes.push(0.5 * (r_out * r_out - r_in * r_in) * dth);
            }
        }
        let mut faces = Vec::with_capacity(2 * nr * nt);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..nt {
                let (a, b) = (idx(i, j), idx(i, (j + 1) % nt));
                faces.push(Face { a, b, trans: dr / (r * dth), offset: centers[b] - centers[a] });
                if i + 1 < nr {
                    let b = idx(i + 1, j);
                    faces.push(Face {
                        a,
                        b,
                        trans: (i + 1) as f64 * dr * dth / dr,
                        offset: centers[b] - centers[a],
                    });
                }
            }
        }
        let boundary = (0..nt)
            .map(|j| {
                let th = (j as f64 + 0.5) * dth;
                let normal = Point::new(th.cos(), th.sin());
                BoundaryNode {
                    point: normal * radius,
                    normal,
                    tangent: Point::new(-th.sin(), th.cos()),
                    curvature: -normal / radius,
                    weight: radius * dth,
                    cell: idx(nr - 1, j),
                    depth: 0.5 * dr,
                    component: 0,
                    prev: Some((j + nt - 1) % nt),
                    next: Some((j + 1) % nt),
                    spacing: radius * dth,
                }
            })
            .collect();
        Grid {
            spec,
            centers,
            volumes,
            faces,
            boundary,
            kappa: radius,
            spacing: dr.max(radius * dth),
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn shape(&self) -> [usize; 2] {
        self.spec.shape()
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// Width of the collar in which the nearest boundary point is unique.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest grid spacing.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Identity on the tangent space of the domain (`diag(1, 0)` in 1D).
    pub fn identity(&self) -> Matrix2<f64> {
        if self.dim() == 1 {
            Matrix2::new(1.0, 0.0, 0.0, 0.0)
        } else {
            Matrix2::identity()
        }
    }

    /// Exact area (or length) of the domain.
    pub fn total_volume(&self) -> f64 {
        match self.spec {
            DomainSpec::Interval { a, b, .. } => b - a,
            DomainSpec::Channel { lx, ly, .. } => lx * ly,
            DomainSpec::Disk { radius, .. } => PI * radius * radius,
        }
    }

    /// Exact measure of the boundary (number of end points in 1D).
    pub fn boundary_measure(&self) -> f64 {
        match self.spec {
            DomainSpec::Interval { .. } => 2.0,
            DomainSpec::Channel { lx, .. } => 2.0 * lx,
            DomainSpec::Disk { radius, .. } => 2.0 * PI * radius,
        }
    }

    /// Smallest ratio of boundary-cell volume to boundary-face weight.
    pub fn boundary_cell_depth(&self) -> f64 {
        self.boundary
            .iter()
            .map(|b| self.volumes[b.cell] / b.weight)
            .fold(f64::INFINITY, f64::min)
    }

    fn slack(&self) -> f64 {
        CLOSURE_SLACK * self.kappa.max(1.0)
    }

    /// Distance to the boundary, or an error for points outside the closed domain.
    pub fn signed_distance(&self, x: &Point) -> Result<f64> {
        let d = self.signed_distance_ext(x);
        if d < -self.slack() || !d.is_finite() {
            return Err(Error::OutsideDomain { x: x.x, y: x.y });
        }
        Ok(d.max(0.0))
    }

    /// Signed distance extended outside the domain (negative there).
    pub fn signed_distance_ext(&self, x: &Point) -> f64 {
        match self.spec {
            DomainSpec::Interval { a, b, .. } => (x.x - a).min(b - x.x),
            DomainSpec::Channel { ly, .. } => x.y.min(ly - x.y),
            DomainSpec::Disk { radius, .. } => radius - x.norm(),
        }
    }

    /// Nearest boundary point, defined inside the collar of width `kappa`.
    pub fn nearest_boundary_point(&self, x: &Point) -> Result<Point> {
        let d = self.signed_distance(x)?;
        if d >= self.kappa {
            return Err(Error::OutsideCollar { distance: d, kappa: self.kappa });
        }
        Ok(self.project_unchecked(x))
    }

    /// Projection onto the boundary without the collar check. At the
    /// equidistant set an arbitrary but fixed choice is made.
    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        match self.spec {
            DomainSpec::Interval { a, b, .. } => {
                Point::new(if x.x - a <= b - x.x { a } else { b }, 0.0)
            }
            DomainSpec::Channel { ly, .. } => {
                Point::new(x.x, if x.y <= 0.5 * ly { 0.0 } else { ly })
            }
            DomainSpec::Disk { radius, .. } => {
                let r = x.norm();
                if r == 0.0 {
                    Point::new(radius, 0.0)
                } else {
                    x * (radius / r)
                }
            }
        }
    }

    /// Mirror image `2 xi(x) - x` across the nearest boundary point.
    pub fn reflect(&self, x: &Point) -> Result<Point> {
        let xi = self.nearest_boundary_point(x)?;
        Ok(2.0 * xi - x)
    }

    /// Outward normal, unit tangent and mean curvature vector at a boundary point.
    pub fn boundary_frame(&self, xi: &Point) -> (Point, Point, Point) {
        match self.spec {
            DomainSpec::Interval { a, b, .. } => {
                let n = if (xi.x - a).abs() <= (xi.x - b).abs() { -1.0 } else { 1.0 };
                (Point::new(n, 0.0), Point::zeros(), Point::zeros())
            }
            DomainSpec::Channel { ly, .. } => {
                let n = if xi.y <= 0.5 * ly { -1.0 } else { 1.0 };
                (Point::new(0.0, n), Point::new(1.0, 0.0), Point::zeros())
            }
            DomainSpec::Disk { radius, .. } => {
                let n = xi / xi.norm();
                (n, Point::new(-n.y, n.x), -n / radius)
            }
        }
    }

    /// Fraction of every cell lying within distance `delta` of the boundary.
    pub fn tubular_weights(&self, delta: f64) -> Result<Vec<f64>> {
        if !(delta > 0.0 && delta <= self.kappa) {
            return Err(param(format!(
                "tubular width {delta} must lie in (0, {}]",
                self.kappa
            )));
        }
        let frac = |lo: f64, hi: f64| ((delta - lo) / (hi - lo)).clamp(0.0, 1.0);
        Ok(match self.spec {
            DomainSpec::Interval { a, b, n } => {
                let h = (b - a) / n as f64;
                (0..n)
                    .map(|i| {
                        let lo = a + i as f64 * h;
                        let d_lo = (lo - a).min(b - lo - h);
                        frac(d_lo, d_lo + h)
                    })
                    .collect()
            }
            DomainSpec::Channel { ly, nx, ny, .. } => {
                let hy = ly / ny as f64;
                let mut w = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    let lo = j as f64 * hy;
                    let d_lo = lo.min(ly - lo - hy);
                    w.extend(std::iter::repeat_n(frac(d_lo, d_lo + hy), nx));
                }
                w
            }
            DomainSpec::Disk { radius, nr, ntheta } => {
                let dr = radius / nr as f64;
                let r_cut = radius - delta;
                let mut w = Vec::with_capacity(nr * ntheta);
                for i in 0..nr {
                    let (r0, r1) = (i as f64 * dr, (i + 1) as f64 * dr);
                    let f = if r_cut <= r0 {
                        1.0
                    } else if r_cut >= r1 {
                        0.0
                    } else {
                        (r1 * r1 - r_cut * r_cut) / (r1 * r1 - r0 * r0)
                    };
                    w.extend(std::iter::repeat_n(f, ntheta));
                }
                w
            }
        })
    }

    /// Indices of cells that meet the tubular neighbourhood of width `delta`.
    pub fn tubular_region(&self, delta: f64) -> Result<Vec<usize>> {
        Ok(self
            .tubular_weights(delta)?
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
            .collect())
    }

    /// Smooth vector field equal to the outward normal on the boundary.
    pub fn normal_extension_field(&self, delta: f64) -> Result<NormalExtension> {
        NormalExtension::new(self, delta)
    }

    /// Centred difference gradient at every cell, one-sided second order at walls.
    pub fn cell_gradients(&self, u: &[f64]) -> Vec<Point> {
        let one_sided = |u0: f64, u1: f64, u2: f64, h: f64| (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
        match self.spec {
            DomainSpec::Interval { a, b, n } => {
                let h = (b - a) / n as f64;
                (0..n)
                    .map(|i| {
                        let g = if i == 0 {
                            one_sided(u[0], u[1], u[2], h)
                        } else if i == n - 1 {
                            -one_sided(u[n - 1], u[n - 2], u[n - 3], h)
                        } else {
                            (u[i + 1] - u[i - 1]) / (2.0 * h)
                        };
                        Point::new(g, 0.0)
                    })
                    .collect()
            }
            DomainSpec::Channel { lx, ly, nx, ny } => {
                let (hx, hy) = (lx / nx as f64, ly / ny as f64);
                let at = |i: usize, j: usize| u[j * nx + i];
                let mut g = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let gx = (at((i + 1) % nx, j) - at((i + nx - 1) % nx, j)) / (2.0 * hx);
                        let gy = if j == 0 {
                            one_sided(at(i, 0), at(i, 1), at(i, 2), hy)
                        } else if j == ny - 1 {
                            -one_sided(at(i, ny - 1), at(i, ny - 2), at(i, ny - 3), hy)
                        } else {
                            (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy)
                        };
                        g.push(Point::new(gx, gy));
                    }
                }
                g
            }
            DomainSpec::Disk { radius, nr, ntheta } => {
                let dr = radius / nr as f64;
                let dth = 2.0 * PI / ntheta as f64;
                let at = |i: usize, j: usize| u[i * ntheta + j];
                let mut g = Vec::with_capacity(nr * ntheta);
                for i in 0..nr {
                    let r = (i as f64 + 0.5) * dr;
                    for j in 0..ntheta {
                        let gr = if i == 0 {
                            (at(1, j) - at(0, (j + ntheta / 2) % ntheta)) / (2.0 * dr)
                        } else if i == nr - 1 {
                            -one_sided(at(i, j), at(i - 1, j), at(i - 2, j), dr)
                        } else {
                            (at(i + 1, j) - at(i - 1, j)) / (2.0 * dr)
                        };
                        let gt = (at(i, (j + 1) % ntheta) - at(i, (j + ntheta - 1) % ntheta))
                            / (2.0 * dth * r);
                        let th = (j as f64 + 0.5) * dth;
                        let (s, c) = th.sin_cos();
                        g.push(Point::new(c * gr - s * gt, s * gr + c * gt));
                    }
                }
                g
            }
        }
    }

    /// Squared gradient per cell from averaged face differences.
    ///
    /// `sum_c V_c |grad u|_c^2` equals the face sum `sum_f T_f (u_b - u_a)^2`,
    /// so energies built on it are the exact discrete Dirichlet energy.
    pub fn cell_grad_sq(&self, u: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.len()];
        for f in &self.faces {
            let d = u[f.b] - u[f.a];
            let e = f.trans * d * d;
            acc[f.a] += e;
            acc[f.b] += e;
        }
        for (a, v) in acc.iter_mut().zip(&self.volumes) {
            *a *= 0.5 / v;
        }
        acc
    }

    /// Tangential derivative of boundary data along the boundary nodes.
    pub fn boundary_tangential_derivative(&self, values: &[f64], k: usize) -> f64 {
        let node = &self.boundary[k];
        match (node.prev, node.next) {
            (Some(p), Some(n)) => (values[n] - values[p]) / (2.0 * node.spacing),
            _ => 0.0,
        }
    }

    /// Linear (1D) or bilinear (2D) interpolation of a cell field.
    pub fn interpolate(&self, u: &[f64], x: &Point) -> f64 {
        let locate = |s: f64, n: usize| -> (usize, usize, f64) {
            let s = s.clamp(0.0, (n - 1) as f64);
            let i0 = (s.floor() as usize).min(n - 2);
            (i0, i0 + 1, s - i0 as f64)
        };
        let wrap = |s: f64, n: usize| -> (usize, usize, f64) {
            let s = s.rem_euclid(n as f64);
            let i0 = (s.floor() as usize) % n;
            (i0, (i0 + 1) % n, s - s.floor())
        };
        match self.spec {
            DomainSpec::Interval { a, b, n } => {
                let h = (b - a) / n as f64;
                let (i0, i1, t) = locate((x.x - a) / h - 0.5, n);
                (1.0 - t) * u[i0] + t * u[i1]
            }
            DomainSpec::Channel { lx, ly, nx, ny } => {
                let (i0, i1, tx) = wrap(x.x / (lx / nx as f64) - 0.5, nx);
                let (j0, j1, ty) = locate(x.y / (ly / ny as f64) - 0.5, ny);
                let at = |i: usize, j: usize| u[j * nx + i];
                (1.0 - ty) * ((1.0 - tx) * at(i0, j0) + tx * at(i1, j0))
                    + ty * ((1.0 - tx) * at(i0, j1) + tx * at(i1, j1))
            }
            DomainSpec::Disk { radius, nr, ntheta } => {
                let dr = radius / nr as f64;
                let dth = 2.0 * PI / ntheta as f64;
                let th = x.y.atan2(x.x);
                let (i0, i1, tr) = locate(x.norm() / dr - 0.5, nr);
                let (j0, j1, tt) = wrap(th / dth - 0.5, ntheta);
                let at = |i: usize, j: usize| u[i * ntheta + j];
                (1.0 - tr) * ((1.0 - tt) * at(i0, j0) + tt * at(i0, j1))
                    + tr * ((1.0 - tt) * at(i1, j0) + tt * at(i1, j1))
            }
        }
    }

    /// Bring a point back into the fundamental domain (periodic `x` on the channel).
    pub fn wrap_point(&self, x: &Point) -> Point {
        match self.spec {
            DomainSpec::Channel { lx, .. } => Point::new(x.x.rem_euclid(lx), x.y),
            _ => *x,
        }
    }
}
