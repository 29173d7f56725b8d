//! Contact angle measurement from the zero level set.
//!
//! Contacts are sign changes of the boundary trace between neighbouring
//! boundary nodes. Zero crossings of `u` on grid faces whose distance to the
//! boundary lies in `[2 eps, 10 eps]` are assigned to the nearest contact on
//! the same boundary component, a line is fitted to them by principal
//! components and the angle between that line and the boundary tangent is
//! measured through the `-1` phase.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measures::MeasurePack;

/// Inner edge of the fit window in units of `eps`.
pub const WINDOW_INNER: f64 = 2.0;
/// Outer edge of the fit window in units of `eps`.
pub const WINDOW_OUTER: f64 = 10.0;
/// Minimal number of level-set points per fitted line.
pub const MIN_POINTS: usize = 5;

/// One measured contact.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContactAngle {
    /// Where the fitted line meets the boundary.
    pub point: [f64; 2],
    /// Angle in radians, measured through the `-1` phase.
    pub angle: f64,
    pub points_used: usize,
}

/// Result of an angle extraction.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum AngleExtraction {
    /// The zero level set does not meet the boundary.
    NoContact,
    Contacts { contacts: Vec<ContactAngle> },
}

impl AngleExtraction {
    pub fn contacts(&self) -> &[ContactAngle] {
        match self {
            AngleExtraction::NoContact => &[],
            AngleExtraction::Contacts { contacts } => contacts,
        }
    }
}

/// Zero crossings of the field on interior faces.
pub fn zero_crossings(pack: &MeasurePack) -> Vec<Point> {
    let grid = &pack.problem().grid;
    let u = &pack.values;
    grid.faces
        .iter()
        .filter(|f| (u[f.a] < 0.0) != (u[f.b] < 0.0))
        .map(|f| {
            let lam = u[f.a] / (u[f.a] - u[f.b]);
            grid.wrap_point(&(grid.centers[f.a] + f.offset * lam))
        })
        .collect()
}

struct Contact {
    point: Point,
    component: usize,
    /// Tangent pointing into the `-1` phase.
    minus_tangent: Point,
}

fn periodic_delta(pack: &MeasurePack, a: &Point, b: &Point) -> Point {
    let d = b - a;
    match *pack.problem().grid.spec() {
        crate::geometry::DomainSpec::Channel { lx, .. } => {
            Point::new(d.x - lx * (d.x / lx).round(), d.y)
        }
        _ => d,
    }
}

/// Measures every contact angle of the current state.
pub fn contact_angle_extract(pack: &MeasurePack) -> Result<AngleExtraction> {
    let grid = &pack.problem().grid;
    if grid.dim() == 1 {
        return Ok(AngleExtraction::NoContact);
    }
    let eps = pack.epsilon();
    let trace = &pack.trace;
    let mut contacts = Vec::new();
    for (k, b) in grid.boundary.iter().enumerate() {
        let Some(n) = b.next else { continue };
        let (ta, tb) = (trace[k], trace[n]);
        if (ta < 0.0) == (tb < 0.0) {
            continue;
        }
        let lam = ta / (ta - tb);
        let nb = &grid.boundary[n];
        let step = periodic_delta(pack, &b.point, &nb.point);
        let guess = b.point + step * lam;
        let xi = grid.project_unchecked(&guess);
        let forward = b.tangent;
        let minus_tangent = if tb < 0.0 { forward } else { -forward };
        contacts.push(Contact { point: xi, component: b.component, minus_tangent });
    }
    if contacts.is_empty() {
        return Ok(AngleExtraction::NoContact);
    }
    let (lo, hi) = (WINDOW_INNER * eps, WINDOW_OUTER * eps);
    let mut groups: Vec<Vec<Point>> = vec![Vec::new(); contacts.len()];
    for p in zero_crossings(pack) {
        let d = grid.signed_distance_ext(&p);
        if d < lo || d > hi {
            continue;
        }
        let xi = grid.project_unchecked(&p);
        let component = grid
            .boundary
            .iter()
            .min_by(|a, b| (a.point - xi).norm_squared().total_cmp(&(b.point - xi).norm_squared()))
            .map(|b| b.component)
            .unwrap_or(0);
        let best = contacts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.component == component)
            .min_by(|(_, a), (_, b)| {
                periodic_delta(pack, &a.point, &p)
                    .norm_squared()
                    .total_cmp(&periodic_delta(pack, &b.point, &p).norm_squared())
            })
            .map(|(i, _)| i);
        if let Some(i) = best {
            let q = contacts[i].point + periodic_delta(pack, &contacts[i].point, &p);
            groups[i].push(q);
        }
    }
    let mut out = Vec::with_capacity(contacts.len());
    for (c, pts) in contacts.iter().zip(&groups) {
        if pts.len() < MIN_POINTS {
            return Err(Error::Resolution(format!(
                "{} level-set points in the fit window near ({:.4}, {:.4}), at least {MIN_POINTS} are needed",
                pts.len(),
                c.point.x,
                c.point.y
            )));
        }
        let n = pts.len() as f64;
        let mean = pts.iter().fold(Point::zeros(), |a, p| a + p) / n;
        let mut cov = nalgebra::Matrix2::<f64>::zeros();
        for p in pts {
            let d = p - mean;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
        let mut dir: Point = eig.eigenvectors.column(k).into();
        let (nu, _, _) = grid.boundary_frame(&c.point);
        if dir.dot(&nu) > 0.0 {
            dir = -dir;
        }
        let hit = line_boundary_hit(pack, &mean, &(-dir)).unwrap_or(c.point);
        let (_, tangent, _) = grid.boundary_frame(&hit);
        let minus = if tangent.dot(&c.minus_tangent) >= 0.0 { tangent } else { -tangent };
        let angle = dir.dot(&minus).clamp(-1.0, 1.0).acos();
        out.push(ContactAngle { point: [hit.x, hit.y], angle, points_used: pts.len() });
    }
    Ok(AngleExtraction::Contacts { contacts: out })
}

/// First boundary crossing of the ray `origin + s dir`, `s > 0`.
fn line_boundary_hit(pack: &MeasurePack, origin: &Point, dir: &Point) -> Option<Point> {
    let grid = &pack.problem().grid;
    let f = |s: f64| grid.signed_distance_ext(&(origin + dir * s));
    if f(0.0) <= 0.0 {
        return Some(grid.project_unchecked(origin));
    }
    let mut hi = grid.kappa() * 0.05;
    let mut tries = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(grid.project_unchecked(&(origin + dir * hi)))
}
