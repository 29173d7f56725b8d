//! Test functions and test vector fields with analytic derivatives.

use nalgebra::Matrix2;
use std::f64::consts::PI;

use crate::error::{param, Result};
use crate::geometry::{DomainSpec, Grid, NormalExtension, Point};

/// Tolerance on `|g . nu|` at boundary nodes for fields declared tangential.
pub const TANGENCY_TOL: f64 = 1e-12;

/// A scalar test function with value, gradient and Hessian.
pub trait TestFunction: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    fn hessian(&self, x: &Point) -> Matrix2<f64>;
    /// Certified bound on `sup|phi| + sup|grad phi| + sup|hess phi|`.
    fn c2_norm(&self) -> f64;
}

/// A vector field `g` with Jacobian `J[i][j] = d g_i / d x_j`.
pub trait VectorField: Send + Sync {
    fn name(&self) -> String;
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>);
    /// Bound on `sup |g|`.
    fn sup_norm(&self) -> f64;
    /// Whether the field claims `g . nu = 0` on the boundary.
    fn tangential(&self) -> bool {
        false
    }
}

/// `phi = c`.
pub struct ConstantFunction(pub f64);

impl TestFunction for ConstantFunction {
    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
    fn value(&self, _: &Point) -> f64 {
        self.0
    }
    fn gradient(&self, _: &Point) -> Point {
        Point::zeros()
    }
    fn hessian(&self, _: &Point) -> Matrix2<f64> {
        Matrix2::zeros()
    }
    fn c2_norm(&self) -> f64 {
        self.0.abs()
    }
}

/// `phi = amplitude * exp(-|x - center|^2 / (2 width^2))`.
pub struct GaussianBump {
    pub center: Point,
    pub width: f64,
    pub amplitude: f64,
}

impl TestFunction for GaussianBump {
    fn name(&self) -> String {
        format!("gaussian({}, {}; w={})", self.center.x, self.center.y, self.width)
    }
    fn value(&self, x: &Point) -> f64 {
        let d = x - self.center;
        self.amplitude * (-d.norm_squared() / (2.0 * self.width * self.width)).exp()
    }
    fn gradient(&self, x: &Point) -> Point {
        -(x - self.center) * (self.value(x) / (self.width * self.width))
    }
    fn hessian(&self, x: &Point) -> Matrix2<f64> {
        let w2 = self.width * self.width;
        let d = x - self.center;
        (d * d.transpose() / w2 - Matrix2::identity()) * (self.value(x) / w2)
    }
    fn c2_norm(&self) -> f64 {
        let a = self.amplitude.abs();
        let w = self.width;
        a + a / (w * std::f64::consts::E.sqrt()) + a / (w * w)
    }
}

/// `phi = 1 + amplitude * cos(k . x + phase)`, non-negative for `|amplitude| <= 1`.
pub struct CosineMode {
    pub wavevector: Point,
    pub phase: f64,
    pub amplitude: f64,
}

impl TestFunction for CosineMode {
    fn name(&self) -> String {
        format!("cosine(k=({}, {}))", self.wavevector.x, self.wavevector.y)
    }
    fn value(&self, x: &Point) -> f64 {
        1.0 + self.amplitude * (self.wavevector.dot(x) + self.phase).cos()
    }
    fn gradient(&self, x: &Point) -> Point {
        -self.wavevector * (self.amplitude * (self.wavevector.dot(x) + self.phase).sin())
    }
    fn hessian(&self, x: &Point) -> Matrix2<f64> {
        -self.wavevector * self.wavevector.transpose()
            * (self.amplitude * (self.wavevector.dot(x) + self.phase).cos())
    }
    fn c2_norm(&self) -> f64 {
        let a = self.amplitude.abs();
        let k = self.wavevector.norm();
        1.0 + a + a * k + a * k * k
    }
}

/// `g = v`.
pub struct ConstantField {
    pub v: Point,
    pub tangential: bool,
}

impl VectorField for ConstantField {
    fn name(&self) -> String {
        format!("constant({}, {})", self.v.x, self.v.y)
    }
    fn eval(&self, _: &Point) -> (Point, Matrix2<f64>) {
        (self.v, Matrix2::zeros())
    }
    fn sup_norm(&self) -> f64 {
        self.v.norm()
    }
    fn tangential(&self) -> bool {
        self.tangential
    }
}

/// `g = A x + b`; `bound` is `sup |g|` over the domain.
pub struct AffineField {
    pub a: Matrix2<f64>,
    pub b: Point,
    pub bound: f64,
    pub label: &'static str,
}

impl VectorField for AffineField {
    fn name(&self) -> String {
        self.label.to_string()
    }
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        (self.a * x + self.b, self.a)
    }
    fn sup_norm(&self) -> f64 {
        self.bound
    }
}

/// `g = direction * exp(-|x - center|^2 / (2 width^2))`.
pub struct GaussianField {
    pub center: Point,
    pub width: f64,
    pub direction: Point,
}

impl VectorField for GaussianField {
    fn name(&self) -> String {
        format!(
            "gaussian({}, {}; dir=({}, {}))",
            self.center.x, self.center.y, self.direction.x, self.direction.y
        )
    }
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        let d = x - self.center;
        let w2 = self.width * self.width;
        let p = (-d.norm_squared() / (2.0 * w2)).exp();
        let grad = -d * (p / w2);
        (self.direction * p, self.direction * grad.transpose())
    }
    fn sup_norm(&self) -> f64 {
        self.direction.norm()
    }
}

/// `g = (sin(2 pi k x / lx + phase) * (1 + cos(pi m y / ly)) / 2, 0)`, tangent to channel walls.
pub struct WallShear {
    pub k: f64,
    pub m: f64,
    pub phase: f64,
    pub lx: f64,
    pub ly: f64,
}

impl VectorField for WallShear {
    fn name(&self) -> String {
        format!("wall_shear(k={}, m={})", self.k, self.m)
    }
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        let ax = 2.0 * PI * self.k / self.lx;
        let ay = PI * self.m / self.ly;
        let (sx, cx) = (ax * x.x + self.phase).sin_cos();
        let (sy, cy) = (ay * x.y).sin_cos();
        let f = 0.5 * (1.0 + cy);
        (Point::new(sx * f, 0.0), Matrix2::new(ax * cx * f, -0.5 * ay * sx * sy, 0.0, 0.0))
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
    fn tangential(&self) -> bool {
        true
    }
}

/// `g = profile(|x|) * (-y, x)` with `profile = exp(-|x|^2 / (2 width^2))`, tangent to centred circles.
pub struct Swirl {
    pub width: f64,
}

impl VectorField for Swirl {
    fn name(&self) -> String {
        format!("swirl(w={})", self.width)
    }
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        let w2 = self.width * self.width;
        let p = (-x.norm_squared() / (2.0 * w2)).exp();
        let grad = -x * (p / w2);
        let rot = Point::new(-x.y, x.x);
        (rot * p, Matrix2::new(0.0, -1.0, 1.0, 0.0) * p + rot * grad.transpose())
    }
    fn sup_norm(&self) -> f64 {
        self.width * (-0.5f64).exp()
    }
    fn tangential(&self) -> bool {
        true
    }
}

impl VectorField for NormalExtension {
    fn name(&self) -> String {
        format!("normal_extension(delta={})", self.delta())
    }
    fn eval(&self, x: &Point) -> (Point, Matrix2<f64>) {
        NormalExtension::eval(self, x)
    }
    fn sup_norm(&self) -> f64 {
        1.0
    }
}

/// A list of vector fields checked against one grid.
pub struct FieldDictionary {
    pub fields: Vec<Box<dyn VectorField>>,
}

impl FieldDictionary {
    /// Verifies that every field declared tangential satisfies `|g . nu| <= 1e-12` on the grid.
    pub fn new(grid: &Grid, fields: Vec<Box<dyn VectorField>>) -> Result<Self> {
        for f in &fields {
            if f.tangential() {
                for b in &grid.boundary {
                    let gn = f.eval(&b.point).0.dot(&b.normal);
                    if gn.abs() > TANGENCY_TOL {
                        return Err(param(format!(
                            "field {} is declared tangential but g.nu = {gn:e} at ({}, {})",
                            f.name(),
                            b.point.x,
                            b.point.y
                        )));
                    }
                }
            }
        }
        Ok(Self { fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Ten or more fields adapted to the domain, mixing tangential and transversal ones.
    pub fn standard(grid: &Grid) -> Result<Self> {
        let mut f: Vec<Box<dyn VectorField>> = Vec::new();
        match *grid.spec() {
            DomainSpec::Interval { a, b, .. } => {
                let (c, l) = (0.5 * (a + b), b - a);
                for (k, w) in [(0.3, 0.1), (0.5, 0.15), (0.7, 0.1), (0.45, 0.3), (0.6, 0.05)] {
                    f.push(Box::new(GaussianField {
                        center: Point::new(a + k * l, 0.0),
                        width: w * l,
                        direction: Point::new(1.0, 0.0),
                    }));
                }
                f.push(Box::new(ConstantField { v: Point::new(1.0, 0.0), tangential: false }));
                f.push(Box::new(AffineField {
                    a: Matrix2::new(1.0, 0.0, 0.0, 0.0),
                    b: Point::new(-c, 0.0),
                    bound: 0.5 * l,
                    label: "dilation",
                }));
                f.push(Box::new(grid.normal_extension_field(0.25 * l)?));
                f.push(Box::new(grid.normal_extension_field(0.5 * l)?));
                f.push(Box::new(GaussianField {
                    center: Point::new(a, 0.0),
                    width: 0.2 * l,
                    direction: Point::new(-1.0, 0.0),
                }));
            }
            DomainSpec::Channel { lx, ly, .. } => {
                for (k, m, ph) in [(1.0, 0.0, 0.0), (1.0, 1.0, 0.3), (2.0, 2.0, 1.1), (3.0, 1.0, 0.7)] {
                    f.push(Box::new(WallShear { k, m, phase: ph, lx, ly }));
                }
                f.push(Box::new(ConstantField { v: Point::new(1.0, 0.0), tangential: true }));
                for (cx, cy, dx, dy) in [(0.5, 0.5, 0.0, 1.0), (0.3, 0.2, 1.0, 1.0), (0.7, 0.1, -0.6, 0.8)] {
                    f.push(Box::new(GaussianField {
                        center: Point::new(cx * lx, cy * ly),
                        width: 0.2 * ly,
                        direction: Point::new(dx, dy).normalize(),
                    }));
                }
                f.push(Box::new(grid.normal_extension_field(0.5 * ly)?));
                f.push(Box::new(grid.normal_extension_field(0.25 * ly)?));
                f.push(Box::new(AffineField {
                    a: Matrix2::new(0.0, 0.0, 0.0, 1.0),
                    b: Point::new(0.0, -0.5 * ly),
                    bound: 0.5 * ly,
                    label: "vertical_dilation",
                }));
            }
            DomainSpec::Disk { radius, .. } => {
                f.push(Box::new(Swirl { width: 0.5 * radius }));
                f.push(Box::new(Swirl { width: 2.0 * radius }));
                f.push(Box::new(AffineField {
                    a: Matrix2::new(0.0, -1.0, 1.0, 0.0),
                    b: Point::zeros(),
                    bound: radius,
                    label: "rotation",
                }));
                f.push(Box::new(AffineField {
                    a: Matrix2::identity(),
                    b: Point::zeros(),
                    bound: radius,
                    label: "dilation",
                }));
                f.push(Box::new(AffineField {
                    a: Matrix2::new(1.0, 0.0, 0.0, -1.0),
                    b: Point::zeros(),
                    bound: radius,
                    label: "strain",
                }));
                f.push(Box::new(ConstantField { v: Point::new(1.0, 0.0), tangential: false }));
                f.push(Box::new(ConstantField { v: Point::new(0.0, 1.0), tangential: false }));
                for (cx, cy, dx, dy) in [(0.3, 0.2, 1.0, 0.0), (-0.5, 0.4, 0.6, -0.8), (0.0, -0.7, 0.0, 1.0)] {
                    f.push(Box::new(GaussianField {
                        center: Point::new(cx, cy) * radius,
                        width: 0.3 * radius,
                        direction: Point::new(dx, dy),
                    }));
                }
                f.push(Box::new(grid.normal_extension_field(0.3 * radius)?));
            }
        }
        Self::new(grid, f)
    }
}

/// Five non-negative test functions adapted to the domain.
pub fn standard_test_functions(grid: &Grid) -> Vec<Box<dyn TestFunction>> {
    let mut out: Vec<Box<dyn TestFunction>> = vec![Box::new(ConstantFunction(1.0))];
    match *grid.spec() {
        DomainSpec::Interval { a, b, .. } => {
            let l = b - a;
            for (k, w) in [(0.5, 0.1), (0.0, 0.2), (0.8, 0.15)] {
                out.push(Box::new(GaussianBump { center: Point::new(a + k * l, 0.0), width: w * l, amplitude: 1.0 }));
            }
            out.push(Box::new(CosineMode { wavevector: Point::new(2.0 * PI / l, 0.0), phase: 0.0, amplitude: 0.5 }));
        }
        DomainSpec::Channel { lx, ly, .. } => {
            out.push(Box::new(GaussianBump {
                center: Point::new(0.5 * lx, 0.5 * ly),
                width: 0.2 * ly,
                amplitude: 1.0,
            }));
            out.push(Box::new(GaussianBump { center: Point::new(0.3 * lx, 0.0), width: 0.2 * ly, amplitude: 1.0 }));
            out.push(Box::new(CosineMode { wavevector: Point::new(2.0 * PI / lx, 0.0), phase: 0.0, amplitude: 0.5 }));
            out.push(Box::new(CosineMode {
                wavevector: Point::new(2.0 * PI / lx, PI / ly),
                phase: 0.4,
                amplitude: 0.8,
            }));
        }
        DomainSpec::Disk { radius, .. } => {
            out.push(Box::new(GaussianBump { center: Point::zeros(), width: 0.3 * radius, amplitude: 1.0 }));
            out.push(Box::new(GaussianBump { center: Point::new(radius, 0.0), width: 0.3 * radius, amplitude: 1.0 }));
            out.push(Box::new(CosineMode { wavevector: Point::new(PI / radius, 0.0), phase: 0.0, amplitude: 0.5 }));
            out.push(Box::new(CosineMode {
                wavevector: Point::new(0.0, 2.0 * PI / radius),
                phase: 0.2,
                amplitude: 0.7,
            }));
        }
    }
    out
}
