use contactflow::energetics::EnergyModel;
use contactflow::geometry::{DomainSpec, Grid, Point};
use contactflow::measures::{
    first_variation_direct, first_variation_formula, first_variation_norm_estimate, measures, spacetime_integral,
    standard_test_functions, AffineField, ConstantField, ConstantFunction, FieldDictionary, GaussianBump, MeasurePack,
    TestFunction, VectorField, WallShear,
};
use contactflow::solver::{initialize, run, BcOrder, InitialSpec, InterfaceSpec, PhaseField, Problem, SnapshotPolicy};
use nalgebra::Matrix2;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, SQRT_2};
use std::sync::Arc;

const C0: f64 = 2.0 * SQRT_2 / 3.0;

fn problem(domain: DomainSpec, theta: f64, eps: f64) -> Arc<Problem> {
    Problem::new(Grid::new(&domain).unwrap(), EnergyModel::quartic(theta).unwrap(), eps, BcOrder::First).unwrap()
}

fn channel(theta: f64, eps: f64) -> Arc<Problem> {
    problem(DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 40, ny: 20 }, theta, eps)
}

fn uniform(p: &Arc<Problem>, value: f64) -> MeasurePack {
    measures(&PhaseField::new(Arc::clone(p), vec![value; p.grid.len()], 0.0).unwrap()).unwrap()
}

fn tanh_line(n: usize, eps: f64) -> MeasurePack {
    let p = problem(DomainSpec::Interval { a: 0.0, b: 1.0, n }, FRAC_PI_2, eps);
    let interface = InterfaceSpec::HalfPlane { point: [0.5, 0.0], normal: [1.0, 0.0] };
    measures(&initialize(&p, &InitialSpec::WellPreparedInterface { interface, invert: false }, 0).unwrap()).unwrap()
}

/// Indicator of the lower wall's neighbourhood; smoothness is irrelevant on constant states.
struct LowerHalf;

impl TestFunction for LowerHalf {
    fn name(&self) -> String {
        "lower_half".into()
    }
    fn value(&self, x: &Point) -> f64 {
        if x.y < 0.25 { 1.0 } else { 0.0 }
    }
    fn gradient(&self, _: &Point) -> Point {
        Point::zeros()
    }
    fn hessian(&self, _: &Point) -> Matrix2<f64> {
        Matrix2::zeros()
    }
    fn c2_norm(&self) -> f64 {
        1.0
    }
}

#[test]
fn zero_state_closed_forms() {
    let m = uniform(&channel(FRAC_PI_3, 0.1), 0.0);
    let one = ConstantFunction(1.0);
    // |Omega| W(0) / eps
    assert!((m.interior(&one) - 0.5 * 0.25 / 0.1).abs() < 1e-12);
    assert!((m.discrepancy_with(|_| 1.0) + 1.25).abs() < 1e-12);
    assert!((m.abs_discrepancy() - 1.25).abs() < 1e-12);
    // collar volume 2 * 1 * 0.1
    assert!((m.tubular_mass(0.1).unwrap() - 0.5).abs() < 1e-12);
    assert!(m.tubular_mass(0.3).is_err());
    assert!(m.tubular_mass(0.0).is_err());
}

#[test]
fn plus_one_closed_forms() {
    let p = channel(FRAC_PI_3, 0.1);
    let m = uniform(&p, 1.0);
    let one = ConstantFunction(1.0);
    let expected = 2.0 * EnergyModel::quartic(FRAC_PI_3).unwrap().sigma(1.0);
    assert_eq!(m.interior(&one), 0.0);
    assert_eq!(m.interior(&GaussianBump { center: Point::new(0.5, 0.2), width: 0.1, amplitude: 1.0 }), 0.0);
    assert!((m.boundary(&one) - expected).abs() < 1e-12);
    assert!((m.boundary(&one) - 0.9428).abs() < 1e-4);
    assert!((m.boundary(&LowerHalf) - 0.5 * expected).abs() < 1e-12);
    assert_eq!(m.abs_discrepancy(), 0.0);
    assert_eq!(m.tubular_mass(0.1).unwrap(), 0.0);
    assert_eq!(m.varifold(|_, _| 1.0) - m.boundary(&one), 0.0);
}

#[test]
fn minus_one_carries_nothing() {
    let p = channel(FRAC_PI_3, 0.1);
    let m = uniform(&p, -1.0);
    let one = ConstantFunction(1.0);
    assert_eq!(m.boundary(&one), 0.0);
    assert_eq!(m.interior(&one), 0.0);
    assert_eq!(m.abs_discrepancy(), 0.0);
    let dict = FieldDictionary::standard(&p.grid).unwrap();
    for g in &dict.fields {
        assert_eq!(first_variation_direct(&m, g.as_ref()), 0.0);
    }
    assert_eq!(first_variation_norm_estimate(&m, &dict).unwrap().0, 0.0);
}

#[test]
fn tanh_profile_energy_and_varifold() {
    let m = tanh_line(512, 0.05);
    let one = ConstantFunction(1.0);
    assert!((m.interior(&one) - C0).abs() <= 0.02 * C0);
    assert!(m.varifold(|_, _| 1.0) >= 0.98 * C0);
    assert!(m.varifold(|_, _| 1.0) <= m.interior(&one) + 1e-12);
}

#[test]
fn tanh_profile_equipartitions() {
    let coarse = tanh_line(256, 0.05).discrepancy_with(|_| 1.0).abs();
    let fine = tanh_line(512, 0.05).discrepancy_with(|_| 1.0).abs();
    let h = 1.0 / 512.0;
    assert!(fine <= 10.0 * h * h / 0.05, "{fine}");
    assert!(coarse / fine >= 3.0, "{coarse} vs {fine}");
}

#[test]
fn tanh_profile_phase_variation_is_the_jump_of_the_transform() {
    // A monotone transition from -1 to 1 has total variation Phi(1) - Phi(-1) = c0.
    let m = tanh_line(512, 0.05);
    assert!((m.phase_variation() - C0).abs() <= 0.01 * C0, "{}", m.phase_variation());
}

#[test]
fn tanh_profile_avoids_the_collar() {
    let m = tanh_line(1024, 0.02);
    assert!(m.tubular_mass(0.1).unwrap() <= 0.05 * C0);
}

#[test]
fn one_dimensional_tangent_projection_vanishes() {
    let m = tanh_line(512, 0.05);
    let dilation =
        AffineField { a: Matrix2::new(1.0, 0.0, 0.0, 0.0), b: Point::new(-0.5, 0.0), bound: 0.5, label: "dilation" };
    assert!(first_variation_direct(&m, &dilation).abs() < 1e-12);
    assert!(m.varifold(|_, s| s[(0, 0)]).abs() < 1e-12);
}

#[test]
fn vertical_interface_has_vertical_tangent() {
    let p = channel(FRAC_PI_2, 0.05);
    let strip = InterfaceSpec::Strip { center: [0.5, 0.0], normal: [1.0, 0.0], half_width: 0.25 };
    let u = initialize(&p, &InitialSpec::WellPreparedInterface { interface: strip, invert: true }, 0).unwrap();
    let m = measures(&u).unwrap();
    let total = m.varifold(|_, _| 1.0);
    assert!((total - 2.0 * 0.5 * C0).abs() < 0.02);
    assert!(m.varifold(|_, s| s[(0, 0)]).abs() <= 1e-12 * total);
    assert!((m.varifold(|_, s| s[(1, 1)]) - total).abs() <= 1e-9 * total);
}

#[test]
fn plus_one_tangential_variation_cancels() {
    let p = channel(FRAC_PI_3, 0.1);
    let m = uniform(&p, 1.0);
    let fields: Vec<Box<dyn VectorField>> = [(1.0, 0.0, 0.0), (1.0, 1.0, 0.3), (2.0, 2.0, 1.1), (3.0, 1.0, 0.7), (1.0, 2.0, 0.5)]
        .into_iter()
        .chain([(2.0, 0.0, 0.9), (4.0, 1.0, 0.1), (3.0, 3.0, 2.0), (5.0, 2.0, 0.4)])
        .map(|(k, mm, phase)| Box::new(WallShear { k, m: mm, phase, lx: 1.0, ly: 0.5 }) as Box<dyn VectorField>)
        .chain(std::iter::once(
            Box::new(ConstantField { v: Point::new(1.0, 0.0), tangential: true }) as Box<dyn VectorField>
        ))
        .collect();
    let dict = FieldDictionary::new(&p.grid, fields).unwrap();
    for g in &dict.fields {
        let direct = first_variation_direct(&m, g.as_ref());
        let formula = first_variation_formula(&m, g.as_ref(), true);
        assert!(direct.abs() <= 1e-10, "{}: {direct}", g.name());
        assert!(formula.total().abs() <= 1e-12);
        assert_eq!(formula.boundary, 0.0);
    }
    assert!(first_variation_norm_estimate(&m, &dict).unwrap().0 <= 1e-10);
}

#[test]
fn tangential_flag_drops_the_wall_term() {
    let p = channel(FRAC_PI_3, 0.05);
    let u = initialize(&p, &InitialSpec::RandomSeeded { amplitude: 0.5, mean: 0.0 }, 4).unwrap();
    let m = measures(&u).unwrap();
    let g = WallShear { k: 2.0, m: 1.0, phase: 0.2, lx: 1.0, ly: 0.5 };
    assert_eq!(first_variation_formula(&m, &g, true).boundary, 0.0);
}

#[test]
fn false_tangency_claims_are_rejected() {
    let g = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 8, ny: 4 }).unwrap();
    let bad: Vec<Box<dyn VectorField>> = vec![Box::new(ConstantField { v: Point::new(0.0, 1.0), tangential: true })];
    assert!(FieldDictionary::new(&g, bad).is_err());
    let ok: Vec<Box<dyn VectorField>> = vec![Box::new(ConstantField { v: Point::new(0.0, 1.0), tangential: false })];
    assert!(FieldDictionary::new(&g, ok).is_ok());
}

fn spectral_norm(h: &Matrix2<f64>) -> f64 {
    h.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max)
}

#[test]
fn dictionaries_certify_their_bounds() {
    let domains = [
        DomainSpec::Interval { a: 0.0, b: 1.0, n: 400 },
        DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 80, ny: 40 },
        DomainSpec::Disk { radius: 1.0, nr: 40, ntheta: 120 },
    ];
    for d in &domains {
        let grid = Grid::new(d).unwrap();
        let samples: Vec<Point> = grid.centers.iter().chain(grid.boundary.iter().map(|b| &b.point)).copied().collect();
        for phi in standard_test_functions(&grid) {
            let (mut v, mut g, mut h) = (0.0f64, 0.0f64, 0.0f64);
            for x in &samples {
                v = v.max(phi.value(x).abs());
                g = g.max(phi.gradient(x).norm());
                h = h.max(spectral_norm(&phi.hessian(x)));
                assert!(phi.value(x) >= 0.0, "{} is negative", phi.name());
            }
            assert!(v + g + h <= phi.c2_norm() * (1.0 + 1e-12), "{}", phi.name());
        }
        let dict = FieldDictionary::standard(&grid).unwrap();
        assert!(dict.len() >= 10);
        for f in &dict.fields {
            let sup = samples.iter().map(|x| f.eval(x).0.norm()).fold(0.0, f64::max);
            assert!(sup <= f.sup_norm() * (1.0 + 1e-12), "{}", f.name());
        }
    }
}

#[test]
fn dictionary_jacobians_match_finite_differences() {
    let grid = Grid::new(&DomainSpec::Disk { radius: 1.0, nr: 16, ntheta: 48 }).unwrap();
    let dict = FieldDictionary::standard(&grid).unwrap();
    let h = 1e-6;
    for f in &dict.fields {
        for x in grid.centers.iter().step_by(37) {
            let (_, jac) = f.eval(x);
            for k in 0..2 {
                let e = if k == 0 { Point::new(h, 0.0) } else { Point::new(0.0, h) };
                let fd = (f.eval(&(x + e)).0 - f.eval(&(x - e)).0) / (2.0 * h);
                assert!((fd - jac.column(k)).norm() <= 1e-6 * (1.0 + jac.norm()), "{}", f.name());
            }
        }
    }
}

fn relaxing_channel() -> contactflow::solver::RunRecord {
    let p = channel(FRAC_PI_3, 0.1);
    let u = initialize(&p, &InitialSpec::RandomSeeded { amplitude: 0.3, mean: 0.2 }, 5).unwrap();
    run(&u, 0.01, 2e-4, &SnapshotPolicy::Every { steps: 1 }, 10.0).unwrap()
}

#[test]
fn pointwise_invariants_hold_on_snapshots() {
    let rec = relaxing_channel();
    let one = ConstantFunction(1.0);
    for (s, row) in rec.snapshots.iter().zip(&rec.series) {
        assert_eq!(s.step, row.step);
        let m = measures(&rec.field(s)).unwrap();
        for (x, e) in m.discrepancy.iter().zip(&m.density) {
            assert!(x.abs() <= *e);
        }
        assert!((m.total(&one) - row.energy).abs() <= 1e-12 * row.energy);
        assert!(m.phase_variation() <= m.interior(&one) * (1.0 + 1e-9));
    }
}

#[test]
fn spacetime_integral_matches_energy_series() {
    let rec = relaxing_channel();
    let direct = spacetime_integral(&rec, &ConstantFunction(1.0), |_| 1.0).unwrap();
    let series: f64 = rec.series.windows(2).map(|w| 0.5 * (w[1].time - w[0].time) * (w[0].energy + w[1].energy)).sum();
    assert!((direct - series).abs() <= 1e-12 * series);
}

#[test]
fn spacetime_integral_of_a_stationary_state() {
    let p = channel(FRAC_PI_3, 0.1);
    let u = PhaseField::new(Arc::clone(&p), vec![1.0; p.grid.len()], 0.0).unwrap();
    let rec = run(&u, 1.0, p.stability_cap(), &SnapshotPolicy::Every { steps: 25 }, 1.0).unwrap();
    assert_eq!(rec.last().time, 1.0);
    let sigma1 = EnergyModel::quartic(FRAC_PI_3).unwrap().sigma(1.0);
    let total = spacetime_integral(&rec, &ConstantFunction(1.0), |_| 1.0).unwrap();
    assert!((total - 2.0 * sigma1).abs() <= 1e-12);
    let zero_mean = spacetime_integral(&rec, &ConstantFunction(1.0), |t| t - 0.5).unwrap();
    assert!(zero_mean.abs() <= 1e-12);
}
