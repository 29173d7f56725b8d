use contactflow::diagnostics::{
    boundary_energy_budget, contact_angle_extract, kernel_boundary_identity, monotonicity_check,
    nonconcentration_profile, semi_decreasing_check, trace_gap, truncated_kernels, AngleExtraction, Cutoff,
    HeatKernel, KernelPair, KernelSpec, KernelVariant, MonotonicityForm,
};
use contactflow::energetics::{EnergyModel, ModelSpec};
use contactflow::geometry::{DomainSpec, Grid, Point};
use contactflow::measures::{measures, standard_test_functions};
use contactflow::solver::{
    initialize, run, BcOrder, InitialSpec, InterfaceSpec, PhaseField, Problem, RunRecord, SeriesRow, Snapshot,
    SnapshotPolicy,
};
use contactflow::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::sync::Arc;

fn problem(domain: DomainSpec, model: EnergyModel, eps: f64) -> Arc<Problem> {
    Problem::new(Grid::new(&domain).unwrap(), model, eps, BcOrder::First).unwrap()
}

fn channel(nx: usize, ny: usize, theta: f64, eps: f64) -> Arc<Problem> {
    problem(DomainSpec::Channel { lx: 1.0, ly: 0.5, nx, ny }, EnergyModel::quartic(theta).unwrap(), eps)
}

fn field(p: &Arc<Problem>, f: impl Fn(&Point) -> f64) -> PhaseField {
    PhaseField::new(Arc::clone(p), p.grid.centers.iter().map(f).collect(), 0.0).unwrap()
}

#[test]
fn heat_kernel_examples() {
    let y = Point::new(0.3, -0.2);
    let tau = 1.0 / (4.0 * PI);
    let k = HeatKernel::new(y, 1.0, 2);
    assert!((k.value(&y, 1.0 - tau).unwrap() - 1.0).abs() < 1e-14);
    let tau = 0.02;
    let x = y + Point::new(4.0 * tau, 0.0).normalize() * (4.0 * tau).sqrt();
    let expected = (4.0 * PI * tau).powf(-0.5) * (-1.0f64).exp();
    assert!((k.value(&x, 1.0 - tau).unwrap() - expected).abs() < 1e-13);
    assert!(k.value(&x, 1.0).is_err());
    assert!(k.value(&x, 1.5).is_err());
    assert!(k.jet(&x, 1.2).is_err());
}

#[test]
fn heat_kernel_derivatives_match_finite_differences() {
    let k = HeatKernel::new(Point::new(0.1, 0.2), 0.5, 2);
    let (x, t) = (Point::new(0.25, 0.1), 0.45);
    let j = k.jet(&x, t).unwrap();
    let h = 1e-5;
    let dt = (k.value(&x, t + h).unwrap() - k.value(&x, t - h).unwrap()) / (2.0 * h);
    assert!((dt - j.time).abs() <= 1e-6 * j.time.abs());
    for c in 0..2 {
        let e = if c == 0 { Point::new(h, 0.0) } else { Point::new(0.0, h) };
        let g = (k.jet(&(x + e), t).unwrap().gradient - k.jet(&(x - e), t).unwrap().gradient) / (2.0 * h);
        assert!((g - j.hessian.column(c)).norm() <= 1e-6 * j.hessian.norm());
        let v = (k.value(&(x + e), t).unwrap() - k.value(&(x - e), t).unwrap()) / (2.0 * h);
        assert!((v - j.gradient[c]).abs() <= 1e-6 * j.gradient.norm());
    }
}

#[test]
fn ilmanen_identity_holds_at_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let y = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = rng.gen_range(0.0..1.0);
        let k = HeatKernel::new(y, s, 2);
        let t = s - rng.gen_range(1e-3..0.5);
        let x = y + Point::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        worst = worst.max(k.ilmanen_residual(&x, t, &Point::new(phi.cos(), phi.sin())).unwrap());
    }
    assert!(worst <= 1e-10, "worst residual {worst}");
}

#[test]
fn boundary_identity_on_a_flat_wall() {
    let g = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 16, ny: 8 }).unwrap();
    let k = HeatKernel::new(Point::new(0.5, 0.0), 0.1, 2);
    for x in [0.5, 0.55, 0.62, 0.8] {
        let b = kernel_boundary_identity(&k, &g, &Point::new(x, 0.0), 0.09).unwrap();
        assert!(b.rhs.abs() < 1e-300 || b.rhs == 0.0);
        assert!(b.residual() <= 1e-10, "x = {x}: {b:?}");
    }
}

/// Both sides of the boundary identity on the unit circle from the parametrisation
/// `x(phi) = (cos phi, sin phi)` and `rho = c exp(-g / (4 tau))`, `g = |x(phi) - y|^2`.
fn circle_oracle(y: Point, tau: f64, phi: f64) -> (f64, f64) {
    let x = Point::new(phi.cos(), phi.sin());
    let g = (x - y).norm_squared();
    let g1 = 2.0 * (y.x * phi.sin() - y.y * phi.cos());
    let g2 = 2.0 * (y.x * phi.cos() + y.y * phi.sin());
    let rho = (4.0 * PI * tau).powf(-0.5) * (-g / (4.0 * tau)).exp();
    let f2 = rho * ((g1 / (4.0 * tau)).powi(2) - g2 / (4.0 * tau));
    let rho_t = rho * (0.5 / tau - g / (4.0 * tau * tau));
    let d_nu = (x - y).dot(&x);
    // curvature vector of the unit circle is -x
    let rhs = -d_nu * d_nu * rho / (4.0 * tau * tau) + (x - y).dot(&x) * rho / (2.0 * tau);
    (rho_t + f2, rhs)
}

#[test]
fn boundary_identity_on_the_circle() {
    let g = Grid::new(&DomainSpec::Disk { radius: 1.0, nr: 8, ntheta: 32 }).unwrap();
    let y = Point::new(0.9, 0.0);
    let k = HeatKernel::new(y, 1.0, 2);
    let b = kernel_boundary_identity(&k, &g, &Point::new(0.0, 1.0), 0.99).unwrap();
    assert!(b.residual() <= 1e-8);
    for phi in [0.05, 0.15, 0.3, -0.2, 2.0] {
        let (lhs, rhs) = circle_oracle(y, 0.01, phi);
        assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        let b = kernel_boundary_identity(&k, &g, &Point::new(phi.cos(), phi.sin()), 0.99).unwrap();
        assert!((b.lhs - lhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "phi = {phi}: {} vs {lhs}", b.lhs);
        assert!((b.rhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        assert!(b.residual() <= 1e-8);
    }
}

#[test]
fn boundary_identity_at_the_centre() {
    let disk = Grid::new(&DomainSpec::Disk { radius: 1.0, nr: 8, ntheta: 32 }).unwrap();
    let chan = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 16, ny: 8 }).unwrap();
    for (g, x) in [(&disk, Point::new(0.6, 0.8)), (&chan, Point::new(0.3, 0.5))] {
        let k = HeatKernel::new(x, 0.2, 2);
        let b = kernel_boundary_identity(&k, g, &x, 0.15).unwrap();
        assert_eq!(b.rhs, 0.0);
        assert!(b.residual() <= 1e-8);
    }
}

#[test]
fn cutoff_is_a_smooth_plateau() {
    let c = Cutoff::new(0.4);
    let mut prev = 1.0;
    for k in 0..=400 {
        let r = 0.3 * k as f64 / 400.0;
        let (v, d1, d2) = c.radial(r);
        assert!((0.0..=1.0).contains(&v));
        assert!(v <= prev + 1e-15 && d1 <= 0.0);
        if r <= 0.1 {
            assert_eq!(v, 1.0);
        }
        if r >= 0.2 {
            assert_eq!(v, 0.0);
        }
        let h = 1e-6;
        if r > h && (r - 0.1).abs() > h && (r - 0.2).abs() > h {
            let fd1 = (c.radial(r + h).0 - c.radial(r - h).0) / (2.0 * h);
            let fd2 = (c.radial(r + h).1 - c.radial(r - h).1) / (2.0 * h);
            assert!((fd1 - d1).abs() <= 1e-5 * (1.0 + d1.abs()));
            assert!((fd2 - d2).abs() <= 1e-4 * (1.0 + d2.abs()));
        }
        prev = v;
    }
}

#[test]
fn truncated_kernel_supports() {
    let g = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 16, ny: 8 }).unwrap();
    let y = Point::new(0.5, 0.0);
    // kappa = 0.25, so the cutoff vanishes beyond 0.125
    let (r1, _) = truncated_kernels(&g, &y, 0.1, &Point::new(0.7, 0.05), 0.09).unwrap();
    assert_eq!(r1, 0.0);
    let (r1, r2) = truncated_kernels(&g, &y, 0.1, &Point::new(0.55, 0.02), 0.09).unwrap();
    assert!(r1 > 0.0 && r2 > 0.0);
    // the midline is the only part of the channel outside the collar
    let (_, r2) = truncated_kernels(&g, &Point::new(0.5, 0.2), 0.1, &Point::new(0.5, 0.25), 0.09).unwrap();
    assert_eq!(r2, 0.0);
    assert!(truncated_kernels(&g, &y, 0.1, &Point::new(0.55, 0.02), 0.1).is_err());
}

#[test]
fn kernel_pair_has_no_flux_through_a_flat_wall() {
    let g = Grid::new(&DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 16, ny: 8 }).unwrap();
    let pair = KernelPair::new(&g, Point::new(0.5, 0.0), 0.1);
    let t = 0.09;
    let h = 1e-5;
    for x1 in [0.45, 0.48, 0.5, 0.53, 0.58] {
        let p = |d: f64| pair.value(KernelVariant::Pair, &Point::new(x1, d), t).unwrap();
        let dn = (-3.0 * p(0.0) + 4.0 * p(h) - p(2.0 * h)) / (2.0 * h);
        assert!(dn.abs() <= 1e-8 * (1.0 + p(0.0)), "x1 = {x1}: {dn}");
        let (_, g1, _) = pair.direct_jet(&Point::new(x1, 0.0), t).unwrap();
        let (_, g2) = pair.reflected_jet(&Point::new(x1, 0.0), t).unwrap();
        assert!((g1 + g2).y.abs() <= 1e-10 * (1.0 + g1.norm()));
    }
}

fn constant_run(value: f64) -> RunRecord {
    let p = channel(32, 16, FRAC_PI_3, 0.1);
    let u = PhaseField::new(Arc::clone(&p), vec![value; p.grid.len()], 0.0).unwrap();
    run(&u, 0.02, 2e-4, &SnapshotPolicy::Every { steps: 1 }, 1.0).unwrap()
}

#[test]
fn monotonicity_on_a_constant_state() {
    // kappa = 2 keeps the kernel inside the plateau of the cutoff
    let p = problem(DomainSpec::Channel { lx: 1.0, ly: 4.0, nx: 16, ny: 32 }, EnergyModel::quartic(FRAC_PI_3).unwrap(), 0.1);
    let u = PhaseField::new(Arc::clone(&p), vec![1.0; p.grid.len()], 0.0).unwrap();
    let rec = run(&u, 0.02, 2e-4, &SnapshotPolicy::Every { steps: 1 }, 1.0).unwrap();
    let spec = KernelSpec { center: [0.5, 0.0], terminal: 0.021 };
    let r = monotonicity_check(&rec, spec, (0.0, 0.02), Some((1.0, 1.0)), "constant").unwrap();
    assert_eq!(r.form, MonotonicityForm::Boundary);
    assert_eq!(r.user_violations, Some(0));
    assert_eq!(r.samples.len(), rec.snapshots.len() - 1);
    for s in &r.samples {
        assert!(s.discrepancy_term.abs() <= 1e-20);
        let (lhs, rhs) = s.sides(0.021, r.form, 1.0, 1.0);
        assert!(lhs <= rhs);
    }
}

#[test]
fn monotonicity_fit_is_tight_on_the_constant_grid() {
    let p = channel(32, 16, FRAC_PI_3, 0.05);
    let strip = InterfaceSpec::Strip { center: [0.5, 0.0], normal: [1.0, 0.0], half_width: 0.25 };
    let u = initialize(&p, &InitialSpec::WellPreparedInterface { interface: strip, invert: true }, 0).unwrap();
    let rec = run(&u, 0.02, 2e-4, &SnapshotPolicy::Every { steps: 5 }, 10.0).unwrap();
    for (center, form) in [([0.25, 0.0], MonotonicityForm::Boundary), ([0.5, 0.25], MonotonicityForm::Interior)] {
        let r = monotonicity_check(&rec, KernelSpec { center, terminal: 0.03 }, (0.0, 0.02), Some((1e3, 1e4)), "t")
            .unwrap();
        assert_eq!(r.form, form);
        let (c1, c2) = (r.c1.unwrap(), r.c2.unwrap());
        assert!(c1.is_finite() && c2.is_finite());
        assert_eq!(r.violations(c1, c2), 0);
        assert_eq!(r.user_violations, Some(0));
        if c2 > 1e-3 {
            assert!(r.violations(c1, c2 / 10f64.powf(1.0 / 32.0) * 0.999) > 0);
        }
    }
}

#[test]
fn monotonicity_on_the_standing_wave() {
    let p = problem(DomainSpec::Interval { a: 0.0, b: 1.0, n: 256 }, EnergyModel::quartic(FRAC_PI_2).unwrap(), 0.05);
    let interface = InterfaceSpec::HalfPlane { point: [0.5, 0.0], normal: [1.0, 0.0] };
    let u = initialize(&p, &InitialSpec::WellPreparedInterface { interface, invert: false }, 0).unwrap();
    let rec = run(&u, 0.01, 2e-4, &SnapshotPolicy::Every { steps: 5 }, 2.0).unwrap();
    let r = monotonicity_check(&rec, KernelSpec { center: [0.5, 0.0], terminal: 0.02 }, (0.0, 0.01), None, "wave")
        .unwrap();
    assert_eq!(r.form, MonotonicityForm::Interior);
    assert!(r.c2.unwrap().is_finite());
    assert_eq!(r.user_violations, None);
}

#[test]
fn monotonicity_requires_a_nonnegative_wall_energy() {
    let model = EnergyModel::from_spec(&ModelSpec::Polynomial {
        w: vec![0.25, 0.0, -0.5, 0.0, 0.25],
        sigma: vec![0.0, -0.5, 0.0, 0.5 / 3.0],
    })
    .unwrap();
    assert!(!model.sigma_nonnegative());
    let p = problem(DomainSpec::Channel { lx: 1.0, ly: 0.5, nx: 16, ny: 8 }, model, 0.1);
    let u = PhaseField::new(Arc::clone(&p), vec![0.0; p.grid.len()], 0.0).unwrap();
    let rec = run(&u, 0.002, 2e-4, &SnapshotPolicy::Every { steps: 1 }, 10.0).unwrap();
    let err = monotonicity_check(&rec, KernelSpec { center: [0.5, 0.0], terminal: 0.01 }, (0.0, 0.002), None, "")
        .unwrap_err();
    assert!(matches!(err, Error::Hypothesis(_)), "{err}");
}

#[test]
fn monotonicity_requires_a_lag_before_the_terminal_time() {
    let rec = constant_run(1.0);
    let spec = KernelSpec { center: [0.5, 0.0], terminal: 0.02 + 2e-4 };
    let err = monotonicity_check(&rec, spec, (0.0, 0.02), None, "").unwrap_err();
    assert!(matches!(err, Error::Resolution(_)), "{err}");
    let spec = KernelSpec { center: [0.5, 0.0], terminal: 0.1 };
    assert!(matches!(monotonicity_check(&rec, spec, (0.5, 0.6), None, ""), Err(Error::Resolution(_))));
}

#[test]
fn budget_of_constant_states_vanishes() {
    for v in [1.0, -1.0] {
        let b = boundary_energy_budget(&constant_run(v), 0.02).unwrap();
        assert!(b.integral <= 1e-20 && b.constant <= 1e-20);
    }
}

#[test]
fn budget_of_a_frozen_zero_state() {
    let p = channel(32, 16, FRAC_PI_2, 0.1);
    let u = vec![0.0; p.grid.len()];
    let layer: f64 = p.boundary_energy_density(&u).iter().zip(&p.grid.boundary).map(|(e, b)| e * b.weight).sum();
    // W(0) / eps on a boundary of length 2
    assert!((layer - 5.0).abs() < 1e-12);
    let parts = p.energy(&u);
    let row = |step: u64, time: f64| SeriesRow {
        step,
        time,
        dt: if step == 0 { 0.0 } else { 1.0 },
        energy: parts.total(),
        interior_energy: parts.interior,
        boundary_energy: parts.boundary,
        dissipation: 0.0,
        abs_discrepancy: 1.25,
        boundary_layer_energy: layer,
    };
    let snap = |step: u64, time: f64| Snapshot { time, step, values: u.clone() };
    let rec = RunRecord {
        problem: Arc::clone(&p),
        dt: 1.0,
        e0: 2.0,
        snapshots: vec![snap(0, 0.0), snap(1, 1.0)],
        series: vec![row(0, 0.0), row(1, 1.0)],
    };
    let b = boundary_energy_budget(&rec, 1.0).unwrap();
    assert!((b.integral - 5.0).abs() < 1e-12);
    assert!((b.constant - 2.5).abs() < 1e-12);
    assert!(boundary_energy_budget(&rec, 2.0).is_err());
}

fn vertical_interface(theta: f64) -> PhaseField {
    let p = channel(256, 128, theta, 0.04);
    let q = EnergyModel::quartic(theta).unwrap();
    field(&p, |x| q.heteroclinic((x.x - 0.5) / 0.04))
}

#[test]
fn orthogonal_contact_reads_ninety_degrees() {
    let m = measures(&vertical_interface(FRAC_PI_2)).unwrap();
    let a = contact_angle_extract(&m).unwrap();
    let near: Vec<_> = a.contacts().iter().filter(|c| (c.point[0] - 0.5).abs() < 0.05).collect();
    assert_eq!(near.len(), 2);
    for c in near {
        assert!((c.angle.to_degrees() - 90.0).abs() <= 2.0, "{c:?}");
        assert!(c.points_used >= 5);
    }
}

#[test]
fn tilted_line_reads_its_constructed_angle() {
    let eps = 0.04;
    let p = channel(256, 128, FRAC_PI_3, eps);
    let (s, c) = FRAC_PI_3.sin_cos();
    // -1 phase below the line through (0.5, 0) with direction (cos 60, sin 60)
    let u = field(&p, |x| -(((x.x - 0.5) * s - x.y * c) / (2f64.sqrt() * eps)).tanh());
    let m = measures(&u).unwrap();
    let a = contact_angle_extract(&m).unwrap();
    let bottom = a.contacts().iter().find(|k| (k.point[0] - 0.5).abs() < 0.02 && k.point[1] == 0.0).unwrap();
    assert!((bottom.angle.to_degrees() - 60.0).abs() <= 2.0, "{bottom:?}");
    let top_x = 0.5 + 0.5 * c / s;
    let top = a.contacts().iter().find(|k| (k.point[0] - top_x).abs() < 0.02 && k.point[1] == 0.5).unwrap();
    assert!((top.angle.to_degrees() - 120.0).abs() <= 2.0, "{top:?}");
}

#[test]
fn constant_field_has_no_contact() {
    let p = channel(32, 16, FRAC_PI_3, 0.1);
    let m = measures(&field(&p, |_| 0.7)).unwrap();
    assert!(matches!(contact_angle_extract(&m).unwrap(), AngleExtraction::NoContact));
}

#[test]
fn coarse_grids_cannot_resolve_an_angle() {
    let p = channel(16, 4, FRAC_PI_3, 0.04);
    let m = measures(&field(&p, |x| ((x.x - 0.5) / 0.04).tanh())).unwrap();
    assert!(matches!(contact_angle_extract(&m), Err(Error::Resolution(_))));
}

#[test]
fn trace_gap_examples() {
    let p = channel(64, 32, FRAC_PI_3, 0.02);
    assert_eq!(trace_gap(&measures(&field(&p, |_| 1.0)).unwrap()), 0.0);
    let layered = field(&p, |x| if x.y > 0.25 { 1.0 } else { -1.0 });
    assert_eq!(trace_gap(&measures(&layered).unwrap()), 0.0);
    // trace 0.5 under a +1 bulk on the lower wall only
    let skin = field(&p, |x| if x.y < 1.0 / 64.0 { 0.5 } else { 1.0 });
    assert!((trace_gap(&measures(&skin).unwrap()) - 0.25).abs() < 1e-12);
}

#[test]
fn constant_state_does_not_concentrate() {
    let rec = constant_run(1.0);
    let rows = nonconcentration_profile(&rec, &[0.05, 0.1], &[0.0, 0.01, 0.02]).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r.tubular_mass <= 1e-20 && r.abs_discrepancy <= 1e-20);
        assert!(!r.wetting);
    }
}

#[test]
fn interior_interface_stays_out_of_the_collar() {
    let p = problem(
        DomainSpec::Channel { lx: 0.5, ly: 1.0, nx: 32, ny: 64 },
        EnergyModel::quartic(FRAC_PI_3).unwrap(),
        0.08,
    );
    let strip = InterfaceSpec::Strip { center: [0.25, 0.5], normal: [0.0, 1.0], half_width: 0.25 };
    let u = initialize(&p, &InitialSpec::WellPreparedInterface { interface: strip, invert: false }, 0).unwrap();
    let rec = run(&u, 0.05, p.stability_cap().min(2e-4), &SnapshotPolicy::Every { steps: 25 }, 5.0).unwrap();
    let times: Vec<f64> = rec.snapshots.iter().map(|s| s.time).collect();
    for r in nonconcentration_profile(&rec, &[0.05], &times).unwrap() {
        assert!(r.tubular_mass <= 0.01 * r.interior_mass, "{r:?}");
        assert!(!r.wetting);
    }
}

#[test]
fn wetting_film_is_flagged() {
    let theta = 0.2;
    let eps = 0.02;
    let p = channel(64, 128, theta, eps);
    let q = EnergyModel::quartic(theta).unwrap();
    let film = field(&p, |x| q.heteroclinic((x.y - 0.04) / eps));
    let rec = run(&film, 1e-3, p.stability_cap(), &SnapshotPolicy::Every { steps: 1 }, 5.0).unwrap();
    let rows = nonconcentration_profile(&rec, &[0.1, 0.2], &[1e-3]).unwrap();
    assert!(rows.iter().all(|r| r.wetting), "{rows:?}");
    let mid = field(&p, |x| q.heteroclinic((x.y - 0.25) / eps));
    let rec = run(&mid, 1e-3, p.stability_cap(), &SnapshotPolicy::Every { steps: 1 }, 5.0).unwrap();
    let rows = nonconcentration_profile(&rec, &[0.1, 0.2], &[1e-3]).unwrap();
    assert!(rows.iter().all(|r| !r.wetting), "{rows:?}");
}

#[test]
fn semi_decreasing_holds_on_a_relaxing_run() {
    let p = channel(32, 16, FRAC_PI_3, 0.1);
    let u = initialize(&p, &InitialSpec::RandomSeeded { amplitude: 0.3, mean: 0.1 }, 8).unwrap();
    let rec = run(&u, 0.02, 2e-4, &SnapshotPolicy::Every { steps: 5 }, 10.0).unwrap();
    let tests = standard_test_functions(&p.grid);
    for s in semi_decreasing_check(&rec, &tests).unwrap() {
        assert_eq!(s.violations, 0, "{}", s.name);
        assert_eq!(s.times.len(), rec.snapshots.len());
    }
}
