use std::f64::consts::PI;

use qlab_core::fields::{gradient_norm_squared, Grid, RealField, ResidualStats};
use qlab_core::optics::*;
use qlab_core::{ComplexField, Complex64, Error};

fn deg(x: f64) -> f64 {
    x * PI / 180.0
}

#[test]
fn reflection_keeps_angle() {
    for t in [0.0, 0.3, PI / 4.0] {
        assert_eq!(reflect(t).unwrap(), t);
    }
    assert!(reflect(PI / 2.0).is_err());
    assert!(reflect(-0.1).is_err());
}

#[test]
fn corpuscular_refraction_examples() {
    assert_eq!(snell_corpuscular(0.0, 1.0, 3.0).unwrap(), 0.0);
    // arcsin(0.25) = 14.477512185929923 degrees
    let t2 = snell_corpuscular(deg(30.0), 1.0, 2.0).unwrap();
    assert!((t2.to_degrees() - 14.477_512_185_929_923).abs() < 1e-9);
    match snell_corpuscular(deg(60.0), 2.0, 1.0) {
        Err(Error::NoTransmission { sin_theta2 }) => assert!((sin_theta2 - 1.732_050_807_568_877).abs() < 1e-12),
        other => panic!("expected NoTransmission, got {other:?}"),
    }
}

#[test]
fn wave_refraction_examples() {
    assert_eq!(snell_wave(0.0, 1.0, 1.5).unwrap(), 0.0);
    // arcsin(1/3) = 19.471220634490691 degrees
    let t2 = snell_wave(deg(30.0), 1.0, 1.5).unwrap();
    assert!((t2.to_degrees() - 19.471_220_634_490_69).abs() < 1e-9);
    match snell_wave(deg(60.0), 1.5, 1.0) {
        Err(Error::TotalInternalReflection { sin_theta2 }) => assert!((sin_theta2 - 1.299_038_105_676_658).abs() < 1e-12),
        other => panic!("expected TIR, got {other:?}"),
    }
}

#[test]
fn corpuscular_and_wave_bend_opposite_ways() {
    // Second medium faster: v2 > v1, i.e. n2 < n1 with n = c / v.
    let (v1, v2) = (1.0, 1.3);
    for t in [0.1, 0.4, 0.6] {
        let corp = snell_corpuscular(t, v1, v2).unwrap();
        let wave = snell_wave(t, 1.0 / v1, 1.0 / v2).unwrap();
        assert!(corp < t && wave > t);
    }
}

fn plane_phase(grid: Grid, k: [f64; 2]) -> RealField {
    RealField::from_fn(grid, |x, y| k[0] * x + k[1] * y).unwrap()
}

#[test]
fn phase_velocity_and_wavelength_of_plane_waves() {
    let g = Grid::plane((0.0, 1.0, 16), (0.0, 1.0, 16)).unwrap();
    let k = 3.0;
    let pv = phase_velocity(&plane_phase(g, [k, 0.0]), 6.0);
    assert!(pv.field.values().iter().all(|v| (v - 2.0).abs() < 1e-10));
    let pv = phase_velocity(&plane_phase(g, [k, 0.0]), k);
    assert!(pv.field.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    let lw = local_wavelength(&plane_phase(g, [2.0 * PI, 0.0]));
    assert!(lw.field.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    let lw = local_wavelength(&plane_phase(g, [0.0, k]));
    assert!(lw.field.values().iter().all(|v| (v - 2.0 * PI / k).abs() < 1e-10));
}

#[test]
fn singular_phase_is_masked() {
    let g = Grid::line(0.0, 1.0, 16).unwrap();
    let lw = local_wavelength(&RealField::constant(g, 1.0));
    assert_eq!(lw.masked_fraction(), 1.0);
}

#[test]
fn radial_phase_velocity() {
    let g = Grid::plane((-2.0, 2.0, 161), (-2.0, 2.0, 161)).unwrap();
    let k = 5.0;
    let s = RealField::from_fn(g, |x, y| k * (x * x + y * y).sqrt()).unwrap();
    let pv = phase_velocity(&s, 10.0);
    // Annulus 1 <= r <= 1.8: analytic |grad S| = k.
    for (idx, v) in pv.field.values().iter().enumerate() {
        let (i, j) = g.node(idx);
        let [x, y] = g.coords(i, j);
        let r = (x * x + y * y).sqrt();
        if (1.0..=1.8).contains(&r) {
            assert!((v - 2.0).abs() < 1e-3, "{v} at r={r}");
        }
    }
}

#[test]
fn chirped_wavelength() {
    let g = Grid::line(0.0, 2.0, 401).unwrap();
    let alpha = 3.0;
    let s = RealField::from_fn(g, |x, _| alpha * x * x).unwrap();
    let lw = local_wavelength(&s);
    let i = 250;
    let x0 = g.x().coord(i);
    assert!((lw.field.values()[i] - PI / (alpha * x0)).abs() < 1e-10);
}

#[test]
fn eikonal_residual_examples() {
    let g = Grid::plane((0.0, 1.0, 16), (0.0, 1.0, 16)).unwrap();
    let (n, omega, c) = (1.5, 2.0, 1.0);
    let idx = IndexField::from_profile(g, IndexProfile::Constant(n)).unwrap();
    let s = plane_phase(g, [n * omega / c * 0.6, n * omega / c * 0.8]);
    let r = eikonal_residual(&s, &idx, omega, c).unwrap();
    assert!(r.max_abs() < 1e-10);
    let r0 = eikonal_residual(&RealField::zeros(g), &idx, omega, c).unwrap();
    assert!(r0.values().iter().all(|v| (v + n * n * omega * omega).abs() < 1e-12));
}

#[test]
fn eikonal_zero_iff_wavelength_matches_medium() {
    let g = Grid::plane((0.0, 1.0, 16), (0.0, 1.0, 16)).unwrap();
    let (n, omega, c) = (1.3, 4.0, 2.0);
    let idx = IndexField::from_profile(g, IndexProfile::Constant(n)).unwrap();
    let lambda0 = 2.0 * PI * c / (n * omega);
    for scale in [1.0, 1.2] {
        let s = plane_phase(g, [scale * n * omega / c, 0.0]);
        let res = eikonal_residual(&s, &idx, omega, c).unwrap();
        let lw = local_wavelength(&s);
        for k in 0..g.len() {
            let zero = res.values()[k].abs() < 1e-9;
            let same = (lw.field.values()[k] - lambda0).abs() < 1e-9;
            assert_eq!(zero, same);
        }
    }
}

fn ray_family_residual(points: usize) -> f64 {
    let profile = IndexProfile::LinearGradient { axis: 1, n0: 1.0, slope: 0.3 };
    let g = Grid::plane((0.5, 1.5, points), (0.0, 1.0, points)).unwrap();
    let s = eikonal_phase_from_ray_family(g, profile, 0.0, 1.0, 1.0, 2000).unwrap();
    let idx = IndexField::from_profile(g, profile).unwrap();
    let r = eikonal_residual(&s, &idx, 1.0, 1.0).unwrap();
    r.max_abs()
}

#[test]
fn ray_family_phase_converges_second_order() {
    let e1 = ray_family_residual(17);
    let e2 = ray_family_residual(33);
    let ratio = e1 / e2;
    assert!((3.5..=4.5).contains(&ratio), "{e1} {e2} ratio {ratio}");
}

#[test]
fn time_dependent_eikonal_examples() {
    let g = Grid::line(0.0, 1.0, 64).unwrap();
    let (n, c, k) = (1.5, 1.0, 4.0);
    let omega = k * c / n;
    let idx = IndexField::from_profile(g, IndexProfile::Constant(n)).unwrap();
    let dt = 1e-3;
    let snaps = |w: f64| -> Vec<RealField> {
        (0..3)
            .map(|m| RealField::from_fn(g, |x, _| k * x - w * (m as f64 - 1.0) * dt).unwrap())
            .collect()
    };
    let s = snaps(omega);
    let r = eikonal_residual_time_dependent([&s[0], &s[1], &s[2]], dt, &idx, c).unwrap();
    assert!(r.max_abs() < 1e-9);
    // Mismatch S = kx - 2 omega t: k^2 - n^2 4 omega^2 / c^2 = -3 k^2, i.e. -3 n^2 omega^2 / c^2.
    let s = snaps(2.0 * omega);
    let r = eikonal_residual_time_dependent([&s[0], &s[1], &s[2]], dt, &idx, c).unwrap();
    let expected = -3.0 * n * n * omega * omega / (c * c);
    assert!(r.values().iter().all(|v| (v - expected).abs() < 1e-8));
    let cst = RealField::constant(g, 2.0);
    let r = eikonal_residual_time_dependent([&cst, &cst, &cst], dt, &idx, c).unwrap();
    assert!(r.max_abs() < 1e-12);
}

#[test]
fn wave_equation_residual_examples() {
    let g = Grid::line(0.0, 2.0, 801).unwrap();
    let (n, c, k) = (1.5, 1.0, 3.0);
    let idx = IndexField::from_profile(g, IndexProfile::Constant(n)).unwrap();
    let dt = 1e-3;
    let snaps = |w: f64| -> Vec<ComplexField> {
        (0..3)
            .map(|m| {
                let t = (m as f64 - 1.0) * dt;
                ComplexField::from_fn(g, |x, _| Complex64::new(0.0, k * x - w * t).exp()).unwrap()
            })
            .collect()
    };
    let interior = |r: &RealField| ResidualStats::interior(r, 1).max;
    let s = snaps(k * c / n);
    let r = wave_equation_residual([&s[0], &s[1], &s[2]], dt, &idx, c).unwrap();
    assert!(interior(&r) < 1e-3, "{}", interior(&r));
    // omega = 2 k c / n: |-k^2 + 4 k^2| = 3 k^2.
    let s = snaps(2.0 * k * c / n);
    let r = wave_equation_residual([&s[0], &s[1], &s[2]], dt, &idx, c).unwrap();
    assert!((interior(&r) - 3.0 * k * k).abs() < 1e-2);
    let f = ComplexField::from_fn(g, |x, _| Complex64::new(x * x, 0.0)).unwrap();
    let r = wave_equation_residual([&f, &f, &f], dt, &idx, c).unwrap();
    assert!(r.values().iter().all(|v| (v - 2.0).abs() < 1e-6));
}

#[test]
fn large_phase_terms_scale() {
    let g = Grid::plane((-1.0, 1.0, 41), (-1.0, 1.0, 41)).unwrap();
    let a = RealField::from_fn(g, |x, y| 1.0 + 0.3 * (x * y).cos()).unwrap();
    let s = RealField::from_fn(g, |x, y| x + 0.2 * y * y).unwrap();
    let rows = large_phase_scaling(&a, &s, &[0.1, 0.05, 0.025]).unwrap();
    for w in rows.windows(2) {
        let ratio = w[1].gradient_squared / w[0].gradient_squared;
        assert!((ratio - 4.0).abs() < 0.2);
    }
    assert!(rows[2].gradient_squared_dominates());

    let flat = large_phase_scaling(&RealField::constant(g, 2.0), &s, &[0.1]).unwrap()[0];
    assert_eq!(flat.amplitude_laplacian, 0.0);
    assert_eq!(flat.cross_gradient, 0.0);
    let linear = RealField::from_fn(g, |x, y| x - 2.0 * y).unwrap();
    let lin = large_phase_scaling(&a, &linear, &[0.1]).unwrap()[0];
    assert!(lin.phase_laplacian < 1e-10);
}

fn square(points: usize) -> Grid {
    Grid::plane((0.0, 10.0, points), (-5.0, 5.0, points)).unwrap()
}

#[test]
fn straight_rays_in_constant_medium() {
    let idx = IndexField::from_profile(square(101), IndexProfile::Constant(1.4)).unwrap();
    let start = Ray::launch([1.0, -1.0], 0.3);
    let path = trace_ray(&idx, start, 0.01, 500).unwrap();
    assert!(!path.left_domain);
    let end = path.last();
    for a in 0..2 {
        let expect = start.position[a] + 5.0 * start.direction[a];
        assert!((end.position[a] - expect).abs() < 1e-10);
    }
    assert!((end.optical_path - 1.4 * 5.0).abs() < 1e-10);
    assert!(path.states.windows(2).all(|w| w[1].optical_path >= w[0].optical_path));
}

#[test]
fn gradient_medium_matches_fine_step_reference() {
    let idx = IndexField::from_profile(
        square(101),
        IndexProfile::LinearGradient { axis: 1, n0: 1.0, slope: 0.1 },
    )
    .unwrap();
    let start = Ray::launch([0.5, 0.0], 0.0);
    let coarse = trace_ray(&idx, start, 0.01, 800).unwrap();
    let fine = trace_ray(&idx, start, 0.001, 8000).unwrap();
    let dy = (coarse.last().position[1] - fine.last().position[1]).abs();
    assert!(dy < 1e-6, "{dy}");
    // Bends toward higher index.
    assert!(coarse.last().position[1] > 0.1);
}

#[test]
fn direction_constraint_holds_over_long_trace() {
    let g = Grid::plane((0.0, 200.0, 201), (-100.0, 100.0, 201)).unwrap();
    let idx = IndexField::from_profile(g, IndexProfile::LinearGradient { axis: 1, n0: 1.5, slope: 0.002 }).unwrap();
    let path = trace_ray(&idx, Ray::launch([5.0, 0.0], 0.05), 0.01, 10_000).unwrap();
    assert!(!path.left_domain);
    assert!(path.constraint_drift < 1e-10, "{}", path.constraint_drift);
    for r in &path.states {
        assert!(((r.direction[0].powi(2) + r.direction[1].powi(2)).sqrt() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sharp_interface_reproduces_snell() {
    let (n1, n2) = (1.0, 1.5);
    let theta1 = deg(30.0);
    let expected = snell_wave(theta1, n1, n2).unwrap();
    // Analytic two-media profile and a plain sampled copy of the same field.
    let grid = square(201);
    let analytic = IndexField::from_profile(grid, IndexProfile::TwoMedia { interface: 5.0, n1, n2 }).unwrap();
    let sampled = IndexField::sampled(analytic.field().clone()).unwrap();
    for idx in [&analytic, &sampled] {
        let path = trace_ray(idx, Ray::launch([2.0, -2.0], theta1), 0.01, 400).unwrap();
        assert_eq!(path.interface_events, 1);
        let err = (path.last().angle() - expected).to_degrees().abs();
        assert!(err < 0.1, "angle error {err} deg");
    }
}

#[test]
fn total_internal_reflection_at_interface() {
    let grid = square(201);
    let idx = IndexField::from_profile(grid, IndexProfile::TwoMedia { interface: 5.0, n1: 1.5, n2: 1.0 }).unwrap();
    let path = trace_ray(&idx, Ray::launch([3.0, -3.0], deg(60.0)), 0.01, 800).unwrap();
    let a = path.last().angle();
    assert!((a - deg(120.0)).abs() < 1e-9, "{}", a.to_degrees());
}

#[test]
fn ray_flags_domain_exit() {
    let idx = IndexField::from_profile(square(101), IndexProfile::Constant(1.0)).unwrap();
    let path = trace_ray(&idx, Ray::launch([5.0, 0.0], 0.0), 0.1, 1000).unwrap();
    assert!(path.left_domain);
    assert!(path.last().position[0] <= 10.0 - 0.2 + 1e-9);
}

#[test]
fn sampled_gradient_squared_helper_is_consistent() {
    let g = Grid::line(0.0, 1.0, 32).unwrap();
    let s = RealField::from_fn(g, |x, _| 3.0 * x).unwrap();
    assert!(gradient_norm_squared(&s).values().iter().all(|v| (v - 9.0).abs() < 1e-10));
}
