use qlab_core::fields::{gradient, Field, Grid, RealField, ResidualStats};
use qlab_core::mechanics::*;

fn line(min: f64, max: f64, n: usize) -> Grid {
    Grid::line(min, max, n).unwrap()
}

#[test]
fn free_beam_surface_is_linear_in_x() {
    let (m, e) = (1.0, 2.0);
    let g = line(0.0, 10.0, 101);
    let s = action_surface_fixed_energy(&AnalyticPotential::Free, g, &[Launch { x0: 0.0, direction: 1.0 }], e, m, 0.01)
        .unwrap();
    let p = (2.0 * m * e).sqrt();
    assert!(s.mask.iter().all(|&b| b));
    for (k, v) in s.action.values().iter().enumerate() {
        assert!((v - p * g.x().coord(k)).abs() < 1e-10, "node {k}: {v}");
    }
    let r = hj_residual_stationary(&s, &AnalyticPotential::Free, e, m).unwrap();
    assert!(r.stats().max < 1e-9);
}

#[test]
fn forbidden_region_is_masked() {
    let g = line(-3.0, 3.0, 121);
    let u = AnalyticPotential::Harmonic { stiffness: 1.0 };
    let launches = [Launch { x0: 0.0, direction: 1.0 }, Launch { x0: 0.0, direction: -1.0 }];
    let s = action_surface_fixed_energy(&u, g, &launches, 0.5, 1.0, 1e-3).unwrap();
    for k in 0..g.len() {
        let x = g.x().coord(k);
        if x.abs() > 1.0 {
            assert!(!s.mask[k], "x={x} should be masked");
        }
        if x.abs() < 0.95 {
            assert!(s.mask[k], "x={x} should be reached");
        }
    }
}

#[test]
fn stationary_residual_examples() {
    let g = line(0.0, 4.0, 41);
    let (m, e) = (1.5, 1.0);
    let zero = RealField::zeros(g);
    let r = hj_residual_stationary_field(&zero, &zero, e, m).unwrap();
    assert!(r.values().iter().all(|v| (v + 2.0 * m * e).abs() < 1e-14));

    let p = (2.0 * m * e).sqrt();
    let scaled = Field::from_fn(g, |x, _| 1.1 * p * x).unwrap();
    let r = hj_residual_stationary_field(&scaled, &zero, e, m).unwrap();
    for v in r.values() {
        assert!((v - 0.21 * 2.0 * m * e).abs() < 1e-10, "{v}");
    }
}

#[test]
fn time_dependent_residual_examples() {
    let g = line(-2.0, 2.0, 41);
    let (m, p, dt, t1) = (2.0, 0.8, 0.01, 0.5);
    let free = |t: f64| Field::from_fn(g, move |x, _| p * x - p * p / (2.0 * m) * t).unwrap();
    let snaps = [free(t1 - dt), free(t1), free(t1 + dt)];
    let zero = RealField::zeros(g);
    let r = hj_residual_time_dependent([&snaps[0], &snaps[1], &snaps[2]], dt, &zero, m).unwrap();
    assert!(r.max_abs() < 1e-10);
    let u0 = RealField::constant(g, 0.3);
    let r = hj_residual_time_dependent([&snaps[0], &snaps[1], &snaps[2]], dt, &u0, m).unwrap();
    assert!(r.values().iter().all(|v| (v - 0.3).abs() < 1e-10));
}

#[test]
fn linear_potential_solution_satisfies_hj() {
    // S = (p0 + F t) x - [(p0 + F t)^3 - p0^3] / (6 m F)
    let g = line(-2.0, 2.0, 41);
    let (m, p0, f, dt, t1) = (1.3, 0.4, 0.7, 1e-4, 0.6);
    let s = |t: f64| {
        Field::from_fn(g, move |x, _| {
            let p = p0 + f * t;
            p * x - (p * p * p - p0 * p0 * p0) / (6.0 * m * f)
        })
        .unwrap()
    };
    let snaps = [s(t1 - dt), s(t1), s(t1 + dt)];
    let u = Field::from_fn(g, |x, _| -f * x).unwrap();
    let r = hj_residual_time_dependent([&snaps[0], &snaps[1], &snaps[2]], dt, &u, m).unwrap();
    assert!(r.max_abs() < 1e-8, "{}", r.max_abs());
}

#[test]
fn static_action_has_zero_energy() {
    let g = line(0.0, 1.0, 16);
    let s = Field::from_fn(g, |x, _| x * x).unwrap();
    let e = energy_from_action([&s, &s, &s], 0.1).unwrap();
    assert!(e.values().iter().all(|&v| v == 0.0));
}

fn free_fan(n: usize) -> (TimeActionSurface, Grid) {
    let g = line(-1.0, 5.0, n);
    let times = [0.9, 1.0, 1.1];
    let s = action_surface_point_source(&AnalyticPotential::Free, g, 0.0, (0.5, 4.5, 200), &times, 1e-3, 1.0).unwrap();
    (s, g)
}

#[test]
fn free_fan_momentum_matches_launch() {
    let (s, g) = free_fan(121);
    let p = momentum_from_action(&s.snapshots[1]);
    let mask = s.stencil_mask(1);
    let mut checked = 0;
    for k in 0..g.len() {
        if mask[k] {
            // At t = 1 the member arriving at x left with v = x.
            let x = g.x().coord(k);
            assert!((p[0].values()[k] - x).abs() <= 1e-3 * x.abs(), "x={x}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn free_fan_matches_closed_form() {
    let (s, g) = free_fan(121);
    for k in 0..g.len() {
        if s.masks[1][k] {
            let x = g.x().coord(k);
            assert!((s.snapshots[1].values()[k] - x * x / 2.0).abs() < 1e-8);
        }
    }
}

#[test]
fn oscillator_fan_at_eighth_period() {
    // Point source at the origin: x = (v0/w) sin wt, so p = m w x cot(wt) = m w x at T/8.
    let (m, w) = (1.0, 1.0);
    let t8 = std::f64::consts::FRAC_PI_4 / w;
    let g = line(-2.0, 2.0, 81);
    let dt = t8 / 2000.0;
    let times = [t8 - 40.0 * dt, t8, t8 + 40.0 * dt];
    let u = AnalyticPotential::Harmonic { stiffness: m * w * w };
    let s = action_surface_point_source(&u, g, 0.0, (-4.0, 4.0, 161), &times, dt, m).unwrap();
    let p = momentum_from_action(&s.snapshots[1]);
    let mask = s.stencil_mask(1);
    for k in 0..g.len() {
        let x = g.x().coord(k);
        if mask[k] && x.abs() > 0.1 {
            let exact = m * w * x;
            assert!((p[0].values()[k] - exact).abs() <= 0.01 * exact.abs(), "x={x}");
        }
    }
}

#[test]
fn oscillator_fixed_energy_profile() {
    let (m, w, amp) = (1.0, 1.0, 1.5);
    let e = 0.5 * m * w * w * amp * amp;
    let g = line(-2.0, 2.0, 161);
    let u = AnalyticPotential::Harmonic { stiffness: m * w * w };
    let launches = [Launch { x0: 0.0, direction: 1.0 }, Launch { x0: 0.0, direction: -1.0 }];
    let s = action_surface_fixed_energy(&u, g, &launches, e, m, 1e-4).unwrap();
    let p = gradient(&s.action);
    let mask = s.interior_mask();
    let mut checked = 0;
    for k in 0..g.len() {
        let x = g.x().coord(k);
        if mask[k] && x.abs() < 0.9 * amp && x.abs() > 0.05 {
            let exact = m * w * (amp * amp - x * x).sqrt();
            assert!((p[0].values()[k].abs() - exact).abs() <= 0.01 * exact, "x={x}");
            checked += 1;
        }
    }
    assert!(checked > 80);
}

#[test]
fn action_gradient_equals_terminal_momentum() {
    // dS = p dx - E dt along the family: difference quotients across neighbouring
    // arrival points match the arriving momenta.
    let u = AnalyticPotential::Linear { force: 0.5 };
    let (m, t, dt) = (1.0, 1.2_f64, 1e-3);
    let steps = (t / dt).round() as usize;
    let arrive = |v0: f64| {
        let traj = integrate_trajectory(&u, [0.0], [v0], dt, steps, m).unwrap();
        (traj.positions.last().unwrap()[0], action_along(&traj, &u), traj.final_momentum()[0])
    };
    for v0 in [-1.0, 0.0, 0.5, 2.0] {
        let h = 1e-3;
        let (xa, sa, _) = arrive(v0 - h);
        let (xb, sb, _) = arrive(v0 + h);
        let (_, _, p) = arrive(v0);
        let dsdx = (sb - sa) / (xb - xa);
        assert!((dsdx - p).abs() < 1e-4, "v0={v0}: {dsdx} vs {p}");
    }
}

fn stationary_residual_max(n: usize) -> f64 {
    let u = AnalyticPotential::Linear { force: 0.8 };
    let (m, e) = (1.0, 1.0);
    let g = line(0.0, 4.0, n);
    let dt = 0.4 / (n - 1) as f64;
    let s = action_surface_fixed_energy(&u, g, &[Launch { x0: 0.0, direction: 1.0 }], e, m, dt).unwrap();
    hj_residual_stationary(&s, &u, e, m).unwrap().stats().max
}

#[test]
fn stationary_residual_converges_second_order() {
    let coarse = stationary_residual_max(41);
    let fine = stationary_residual_max(81);
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "{coarse} {fine} {ratio}");
}

fn time_residual_max(n: usize) -> f64 {
    let (m, w) = (1.0_f64, 1.0_f64);
    let g = line(-1.5, 1.5, n);
    let h = 3.0 / (n - 1) as f64;
    let dt = h / 40.0;
    let t1 = 0.6_f64;
    let gap = (h / dt).round() * dt;
    let times = [t1 - gap, t1, t1 + gap];
    let u = AnalyticPotential::Harmonic { stiffness: m * w * w };
    let s = action_surface_point_source(&u, g, 0.0, (-4.0, 4.0, 4 * n), &times, dt, m).unwrap();
    let potential = Field::from_fn(g, |x, _| 0.5 * m * w * w * x * x).unwrap();
    let r = hj_residual_time_dependent([&s.snapshots[0], &s.snapshots[1], &s.snapshots[2]], gap, &potential, m)
        .unwrap();
    ResidualStats::masked(&r, &s.stencil_mask(1)).max
}

#[test]
fn time_dependent_residual_converges_second_order() {
    let coarse = time_residual_max(31);
    let fine = time_residual_max(61);
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "{coarse} {fine} {ratio}");
}

#[test]
fn overlapping_branches_keep_least_action() {
    let g = line(0.0, 4.0, 41);
    let launches = [Launch { x0: 0.0, direction: 1.0 }, Launch { x0: 1.0, direction: 1.0 }];
    let s = action_surface_fixed_energy(&AnalyticPotential::Free, g, &launches, 0.5, 1.0, 0.01).unwrap();
    for k in 0..g.len() {
        let x = g.x().coord(k);
        assert_eq!(s.multivalued[k], x >= 1.0 - 1e-12, "x={x}");
        let least = if x >= 1.0 - 1e-12 { x - 1.0 } else { x };
        assert!((s.action.values()[k] - least).abs() < 1e-10);
    }
}
