use std::f64::consts::PI;

use proptest::prelude::*;
use qlab_core::fields::{
    amplitude_phase_compose, amplitude_phase_decompose, gaussian_packet, norm_squared_integral, normalize, Field, Grid,
    RealField,
};
use qlab_core::gun::{Barrier, Slit};
use qlab_core::histogram::{tv_distance, Histogram};
use qlab_core::optics::{snell_corpuscular, snell_wave};
use qlab_core::pilot::sample_from_density;
use qlab_core::schrodinger::{propagate, NormRecorder, PropagatorConfig};
use qlab_core::tridiag::solve_in_place;
use qlab_core::Complex64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snell_wave_is_reciprocal(t in 0.0..1.5f64, n1 in 1.0..3.0f64, n2 in 1.0..3.0f64) {
        if let Ok(t2) = snell_wave(t, n1, n2) {
            prop_assert!((snell_wave(t2, n2, n1).unwrap() - t).abs() < 1e-9);
            prop_assert!((n1 * t.sin() - n2 * t2.sin()).abs() < 1e-12);
        } else {
            prop_assert!(n1 * t.sin() > n2);
        }
    }

    #[test]
    fn particles_and_waves_bend_oppositely(t in 0.01..1.5f64, v1 in 0.2..3.0f64, v2 in 0.2..3.0f64) {
        prop_assume!((v1 - v2).abs() > 1e-3);
        if let (Ok(c), Ok(w)) = (snell_corpuscular(t, v1, v2), snell_wave(t, 1.0 / v1, 1.0 / v2)) {
            prop_assert!((c - t) * (w - t) < 0.0);
        }
    }

    #[test]
    fn normalize_is_idempotent(scale in 0.01..50.0f64, sigma in 0.8..1.6f64, k in -3.0..3.0f64) {
        let g = Grid::line(-15.0, 15.0, 301).unwrap();
        let psi = gaussian_packet(g, [0.3, 0.0], sigma, [k, 0.0]).unwrap().scale(scale);
        let once = normalize(&psi).unwrap();
        let twice = normalize(&once).unwrap();
        prop_assert!((norm_squared_integral(&once) - 1.0).abs() < 1e-12);
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn decompose_then_compose_returns_psi(sigma in 0.8..1.3f64, k in -2.0..2.0f64, hbar in 0.3..2.0f64) {
        let g = Grid::plane((-12.0, 12.0, 97), (-12.0, 12.0, 97)).unwrap();
        let psi = gaussian_packet(g, [0.5, -0.2], sigma, [k, 0.5 * k]).unwrap();
        let d = amplitude_phase_decompose(&psi, hbar, 1e-12).unwrap();
        let back = amplitude_phase_compose(&d.amplitude, &d.phase, hbar).unwrap();
        for (m, (a, b)) in d.mask.iter().zip(back.values().iter().zip(psi.values())) {
            if *m {
                prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn slowly_varying_phase_unwraps_up_to_a_constant(p in -1.5..1.5f64, q in -0.05..0.05f64) {
        let g = Grid::line(-8.0, 8.0, 161).unwrap();
        let s = Field::from_fn(g, |x, _| p * x + q * x * x).unwrap();
        let a = RealField::constant(g, 1.0);
        let psi = amplitude_phase_compose(&a, &s, 1.0).unwrap();
        let d = amplitude_phase_decompose(&psi, 1.0, 1e-12).unwrap();
        let offset = d.phase.values()[0] - s.values()[0];
        prop_assert!((offset / (2.0 * PI) - (offset / (2.0 * PI)).round()).abs() < 1e-9);
        for (u, v) in d.phase.values().iter().zip(s.values()) {
            prop_assert!((u - v - offset).abs() < 1e-9);
        }
    }

    #[test]
    fn thomas_solution_satisfies_system(
        n in 2usize..40,
        seed in any::<u64>(),
    ) {
        // Diagonally dominant complex system with entries from a small LCG.
        let mut state = seed | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut c = || Complex64::new(next(), next());
        let lower: Vec<_> = (0..n).map(|_| c()).collect();
        let upper: Vec<_> = (0..n).map(|_| c()).collect();
        let diag: Vec<_> = (0..n).map(|_| c() + Complex64::new(3.0, 1.0)).collect();
        let rhs: Vec<_> = (0..n).map(|_| c()).collect();
        let mut x = rhs.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        solve_in_place(&lower, &diag, &upper, &mut x, &mut scratch).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i];
            if i > 0 { r += lower[i] * x[i - 1]; }
            if i + 1 < n { r += upper[i] * x[i + 1]; }
            prop_assert!((r - rhs[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn histogram_keeps_every_sample(samples in prop::collection::vec(-3.0..3.0f64, 0..200)) {
        let h = Histogram::from_samples(-2.0, 2.0, 17, samples.iter().copied());
        let inside: f64 = h.counts.iter().sum();
        prop_assert_eq!(inside + h.underflow + h.overflow, samples.len() as f64);
    }

    #[test]
    fn tv_distance_is_a_bounded_symmetric_metric(
        a in prop::collection::vec(-1.0..1.0f64, 1..100),
        b in prop::collection::vec(-1.0..1.0f64, 1..100),
    ) {
        let ha = Histogram::from_samples(-1.0, 1.0, 10, a.iter().copied());
        let hb = Histogram::from_samples(-1.0, 1.0, 10, b.iter().copied());
        let d = tv_distance(&ha, &hb);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert_eq!(d, tv_distance(&hb, &ha));
        prop_assert!(tv_distance(&ha, &ha).abs() < 1e-15);
    }

    #[test]
    fn samples_stay_in_support_and_repeat_per_seed(seed in any::<u64>(), lo in -4.0..0.0f64, w in 0.5..3.0f64) {
        let g = Grid::line(-5.0, 5.0, 101).unwrap();
        let rho = Field::from_fn(g, |x, _| if x >= lo && x <= lo + w { 1.0 } else { 0.0 }).unwrap();
        let a = sample_from_density(&rho, 300, seed).unwrap();
        let b = sample_from_density(&rho, 300, seed).unwrap();
        prop_assert_eq!(&a.positions, &b.positions);
        let h = g.x().spacing();
        for p in &a.positions {
            prop_assert!(p[0] >= lo - h && p[0] <= lo + w + h, "{} outside [{lo}, {}]", p[0], lo + w);
        }
    }

    #[test]
    fn mirrored_barrier_transmits_mirrored_rows(c in -5.0..5.0f64, w in 0.2..3.0f64, y in -10.0..10.0f64) {
        let b = Barrier { x: 0.0, slits: vec![Slit { center: c, width: w }, Slit { center: c + 4.0, width: 0.5 * w }] };
        prop_assert_eq!(b.transmission(y), b.mirrored().transmission(-y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn crank_nicolson_conserves_norm(
        sigma in 0.8..2.0f64,
        k in -1.0..1.0f64,
        stiffness in 0.0..0.2f64,
        dt in 0.005..0.03f64,
    ) {
        let g = Grid::line(-24.0, 24.0, 385).unwrap();
        let psi = gaussian_packet(g, [0.0, 0.0], sigma, [k, 0.0]).unwrap();
        let u = Field::from_fn(g, |x, _| 0.5 * stiffness * x * x).unwrap();
        let mut rec = NormRecorder::new(10);
        propagate(&psi, &u, &PropagatorConfig::for_grid(&g, dt), 100, &mut [&mut rec]).unwrap();
        for n in rec.norms() {
            prop_assert!((n - 1.0).abs() < 1e-10, "{n}");
        }
    }
}
