//! Subcommand bodies. Each returns the lines to print and the files to write;
//! nothing here touches the filesystem.

use qlab_core::fields::{expectation, gaussian_packet, Field, Grid, RealField, ResidualStats};
use qlab_core::gun::{self, DetectionMode};
use qlab_core::mechanics::{
    action_surface_fixed_energy, hj_residual_stationary, hj_residual_time_dependent, integrate_trajectory,
    action_along, Launch,
};
use qlab_core::optics::{
    eikonal_residual, large_phase_scaling, snell_corpuscular, snell_wave, trace_ray, IndexField, IndexProfile, Ray,
};
use qlab_core::pilot::{advance_ensemble, equivariance_test, sample_from_density};
use qlab_core::schrodinger::{
    continuity_residual, norm_history_check, propagate, semiclassical_residuals, NormRecorder, PropagatorConfig,
    SnapshotRecorder,
};
use qlab_core::{ComplexField, PhysicalConstants};

use crate::config::{Law, MediumKind, RunConfig};
use crate::error::CliError;
use crate::output::{dump_complex, dump_real, float, pgm, Cell, Csv};

#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<(String, Vec<u8>)>,
    /// False when a check or criterion failed.
    pub passed: bool,
}

impl Report {
    fn new() -> Self {
        Report { passed: true, ..Default::default() }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn file(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn verdict(&mut self, name: &str, ok: bool, detail: String) {
        self.passed &= ok;
        self.line(format!("{} {name} {detail}", if ok { "PASS" } else { "FAIL" }));
    }
}

type Out = Result<Report, CliError>;

pub fn snell(cfg: &RunConfig) -> Out {
    let o = &cfg.optics;
    let t1 = o.theta1.to_radians();
    let t2 = match o.law {
        Law::Wave => snell_wave(t1, o.n1, o.n2)?,
        Law::Corpuscular => snell_corpuscular(t1, o.n1, o.n2)?,
    };
    let mut r = Report::new();
    r.line(format!("theta2 = {:.4}°", t2.to_degrees()));
    Ok(r)
}

pub fn ray_trace(cfg: &RunConfig) -> Out {
    let o = &cfg.optics;
    let grid = Grid::plane((0.0, o.domain, o.points), (-0.5 * o.domain, 0.5 * o.domain, o.points))?;
    let profile = match o.medium {
        MediumKind::Gradient => IndexProfile::LinearGradient { axis: 1, n0: o.n0, slope: o.slope },
        MediumKind::TwoMedia => IndexProfile::TwoMedia { interface: o.interface, n1: o.n1, n2: o.n2 },
    };
    let index = IndexField::from_profile(grid, profile)?;
    let path = trace_ray(&index, Ray::launch([o.start_x, o.start_y], o.angle.to_radians()), o.ds, o.steps)?;
    let mut csv = Csv::new(&["arc_length", "x", "y", "angle_deg", "optical_path"]);
    for s in &path.states {
        csv.row(&[
            Cell::F(s.arc_length),
            Cell::F(s.position[0]),
            Cell::F(s.position[1]),
            Cell::F(s.angle().to_degrees()),
            Cell::F(s.optical_path),
        ]);
    }
    let end = path.last();
    let mut r = Report::new();
    r.line(format!("end = ({:.6}, {:.6}), angle = {:.4}°", end.position[0], end.position[1], end.angle().to_degrees()));
    r.line(format!("interface events = {}, left domain = {}", path.interface_events, path.left_domain));
    r.file("ray.csv", csv.into_bytes());
    Ok(r)
}

pub fn action_surface(cfg: &RunConfig) -> Out {
    let m = &cfg.mechanics;
    let grid = Grid::line(m.x_min, m.x_max, m.nx)?;
    let u = cfg.potential.analytic();
    let mut launches = vec![Launch { x0: m.launch_x, direction: 1.0 }];
    if m.both_ways {
        launches.push(Launch { x0: m.launch_x, direction: -1.0 });
    }
    let mass = cfg.constants.mass;
    let s = action_surface_fixed_energy(&u, grid, &launches, m.energy, mass, m.dt)?;
    let res = hj_residual_stationary(&s, &u, m.energy, mass)?;
    let mut csv = Csv::new(&["x", "action", "reached", "multivalued", "residual"]);
    for k in 0..grid.len() {
        csv.row(&[
            Cell::F(grid.x().coord(k)),
            Cell::F(s.action.values()[k]),
            Cell::I(s.mask[k] as i64),
            Cell::I(s.multivalued[k] as i64),
            Cell::F(res.residual.values()[k]),
        ]);
    }
    let reached = s.mask.iter().filter(|&&b| b).count();
    let mut r = Report::new();
    r.line(format!("reached {reached}/{} nodes, HJ residual max = {}", grid.len(), float(res.stats().max)));
    r.file("action.csv", csv.into_bytes());
    Ok(r)
}

fn packet(cfg: &RunConfig, grid: Grid) -> Result<ComplexField, CliError> {
    let p = &cfg.packet;
    Ok(gaussian_packet(grid, [p.x0, p.y0], p.sigma, [p.kx, p.ky])?)
}

fn spread(psi: &ComplexField) -> f64 {
    let mean = expectation(psi, |x, _| x);
    expectation(psi, |x, _| (x - mean) * (x - mean)).sqrt()
}

pub fn propagate_cmd(cfg: &RunConfig) -> Out {
    let grid = cfg.grid.build()?;
    let psi0 = packet(cfg, grid)?;
    let u = cfg.potential.sample(grid)?;
    let pc = cfg.propagator.build(&grid, cfg.constants.physical());
    let stride = cfg.propagator.record_stride.max(1);
    let mut norms = NormRecorder::new(stride);
    let mut snaps = SnapshotRecorder::new(stride);
    let out = propagate(&psi0, &u, &pc, cfg.propagator.steps, &mut [&mut norms, &mut snaps])?;
    let mut csv = Csv::new(&["step", "time", "norm"]);
    for &(step, t, n) in &norms.history {
        csv.row(&[Cell::I(step as i64), Cell::F(t), Cell::F(n)]);
    }
    let report = norm_history_check(&norms.norms());
    let mut r = Report::new();
    r.line(format!(
        "steps = {}, final norm = {}, max deviation = {}",
        cfg.propagator.steps,
        float(report.final_norm),
        float(report.max_deviation)
    ));
    r.line(format!("width: {} -> {}", float(spread(&psi0)), float(spread(&out))));
    r.file("norm.csv", csv.into_bytes());
    if grid.dims() == 1 {
        let mut d = Csv::new(&["x", "density"]);
        for (k, z) in out.values().iter().enumerate() {
            d.row(&[Cell::F(grid.x().coord(k)), Cell::F(z.norm_sqr())]);
        }
        r.file("density.csv", d.into_bytes());
    } else {
        let frames: Vec<RealField> = snaps.snapshots.iter().map(|s| s.2.density()).collect();
        let max = frames.iter().map(|f| f.max_value()).fold(0.0, f64::max);
        for (k, f) in frames.iter().enumerate() {
            r.file(format!("density_{k:04}.pgm"), pgm(f, max));
        }
    }
    if cfg.output.binary {
        r.file("psi_final.bin", dump_complex(&out));
    }
    Ok(r)
}

fn ensemble_duration(cfg: &RunConfig) -> f64 {
    let e = &cfg.ensemble;
    if e.duration > 0.0 {
        e.duration
    } else {
        let c = cfg.constants;
        2.0 * 3f64.sqrt() * cfg.packet.sigma * cfg.packet.sigma * c.mass / c.hbar
    }
}

fn ensemble_run(cfg: &RunConfig) -> Result<(ComplexField, RealField, PropagatorConfig, usize), CliError> {
    let grid = cfg.grid.build()?;
    if grid.dims() != 1 {
        return Err(CliError::Config("ensemble runs need a 1D grid (grid.ny = 0)".into()));
    }
    let psi = packet(cfg, grid)?;
    let u = cfg.potential.sample(grid)?;
    let mut pc = cfg.propagator.build(&grid, cfg.constants.physical());
    pc.dt = cfg.ensemble.dt;
    let steps = (ensemble_duration(cfg) / pc.dt).round().max(1.0) as usize;
    Ok((psi, u, pc, steps))
}

pub fn bohm(cfg: &RunConfig) -> Out {
    let (psi, u, pc, steps) = ensemble_run(cfg)?;
    let e = &cfg.ensemble;
    let mut rec = SnapshotRecorder::new(1);
    propagate(&psi, &u, &pc, steps, &mut [&mut rec])?;
    let stream: Vec<ComplexField> = rec.snapshots.into_iter().map(|s| s.2).collect();
    let few = sample_from_density(&psi.density(), e.written, cfg.seed)?;
    let paths = advance_ensemble(&few, &stream, pc.dt, &pc.constants)?;
    let mut header = vec!["time".to_string()];
    header.extend((0..e.written).map(|k| format!("x{k}")));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (t, ps) in paths.times.iter().zip(&paths.positions) {
        let mut row = vec![Cell::F(*t)];
        row.extend(ps.iter().map(|p| Cell::F(p[0])));
        csv.row(&row);
    }
    let stride = (steps / e.checkpoints.max(1)).max(1);
    let eq = equivariance_test(&psi, &u, &pc, e.count, e.bins, steps, stride, cfg.seed)?;
    let mut tv = Csv::new(&["time", "tv", "baseline"]);
    for k in 0..eq.times.len() {
        tv.row(&[Cell::F(eq.times[k]), Cell::F(eq.tv[k]), Cell::F(eq.baseline[k])]);
    }
    let mut r = Report::new();
    r.line(format!("{} particles, {} steps, lost fraction {}", e.count, steps, float(eq.lost_fraction)));
    let worst = eq.tv.iter().zip(&eq.baseline).map(|(t, b)| t / b).fold(0.0, f64::max);
    r.line(format!("worst tv/baseline = {worst:.4}"));
    r.file("trajectories.csv", csv.into_bytes());
    r.file("equivariance.csv", tv.into_bytes());
    Ok(r)
}

pub fn experiment(cfg: &RunConfig, number: u8, mode: DetectionMode) -> Out {
    let spec = cfg.apparatus.spec(number, mode, cfg.constants.physical());
    let mut r = Report::new();
    for w in spec.validate()? {
        r.line(format!("warning: {w:?}"));
    }
    let e = gun::run_experiment(&spec, cfg.seed)?;
    let s = &e.simulation;
    let prefix = format!("experiment{number}");
    let mut hist = Csv::new(&["bin_center", "count"]);
    let h = &e.screen.histogram;
    for b in 0..h.bins() {
        hist.row(&[Cell::F(h.center(b)), Cell::I(h.counts[b] as i64)]);
    }
    let mut flux = Csv::new(&["y", "flux"]);
    let profile = &s.flux.profile;
    for (k, v) in profile.values().iter().enumerate() {
        flux.row(&[Cell::F(profile.grid().x().coord(k)), Cell::F(*v)]);
    }
    r.file(format!("{prefix}_histogram.csv"), hist.into_bytes());
    r.file(format!("{prefix}_flux.csv"), flux.into_bytes());
    let max = s.snapshots.iter().map(|f| f.1.max_value()).fold(0.0, f64::max);
    for (k, (_, f)) in s.snapshots.iter().enumerate() {
        r.file(format!("{prefix}_density_{k:04}.pgm"), pgm(f, max));
    }
    if cfg.output.binary {
        r.file(format!("{prefix}_flux.bin"), dump_real(profile));
    }
    r.line(format!("mode = {mode:?}, detected = {}/{}", e.screen.detected, spec.shots));
    if let Some(t) = s.mask_time {
        r.line(format!("mask at t = {t:.4}, transmitted = {}", float(s.transmitted)));
    }
    r.line(format!("flux through screen = {}, back-flow = {}", float(s.flux.passed), float(s.flux.negative_fraction)));
    if let Ok(w) = gun::fwhm(profile) {
        r.line(format!("peak at y = {:.4}, FWHM = {:.4}", gun::peak_position(profile), w));
    }
    if number == 3 {
        let d = cfg.apparatus.double_slit_separation;
        let expected = gun::fraunhofer_spacing(&spec, d);
        if let Ok(f) = gun::fringes(profile) {
            r.line(format!("fringe spacing = {:.4} (far field {:.4}), visibility = {:.4}", f.spacing, expected, f.visibility));
        }
        let frac = gun::fraction_near(&e.hits, &gun::analytic_minima(&spec, d), expected / 10.0);
        r.line(format!("hits near the four central minima = {frac:.4}"));
    }
    Ok(r)
}

pub fn compare_modes(cfg: &RunConfig, number: u8) -> Out {
    let spec = cfg.apparatus.spec(number, DetectionMode::Bohm, cfg.constants.physical());
    let c = gun::compare_modes(&spec, cfg.seed)?;
    let (lo, hi) = spec.screen_window();
    let hc = qlab_core::histogram::Histogram::from_samples(lo, hi, spec.bins, c.copenhagen.iter().copied());
    let hb = qlab_core::histogram::Histogram::from_samples(lo, hi, spec.bins, c.bohm.iter().copied());
    let mut csv = Csv::new(&["bin_center", "copenhagen", "bohm"]);
    for b in 0..hc.bins() {
        csv.row(&[Cell::F(hc.center(b)), Cell::I(hc.counts[b] as i64), Cell::I(hb.counts[b] as i64)]);
    }
    let mut r = Report::new();
    r.file(format!("modes{number}_histogram.csv"), csv.into_bytes());
    let factor = cfg.tolerances.modes_factor;
    r.verdict(
        "compare-modes",
        c.holds(factor),
        format!("tv={} baseline={} factor={factor} n={}", float(c.tv), float(c.baseline), c.bohm.len()),
    );
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    Eikonal,
    Hj,
    Norm,
    Continuity,
    Semiclassical,
    Equivariance,
}

pub fn check(cfg: &RunConfig, kind: CheckKind) -> Out {
    let tol = &cfg.tolerances;
    let mut r = Report::new();
    let in_band = |x: f64| (tol.order_ratio_min..=tol.order_ratio_max).contains(&x);
    let scaled = |x: f64| (x / tol.scaling_ratio - 1.0).abs() < tol.scaling_relative;
    match kind {
        CheckKind::Eikonal => {
            let g = Grid::plane((-1.0, 1.0, 41), (-1.0, 1.0, 41))?;
            let (omega, c, n) = (2.0, 1.0, 1.5);
            let k = n * omega / c;
            let s = RealField::from_fn(g, |x, y| k * (0.6 * x + 0.8 * y))?;
            let idx = IndexField::from_profile(g, IndexProfile::Constant(n))?;
            let res = eikonal_residual(&s, &idx, omega, c)?.max_abs();
            r.verdict("eikonal-plane-wave", res < tol.eikonal_residual, format!("residual={} tol={}", float(res), tol.eikonal_residual));
            let a = RealField::from_fn(g, |x, y| 1.0 + 0.3 * (x * y).cos())?;
            let phase = RealField::from_fn(g, |x, y| x + 0.2 * y * y)?;
            let rows = large_phase_scaling(&a, &phase, &[0.1, 0.05])?;
            let ratio = rows[1].gradient_squared / rows[0].gradient_squared;
            r.verdict("eikonal-large-phase", scaled(ratio), format!("ratio={ratio:.6} expected={}", tol.scaling_ratio));
        }
        CheckKind::Hj => {
            let max_at = |n: usize| -> Result<f64, CliError> {
                let u = qlab_core::mechanics::AnalyticPotential::Linear { force: 0.8 };
                let g = Grid::line(0.0, 4.0, n)?;
                let s = action_surface_fixed_energy(&u, g, &[Launch { x0: 0.0, direction: 1.0 }], 1.0, 1.0, 0.4 / (n - 1) as f64)?;
                Ok(hj_residual_stationary(&s, &u, 1.0, 1.0)?.stats().max)
            };
            let ratio = max_at(41)? / max_at(81)?;
            r.verdict("hj-stationary-order", in_band(ratio), format!("ratio={ratio:.4}"));

            let u = qlab_core::mechanics::AnalyticPotential::Linear { force: 0.5 };
            let (dt, steps) = (1e-3, 1200);
            let arrive = |v0: f64| -> Result<(f64, f64, f64), CliError> {
                let t = integrate_trajectory(&u, [0.0], [v0], dt, steps, 1.0)?;
                Ok((t.positions.last().unwrap()[0], action_along(&t, &u), t.final_momentum()[0]))
            };
            let mut worst: f64 = 0.0;
            for v0 in [-1.0, 0.5, 2.0] {
                let (xa, sa, _) = arrive(v0 - 1e-3)?;
                let (xb, sb, _) = arrive(v0 + 1e-3)?;
                let (_, _, p) = arrive(v0)?;
                worst = worst.max(((sb - sa) / (xb - xa) - p).abs() / p.abs());
            }
            r.verdict("hj-momentum", worst < tol.momentum_relative, format!("relative={} tol={}", float(worst), tol.momentum_relative));

            let g = Grid::line(-2.0, 2.0, 41)?;
            let (m, p0, f, dt, t1) = (1.3, 0.4, 0.7, 1e-4, 0.6);
            let s = |t: f64| {
                Field::from_fn(g, move |x, _| {
                    let p = p0 + f * t;
                    p * x - (p * p * p - p0 * p0 * p0) / (6.0 * m * f)
                })
            };
            let snaps = [s(t1 - dt)?, s(t1)?, s(t1 + dt)?];
            let pot = Field::from_fn(g, |x, _| -f * x)?;
            let res = hj_residual_time_dependent([&snaps[0], &snaps[1], &snaps[2]], dt, &pot, m)?.max_abs();
            r.verdict("hj-time-dependent", res < tol.hj_time_dependent, format!("residual={} tol={}", float(res), tol.hj_time_dependent));
        }
        CheckKind::Norm => {
            let grid = cfg.grid.build()?;
            let psi = packet(cfg, grid)?;
            let u = cfg.potential.sample(grid)?;
            let pc = cfg.propagator.build(&grid, cfg.constants.physical());
            let mut rec = NormRecorder::new(1);
            propagate(&psi, &u, &pc, cfg.propagator.steps, &mut [&mut rec])?;
            let drift = norm_history_check(&rec.norms()).max_deviation;
            r.verdict(
                "norm",
                drift < tol.norm_drift,
                format!("drift={} tol={} steps={}", float(drift), tol.norm_drift, cfg.propagator.steps),
            );
        }
        CheckKind::Continuity => {
            let max_at = |n: usize, dt: f64| -> Result<f64, CliError> {
                let g = Grid::line(-12.0, 12.0, n)?;
                let psi = gaussian_packet(g, [0.0, 0.0], 1.0, [2.0, 0.0])?;
                let mut rec = SnapshotRecorder::new(1);
                let steps = (0.5 / dt).round() as usize;
                let pc = PropagatorConfig::for_grid(&g, dt);
                propagate(&psi, &RealField::zeros(g), &pc, steps + 1, &mut [&mut rec])?;
                let s = &rec.snapshots;
                let res = continuity_residual([&s[steps - 1].2, &s[steps].2, &s[steps + 1].2], dt, &PhysicalConstants::default())?;
                Ok(ResidualStats::interior(&res, 2).max)
            };
            let ratio = max_at(241, 0.02)? / max_at(481, 0.01)?;
            r.verdict("continuity-order", in_band(ratio), format!("ratio={ratio:.4}"));
        }
        CheckKind::Semiclassical => {
            let g = Grid::line(-3.0, 3.0, 121)?;
            let a = Field::from_fn(g, |x, _| 1.0 + 0.3 * (0.8 * x).cos())?;
            let s = Field::from_fn(g, |x, _| 0.5 * (0.6 * x).sin() + 0.2 * x)?;
            let u = RealField::zeros(g);
            let eval = |hbar: f64| {
                let c = PhysicalConstants { hbar, ..cfg.constants.physical() };
                semiclassical_residuals([&a, &a, &a], [&s, &s, &s], 0.01, &u, &c, 1e-12)
            };
            let (big, small) = (eval(cfg.constants.hbar)?, eval(0.5 * cfg.constants.hbar)?);
            let ratio = big.quantum_stats().max / small.quantum_stats().max;
            r.verdict("semiclassical-hbar2", scaled(ratio), format!("ratio={ratio:.6} expected={}", tol.scaling_ratio));
            let same = big.hj_stats().max == small.hj_stats().max;
            r.verdict("semiclassical-hj-independent", same, format!("hj={}", float(big.hj_stats().max)));
        }
        CheckKind::Equivariance => {
            let (psi, u, pc, steps) = ensemble_run(cfg)?;
            let e = &cfg.ensemble;
            let stride = (steps / e.checkpoints.max(1)).max(1);
            let eq = equivariance_test(&psi, &u, &pc, e.count, e.bins, steps, stride, cfg.seed)?;
            let worst = eq.tv.iter().zip(&eq.baseline).map(|(t, b)| t / b).fold(0.0, f64::max);
            r.verdict(
                "equivariance",
                eq.holds(tol.equivariance_factor),
                format!("worst tv/baseline={worst:.4} factor={} n={}", tol.equivariance_factor, e.count),
            );
        }
    }
    Ok(r)
}
