//! Virtual electron-gun experiments on a 2D grid: free beam, single slit, double slit.
//!
//! The beam travels along +x. A barrier at `x_b` is modelled as an instantaneous
//! transmission mask in y applied when `<x>` reaches `x_b`; the screen at `x_s`
//! records the time-integrated current `J_x`. Detection is either flashes drawn
//! from that flux profile (Copenhagen) or first crossings of `x_s` by guided
//! particles (Bohm).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fields::{expectation, gaussian_packet, normalize, Axis, ComplexField, Grid, PhysicalConstants, RealField};
use crate::histogram::Histogram;
use crate::math;
use crate::pilot::{sample_from_density, tv_between_samples, GuidanceField, ParticleEnsemble, TimeSlab, BASELINE_REPLICAS};
use crate::schrodinger::{Boundary, Propagator, PropagatorConfig, Scheme};
use crate::Complex64;

/// Below this the slits count as closed.
pub const MIN_TRANSMISSION: f64 = 1e-6;
/// Largest tolerated share of negative flux through the screen.
pub const MAX_BACKFLOW: f64 = 0.05;
/// `k0 sigma0` below this draws a collimation warning.
pub const COLLIMATION_WARNING: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slit {
    pub center: f64,
    pub width: f64,
}

impl Slit {
    pub fn contains(&self, y: f64) -> bool {
        math::abs(y - self.center) <= 0.5 * self.width + 1e-9 * self.width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub x: f64,
    pub slits: Vec<Slit>,
}

impl Barrier {
    pub fn transmission(&self, y: f64) -> f64 {
        if self.slits.iter().any(|s| s.contains(y)) {
            1.0
        } else {
            0.0
        }
    }

    /// The same barrier reflected about `y = 0`.
    pub fn mirrored(&self) -> Barrier {
        Barrier { x: self.x, slits: self.slits.iter().map(|s| Slit { center: -s.center, width: s.width }).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    Copenhagen,
    Bohm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub center: [f64; 2],
    /// Standard deviation of |psi|^2 per axis.
    pub sigma: f64,
    /// Wave number along +x.
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusSpec {
    /// `(min, max, points)` per axis.
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
    pub packet: PacketSpec,
    pub barrier: Option<Barrier>,
    pub screen_x: f64,
    pub run_time: f64,
    pub dt: f64,
    /// Physical thickness of the absorbing layer on every edge.
    pub absorber_width: f64,
    pub absorber_strength: f64,
    pub mode: DetectionMode,
    pub shots: usize,
    pub bins: usize,
    /// Keep `|psi|^2` every this many steps (0 = none).
    pub snapshot_stride: usize,
    pub constants: PhysicalConstants,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    WeakCollimation { k0_sigma: f64 },
}

impl ApparatusSpec {
    /// Desk-scale default: wavelength 1, barrier 24 wavelengths before the screen.
    pub fn desk(barrier: Option<Barrier>) -> Self {
        ApparatusSpec {
            x: (-18.0, 32.0, 801),
            y: (-24.0, 24.0, 481),
            packet: PacketSpec { center: [0.0, 0.0], sigma: 2.0, k0: 2.0 * core::f64::consts::PI },
            barrier,
            screen_x: 26.0,
            run_time: 6.5,
            dt: 0.01,
            absorber_width: 4.0,
            absorber_strength: 30.0,
            mode: DetectionMode::Copenhagen,
            shots: 10_000,
            bins: 130,
            snapshot_stride: 0,
            constants: PhysicalConstants::default(),
        }
    }

    pub fn free_beam() -> Self {
        Self::desk(None)
    }

    pub fn single_slit(width: f64) -> Self {
        Self::desk(Some(Barrier { x: 2.0, slits: vec![Slit { center: 0.0, width }] }))
    }

    pub fn double_slit(separation: f64, width: f64) -> Self {
        let s = |c| Slit { center: c, width };
        Self::desk(Some(Barrier { x: 2.0, slits: vec![s(-0.5 * separation), s(0.5 * separation)] }))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::plane(self.x, self.y)
    }

    pub fn steps(&self) -> usize {
        math::ceil(self.run_time / self.dt - 1e-9) as usize
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.packet.k0
    }

    /// Barrier-to-screen distance (`0` without a barrier).
    pub fn lever_arm(&self) -> f64 {
        self.barrier.as_ref().map_or(0.0, |b| self.screen_x - b.x)
    }

    /// The part of the screen line outside the absorbing layers.
    pub fn screen_window(&self) -> (f64, f64) {
        (self.y.0 + self.absorber_width, self.y.1 - self.absorber_width)
    }

    pub fn propagator_config(&self) -> PropagatorConfig {
        let mut cfg = PropagatorConfig::new(self.dt, Scheme::Adi2D);
        cfg.boundary = Boundary::Absorbing { width: self.absorber_width, strength: self.absorber_strength };
        cfg.constants = self.constants;
        cfg
    }

    pub fn validate(&self) -> Result<Vec<Warning>> {
        let grid = self.grid()?;
        self.propagator_config().validate(&grid)?;
        let (x, y) = (grid.x(), grid.y());
        let inner = |v: f64| v > x.min + self.absorber_width && v < x.max() - self.absorber_width;
        if !inner(self.screen_x) {
            return Err(Error::Domain("screen must lie inside the absorbing frame"));
        }
        if let Some(b) = &self.barrier {
            if !inner(b.x) || b.x >= self.screen_x {
                return Err(Error::Domain("barrier must be interior and before the screen"));
            }
            if b.slits.iter().any(|s| !(s.width >= 4.0 * y.spacing() * (1.0 - 1e-12))) {
                return Err(Error::InvalidParameter("slit narrower than four grid rows"));
            }
        }
        if self.packet.center[0] >= self.screen_x {
            return Err(Error::Domain("packet starts beyond the screen"));
        }
        if !(self.packet.k0 > 0.0 && self.packet.sigma > 0.0) {
            return Err(Error::InvalidParameter("packet needs positive k0 and sigma"));
        }
        if !(self.run_time > 0.0) || self.shots == 0 || self.bins == 0 {
            return Err(Error::InvalidParameter("run time, shots and bins must be positive"));
        }
        let ks = self.packet.k0 * self.packet.sigma;
        Ok(if ks < COLLIMATION_WARNING { vec![Warning::WeakCollimation { k0_sigma: ks }] } else { Vec::new() })
    }
}

/// Masked, renormalized wave and the norm fraction that got through.
#[derive(Debug, Clone, PartialEq)]
pub struct Masked {
    pub psi: ComplexField,
    pub transmitted: f64,
}

pub fn apply_mask(psi: &ComplexField, barrier: &Barrier) -> Result<Masked> {
    let g = *psi.grid();
    if g.dims() != 2 || !(barrier.x > g.x().min && barrier.x < g.x().max()) {
        return Err(Error::Domain("barrier plane must lie inside a 2D domain"));
    }
    let before = psi.density().integrate();
    let rows: Vec<f64> = (0..g.ny()).map(|j| barrier.transmission(g.y().coord(j))).collect();
    let mut out = psi.clone();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        *v *= rows[k / g.nx()];
    }
    let transmitted = out.density().integrate() / before;
    if !(transmitted >= MIN_TRANSMISSION) {
        return Err(Error::UnderTransmission { transmitted });
    }
    Ok(Masked { psi: normalize(&out)?, transmitted })
}

/// Running time integral of `J_x` along the screen column.
#[derive(Debug, Clone)]
pub struct FluxAccumulator {
    column: usize,
    axis: Axis,
    scale: f64,
    last: Option<Vec<f64>>,
    integral: Vec<f64>,
    positive: f64,
    negative: f64,
}

impl FluxAccumulator {
    pub fn new(grid: &Grid, screen_x: f64, constants: &PhysicalConstants) -> Result<Self> {
        let x = grid.x();
        let u = x.locate(screen_x);
        if grid.dims() != 2 || !(u >= 1.0 && u <= (x.points - 2) as f64) {
            return Err(Error::Domain("screen column must be interior"));
        }
        Ok(FluxAccumulator {
            column: math::round(u) as usize,
            axis: *grid.y(),
            scale: constants.hbar / constants.mass,
            last: None,
            integral: vec![0.0; grid.ny()],
            positive: 0.0,
            negative: 0.0,
        })
    }

    fn current(&self, psi: &ComplexField) -> Vec<f64> {
        let g = psi.grid();
        let (i, h) = (self.column, g.x().spacing());
        (0..g.ny())
            .map(|j| {
                let p: Complex64 = psi.at(i, j);
                let d = (psi.at(i + 1, j) - psi.at(i - 1, j)) / (2.0 * h);
                self.scale * (p.conj() * d).im
            })
            .collect()
    }

    /// Adds the snapshot taken `dt` after the previous one (trapezoid rule).
    pub fn record(&mut self, psi: &ComplexField, dt: f64) {
        let now = self.current(psi);
        if let Some(prev) = &self.last {
            for j in 0..now.len() {
                let w = self.axis.spacing() * if j == 0 || j + 1 == now.len() { 0.5 } else { 1.0 };
                for v in [prev[j], now[j]] {
                    let part = 0.5 * dt * w * v;
                    if part >= 0.0 {
                        self.positive += part;
                    } else {
                        self.negative -= part;
                    }
                }
                self.integral[j] += 0.5 * dt * (prev[j] + now[j]);
            }
        }
        self.last = Some(now);
    }

    pub fn finish(self) -> Result<ScreenFlux> {
        let gross = self.positive + self.negative;
        let negative_fraction = if gross > 0.0 { self.negative / gross } else { 0.0 };
        if negative_fraction > MAX_BACKFLOW {
            return Err(Error::BackFlow { fraction: negative_fraction });
        }
        let grid = Grid::line(self.axis.min, self.axis.max(), self.axis.points)?;
        let clipped: Vec<f64> = self.integral.iter().map(|&v| v.max(0.0)).collect();
        let mut profile = RealField::from_values(grid, clipped)?;
        let passed = profile.integrate();
        if passed > 0.0 {
            for v in profile.values_mut() {
                *v /= passed;
            }
        }
        Ok(ScreenFlux { profile, passed, negative_fraction })
    }
}

/// Normalized time-integrated flux through the screen line.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenFlux {
    /// `P(y)`, integrating to one (all zeros if nothing arrived).
    pub profile: RealField,
    /// Probability that crossed the screen before normalization.
    pub passed: f64,
    pub negative_fraction: f64,
}

/// Flux profile of a wave stream sampled every `dt`.
pub fn screen_flux_profile(
    psi_stream: &[ComplexField],
    screen_x: f64,
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<ScreenFlux> {
    let first = psi_stream.first().ok_or(Error::InvalidParameter("empty wave stream"))?;
    let mut acc = FluxAccumulator::new(first.grid(), screen_x, constants)?;
    for psi in psi_stream {
        acc.record(psi, dt);
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohmRecord {
    /// Screen coordinate of each particle's first crossing, in particle order.
    pub crossings: Vec<f64>,
    /// Particles that never reached the screen.
    pub lost: usize,
    pub node_flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub flux: ScreenFlux,
    /// Time at which the mask was applied.
    pub mask_time: Option<f64>,
    /// Norm fraction passed by the mask (1 without a barrier).
    pub transmitted: f64,
    pub snapshots: Vec<(f64, RealField)>,
    pub bohm: Option<BohmRecord>,
}

/// Runs the wave (and, with `bohm`, a guided ensemble of `spec.shots` particles).
pub fn simulate(spec: &ApparatusSpec, seed: u64, bohm: bool) -> Result<Simulation> {
    spec.validate()?;
    let grid = spec.grid()?;
    let cfg = spec.propagator_config();
    let mut prop = Propagator::new(&RealField::zeros(grid), cfg)?;
    let p = spec.packet;
    let mut psi = gaussian_packet(grid, p.center, p.sigma, [p.k0, 0.0])?;
    let mut flux = FluxAccumulator::new(&grid, spec.screen_x, &spec.constants)?;
    let mut sim = Simulation {
        flux: ScreenFlux { profile: RealField::zeros(Grid::line(0.0, 1.0, 8)?), passed: 0.0, negative_fraction: 0.0 },
        mask_time: None,
        transmitted: 1.0,
        snapshots: Vec::new(),
        bohm: None,
    };
    let mut ensemble: Option<(ParticleEnsemble, GuidanceField)> = None;
    let mut crossed: Vec<Option<f64>> = Vec::new();
    let launch = |psi: &ComplexField, t: f64| -> Result<(ParticleEnsemble, GuidanceField)> {
        let mut e = sample_from_density(&psi.density(), spec.shots, seed)?;
        e.birth_time = t;
        e.time = t;
        Ok((e, GuidanceField::new(psi, spec.constants)))
    };
    let mut pending = spec.barrier.as_ref();
    if bohm && pending.is_none() {
        ensemble = Some(launch(&psi, 0.0)?);
    }
    flux.record(&psi, spec.dt);
    for step in 1..=spec.steps() {
        let t = step as f64 * spec.dt;
        if let Some(b) = pending {
            if expectation(&psi, |x, _| x) >= b.x {
                let m = apply_mask(&psi, b)?;
                psi = m.psi;
                sim.transmitted = m.transmitted;
                sim.mask_time = Some(t - spec.dt);
                pending = None;
                if bohm {
                    ensemble = Some(launch(&psi, t - spec.dt)?);
                }
            }
        }
        prop.step_in_place(&mut psi)?;
        flux.record(&psi, spec.dt);
        if let Some((e, current)) = &mut ensemble {
            if crossed.is_empty() {
                crossed = vec![None; e.len()];
            }
            let before = e.positions.clone();
            let next = GuidanceField::new(&psi, spec.constants);
            e.advance(TimeSlab { from: current, to: &next }, spec.dt);
            *current = next;
            let (lo, hi) = spec.screen_window();
            let left = spec.x.0 + spec.absorber_width;
            for k in 0..e.len() {
                let (a, b) = (before[k], e.positions[k]);
                // The absorbing frame is a probability sink; particles entering it are removed.
                if e.alive[k] && (b[1] < lo || b[1] > hi || b[0] < left) {
                    e.alive[k] = false;
                    continue;
                }
                if crossed[k].is_none() && a[0] < spec.screen_x && b[0] >= spec.screen_x {
                    let s = (spec.screen_x - a[0]) / (b[0] - a[0]);
                    crossed[k] = Some(a[1] + s * (b[1] - a[1]));
                    e.alive[k] = false;
                }
            }
        }
        if spec.snapshot_stride > 0 && step % spec.snapshot_stride == 0 {
            sim.snapshots.push((t, psi.density()));
        }
    }
    sim.flux = flux.finish()?;
    if let Some((e, _)) = ensemble {
        sim.bohm = Some(BohmRecord {
            crossings: crossed.iter().flatten().copied().collect(),
            lost: crossed.iter().filter(|c| c.is_none()).count(),
            node_flagged: e.node_flagged.iter().filter(|&&f| f).count(),
        });
    }
    Ok(sim)
}

/// `count` flash positions drawn from a normalized screen profile.
pub fn flash_samples(profile: &RealField, count: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(sample_from_density(profile, count, seed)?.positions.iter().map(|p| p[0]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenHistogram {
    pub histogram: Histogram,
    pub mode: DetectionMode,
    pub shots: usize,
    /// Entries that made it into the histogram (Bohm: first crossings).
    pub detected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub screen: ScreenHistogram,
    /// Raw detection coordinates.
    pub hits: Vec<f64>,
    pub simulation: Simulation,
}

pub fn run_experiment(spec: &ApparatusSpec, seed: u64) -> Result<Experiment> {
    let bohm = spec.mode == DetectionMode::Bohm;
    let simulation = simulate(spec, seed, bohm)?;
    let hits = match &simulation.bohm {
        Some(r) => r.crossings.clone(),
        None => flash_samples(&simulation.flux.profile, spec.shots, seed)?,
    };
    let (lo, hi) = spec.screen_window();
    let histogram = Histogram::from_samples(lo, hi, spec.bins, hits.iter().copied());
    let screen = ScreenHistogram { histogram, mode: spec.mode, shots: spec.shots, detected: hits.len() };
    Ok(Experiment { screen, hits, simulation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub tv: f64,
    /// Mean distance between two independent flash samples of the same size.
    pub baseline: f64,
    pub copenhagen: Vec<f64>,
    pub bohm: Vec<f64>,
    pub simulation: Simulation,
}

impl ModeComparison {
    pub fn holds(&self, factor: f64) -> bool {
        self.tv < factor * self.baseline
    }
}

pub fn compare_modes(spec: &ApparatusSpec, seed: u64) -> Result<ModeComparison> {
    compare_modes_seeded(spec, seed, seed)
}

/// Like [`compare_modes`] with separate seeds for the flashes and the ensemble.
pub fn compare_modes_seeded(spec: &ApparatusSpec, flash_seed: u64, bohm_seed: u64) -> Result<ModeComparison> {
    let simulation = simulate(spec, bohm_seed, true)?;
    let bohm = simulation.bohm.as_ref().map(|r| r.crossings.clone()).unwrap_or_default();
    let n = bohm.len();
    let profile = &simulation.flux.profile;
    let copenhagen = flash_samples(profile, n, flash_seed)?;
    let (lo, hi) = spec.screen_window();
    let tv = tv_between_samples(copenhagen.iter().copied(), bohm.iter().copied(), lo, hi, spec.bins);
    let mut baseline = 0.0;
    for r in 0..BASELINE_REPLICAS {
        let s = flash_seed ^ 0x5851_f42d_4c95_7f2d_u64.wrapping_mul(2 * r + 1);
        let a = flash_samples(profile, n, s)?;
        let b = flash_samples(profile, n, s.rotate_left(17) ^ 0xa5a5)?;
        baseline += tv_between_samples(a, b, lo, hi, spec.bins);
    }
    Ok(ModeComparison { tv, baseline: baseline / BASELINE_REPLICAS as f64, copenhagen, bohm, simulation })
}

/// Position of the maximum of a line profile.
pub fn peak_position(profile: &RealField) -> f64 {
    let v = profile.values();
    let k = (0..v.len()).fold(0, |b, k| if v[k] > v[b] { k } else { b });
    profile.grid().x().coord(k)
}

/// Full width at half maximum around the global peak (linear crossing points).
pub fn fwhm(profile: &RealField) -> Result<f64> {
    let v = profile.values();
    let axis = profile.grid().x();
    let k = (0..v.len()).fold(0, |b, k| if v[k] > v[b] { k } else { b });
    let half = 0.5 * v[k];
    if !(half > 0.0) {
        return Err(Error::NonPositiveDensity);
    }
    let mut hi = k;
    while hi + 1 < v.len() && v[hi + 1] > half {
        hi += 1;
    }
    let mut lo = k;
    while lo > 0 && v[lo - 1] > half {
        lo -= 1;
    }
    if hi + 1 == v.len() || lo == 0 {
        return Err(Error::Domain("half maximum not reached inside the screen"));
    }
    let cross = |a: usize, b: usize| {
        let f = (v[a] - half) / (v[a] - v[b]);
        axis.coord(a) + f * (axis.coord(b) - axis.coord(a))
    };
    Ok(cross(hi, hi + 1) - cross(lo, lo - 1))
}

/// Fringe measurements around the central maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Fringes {
    /// Distance between the two minima flanking the central maximum.
    pub spacing: f64,
    /// `(max - min) / (max + min)` with the mean of the central three maxima and
    /// the mean of the four minima bounding them.
    pub visibility: f64,
    pub maxima: Vec<f64>,
    pub minima: Vec<f64>,
}

/// Walks outward from the maximum nearest `y = 0`, alternating minima and maxima.
pub fn fringes(profile: &RealField) -> Result<Fringes> {
    let v = profile.values();
    let axis = profile.grid().x();
    let n = v.len();
    let centre = math::round(axis.locate(0.0)) as usize;
    let mut c = centre.min(n - 1);
    loop {
        let up = c + 1 < n && v[c + 1] > v[c];
        let down = c > 0 && v[c - 1] > v[c];
        if up && (!down || v[c + 1] >= v[c - 1]) {
            c += 1;
        } else if down {
            c -= 1;
        } else {
            break;
        }
    }
    // Next extremum from `k` moving by `dir`: descend for minima, ascend for maxima.
    let walk = |mut k: usize, dir: isize, descend: bool| -> Option<usize> {
        loop {
            let next = k as isize + dir;
            if next < 0 || next as usize >= n {
                return None;
            }
            let better = if descend { v[next as usize] < v[k] } else { v[next as usize] > v[k] };
            if !better {
                return Some(k);
            }
            k = next as usize;
        }
    };
    let err = || Error::Domain("fringe pattern does not fit on the screen");
    let mut maxima = vec![c];
    let mut minima = Vec::new();
    for dir in [-1isize, 1] {
        let m1 = walk(c, dir, true).ok_or_else(err)?;
        let x1 = walk(m1, dir, false).ok_or_else(err)?;
        let m2 = walk(x1, dir, true).ok_or_else(err)?;
        minima.extend([m1, m2]);
        maxima.push(x1);
    }
    let refine = |k: usize| {
        if k == 0 || k + 1 >= n {
            return axis.coord(k);
        }
        let (a, b, d) = (v[k - 1], v[k], v[k + 1]);
        let curv = a - 2.0 * b + d;
        let off = if curv.abs() > 0.0 { 0.5 * (a - d) / curv } else { 0.0 };
        axis.coord(k) + off.clamp(-0.5, 0.5) * axis.spacing()
    };
    let mean = |ks: &[usize]| ks.iter().map(|&k| v[k]).sum::<f64>() / ks.len() as f64;
    let (imax, imin) = (mean(&maxima), mean(&minima));
    Ok(Fringes {
        spacing: refine(minima[2]) - refine(minima[0]),
        visibility: (imax - imin) / (imax + imin),
        maxima: maxima.iter().map(|&k| refine(k)).collect(),
        minima: minima.iter().map(|&k| refine(k)).collect(),
    })
}

/// Far-field two-slit fringe spacing `lambda L / d`.
pub fn fraunhofer_spacing(spec: &ApparatusSpec, separation: f64) -> f64 {
    spec.wavelength() * spec.lever_arm() / separation
}

/// Far-field regime guard `L >= d^2 / lambda`.
pub fn fraunhofer_valid(spec: &ApparatusSpec, aperture: f64) -> bool {
    spec.lever_arm() >= aperture * aperture / spec.wavelength()
}

/// The four two-slit minima nearest the axis: `±Δy/2`, `±3Δy/2`.
pub fn analytic_minima(spec: &ApparatusSpec, separation: f64) -> [f64; 4] {
    let dy = fraunhofer_spacing(spec, separation);
    [-1.5 * dy, -0.5 * dy, 0.5 * dy, 1.5 * dy]
}

/// Share of `hits` within `half_width` of any of `centres`.
pub fn fraction_near(hits: &[f64], centres: &[f64], half_width: f64) -> f64 {
    if hits.is_empty() {
        return 0.0;
    }
    let inside = hits.iter().filter(|&&y| centres.iter().any(|&c| math::abs(y - c) <= half_width)).count();
    inside as f64 / hits.len() as f64
}

/// `∫|P(y) - P(-y)| dy / ∫P` on a line symmetric about zero.
pub fn mirror_asymmetry(profile: &RealField) -> f64 {
    let v = profile.values();
    let diff: Vec<f64> = v.iter().zip(v.iter().rev()).map(|(a, b)| math::abs(a - b)).collect();
    let d = RealField::from_values(*profile.grid(), diff).expect("same grid").integrate();
    let total = profile.integrate();
    if total > 0.0 {
        d / total
    } else {
        0.0
    }
}

/// `∫|P - Q| / ∫P` for two profiles on the same line.
pub fn l1_relative(p: &RealField, q: &RealField) -> f64 {
    let d = p.zip_map(q, |a, b| math::abs(a - b)).expect("same grid").integrate();
    d / p.integrate()
}
