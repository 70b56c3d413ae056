//! Pilot-wave layer: guidance velocities, particle ensembles and equivariance checks.
//!
//! Velocities come from bilinear interpolation of `Re psi`, `Im psi` and their
//! gradients, never of amplitude and phase separately.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{cell, gradient, Axis, ComplexField, Grid, PhysicalConstants, RealField};
use crate::histogram::{tv_distance, Histogram};
use crate::math;
use crate::rng::Stream;
use crate::schrodinger::{Propagator, PropagatorConfig};

/// Velocities are undefined below this fraction of the peak density.
pub const NODE_FLOOR: f64 = 1e-14;
/// Below this fraction of the peak density the integrator takes 16 substeps.
pub const NODE_REFINE: f64 = 1e-10;
pub const NODE_SUBSTEPS: usize = 16;

/// `psi` and its gradient, ready for point queries.
#[derive(Debug, Clone)]
pub struct GuidanceField {
    psi: ComplexField,
    grad: Vec<ComplexField>,
    peak_density: f64,
    constants: PhysicalConstants,
}

/// Interpolated `psi` and gradient at a point.
#[derive(Debug, Clone, Copy)]
struct Local {
    psi: Complex64,
    grad: [Complex64; 2],
}

impl GuidanceField {
    pub fn new(psi: &ComplexField, constants: PhysicalConstants) -> Self {
        let grad = gradient(psi);
        let peak_density = psi.values().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        GuidanceField { psi: psi.clone(), grad, peak_density, constants }
    }

    pub fn psi(&self) -> &ComplexField {
        &self.psi
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn peak_density(&self) -> f64 {
        self.peak_density
    }

    fn local(&self, p: [f64; 2]) -> Option<Local> {
        let psi = self.psi.interpolate(p)?;
        let mut grad = [Complex64::default(); 2];
        for (g, f) in grad.iter_mut().zip(&self.grad) {
            *g = f.interpolate(p)?;
        }
        Some(Local { psi, grad })
    }

    /// Interpolated `|psi|^2`, or `None` outside the grid.
    pub fn density(&self, p: [f64; 2]) -> Option<f64> {
        self.psi.interpolate(p).map(|z| z.norm_sqr())
    }

    pub fn velocity(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let l = self.local(p).ok_or(Error::LeftDomain)?;
        velocity_from(l, self.peak_density, &self.constants)
    }
}

fn velocity_from(l: Local, peak: f64, c: &PhysicalConstants) -> Result<[f64; 2]> {
    let rho = l.psi.norm_sqr();
    if !(rho > NODE_FLOOR * peak) {
        return Err(Error::NodeRegion);
    }
    let scale = c.hbar / (c.mass * rho);
    Ok(l.grad.map(|g| scale * (l.psi.conj() * g).im))
}

/// `v = J / |psi|^2` at `point`.
pub fn guidance_velocity(psi: &ComplexField, point: [f64; 2], constants: &PhysicalConstants) -> Result<[f64; 2]> {
    GuidanceField::new(psi, *constants).velocity(point)
}

/// Guidance field linearly interpolated in time between two snapshots.
#[derive(Debug, Clone, Copy)]
pub struct TimeSlab<'a> {
    pub from: &'a GuidanceField,
    pub to: &'a GuidanceField,
}

impl TimeSlab<'_> {
    fn local(&self, p: [f64; 2], s: f64) -> Option<Local> {
        let a = self.from.local(p)?;
        let b = self.to.local(p)?;
        let mix = |x: Complex64, y: Complex64| x * (1.0 - s) + y * s;
        Some(Local { psi: mix(a.psi, b.psi), grad: [mix(a.grad[0], b.grad[0]), mix(a.grad[1], b.grad[1])] })
    }

    fn peak(&self, s: f64) -> f64 {
        self.from.peak_density * (1.0 - s) + self.to.peak_density * s
    }

    /// Velocity at fraction `s` of the slab.
    pub fn velocity(&self, p: [f64; 2], s: f64) -> Result<[f64; 2]> {
        let l = self.local(p, s).ok_or(Error::LeftDomain)?;
        velocity_from(l, self.peak(s), &self.from.constants)
    }

    fn near_node(&self, p: [f64; 2], s: f64) -> bool {
        match self.local(p, s) {
            Some(l) => l.psi.norm_sqr() < NODE_REFINE * self.peak(s),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    /// Positions (`y = 0` on 1D grids).
    pub positions: Vec<[f64; 2]>,
    pub seed: u64,
    pub birth_time: f64,
    pub time: f64,
    /// `false` once a particle has left the grid; it is frozen and excluded from statistics.
    pub alive: Vec<bool>,
    /// Particles that hit an unresolved node region at least once.
    pub node_flagged: Vec<bool>,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<[f64; 2]>, seed: u64, birth_time: f64) -> Self {
        let n = positions.len();
        ParticleEnsemble { positions, seed, birth_time, time: birth_time, alive: vec![true; n], node_flagged: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn survivors(&self) -> impl Iterator<Item = &[f64; 2]> {
        self.positions.iter().zip(&self.alive).filter(|(_, &a)| a).map(|(p, _)| p)
    }

    pub fn lost_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.alive.iter().filter(|&&a| !a).count() as f64 / self.len() as f64
    }

    /// Advances every live particle across one slab of length `dt` (RK4).
    pub fn advance(&mut self, slab: TimeSlab<'_>, dt: f64) {
        let grid = *slab.from.grid();
        for k in 0..self.positions.len() {
            if !self.alive[k] {
                continue;
            }
            let p = self.positions[k];
            let sub = if slab.near_node(p, 0.0) { NODE_SUBSTEPS } else { 1 };
            let h = 1.0 / sub as f64;
            let mut q = p;
            for n in 0..sub {
                match rk4(&slab, q, n as f64 * h, h, dt) {
                    Ok(next) => q = next,
                    Err(Error::NodeRegion) => {
                        self.node_flagged[k] = true;
                    }
                    Err(_) => {
                        self.alive[k] = false;
                        break;
                    }
                }
                if !grid.contains(q) {
                    self.alive[k] = false;
                    break;
                }
            }
            self.positions[k] = q;
        }
        self.time += dt;
    }
}

/// One RK4 step over slab fractions `[s, s + h]`, physical length `h * dt`.
fn rk4(slab: &TimeSlab<'_>, p: [f64; 2], s: f64, h: f64, dt: f64) -> Result<[f64; 2]> {
    let tau = h * dt;
    let add = |p: [f64; 2], v: [f64; 2], f: f64| [p[0] + f * v[0], p[1] + f * v[1]];
    let k1 = slab.velocity(p, s)?;
    let k2 = slab.velocity(add(p, k1, 0.5 * tau), s + 0.5 * h)?;
    let k3 = slab.velocity(add(p, k2, 0.5 * tau), s + 0.5 * h)?;
    let k4 = slab.velocity(add(p, k3, tau), s + h)?;
    Ok([
        p[0] + tau / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + tau / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Positions of every particle at every snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub times: Vec<f64>,
    /// `positions[t][particle]`.
    pub positions: Vec<Vec<[f64; 2]>>,
    pub final_state: ParticleEnsemble,
}

/// Co-moves the ensemble through `psi_stream` (snapshots spaced `dt`, the first at
/// the ensemble's current time).
pub fn advance_ensemble(
    ensemble: &ParticleEnsemble,
    psi_stream: &[ComplexField],
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<EnsembleRecord> {
    let mut e = ensemble.clone();
    let mut times = vec![e.time];
    let mut positions = vec![e.positions.clone()];
    if e.is_empty() {
        return Ok(EnsembleRecord { times: Vec::new(), positions: Vec::new(), final_state: e });
    }
    let fields: Vec<GuidanceField> = psi_stream.iter().map(|p| GuidanceField::new(p, *constants)).collect();
    for w in fields.windows(2) {
        e.advance(TimeSlab { from: &w[0], to: &w[1] }, dt);
        times.push(e.time);
        positions.push(e.positions.clone());
    }
    Ok(EnsembleRecord { times, positions, final_state: e })
}

fn validate_density(rho: &RealField) -> Result<()> {
    if rho.values().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || !(rho.integrate() > 0.0) {
        return Err(Error::NonPositiveDensity);
    }
    Ok(())
}

/// Cumulative masses of the piecewise-linear interpolant of `values` over the axis cells.
fn cell_masses(axis: &Axis, values: &[f64]) -> Vec<f64> {
    let h = axis.spacing();
    let mut acc = Vec::with_capacity(values.len());
    let mut total = 0.0;
    acc.push(0.0);
    for w in values.windows(2) {
        total += 0.5 * (w[0] + w[1]) * h;
        acc.push(total);
    }
    acc
}

/// Inverse CDF of a piecewise-linear density: `u` in [0, 1).
fn invert_linear(axis: &Axis, values: &[f64], cumulative: &[f64], u: f64) -> f64 {
    let total = *cumulative.last().unwrap();
    let target = u * total;
    // First cell whose upper cumulative exceeds the target, skipping empty cells.
    let mut c = cumulative.partition_point(|&m| m <= target).clamp(1, values.len() - 1) - 1;
    while c + 1 < values.len() - 1 && cumulative[c + 1] - cumulative[c] <= 0.0 {
        c += 1;
    }
    let h = axis.spacing();
    let (a, b) = (values[c], values[c + 1]);
    let need = (target - cumulative[c]).max(0.0);
    // Solve h (a s + (b - a) s^2 / 2) = need for s in [0, 1].
    let s = if need <= 0.0 {
        0.0
    } else if math::abs(b - a) <= 1e-12 * (a + b) {
        if a + b > 0.0 {
            need / (h * 0.5 * (a + b))
        } else {
            0.5
        }
    } else {
        let q = need / h;
        let disc = (a * a + 2.0 * (b - a) * q).max(0.0);
        // Stable root of (b-a)/2 s^2 + a s - q = 0.
        2.0 * q / (a + math::sqrt(disc))
    };
    axis.coord(c) + s.clamp(0.0, 1.0) * h
}

/// Draws `count` positions from the (bilinearly interpolated) density `rho`.
///
/// Particle `k` uses its own stream `(seed, k)`. In 2D the row coordinate is drawn
/// from the marginal and the column from the conditional density on that line.
pub fn sample_from_density(rho: &RealField, count: usize, seed: u64) -> Result<ParticleEnsemble> {
    validate_density(rho)?;
    let g = *rho.grid();
    let xs = g.x();
    let positions = if g.dims() == 1 {
        let cum = cell_masses(xs, rho.values());
        (0..count)
            .map(|k| {
                let mut s = Stream::new(seed, k as u64);
                [invert_linear(xs, rho.values(), &cum, s.uniform()), 0.0]
            })
            .collect()
    } else {
        let (nx, ny) = (g.nx(), g.ny());
        let rows: Vec<&[f64]> = (0..ny).map(|j| &rho.values()[j * nx..(j + 1) * nx]).collect();
        let marginal: Vec<f64> = rows.iter().map(|r| *cell_masses(xs, r).last().unwrap()).collect();
        let ys = g.y();
        let cum_y = cell_masses(ys, &marginal);
        (0..count)
            .map(|k| {
                let mut s = Stream::new(seed, k as u64);
                let y = invert_linear(ys, &marginal, &cum_y, s.uniform());
                let (j, t) = cell(ys, y).expect("sampled inside the axis");
                let line: Vec<f64> = rows[j].iter().zip(rows[j + 1]).map(|(a, b)| a * (1.0 - t) + b * t).collect();
                let cum_x = cell_masses(xs, &line);
                [invert_linear(xs, &line, &cum_x, s.uniform()), y]
            })
            .collect()
    };
    Ok(ParticleEnsemble::new(positions, seed, 0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    pub baseline: Vec<f64>,
    pub lost_fraction: f64,
}

impl EquivarianceReport {
    /// `tv < factor * baseline` at every checkpoint.
    pub fn holds(&self, factor: f64) -> bool {
        self.tv.iter().zip(&self.baseline).all(|(t, b)| *t < factor * b)
    }
}

/// Fresh same-size samples averaged into the baseline distance.
pub const BASELINE_REPLICAS: u64 = 8;

/// Histogram of the ensemble's first coordinate against the binned density of `psi`,
/// and the mean distance of fresh same-size samples drawn from that density.
fn ensemble_tv(e: &ParticleEnsemble, psi: &ComplexField, bins: usize, fresh_seed: u64) -> Result<(f64, f64)> {
    let axis = *psi.grid().x();
    let rho = psi.density();
    let exact = Histogram::from_density(axis.min, axis.max(), bins, &axis, rho.values());
    let sample = Histogram::from_samples(axis.min, axis.max(), bins, e.survivors().map(|p| p[0]));
    let count = e.survivors().count();
    let mut baseline = 0.0;
    for r in 0..BASELINE_REPLICAS {
        let fresh = sample_from_density(&rho, count, fresh_seed.wrapping_add(r))?;
        let h = Histogram::from_samples(axis.min, axis.max(), bins, fresh.positions.iter().map(|p| p[0]));
        baseline += tv_distance(&h, &exact);
    }
    Ok((tv_distance(&sample, &exact), baseline / BASELINE_REPLICAS as f64))
}

/// Samples `count` particles from `|psi0|^2`, co-evolves wave and particles for
/// `n_steps` steps, and compares the binned ensemble to the binned `|psi|^2` every
/// `checkpoint_stride` steps (1D grids).
#[allow(clippy::too_many_arguments)]
pub fn equivariance_test(
    psi0: &ComplexField,
    potential: &RealField,
    cfg: &PropagatorConfig,
    count: usize,
    bins: usize,
    n_steps: usize,
    checkpoint_stride: usize,
    seed: u64,
) -> Result<EquivarianceReport> {
    if psi0.grid().dims() != 1 {
        return Err(Error::InvalidParameter("equivariance is binned along a line"));
    }
    let mut prop = Propagator::new(potential, *cfg)?;
    let mut ensemble = sample_from_density(&psi0.density(), count, seed)?;
    let mut psi = psi0.clone();
    let mut report = EquivarianceReport { times: Vec::new(), tv: Vec::new(), baseline: Vec::new(), lost_fraction: 0.0 };
    let stride = checkpoint_stride.max(1);
    let checkpoint = |e: &ParticleEnsemble, psi: &ComplexField, k: u64, r: &mut EquivarianceReport| -> Result<()> {
        let (tv, base) = ensemble_tv(e, psi, bins, seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k + 1)))?;
        r.times.push(e.time);
        r.tv.push(tv);
        r.baseline.push(base);
        Ok(())
    };
    checkpoint(&ensemble, &psi, 0, &mut report)?;
    let mut current = GuidanceField::new(&psi, cfg.constants);
    for s in 1..=n_steps {
        prop.step_in_place(&mut psi)?;
        let next = GuidanceField::new(&psi, cfg.constants);
        ensemble.advance(TimeSlab { from: &current, to: &next }, cfg.dt);
        current = next;
        if s % stride == 0 {
            checkpoint(&ensemble, &psi, s as u64, &mut report)?;
        }
    }
    report.lost_fraction = ensemble.lost_fraction();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleBoundary {
    Periodic,
    /// No flux through the outer faces.
    Closed,
}

/// Donor-cell finite-volume transport of `rho` under `velocity(t)` (one nodal
/// field per axis). Cells are centred on nodes; face velocities are averages of
/// the two adjacent nodes.
pub fn continuity_oracle(
    rho0: &RealField,
    mut velocity: impl FnMut(f64) -> Vec<RealField>,
    dt: f64,
    n_steps: usize,
    boundary: OracleBoundary,
) -> Result<RealField> {
    let g = *rho0.grid();
    let mut rho = rho0.values().to_vec();
    let mut flux = vec![0.0; g.len()];
    for s in 0..n_steps {
        let v = velocity(s as f64 * dt);
        if v.len() != g.dims() || v.iter().any(|f| *f.grid() != g) {
            return Err(Error::GridMismatch);
        }
        for (axis, va) in v.iter().enumerate() {
            let h = g.axis(axis).spacing();
            let courant = va.max_abs() * dt / h;
            if courant > 0.9 {
                return Err(Error::CflViolation { courant });
            }
            let (stride, len) = if axis == 0 { (1, g.nx()) } else { (g.nx(), g.ny()) };
            // flux[k] holds the flux through the face between node k and its successor.
            for k in 0..g.len() {
                let (i, j) = g.node(k);
                let pos = if axis == 0 { i } else { j };
                let next = if pos + 1 < len {
                    Some(k + stride)
                } else if boundary == OracleBoundary::Periodic {
                    Some(k + stride - len * stride)
                } else {
                    None
                };
                flux[k] = match next {
                    Some(n) => {
                        let vf = 0.5 * (va.values()[k] + va.values()[n]);
                        if vf > 0.0 {
                            vf * rho[k]
                        } else {
                            vf * rho[n]
                        }
                    }
                    None => 0.0,
                };
            }
            let mut updated = rho.clone();
            for k in 0..g.len() {
                let (i, j) = g.node(k);
                let pos = if axis == 0 { i } else { j };
                let prev = if pos > 0 {
                    Some(k - stride)
                } else if boundary == OracleBoundary::Periodic {
                    Some(k + (len - 1) * stride)
                } else {
                    None
                };
                let inflow = prev.map_or(0.0, |p| flux[p]);
                updated[k] -= dt / h * (flux[k] - inflow);
            }
            rho = updated;
        }
    }
    RealField::from_values(g, rho)
}

/// Total-variation distance between two particle sets binned along `x`.
pub fn tv_between_samples(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>, min: f64, max: f64, bins: usize) -> f64 {
    tv_distance(&Histogram::from_samples(min, max, bins, a), &Histogram::from_samples(min, max, bins, b))
}
