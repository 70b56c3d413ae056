//! Classical mechanics: Verlet trajectories, actions along real paths, and action
//! surfaces assembled from trajectory families (fixed energy, or point source in time).
//!
//! Surfaces are built by shooting real trajectories and interpolating their actions
//! onto grid nodes; no Hamilton–Jacobi PDE is solved directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fields::{gradient, gradient_norm_squared, time_derivative, Field, Grid, RealField};
use crate::math;
use crate::summation::pairwise_sum;

/// A potential energy `U(x)` with its force `-grad U`.
pub trait Potential<const D: usize> {
    fn value(&self, x: [f64; D]) -> f64;
    fn force(&self, x: [f64; D]) -> [f64; D];
    /// Whether `x` lies where the potential is defined.
    fn contains(&self, _x: [f64; D]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticPotential {
    Free,
    Constant(f64),
    /// `U = -force * x` (uniform force along the first axis).
    Linear { force: f64 },
    /// `U = stiffness |x|^2 / 2`.
    Harmonic { stiffness: f64 },
}

impl<const D: usize> Potential<D> for AnalyticPotential {
    fn value(&self, x: [f64; D]) -> f64 {
        match *self {
            AnalyticPotential::Free => 0.0,
            AnalyticPotential::Constant(u) => u,
            AnalyticPotential::Linear { force } => -force * x[0],
            AnalyticPotential::Harmonic { stiffness } => {
                0.5 * stiffness * x.iter().map(|v| v * v).sum::<f64>()
            }
        }
    }

    fn force(&self, x: [f64; D]) -> [f64; D] {
        let mut f = [0.0; D];
        match *self {
            AnalyticPotential::Free | AnalyticPotential::Constant(_) => {}
            AnalyticPotential::Linear { force } => f[0] = force,
            AnalyticPotential::Harmonic { stiffness } => {
                for (fi, xi) in f.iter_mut().zip(x) {
                    *fi = -stiffness * xi;
                }
            }
        }
        f
    }
}

/// Potential sampled on a grid; value and gradient are interpolated bilinearly.
#[derive(Debug, Clone)]
pub struct SampledPotential {
    field: RealField,
    grad: Vec<RealField>,
}

impl SampledPotential {
    pub fn new(field: RealField) -> Self {
        let grad = gradient(&field);
        SampledPotential { field, grad }
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    fn point<const D: usize>(x: [f64; D]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (a, v) in x.iter().enumerate().take(2) {
            p[a] = *v;
        }
        p
    }
}

impl<const D: usize> Potential<D> for SampledPotential {
    fn value(&self, x: [f64; D]) -> f64 {
        self.field.interpolate(Self::point(x)).unwrap_or(0.0)
    }

    fn force(&self, x: [f64; D]) -> [f64; D] {
        let p = Self::point(x);
        let mut f = [0.0; D];
        for (a, fa) in f.iter_mut().enumerate().take(self.grad.len()) {
            *fa = -self.grad[a].interpolate(p).unwrap_or(0.0);
        }
        f
    }

    fn contains(&self, x: [f64; D]) -> bool {
        self.field.grid().contains(Self::point(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; D]>,
    pub velocities: Vec<[f64; D]>,
    pub mass: f64,
}

impl<const D: usize> Trajectory<D> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn energies(&self, u: &impl Potential<D>) -> Vec<f64> {
        self.positions
            .iter()
            .zip(&self.velocities)
            .map(|(x, v)| 0.5 * self.mass * dot(v, v) + u.value(*x))
            .collect()
    }

    /// Momentum at the last sample.
    pub fn final_momentum(&self) -> [f64; D] {
        let v = self.velocities.last().copied().unwrap_or([0.0; D]);
        v.map(|c| c * self.mass)
    }
}

fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Velocity-Verlet integration of `m x'' = -grad U`.
pub fn integrate_trajectory<const D: usize>(
    u: &impl Potential<D>,
    x0: [f64; D],
    v0: [f64; D],
    dt: f64,
    n_steps: usize,
    mass: f64,
) -> Result<Trajectory<D>> {
    if !(dt > 0.0 && mass > 0.0) {
        return Err(Error::InvalidParameter("dt and mass must be positive"));
    }
    if !u.contains(x0) {
        return Err(Error::LeftDomain);
    }
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_steps + 1),
        positions: Vec::with_capacity(n_steps + 1),
        velocities: Vec::with_capacity(n_steps + 1),
        mass,
    };
    let (mut x, mut v) = (x0, v0);
    let mut a = u.force(x).map(|f| f / mass);
    traj.times.push(0.0);
    traj.positions.push(x);
    traj.velocities.push(v);
    for step in 1..=n_steps {
        for d in 0..D {
            x[d] += dt * v[d] + 0.5 * dt * dt * a[d];
        }
        if !u.contains(x) {
            return Err(Error::LeftDomain);
        }
        let a_new = u.force(x).map(|f| f / mass);
        for d in 0..D {
            v[d] += 0.5 * dt * (a[d] + a_new[d]);
        }
        a = a_new;
        traj.times.push(step as f64 * dt);
        traj.positions.push(x);
        traj.velocities.push(v);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `max |E(t) - E(0)| / |E(0)|` over the run (bounded oscillation for Verlet).
    pub max_relative_deviation: f64,
    /// Shift of the energy mid-range between the two halves of the run, relative to `|E(0)|`.
    pub secular_drift: f64,
}

pub fn energy_report<const D: usize>(traj: &Trajectory<D>, u: &impl Potential<D>) -> EnergyReport {
    let e = traj.energies(u);
    let e0 = e[0];
    let scale = if e0 != 0.0 { math::abs(e0) } else { 1.0 };
    let max_dev = e.iter().map(|v| math::abs(v - e0)).fold(0.0, f64::max) / scale;
    // Bounded Verlet oscillation cancels in the mid-range of each half of the run,
    // provided each half spans at least one oscillation period.
    let half = e.len() / 2;
    let midrange = |xs: &[f64]| {
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        0.5 * (lo + hi)
    };
    let drift = if half == 0 { 0.0 } else { midrange(&e[half..]) - midrange(&e[..half]) };
    EnergyReport { max_relative_deviation: max_dev, secular_drift: math::abs(drift) / scale }
}

/// Trapezoidal `int (m v^2 / 2 - U) dt` along the trajectory.
pub fn action_along<const D: usize>(traj: &Trajectory<D>, u: &impl Potential<D>) -> f64 {
    let lagrangian: Vec<f64> = traj
        .positions
        .iter()
        .zip(&traj.velocities)
        .map(|(x, v)| 0.5 * traj.mass * dot(v, v) - u.value(*x))
        .collect();
    let pieces: Vec<f64> = (1..traj.len())
        .map(|k| 0.5 * (lagrangian[k] + lagrangian[k - 1]) * (traj.times[k] - traj.times[k - 1]))
        .collect();
    pairwise_sum(&pieces)
}

/// Launch of a fixed-energy family member: start point and direction (+1 or -1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Launch {
    pub x0: f64,
    pub direction: f64,
}

/// Action sampled on a 1D grid, assembled from real trajectories.
#[derive(Debug, Clone)]
pub struct ActionSurface {
    pub action: RealField,
    /// `true` where some trajectory arrived.
    pub mask: Vec<bool>,
    /// `true` where more than one family branch arrived (least action kept).
    pub multivalued: Vec<bool>,
    pub energy: f64,
    pub launches: Vec<Launch>,
}

impl ActionSurface {
    /// Mask of nodes whose centred stencil only touches reached nodes.
    pub fn interior_mask(&self) -> Vec<bool> {
        erode(&self.mask)
    }
}

fn hermite((xa, sa, pa): Arrival, (xb, sb, pb): Arrival, x: f64) -> f64 {
    let h = xb - xa;
    let t = (x - xa) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * sa
        + (t3 - 2.0 * t2 + t) * h * pa
        + (-2.0 * t3 + 3.0 * t2) * sb
        + (t3 - t2) * h * pb
}

fn erode(mask: &[bool]) -> Vec<bool> {
    let n = mask.len();
    (0..n)
        .map(|i| mask[i] && i > 0 && i + 1 < n && mask[i - 1] && mask[i + 1])
        .collect()
}

/// Arrival sample of a family member: position, action, and momentum `dS/dx` there.
type Arrival = (f64, f64, f64);

/// Deposits a branch onto grid nodes with cubic Hermite interpolation (values plus
/// slopes `p = dS/dx`), keeping the least action where branches overlap.
struct Deposit {
    action: Vec<f64>,
    seen: Vec<u32>,
    branch_of: Vec<usize>,
}

impl Deposit {
    fn new(len: usize) -> Self {
        Deposit { action: vec![f64::INFINITY; len], seen: vec![0; len], branch_of: vec![usize::MAX; len] }
    }

    fn segment(&mut self, grid: &Grid, branch: usize, (xa, sa, pa): Arrival, (xb, sb, pb): Arrival) {
        let axis = grid.x();
        let (lo, hi) = if xa <= xb { (xa, xb) } else { (xb, xa) };
        let first = math::floor(axis.locate(lo)) as i64;
        let last = math::floor(axis.locate(hi)) as i64 + 1;
        for i in first.max(0)..=last.min(axis.points as i64 - 1) {
            let i = i as usize;
            let x = axis.coord(i);
            // Half-open segments; a degenerate segment covers only its own point.
            let inside = if hi == lo { x == lo } else { x >= lo && x < hi };
            if !inside {
                continue;
            }
            let s = if xb == xa { sa.min(sb) } else { hermite((xa, sa, pa), (xb, sb, pb), x) };
            if self.branch_of[i] != branch {
                self.seen[i] += 1;
                self.branch_of[i] = branch;
            }
            if s < self.action[i] {
                self.action[i] = s;
            }
        }
    }

    fn finish(self, grid: Grid) -> Result<(RealField, Vec<bool>, Vec<bool>)> {
        let mask: Vec<bool> = self.action.iter().map(|s| s.is_finite()).collect();
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptyReachableSet);
        }
        let multivalued = self.seen.iter().map(|&c| c > 1).collect();
        let values = self.action.into_iter().map(|s| if s.is_finite() { s } else { 0.0 }).collect();
        Ok((Field::from_values(grid, values)?, mask, multivalued))
    }
}

/// Reduced action `W(x) = int p dx` from real trajectories sharing energy `E`.
///
/// Each launch is integrated with Verlet until it leaves the grid or turns around;
/// along the path `W` accumulates `(L + E) dt`. Nodes no trajectory reaches (for
/// example where `U > E`) are masked.
pub fn action_surface_fixed_energy(
    u: &impl Potential<1>,
    grid: Grid,
    launches: &[Launch],
    energy: f64,
    mass: f64,
    dt: f64,
) -> Result<ActionSurface> {
    if grid.dims() != 1 {
        return Err(Error::InvalidParameter("fixed-energy surfaces are built on 1D grids"));
    }
    if !(dt > 0.0 && mass > 0.0) {
        return Err(Error::InvalidParameter("dt and mass must be positive"));
    }
    let axis = *grid.x();
    let mut deposit = Deposit::new(grid.len());
    for (branch, launch) in launches.iter().enumerate() {
        let kinetic = energy - u.value([launch.x0]);
        if kinetic <= 0.0 || !(launch.x0 >= axis.min && launch.x0 <= axis.max()) {
            continue;
        }
        let mut x = launch.x0;
        let mut v = launch.direction.signum() * math::sqrt(2.0 * kinetic / mass);
        let mut a = u.force([x])[0] / mass;
        let mut w = 0.0;
        let mut integrand = mass * v * v;
        // Guard against trajectories that never leave (bound orbits): one full sweep.
        let max_steps = ((4.0 * axis.extent / (math::abs(v) * dt)) as usize).max(16) * 8;
        for _ in 0..max_steps {
            let x_new = x + dt * v + 0.5 * dt * dt * a;
            let a_new = u.force([x_new])[0] / mass;
            let v_new = v + 0.5 * dt * (a + a_new);
            if v_new * v <= 0.0 {
                break;
            }
            let lag = 0.5 * mass * v_new * v_new - u.value([x_new]);
            let integrand_new = lag + energy;
            let w_new = w + 0.5 * (integrand + integrand_new) * dt;
            // Nodes past the grid edge are skipped by the deposit itself.
            deposit.segment(&grid, branch, (x, w, mass * v), (x_new, w_new, mass * v_new));
            if x_new < axis.min || x_new > axis.max() {
                break;
            }
            x = x_new;
            v = v_new;
            a = a_new;
            w = w_new;
            integrand = integrand_new;
        }
    }
    let (action, mask, multivalued) = deposit.finish(grid)?;
    Ok(ActionSurface { action, mask, multivalued, energy, launches: launches.to_vec() })
}

/// Nodes where the residual is reported, with the fraction excluded.
#[derive(Debug, Clone)]
pub struct MaskedResidual {
    pub residual: RealField,
    pub mask: Vec<bool>,
}

impl MaskedResidual {
    pub fn stats(&self) -> crate::fields::ResidualStats {
        crate::fields::ResidualStats::masked(&self.residual, &self.mask)
    }
}

/// `(grad S)^2 - 2m (E - U)` on nodes whose stencil is fully reached.
pub fn hj_residual_stationary(
    surface: &ActionSurface,
    u: &impl Potential<1>,
    energy: f64,
    mass: f64,
) -> Result<MaskedResidual> {
    let grid = *surface.action.grid();
    let g2 = gradient_norm_squared(&surface.action);
    let mask = surface.interior_mask();
    let values = (0..grid.len())
        .map(|k| {
            if mask[k] {
                let x = grid.x().coord(k);
                g2.values()[k] - 2.0 * mass * (energy - u.value([x]))
            } else {
                0.0
            }
        })
        .collect();
    Ok(MaskedResidual { residual: Field::from_values(grid, values)?, mask })
}

/// Residual of a bare action field (no family metadata); every node is evaluated.
pub fn hj_residual_stationary_field(
    action: &RealField,
    potential: &RealField,
    energy: f64,
    mass: f64,
) -> Result<RealField> {
    let g2 = gradient_norm_squared(action);
    g2.zip_map(potential, |g, u| g - 2.0 * mass * (energy - u))
}

/// `dS/dt + (grad S)^2 / 2m + U` at the middle of three snapshots.
pub fn hj_residual_time_dependent(
    snapshots: [&RealField; 3],
    dt: f64,
    potential: &RealField,
    mass: f64,
) -> Result<RealField> {
    let s_t = time_derivative(snapshots, dt)?;
    let g2 = gradient_norm_squared(snapshots[1]);
    let kinetic = g2.zip_map(&s_t, |g, st| st + g / (2.0 * mass))?;
    kinetic.zip_map(potential, |a, u| a + u)
}

/// `p = grad S`.
pub fn momentum_from_action(action: &RealField) -> Vec<RealField> {
    gradient(action)
}

/// `E = -dS/dt` from three snapshots.
pub fn energy_from_action(snapshots: [&RealField; 3], dt: f64) -> Result<RealField> {
    Ok(time_derivative(snapshots, dt)?.map(|v| -v))
}

/// Action `S(x, t)` on a 1D grid at a sequence of times, from trajectories leaving one point.
#[derive(Debug, Clone)]
pub struct TimeActionSurface {
    pub times: Vec<f64>,
    pub snapshots: Vec<RealField>,
    pub masks: Vec<Vec<bool>>,
    pub multivalued: Vec<Vec<bool>>,
}

impl TimeActionSurface {
    pub fn snapshot_spacing(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Mask valid for the middle of snapshots `k-1, k, k+1` with full spatial stencils.
    pub fn stencil_mask(&self, k: usize) -> Vec<bool> {
        let a = erode(&self.masks[k - 1]);
        let b = erode(&self.masks[k]);
        let c = erode(&self.masks[k + 1]);
        (0..a.len()).map(|i| a[i] && b[i] && c[i]).collect()
    }
}

/// Point-source family: trajectories leave `x0` at `t = 0` with velocities spread
/// uniformly over `[v_min, v_max]`; each is integrated with Verlet step `dt` and the
/// action `int L dt` is interpolated onto the grid at `times` (multiples of `dt`).
#[allow(clippy::too_many_arguments)]
pub fn action_surface_point_source(
    u: &impl Potential<1>,
    grid: Grid,
    x0: f64,
    velocities: (f64, f64, usize),
    times: &[f64],
    dt: f64,
    mass: f64,
) -> Result<TimeActionSurface> {
    if grid.dims() != 1 {
        return Err(Error::InvalidParameter("point-source surfaces are built on 1D grids"));
    }
    let (v_min, v_max, count) = velocities;
    if count < 2 || !(v_max > v_min) {
        return Err(Error::InvalidParameter("need at least two distinct launch velocities"));
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let steps = math::floor(t_end / dt + 0.5) as usize;
    let stride: Vec<usize> = times.iter().map(|t| math::floor(t / dt + 0.5) as usize).collect();
    // arrivals[k][member] = (x, S, p)
    let mut arrivals = vec![Vec::with_capacity(count); times.len()];
    for m in 0..count {
        let v0 = v_min + (v_max - v_min) * m as f64 / (count - 1) as f64;
        let (mut x, mut v) = (x0, v0);
        let mut a = u.force([x])[0] / mass;
        let mut lag = 0.5 * mass * v * v - u.value([x]);
        let mut s = 0.0;
        let mut next = 0;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by_key(|&k| stride[k]);
        for step in 0..=steps {
            while next < order.len() && stride[order[next]] == step {
                arrivals[order[next]].push((x, s, mass * v));
                next += 1;
            }
            if step == steps {
                break;
            }
            let x_new = x + dt * v + 0.5 * dt * dt * a;
            let a_new = u.force([x_new])[0] / mass;
            let v_new = v + 0.5 * dt * (a + a_new);
            let lag_new = 0.5 * mass * v_new * v_new - u.value([x_new]);
            s += 0.5 * (lag + lag_new) * dt;
            x = x_new;
            v = v_new;
            a = a_new;
            lag = lag_new;
        }
    }
    let mut snapshots = Vec::with_capacity(times.len());
    let mut masks = Vec::with_capacity(times.len());
    let mut multi = Vec::with_capacity(times.len());
    for members in &arrivals {
        let mut deposit = Deposit::new(grid.len());
        for w in members.windows(2) {
            // Each adjacent pair of family members is its own branch for caustic detection.
            deposit.segment(&grid, usize::MAX - 1, w[0], w[1]);
        }
        if let Some(&last) = members.last() {
            deposit.segment(&grid, usize::MAX - 1, last, last);
        }
        let (field, mask, _) = deposit.finish(grid)?;
        multi.push(caustic_nodes(&grid, members));
        snapshots.push(field);
        masks.push(mask);
    }
    Ok(TimeActionSurface { times: times.to_vec(), snapshots, masks, multivalued: multi })
}

/// Nodes covered by more than one monotone run of arrival points.
fn caustic_nodes(grid: &Grid, members: &[Arrival]) -> Vec<bool> {
    let mut cover = vec![0u32; grid.len()];
    let mut start = 0;
    let axis = grid.x();
    let mut runs = Vec::new();
    for k in 1..members.len() {
        let rising = members[k].0 >= members[k - 1].0;
        let prev_rising = k < 2 || members[k - 1].0 >= members[k - 2].0;
        if k >= 2 && rising != prev_rising {
            runs.push((start, k - 1));
            start = k - 1;
        }
    }
    runs.push((start, members.len().saturating_sub(1)));
    for (a, b) in runs {
        let lo = members[a].0.min(members[b].0);
        let hi = members[a].0.max(members[b].0);
        for (i, c) in cover.iter_mut().enumerate() {
            let x = axis.coord(i);
            if x >= lo && x <= hi {
                *c += 1;
            }
        }
    }
    cover.into_iter().map(|c| c > 1).collect()
}
