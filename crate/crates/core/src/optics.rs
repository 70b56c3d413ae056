//! Geometrical optics: reflection and refraction laws, eikonal and wave-equation
//! residuals, phase velocity, local wavelength, and ray tracing through n(x, y).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::fields::{
    gradient, gradient_norm_squared, laplacian, second_time_derivative, time_derivative,
    ComplexField, Field, Grid, RealField, ResidualStats,
};
use crate::fields::cell;
use crate::math;

/// Gradients with magnitude below this are treated as singular (caustics, flat phase).
pub const SINGULAR_GRADIENT: f64 = 1e-12;

/// Smallest admissible refractive index.
pub const MIN_INDEX: f64 = 1e-6;

fn check_angle(theta: f64) -> Result<()> {
    if (0.0..FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::OutOfRange("incidence angle must lie in [0, pi/2)"))
    }
}

/// Law of reflection: the reflected angle equals the incident one.
pub fn reflect(theta1: f64) -> Result<f64> {
    check_angle(theta1)?;
    Ok(theta1)
}

/// Refraction of a particle beam: `sin(theta2) = sin(theta1) v1 / v2`.
///
/// Faster particles in the second medium bend *toward* the normal.
pub fn snell_corpuscular(theta1: f64, v1: f64, v2: f64) -> Result<f64> {
    check_angle(theta1)?;
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::OutOfRange("speeds must be positive"));
    }
    let sin_theta2 = math::sin(theta1) * v1 / v2;
    if sin_theta2 > 1.0 {
        return Err(Error::NoTransmission { sin_theta2 });
    }
    Ok(math::asin(sin_theta2))
}

/// Refraction of a wave: `sin(theta2) = sin(theta1) n1 / n2` (equivalently `v2 / v1`).
pub fn snell_wave(theta1: f64, n1: f64, n2: f64) -> Result<f64> {
    check_angle(theta1)?;
    if !(n1 >= MIN_INDEX && n2 >= MIN_INDEX) {
        return Err(Error::OutOfRange("refractive indices must be positive"));
    }
    let sin_theta2 = math::sin(theta1) * n1 / n2;
    if sin_theta2 > 1.0 {
        return Err(Error::TotalInternalReflection { sin_theta2 });
    }
    Ok(math::asin(sin_theta2))
}

/// A real field with a validity mask (`true` = evaluated).
#[derive(Debug, Clone)]
pub struct MaskedField {
    pub field: RealField,
    pub mask: Vec<bool>,
}

impl MaskedField {
    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| !**m).count() as f64 / self.mask.len() as f64
    }

    pub fn stats(&self) -> ResidualStats {
        ResidualStats::masked(&self.field, &self.mask)
    }

    fn from_gradient(s: &RealField, f: impl Fn(usize, f64) -> f64) -> MaskedField {
        let g2 = gradient_norm_squared(s);
        let mut mask = vec![true; g2.values().len()];
        let values = g2
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let norm = math::sqrt(v);
                if norm > SINGULAR_GRADIENT {
                    f(k, norm)
                } else {
                    mask[k] = false;
                    0.0
                }
            })
            .collect();
        MaskedField { field: Field::from_values(*s.grid(), values).expect("finite"), mask }
    }
}

/// Stationary phase velocity `omega / |grad S|`; singular nodes are masked.
pub fn phase_velocity(s: &RealField, omega: f64) -> MaskedField {
    MaskedField::from_gradient(s, |_, g| omega / g)
}

/// Phase velocity of a time-dependent phase, `dS/dt / |grad S|`.
pub fn phase_velocity_td(s_t: &RealField, s: &RealField) -> Result<MaskedField> {
    if s_t.grid() != s.grid() {
        return Err(Error::GridMismatch);
    }
    let rate = s_t.values();
    Ok(MaskedField::from_gradient(s, |k, g| rate[k] / g))
}

/// Local wavelength `2 pi / |grad S|`.
pub fn local_wavelength(s: &RealField) -> MaskedField {
    MaskedField::from_gradient(s, |_, g| 2.0 * core::f64::consts::PI / g)
}

/// Analytic refractive-index layouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexProfile {
    Constant(f64),
    /// `n = n0 + slope * coord[axis]`.
    LinearGradient { axis: usize, n0: f64, slope: f64 },
    /// `n1` for `x < interface`, `n2` beyond; the interface normal is the x axis.
    TwoMedia { interface: f64, n1: f64, n2: f64 },
}

impl IndexProfile {
    pub fn n(&self, p: [f64; 2]) -> f64 {
        match *self {
            IndexProfile::Constant(n) => n,
            IndexProfile::LinearGradient { axis, n0, slope } => n0 + slope * p[axis.min(1)],
            IndexProfile::TwoMedia { interface, n1, n2 } => {
                if p[0] < interface {
                    n1
                } else {
                    n2
                }
            }
        }
    }

    /// Gradient away from discontinuities.
    pub fn grad(&self, _p: [f64; 2]) -> [f64; 2] {
        match *self {
            IndexProfile::LinearGradient { axis, slope, .. } => {
                let mut g = [0.0; 2];
                g[axis.min(1)] = slope;
                g
            }
            _ => [0.0; 2],
        }
    }
}

/// Sampled refractive index, optionally backed by an analytic profile.
#[derive(Debug, Clone)]
pub struct IndexField {
    field: RealField,
    grad: Vec<RealField>,
    profile: Option<IndexProfile>,
}

impl IndexField {
    pub fn sampled(field: RealField) -> Result<Self> {
        if field.values().iter().any(|&n| !(n >= MIN_INDEX)) {
            return Err(Error::InvalidValues("refractive index below 1e-6"));
        }
        let grad = gradient(&field);
        Ok(IndexField { field, grad, profile: None })
    }

    pub fn from_profile(grid: Grid, profile: IndexProfile) -> Result<Self> {
        let field = RealField::from_fn(grid, |x, y| profile.n([x, y]))?;
        let mut out = Self::sampled(field)?;
        out.profile = Some(profile);
        Ok(out)
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn profile(&self) -> Option<IndexProfile> {
        self.profile
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn n_at(&self, p: [f64; 2]) -> Option<f64> {
        match self.profile {
            Some(profile) => self.grid().contains(p).then(|| profile.n(p)),
            None => self.field.interpolate(p),
        }
    }

    /// True when the corners of the cell containing `p` differ by more than the jump threshold.
    fn cell_jump(&self, p: [f64; 2]) -> bool {
        let g = self.grid();
        let (Some((i, _)), Some((j, _))) = (cell(g.x(), p[0]), cell(g.y(), p[1])) else {
            return false;
        };
        let c = [self.field.at(i, j), self.field.at(i + 1, j), self.field.at(i, j + 1), self.field.at(i + 1, j + 1)];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo > JUMP_THRESHOLD * lo
    }

    pub fn grad_at(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        match self.profile {
            Some(profile) => self.grid().contains(p).then(|| profile.grad(p)),
            None => {
                let gx = self.grad[0].interpolate(p)?;
                let gy = match self.grad.get(1) {
                    Some(g) => g.interpolate(p)?,
                    None => 0.0,
                };
                Some([gx, gy])
            }
        }
    }
}

/// `(grad S)^2 - n^2 omega^2 / c^2` at every node.
pub fn eikonal_residual(s: &RealField, n: &IndexField, omega: f64, c: f64) -> Result<RealField> {
    let g2 = gradient_norm_squared(s);
    let k2 = (omega / c) * (omega / c);
    g2.zip_map(n.field(), |g, n| g - n * n * k2)
}

/// `(grad S)^2 - (n^2 / c^2) (dS/dt)^2` at the middle of three snapshots.
pub fn eikonal_residual_time_dependent(
    snapshots: [&RealField; 3],
    dt: f64,
    n: &IndexField,
    c: f64,
) -> Result<RealField> {
    let s_t = time_derivative(snapshots, dt)?;
    let g2 = gradient_norm_squared(snapshots[1]);
    if g2.grid() != n.grid() {
        return Err(Error::GridMismatch);
    }
    let values = g2
        .values()
        .iter()
        .zip(s_t.values())
        .zip(n.field().values())
        .map(|((&g, &st), &n)| g - (n * n / (c * c)) * st * st)
        .collect();
    Field::from_values(*g2.grid(), values)
}

/// `|lap F - (n^2/c^2) F_tt|` at the middle of three snapshots.
pub fn wave_equation_residual(
    snapshots: [&ComplexField; 3],
    dt: f64,
    n: &IndexField,
    c: f64,
) -> Result<RealField> {
    let f_tt = second_time_derivative(snapshots, dt)?;
    let lap = laplacian(snapshots[1]);
    if lap.grid() != n.grid() {
        return Err(Error::GridMismatch);
    }
    let values = lap
        .values()
        .iter()
        .zip(f_tt.values())
        .zip(n.field().values())
        .map(|((&l, &tt), &n)| (l - tt * (n * n / (c * c))).norm())
        .collect();
    Field::from_values(*lap.grid(), values)
}

/// Magnitudes (max over interior nodes) of the four bracket terms of lap(A e^{iS})
/// with `S = S~ / epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTerms {
    pub epsilon: f64,
    /// `|lap A|`
    pub amplitude_laplacian: f64,
    /// `|2 grad A . grad S|`
    pub cross_gradient: f64,
    /// `|A (grad S)^2|`
    pub gradient_squared: f64,
    /// `|A lap S|`
    pub phase_laplacian: f64,
}

impl PhaseTerms {
    /// True when the `(grad S)^2` term exceeds each of the other three.
    pub fn gradient_squared_dominates(&self) -> bool {
        self.gradient_squared > self.amplitude_laplacian
            && self.gradient_squared > self.cross_gradient
            && self.gradient_squared > self.phase_laplacian
    }
}

/// Evaluates the bracket terms of lap(A e^{iS}) for each `epsilon`, with `S = S~ / epsilon`.
pub fn large_phase_scaling(
    amplitude: &RealField,
    phase: &RealField,
    epsilons: &[f64],
) -> Result<Vec<PhaseTerms>> {
    if amplitude.grid() != phase.grid() {
        return Err(Error::GridMismatch);
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("epsilon must be positive"));
    }
    let grid = *amplitude.grid();
    let lap_a = laplacian(amplitude);
    let lap_s = laplacian(phase);
    let grad_a = gradient(amplitude);
    let grad_s = gradient(phase);
    let mut cross = RealField::zeros(grid);
    let mut g2 = RealField::zeros(grid);
    for (ga, gs) in grad_a.iter().zip(&grad_s) {
        for k in 0..grid.len() {
            cross.values_mut()[k] += 2.0 * ga.values()[k] * gs.values()[k];
            g2.values_mut()[k] += gs.values()[k] * gs.values()[k];
        }
    }
    let a = amplitude.values();
    let interior_max = |f: &dyn Fn(usize) -> f64| {
        let mut m = 0.0f64;
        for k in 0..grid.len() {
            let (i, j) = grid.node(k);
            if !grid.is_boundary(i, j) {
                m = m.max(math::abs(f(k)));
            }
        }
        m
    };
    let base_lap_a = interior_max(&|k| lap_a.values()[k]);
    let base_cross = interior_max(&|k| cross.values()[k]);
    let base_g2 = interior_max(&|k| a[k] * g2.values()[k]);
    let base_lap_s = interior_max(&|k| a[k] * lap_s.values()[k]);
    Ok(epsilons
        .iter()
        .map(|&eps| PhaseTerms {
            epsilon: eps,
            amplitude_laplacian: base_lap_a,
            cross_gradient: base_cross / eps,
            gradient_squared: base_g2 / (eps * eps),
            phase_laplacian: base_lap_s / eps,
        })
        .collect())
}

/// A ray state: position, unit direction, accumulated optical path and arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub position: [f64; 2],
    pub direction: [f64; 2],
    pub optical_path: f64,
    pub arc_length: f64,
}

impl Ray {
    /// Starts a ray with a direction given by its angle to the x axis.
    pub fn launch(position: [f64; 2], angle: f64) -> Self {
        Ray {
            position,
            direction: [math::cos(angle), math::sin(angle)],
            optical_path: 0.0,
            arc_length: 0.0,
        }
    }

    pub fn angle(&self) -> f64 {
        math::atan2(self.direction[1], self.direction[0])
    }
}

#[derive(Debug, Clone)]
pub struct RayPath {
    pub states: Vec<Ray>,
    /// Set when the ray came within two cells of the boundary; the path is partial.
    pub left_domain: bool,
    /// Largest `| |n dr/ds| - n | / n` seen; zero for an exact integrator.
    pub constraint_drift: f64,
    /// Interfaces crossed (or reflected from) via the discrete Snell step.
    pub interface_events: usize,
}

impl RayPath {
    pub fn last(&self) -> &Ray {
        self.states.last().expect("path holds at least the start state")
    }
}

/// Relative jump in n above which a step is treated as crossing an interface.
const JUMP_THRESHOLD: f64 = 0.10;

struct RayState {
    r: [f64; 2],
    /// Ray momentum `n dr/ds`.
    u: [f64; 2],
    opl: f64,
}

/// Integrates `d/ds (n dr/ds) = grad n` with RK4, accumulating `int n ds`.
///
/// Where n jumps by more than 10 % across a step, the ray is moved to the jump,
/// refracted (or totally reflected) with Snell's law about the local face normal,
/// and continues straight for the remainder of the step.
pub fn trace_ray(n: &IndexField, start: Ray, ds: f64, n_steps: usize) -> Result<RayPath> {
    if !(ds > 0.0) {
        return Err(Error::InvalidParameter("ray step must be positive"));
    }
    let grid = *n.grid();
    let margin = 2.0 * if grid.dims() == 1 { grid.x().spacing() } else { grid.min_spacing() };
    if grid.dims() != 2 {
        return Err(Error::InvalidParameter("ray tracing needs a 2D index field"));
    }
    let inside = |p: [f64; 2]| grid.contains(p) && grid.boundary_distance(p) >= margin;
    let n0 = n.n_at(start.position).ok_or(Error::LeftDomain)?;
    let dnorm = math::hypot(start.direction[0], start.direction[1]);
    let dir = [start.direction[0] / dnorm, start.direction[1] / dnorm];
    let mut state = RayState { r: start.position, u: [n0 * dir[0], n0 * dir[1]], opl: start.optical_path };
    let mut arc = start.arc_length;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(Ray { position: state.r, direction: dir, optical_path: state.opl, arc_length: arc });
    let mut drift = 0.0f64;
    let mut events = 0;
    let mut left = !inside(start.position);

    for _ in 0..n_steps {
        if left {
            break;
        }
        let n_here = n.n_at(state.r).ok_or(Error::LeftDomain)?;
        let t = unit(state.u);
        let probe = [state.r[0] + ds * t[0], state.r[1] + ds * t[1]];
        if !inside(probe) {
            left = true;
            break;
        }
        let n_probe = n.n_at(probe).ok_or(Error::LeftDomain)?;
        let jump = match n.profile() {
            Some(_) => math::abs(n_probe - n_here) > JUMP_THRESHOLD * n_here.min(n_probe),
            // Nodal gradients leak one cell beyond a sampled jump, so look a cell ahead.
            None => {
                let d = cell_diagonal(&grid);
                let ahead = [probe[0] + d * t[0], probe[1] + d * t[1]];
                n.cell_jump(state.r) || n.cell_jump(probe) || n.cell_jump(ahead)
            }
        };
        let (next, advanced) = if jump {
            events += 1;
            refract_across(n, &state, t, ds)?
        } else {
            match rk4_step(n, &state, ds) {
                Some(s) => (s, ds),
                None => {
                    left = true;
                    break;
                }
            }
        };
        state = next;
        arc += advanced;
        let n_new = n.n_at(state.r).ok_or(Error::LeftDomain)?;
        drift = drift.max(math::abs(math::hypot(state.u[0], state.u[1]) - n_new) / n_new);
        states.push(Ray { position: state.r, direction: unit(state.u), optical_path: state.opl, arc_length: arc });
        if !inside(state.r) {
            left = true;
        }
    }
    Ok(RayPath { states, left_domain: left, constraint_drift: drift, interface_events: events })
}

fn cell_diagonal(grid: &Grid) -> f64 {
    math::hypot(grid.x().spacing(), grid.y().spacing())
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let m = math::hypot(v[0], v[1]);
    [v[0] / m, v[1] / m]
}

fn rk4_step(n: &IndexField, s: &RayState, h: f64) -> Option<RayState> {
    // y = (r, u, opl); r' = u / n, u' = grad n, opl' = n
    let deriv = |r: [f64; 2], u: [f64; 2]| -> Option<([f64; 2], [f64; 2], f64)> {
        let nv = n.n_at(r)?;
        let g = n.grad_at(r)?;
        Some(([u[0] / nv, u[1] / nv], g, nv))
    };
    let add = |a: [f64; 2], b: [f64; 2], f: f64| [a[0] + f * b[0], a[1] + f * b[1]];
    let (r1, u1, o1) = deriv(s.r, s.u)?;
    let (r2, u2, o2) = deriv(add(s.r, r1, 0.5 * h), add(s.u, u1, 0.5 * h))?;
    let (r3, u3, o3) = deriv(add(s.r, r2, 0.5 * h), add(s.u, u2, 0.5 * h))?;
    let (r4, u4, o4) = deriv(add(s.r, r3, h), add(s.u, u3, h))?;
    let comb = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]| {
        [
            (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0]) * h / 6.0,
            (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1]) * h / 6.0,
        ]
    };
    let dr = comb(r1, r2, r3, r4);
    let du = comb(u1, u2, u3, u4);
    Some(RayState {
        r: [s.r[0] + dr[0], s.r[1] + dr[1]],
        u: [s.u[0] + du[0], s.u[1] + du[1]],
        opl: s.opl + (o1 + 2.0 * o2 + 2.0 * o3 + o4) * h / 6.0,
    })
}

/// Straight move to the jump, Snell refraction about the face normal, straight remainder.
/// Returns the new state and the arc length covered.
fn refract_across(n: &IndexField, s: &RayState, t: [f64; 2], ds: f64) -> Result<(RayState, f64)> {
    let at = |l: f64| [s.r[0] + l * t[0], s.r[1] + l * t[1]];
    let n_at = |l: f64| n.n_at(at(l)).ok_or(Error::LeftDomain);
    let (hit, normal, n1, n2, span) = match n.profile() {
        Some(IndexProfile::TwoMedia { interface, .. }) if math::abs(t[0]) > 0.0 => {
            let l = ((interface - s.r[0]) / t[0]).clamp(0.0, ds);
            (l, [1.0, 0.0], n_at(0.0)?, n_at(ds)?, ds)
        }
        _ => {
            // A sampled jump is smeared over a cell: bracket it generously, then bisect
            // for the point where n crosses the midpoint value.
            let reach = 2.0 * cell_diagonal(n.grid());
            let back = if n.n_at(at(-reach)).is_some() { reach } else { 0.0 };
            let (n1, n2) = (n_at(-back)?, n_at(ds + reach)?);
            let mid = 0.5 * (n1 + n2);
            let above = n1 > mid;
            let (mut lo, mut hi) = (-back, ds + reach);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if (n_at(m)? > mid) == above {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            let l = (0.5 * (lo + hi)).max(0.0);
            let g = n.grad_at(at(l)).ok_or(Error::LeftDomain)?;
            let gm = math::hypot(g[0], g[1]);
            let normal = if gm > 0.0 { [g[0] / gm, g[1] / gm] } else { t };
            (l, normal, n1, n2, ds.max(l) + reach)
        }
    };
    // Orient the normal along the direction of travel.
    let cos_i = t[0] * normal[0] + t[1] * normal[1];
    let nrm = if cos_i < 0.0 { [-normal[0], -normal[1]] } else { normal };
    let cos_i = math::abs(cos_i);
    let tangential = [t[0] - cos_i * nrm[0], t[1] - cos_i * nrm[1]];
    let sin_t2 = (n1 / n2) * math::hypot(tangential[0], tangential[1]);
    let p = at(hit);
    let rest = span - hit;
    let (dir, n_out) = if sin_t2 <= 1.0 {
        let cos_t = math::sqrt(1.0 - sin_t2 * sin_t2);
        let scale = n1 / n2;
        ([scale * tangential[0] + cos_t * nrm[0], scale * tangential[1] + cos_t * nrm[1]], n2)
    } else {
        ([t[0] - 2.0 * cos_i * nrm[0], t[1] - 2.0 * cos_i * nrm[1]], n1)
    };
    let dir = unit(dir);
    let r = [p[0] + rest * dir[0], p[1] + rest * dir[1]];
    let state = RayState { r, u: [n_out * dir[0], n_out * dir[1]], opl: s.opl + n1 * hit + n_out * rest };
    Ok((state, span))
}

/// Phase `S = (omega/c) * optical path` of the wavefront launched as a plane wave
/// travelling along +x from the line `x = x_launch`, sampled on `grid` by shooting.
///
/// Each node is reached by the ray from the launch height found with a secant search;
/// rays are integrated with x as the independent variable so they land exactly on the node.
/// Requires a smooth profile with rays that stay forward-moving.
pub fn eikonal_phase_from_ray_family(
    grid: Grid,
    profile: IndexProfile,
    x_launch: f64,
    omega: f64,
    c: f64,
    steps_per_unit: usize,
) -> Result<RealField> {
    if grid.dims() != 2 {
        return Err(Error::InvalidParameter("ray family needs a 2D grid"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let [x, y] = grid.coords(i, j);
            let target = x - x_launch;
            if target < 0.0 {
                return Err(Error::Domain("grid extends behind the launch line"));
            }
            let steps = ((target * steps_per_unit as f64) as usize).max(1);
            let shoot = |y0: f64| march_in_x(profile, x_launch, y0, target, steps);
            // Secant on the launch height.
            let mut y0a = y;
            let mut ya = shoot(y0a).0 - y;
            let mut y0b = y - 1e-3;
            let mut yb = shoot(y0b).0 - y;
            for _ in 0..50 {
                if math::abs(yb) < 1e-14 || yb == ya {
                    break;
                }
                let next = y0b - yb * (y0b - y0a) / (yb - ya);
                y0a = y0b;
                ya = yb;
                y0b = next;
                yb = shoot(y0b).0 - y;
            }
            let (_, opl) = shoot(y0b);
            values.push(omega / c * opl);
        }
    }
    Field::from_values(grid, values)
}

/// Ray from `(x0, y0)` launched along +x, marched with x as parameter over `length`.
/// Returns the final height and optical path.
fn march_in_x(profile: IndexProfile, x0: f64, y0: f64, length: f64, steps: usize) -> (f64, f64) {
    let n0 = profile.n([x0, y0]);
    // State: y, uy (= n dy/ds), opl; ux follows from |u| = n.
    let rhs = |x: f64, y: f64, uy: f64| {
        let nv = profile.n([x, y]);
        let g = profile.grad([x, y]);
        let ux = math::sqrt((nv * nv - uy * uy).max(1e-300));
        (uy / ux, g[1] * nv / ux, nv * nv / ux)
    };
    let h = length / steps as f64;
    let (mut y, mut uy, mut opl) = (y0, 0.0 * n0, 0.0);
    for k in 0..steps {
        let x = x0 + k as f64 * h;
        let (a1, b1, c1) = rhs(x, y, uy);
        let (a2, b2, c2) = rhs(x + 0.5 * h, y + 0.5 * h * a1, uy + 0.5 * h * b1);
        let (a3, b3, c3) = rhs(x + 0.5 * h, y + 0.5 * h * a2, uy + 0.5 * h * b2);
        let (a4, b4, c4) = rhs(x + h, y + h * a3, uy + h * b3);
        y += h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0;
        uy += h * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0;
        opl += h * (c1 + 2.0 * c2 + 2.0 * c3 + c4) / 6.0;
    }
    (y, opl)
}
