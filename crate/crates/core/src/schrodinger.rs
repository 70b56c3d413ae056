//! Time-dependent Schrödinger propagation and the probability-flow diagnostics.
//!
//! 1D uses Crank–Nicolson with a Thomas solve; 2D uses Peaceman–Rachford ADI
//! (x half-step, then y) with the potential split evenly between the two axes.
//! Grid edges are hard walls (Dirichlet); an optional cosine-ramp imaginary
//! potential absorbs outgoing waves before they reach them.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{
    derivative, gradient, gradient_norm_squared, laplacian, time_derivative, ComplexField, Grid,
    PhysicalConstants, RealField, ResidualStats,
};
use crate::math;
use crate::tridiag;

/// Minimum absorbing-layer width, in cells.
pub const MIN_ABSORBER_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson1D,
    Adi2D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Reflecting,
    /// Imaginary potential `-i W` rising as a cosine ramp from 0 to `strength`
    /// over a layer of physical thickness `width` next to every edge.
    Absorbing { width: f64, strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub boundary: Boundary,
    pub constants: PhysicalConstants,
}

impl PropagatorConfig {
    pub fn new(dt: f64, scheme: Scheme) -> Self {
        PropagatorConfig { dt, scheme, boundary: Boundary::Reflecting, constants: PhysicalConstants::default() }
    }

    /// The scheme matching the grid dimension.
    pub fn for_grid(grid: &Grid, dt: f64) -> Self {
        let scheme = if grid.dims() == 1 { Scheme::CrankNicolson1D } else { Scheme::Adi2D };
        Self::new(dt, scheme)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        self.constants.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be positive"));
        }
        match (self.scheme, grid.dims()) {
            (Scheme::CrankNicolson1D, 1) | (Scheme::Adi2D, 2) => {}
            _ => return Err(Error::InvalidParameter("scheme does not match grid dimension")),
        }
        if let Boundary::Absorbing { width, strength } = self.boundary {
            for axis in 0..grid.dims() {
                let a = grid.axis(axis);
                if !(width >= MIN_ABSORBER_CELLS as f64 * a.spacing() * (1.0 - 1e-12)) {
                    return Err(Error::InvalidParameter("absorbing layer must span at least 8 cells"));
                }
                if 2.0 * width >= a.extent {
                    return Err(Error::InvalidParameter("absorbing layers overlap"));
                }
            }
            if !(strength > 0.0 && strength.is_finite()) {
                return Err(Error::InvalidParameter("absorber strength must be positive"));
            }
        }
        Ok(())
    }
}

/// Absorber profile `W` at every node (zero for reflecting boundaries).
pub fn absorber_profile(grid: &Grid, boundary: Boundary) -> RealField {
    let Boundary::Absorbing { width, strength } = boundary else {
        return RealField::zeros(*grid);
    };
    let ramp = |axis: &crate::fields::Axis, idx: usize| {
        let depth = (axis.coord(idx) - axis.min).min(axis.max() - axis.coord(idx));
        if depth >= width {
            0.0
        } else {
            let s = (width - depth) / width;
            0.5 * strength * (1.0 - math::cos(core::f64::consts::PI * s))
        }
    };
    let mut w = RealField::zeros(*grid);
    for k in 0..grid.len() {
        let (i, j) = grid.node(k);
        let mut v = ramp(grid.x(), i);
        if grid.dims() == 2 {
            v = v.max(ramp(grid.y(), j));
        }
        w.values_mut()[k] = v;
    }
    w
}

/// Reusable stepping state: coefficients for a fixed grid, potential and config.
#[derive(Debug, Clone)]
pub struct Propagator {
    cfg: PropagatorConfig,
    grid: Grid,
    dt: f64,
    /// `U - i W` at each node.
    potential: Vec<Complex64>,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Propagator {
    pub fn new(potential: &RealField, cfg: PropagatorConfig) -> Result<Self> {
        let grid = *potential.grid();
        cfg.validate(&grid)?;
        let w = absorber_profile(&grid, cfg.boundary);
        let v = potential.values().iter().zip(w.values()).map(|(&u, &w)| Complex64::new(u, -w)).collect();
        let n = grid.nx().max(grid.ny());
        Ok(Propagator {
            cfg,
            grid,
            dt: cfg.dt,
            potential: v,
            lower: vec![Complex64::default(); n],
            diag: vec![Complex64::default(); n],
            upper: vec![Complex64::default(); n],
            line: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); n],
            work: vec![Complex64::default(); grid.len()],
        })
    }

    /// The same propagator run backwards in time (step `-dt`).
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.dt = -self.dt;
        p
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn step(&mut self, psi: &ComplexField) -> Result<ComplexField> {
        let mut out = psi.clone();
        self.step_in_place(&mut out)?;
        Ok(out)
    }

    pub fn step_in_place(&mut self, psi: &mut ComplexField) -> Result<()> {
        if *psi.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        match self.cfg.scheme {
            Scheme::CrankNicolson1D => self.cn_step(psi.values_mut()),
            Scheme::Adi2D => self.adi_step(psi.values_mut()),
        }
    }

    /// `i dt / (2 hbar)`.
    fn half_factor(&self) -> Complex64 {
        Complex64::new(0.0, self.dt / (2.0 * self.cfg.constants.hbar))
    }

    fn kinetic_coefficient(&self, axis: usize) -> f64 {
        let h = self.grid.axis(axis).spacing();
        let c = &self.cfg.constants;
        c.hbar * c.hbar / (2.0 * c.mass * h * h)
    }

    fn cn_step(&mut self, psi: &mut [Complex64]) -> Result<()> {
        let n = psi.len();
        let a = self.half_factor();
        let c = self.kinetic_coefficient(0);
        psi[0] = Complex64::default();
        psi[n - 1] = Complex64::default();
        let m = n - 2;
        for r in 0..m {
            let i = r + 1;
            let h_diag = Complex64::new(2.0 * c, 0.0) + self.potential[i];
            let h_psi = h_diag * psi[i] - (psi[i - 1] + psi[i + 1]) * c;
            self.line[r] = psi[i] - a * h_psi;
            self.lower[r] = -a * c;
            self.upper[r] = -a * c;
            self.diag[r] = Complex64::new(1.0, 0.0) + a * h_diag;
        }
        tridiag::solve_in_place(&self.lower[..m], &self.diag[..m], &self.upper[..m], &mut self.line[..m], &mut self.scratch[..m])?;
        psi[1..n - 1].copy_from_slice(&self.line[..m]);
        Ok(())
    }

    /// `H_axis psi` at interior node `(i, j)`, with half the potential.
    fn apply_axis(&self, psi: &[Complex64], axis: usize, i: usize, j: usize) -> Complex64 {
        let nx = self.grid.nx();
        let k = j * nx + i;
        let (prev, next) = if axis == 0 { (k - 1, k + 1) } else { (k - nx, k + nx) };
        let c = self.kinetic_coefficient(axis);
        (Complex64::new(2.0 * c, 0.0) + self.potential[k] * 0.5) * psi[k] - (psi[prev] + psi[next]) * c
    }

    fn adi_step(&mut self, psi: &mut [Complex64]) -> Result<()> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let a = self.half_factor();
        for (k, z) in psi.iter_mut().enumerate() {
            if self.grid.is_boundary(k % nx, k / nx) {
                *z = Complex64::default();
            }
        }
        // x half-step: (1 + a Hx) psi* = (1 - a Hy) psi.
        let mut work = core::mem::take(&mut self.work);
        work.iter_mut().for_each(|w| *w = Complex64::default());
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                work[j * nx + i] = psi[j * nx + i] - a * self.apply_axis(psi, 1, i, j);
            }
        }
        let cx = self.kinetic_coefficient(0);
        let m = nx - 2;
        for j in 1..ny - 1 {
            for r in 0..m {
                let k = j * nx + r + 1;
                self.line[r] = work[k];
                self.lower[r] = -a * cx;
                self.upper[r] = -a * cx;
                self.diag[r] = Complex64::new(1.0, 0.0) + a * (Complex64::new(2.0 * cx, 0.0) + self.potential[k] * 0.5);
            }
            tridiag::solve_in_place(&self.lower[..m], &self.diag[..m], &self.upper[..m], &mut self.line[..m], &mut self.scratch[..m])?;
            work[j * nx + 1..j * nx + 1 + m].copy_from_slice(&self.line[..m]);
        }
        // y half-step: (1 + a Hy) psi' = (1 - a Hx) psi*.
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                psi[j * nx + i] = work[j * nx + i] - a * self.apply_axis(&work, 0, i, j);
            }
        }
        let cy = self.kinetic_coefficient(1);
        let m = ny - 2;
        for i in 1..nx - 1 {
            for r in 0..m {
                let k = (r + 1) * nx + i;
                self.line[r] = psi[k];
                self.lower[r] = -a * cy;
                self.upper[r] = -a * cy;
                self.diag[r] = Complex64::new(1.0, 0.0) + a * (Complex64::new(2.0 * cy, 0.0) + self.potential[k] * 0.5);
            }
            tridiag::solve_in_place(&self.lower[..m], &self.diag[..m], &self.upper[..m], &mut self.line[..m], &mut self.scratch[..m])?;
            for r in 0..m {
                psi[(r + 1) * nx + i] = self.line[r];
            }
        }
        self.work = work;
        Ok(())
    }
}

/// One step of the scheme selected by `cfg`.
pub fn step(psi: &ComplexField, potential: &RealField, cfg: &PropagatorConfig) -> Result<ComplexField> {
    if psi.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    Propagator::new(potential, *cfg)?.step(psi)
}

/// Read-only callback invoked at step 0 and every `stride` steps.
pub trait Observer {
    fn stride(&self) -> usize;
    fn observe(&mut self, step: usize, time: f64, psi: &ComplexField);
}

/// Records `(step, time, norm)`.
#[derive(Debug, Clone, Default)]
pub struct NormRecorder {
    pub stride: usize,
    pub history: Vec<(usize, f64, f64)>,
}

impl NormRecorder {
    pub fn new(stride: usize) -> Self {
        NormRecorder { stride, history: Vec::new() }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.history.iter().map(|h| h.2).collect()
    }
}

impl Observer for NormRecorder {
    fn stride(&self) -> usize {
        self.stride
    }

    fn observe(&mut self, step: usize, time: f64, psi: &ComplexField) {
        self.history.push((step, time, crate::fields::norm_squared_integral(psi)));
    }
}

/// Keeps copies of the wavefunction.
#[derive(Debug, Clone, Default)]
pub struct SnapshotRecorder {
    pub stride: usize,
    pub snapshots: Vec<(usize, f64, ComplexField)>,
}

impl SnapshotRecorder {
    pub fn new(stride: usize) -> Self {
        SnapshotRecorder { stride, snapshots: Vec::new() }
    }
}

impl Observer for SnapshotRecorder {
    fn stride(&self) -> usize {
        self.stride
    }

    fn observe(&mut self, step: usize, time: f64, psi: &ComplexField) {
        self.snapshots.push((step, time, psi.clone()));
    }
}

fn notify(observers: &mut [&mut dyn Observer], step: usize, time: f64, psi: &ComplexField) {
    for o in observers.iter_mut() {
        let stride = o.stride().max(1);
        if step.is_multiple_of(stride) {
            o.observe(step, time, psi);
        }
    }
}

/// Applies `n_steps` steps, calling observers at their strides (step 0 included).
pub fn propagate(
    psi0: &ComplexField,
    potential: &RealField,
    cfg: &PropagatorConfig,
    n_steps: usize,
    observers: &mut [&mut dyn Observer],
) -> Result<ComplexField> {
    if psi0.grid() != potential.grid() {
        return Err(Error::GridMismatch);
    }
    let mut prop = Propagator::new(potential, *cfg)?;
    let mut psi = psi0.clone();
    notify(observers, 0, 0.0, &psi);
    for s in 1..=n_steps {
        prop.step_in_place(&mut psi)?;
        notify(observers, s, s as f64 * cfg.dt, &psi);
    }
    Ok(psi)
}

/// `J = (hbar/m) Im(psi* grad psi)`, one component per axis.
pub fn probability_current(psi: &ComplexField, constants: &PhysicalConstants) -> Vec<RealField> {
    let scale = constants.hbar / constants.mass;
    gradient(psi).iter().map(|d| psi.zip_map(d, |p, dp| scale * (p.conj() * dp).im).expect("same grid")).collect()
}

/// `d|psi|^2/dt + div J` at the middle snapshot.
pub fn continuity_residual(
    snapshots: [&ComplexField; 3],
    dt: f64,
    constants: &PhysicalConstants,
) -> Result<RealField> {
    let [a, b, c] = snapshots.map(|s| s.density());
    let rho_t = time_derivative([&a, &b, &c], dt)?;
    let current = probability_current(snapshots[1], constants);
    let mut out = rho_t;
    for (axis, j) in current.iter().enumerate() {
        out = out.zip_map(&derivative(j, axis), |x, y| x + y)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// `max |norm - 1|` over the history.
    pub max_deviation: f64,
    pub final_norm: f64,
    /// `1 - final / initial`.
    pub absorbed_fraction: f64,
    /// No recorded norm exceeds its predecessor (up to rounding).
    pub non_increasing: bool,
}

pub fn norm_history_check(norms: &[f64]) -> NormReport {
    if norms.is_empty() {
        return NormReport { max_deviation: 0.0, final_norm: 1.0, absorbed_fraction: 0.0, non_increasing: true };
    }
    let max_deviation = norms.iter().map(|n| math::abs(n - 1.0)).fold(0.0, f64::max);
    let final_norm = *norms.last().unwrap();
    let non_increasing = norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    NormReport { max_deviation, final_norm, absorbed_fraction: 1.0 - final_norm / norms[0], non_increasing }
}

/// Terms of the Schrödinger equation after substituting `psi = A exp(iS/hbar)`.
#[derive(Debug, Clone)]
pub struct SemiclassicalResiduals {
    /// `dS/dt + (grad S)^2 / 2m + U`.
    pub hj_term: RealField,
    /// `-(hbar^2 / 2m) lap A / A`.
    pub quantum_term: RealField,
    /// `m d(A^2)/dt + div(A^2 grad S)`.
    pub transport_term: RealField,
    /// `(grad S)^2 / 2m`, the scale the quantum term is measured against.
    pub kinetic: RealField,
    pub mask: Vec<bool>,
}

impl SemiclassicalResiduals {
    pub fn hj_stats(&self) -> ResidualStats {
        ResidualStats::masked(&self.hj_term, &self.mask)
    }

    pub fn quantum_stats(&self) -> ResidualStats {
        ResidualStats::masked(&self.quantum_term, &self.mask)
    }

    pub fn transport_stats(&self) -> ResidualStats {
        ResidualStats::masked(&self.transport_term, &self.mask)
    }

    /// `max |quantum term| / max (grad S)^2 / 2m` over the mask.
    pub fn dominance_ratio(&self) -> f64 {
        let q = self.quantum_stats().max;
        let k = ResidualStats::masked(&self.kinetic, &self.mask).max;
        if k > 0.0 {
            q / k
        } else {
            f64::INFINITY
        }
    }
}

/// Evaluates the semiclassical split at the middle of three `(A, S)` snapshots.
///
/// Nodes with `A <= threshold` (or next to one, or on the boundary) are masked.
pub fn semiclassical_residuals(
    amplitude: [&RealField; 3],
    action: [&RealField; 3],
    dt: f64,
    potential: &RealField,
    constants: &PhysicalConstants,
    threshold: f64,
) -> Result<SemiclassicalResiduals> {
    let grid = *amplitude[1].grid();
    if action.iter().chain(amplitude.iter()).any(|f| *f.grid() != grid) || *potential.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let m = constants.mass;
    let hbar = constants.hbar;
    let a = amplitude[1];
    let s = action[1];
    let s_t = time_derivative(action, dt)?;
    let g2 = gradient_norm_squared(s);
    let kinetic = g2.map(|v| v / (2.0 * m));
    let hj_term = s_t.zip_map(&kinetic, |st, k| st + k)?.zip_map(potential, |v, u| v + u)?;

    let lap_a = laplacian(a);
    let quantum_term = lap_a.zip_map(a, |l, av| if av > threshold { -hbar * hbar / (2.0 * m) * l / av } else { 0.0 })?;

    let squares = amplitude.map(|f| f.map(|v| v * v));
    let rho_t = time_derivative([&squares[0], &squares[1], &squares[2]], dt)?;
    let grads = gradient(s);
    let mut transport_term = rho_t.map(|v| m * v);
    for (axis, g) in grads.iter().enumerate() {
        let flux = squares[1].zip_map(g, |r, gs| r * gs)?;
        transport_term = transport_term.zip_map(&derivative(&flux, axis), |x, y| x + y)?;
    }

    let mask = amplitude_mask(&grid, a, threshold);
    if !mask.iter().any(|&b| b) {
        return Err(Error::AmplitudeBelowThreshold);
    }
    Ok(SemiclassicalResiduals { hj_term, quantum_term, transport_term, kinetic, mask })
}

fn amplitude_mask(grid: &Grid, a: &RealField, threshold: f64) -> Vec<bool> {
    let above: Vec<bool> = a.values().iter().map(|&v| v > threshold).collect();
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.node(k);
            if grid.is_boundary(i, j) || !above[k] {
                return false;
            }
            let nx = grid.nx();
            let mut ok = above[k - 1] && above[k + 1];
            if grid.dims() == 2 {
                ok = ok && above[k - nx] && above[k + nx];
            }
            ok
        })
        .collect()
}
