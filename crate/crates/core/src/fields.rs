//! Uniform 1D/2D grids, sampled fields and second-order finite differences.
//!
//! Values are stored row-major: node `(i, j)` (x index `i`, y index `j`) lives at
//! `j * nx + i`. A 1D grid is a 2D grid with a single row.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::summation::pairwise_sum;

/// Smallest number of nodes allowed along any active axis.
pub const MIN_POINTS: usize = 8;

/// One uniformly sampled axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub extent: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let extent = max - min;
        if !(min.is_finite() && max.is_finite()) || extent <= 0.0 {
            return Err(Error::InvalidGrid("axis extent must be finite and strictly positive"));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid("at least 8 points per axis"));
        }
        Ok(Axis { min, extent, points })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.extent / (self.points - 1) as f64
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.min + self.extent
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    /// Fractional node index of a coordinate.
    #[inline]
    pub fn locate(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dims: usize,
    x: Axis,
    y: Axis,
}

impl Grid {
    pub fn line(min: f64, max: f64, points: usize) -> Result<Self> {
        let x = Axis::new(min, max, points)?;
        // Inactive axis: a single node, never differentiated.
        let y = Axis { min: 0.0, extent: 1.0, points: 1 };
        Ok(Grid { dims: 1, x, y })
    }

    pub fn plane(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Ok(Grid {
            dims: 2,
            x: Axis::new(x.0, x.1, x.2)?,
            y: Axis::new(y.0, y.1, y.2)?,
        })
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn x(&self) -> &Axis {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &Axis {
        &self.y
    }

    pub fn axis(&self, axis: usize) -> &Axis {
        match axis {
            0 => &self.x,
            _ => &self.y,
        }
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.x.points
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.y.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    /// `(i, j)` for a flat index.
    #[inline]
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % self.nx(), k / self.nx())
    }

    /// Physical coordinates of a node; `y` is 0 on a 1D grid.
    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        let y = if self.dims == 1 { 0.0 } else { self.y.coord(j) };
        [self.x.coord(i), y]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let in_x = p[0] >= self.x.min && p[0] <= self.x.max();
        in_x && (self.dims == 1 || (p[1] >= self.y.min && p[1] <= self.y.max()))
    }

    /// Distance from a point to the nearest domain boundary along active axes.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let mut d = (p[0] - self.x.min).min(self.x.max() - p[0]);
        if self.dims == 2 {
            d = d.min((p[1] - self.y.min).min(self.y.max() - p[1]));
        }
        d
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let bx = i == 0 || i + 1 == self.nx();
        let by = self.dims == 2 && (j == 0 || j + 1 == self.ny());
        bx || by
    }

    /// Trapezoidal quadrature weight of node `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let w = |axis: &Axis, k: usize| {
            let h = axis.spacing();
            if k == 0 || k + 1 == axis.points {
                0.5 * h
            } else {
                h
            }
        };
        let wx = w(&self.x, i);
        if self.dims == 1 {
            wx
        } else {
            wx * w(&self.y, j)
        }
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        if self.dims == 1 {
            self.x.spacing()
        } else {
            self.x.spacing().min(self.y.spacing())
        }
    }
}

/// Node value type for [`Field`]: `f64` or [`Complex64`].
pub trait FieldValue:
    Copy + Default + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn finite(&self) -> bool;
}

impl FieldValue for f64 {
    #[inline]
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for Complex64 {
    #[inline]
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// A sampled function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: FieldValue> Field<T> {
    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidValues("value count differs from grid size"));
        }
        if !values.iter().all(FieldValue::finite) {
            return Err(Error::InvalidValues("non-finite value"));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f(x, y)` at every node (`y = 0` on 1D grids).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let [x, y] = grid.coords(i, j);
                values.push(f(x, y));
            }
        }
        Self::from_values(grid, values)
    }

    pub fn constant(grid: Grid, value: T) -> Self {
        Field { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, T::default())
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mutable access for in-place updates; callers keep values finite.
    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<U: FieldValue, V: FieldValue>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid, values })
    }

    /// Bilinear (linear in 1D) interpolation; `None` outside the domain.
    pub fn interpolate(&self, p: [f64; 2]) -> Option<T> {
        let g = &self.grid;
        let (i0, fx) = cell(g.x(), p[0])?;
        if g.dims() == 1 {
            let a = self.values[i0];
            let b = self.values[i0 + 1];
            return Some(a * (1.0 - fx) + b * fx);
        }
        let (j0, fy) = cell(g.y(), p[1])?;
        let v00 = self.at(i0, j0);
        let v10 = self.at(i0 + 1, j0);
        let v01 = self.at(i0, j0 + 1);
        let v11 = self.at(i0 + 1, j0 + 1);
        Some(
            v00 * ((1.0 - fx) * (1.0 - fy))
                + v10 * (fx * (1.0 - fy))
                + v01 * ((1.0 - fx) * fy)
                + v11 * (fx * fy),
        )
    }
}

/// Cell index and fractional offset of `x`, clamped so the right edge maps into the last cell.
pub(crate) fn cell(axis: &Axis, x: f64) -> Option<(usize, f64)> {
    let u = axis.locate(x);
    if !(u >= 0.0 && u <= (axis.points - 1) as f64) {
        return None;
    }
    let i = (math::floor(u) as usize).min(axis.points - 2);
    Some((i, u - i as f64))
}

impl RealField {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }

    /// Trapezoidal integral over the grid.
    pub fn integrate(&self) -> f64 {
        let g = self.grid;
        let weighted: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = g.node(k);
                g.weight(i, j) * self.values[k]
            })
            .collect();
        pairwise_sum(&weighted)
    }
}

impl ComplexField {
    /// |psi|^2 at every node.
    pub fn density(&self) -> RealField {
        self.map(|z| z.norm_sqr())
    }

    pub fn scale(&self, s: f64) -> ComplexField {
        self.map(|z| z * s)
    }
}

/// Physical constants. Natural units (all ones) by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub c: f64,
    /// Angular frequency, optics only.
    pub omega: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: 1.0, mass: 1.0, c: 1.0, omega: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.hbar) && ok(self.mass) && ok(self.c) && ok(self.omega) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("physical constants must be strictly positive"))
        }
    }
}

/// First derivative along `axis`: central in the interior, second-order one-sided at the ends.
pub fn derivative<T: FieldValue>(field: &Field<T>, axis: usize) -> Field<T> {
    let g = *field.grid();
    let (n, stride) = if axis == 0 { (g.nx(), 1) } else { (g.ny(), g.nx()) };
    let h = g.axis(axis).spacing();
    let inv2h = 0.5 / h;
    let v = field.values();
    let mut out = vec![T::default(); v.len()];
    let lines = g.len() / n;
    for line in 0..lines {
        let base = if axis == 0 { line * g.nx() } else { line };
        let at = |k: usize| v[base + k * stride];
        out[base] = (at(1) * 4.0 - at(0) * 3.0 - at(2)) * inv2h;
        for k in 1..n - 1 {
            out[base + k * stride] = (at(k + 1) - at(k - 1)) * inv2h;
        }
        out[base + (n - 1) * stride] =
            (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * inv2h;
    }
    Field { grid: g, values: out }
}

/// Second derivative along `axis` (3-point interior, 4-point one-sided ends).
pub fn second_derivative<T: FieldValue>(field: &Field<T>, axis: usize) -> Field<T> {
    let g = *field.grid();
    let (n, stride) = if axis == 0 { (g.nx(), 1) } else { (g.ny(), g.nx()) };
    let h = g.axis(axis).spacing();
    let inv_h2 = 1.0 / (h * h);
    let v = field.values();
    let mut out = vec![T::default(); v.len()];
    let lines = g.len() / n;
    for line in 0..lines {
        let base = if axis == 0 { line * g.nx() } else { line };
        let at = |k: usize| v[base + k * stride];
        out[base] = (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) * inv_h2;
        for k in 1..n - 1 {
            out[base + k * stride] = (at(k + 1) + at(k - 1) - at(k) * 2.0) * inv_h2;
        }
        out[base + (n - 1) * stride] =
            (at(n - 1) * 2.0 - at(n - 2) * 5.0 + at(n - 3) * 4.0 - at(n - 4)) * inv_h2;
    }
    Field { grid: g, values: out }
}

/// One derivative field per active axis.
pub fn gradient<T: FieldValue>(field: &Field<T>) -> Vec<Field<T>> {
    (0..field.grid().dims()).map(|a| derivative(field, a)).collect()
}

pub fn laplacian<T: FieldValue>(field: &Field<T>) -> Field<T> {
    let mut lap = second_derivative(field, 0);
    if field.grid().dims() == 2 {
        let dyy = second_derivative(field, 1);
        for (a, b) in lap.values.iter_mut().zip(dyy.values) {
            *a = *a + b;
        }
    }
    lap
}

/// |grad f|^2 at each node.
pub fn gradient_norm_squared(field: &RealField) -> RealField {
    let grads = gradient(field);
    let mut out = RealField::zeros(*field.grid());
    for g in &grads {
        for (o, d) in out.values.iter_mut().zip(g.values()) {
            *o += d * d;
        }
    }
    out
}

/// Central time derivative from three equally spaced snapshots.
pub fn time_derivative<T: FieldValue>(
    snapshots: [&Field<T>; 3],
    dt: f64,
) -> Result<Field<T>> {
    let [prev, _, next] = snapshots;
    if prev.grid != next.grid || prev.grid != snapshots[1].grid {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive"));
    }
    next.zip_map(prev, |b, a| (b - a) * (0.5 / dt))
}

/// Second time derivative from three equally spaced snapshots.
pub fn second_time_derivative<T: FieldValue>(
    snapshots: [&Field<T>; 3],
    dt: f64,
) -> Result<Field<T>> {
    let [prev, cur, next] = snapshots;
    if prev.grid != next.grid || prev.grid != cur.grid {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive"));
    }
    let inv = 1.0 / (dt * dt);
    let values = prev
        .values
        .iter()
        .zip(&cur.values)
        .zip(&next.values)
        .map(|((&a, &b), &c)| (a + c - b * 2.0) * inv)
        .collect();
    Ok(Field { grid: prev.grid, values })
}

/// Trapezoidal integral of |psi|^2.
pub fn norm_squared_integral(psi: &ComplexField) -> f64 {
    psi.density().integrate()
}

pub fn normalize(psi: &ComplexField) -> Result<ComplexField> {
    let norm = norm_squared_integral(psi);
    if !(norm > 0.0) {
        return Err(Error::Normalization);
    }
    Ok(psi.scale(1.0 / math::sqrt(norm)))
}

/// `<f(x, y)>` under the normalized density |psi|^2.
pub fn expectation(psi: &ComplexField, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = *psi.grid();
    let weighted: Vec<f64> = (0..g.len())
        .map(|k| {
            let (i, j) = g.node(k);
            let [x, y] = g.coords(i, j);
            g.weight(i, j) * psi.values[k].norm_sqr() * f(x, y)
        })
        .collect();
    let mass: Vec<f64> = (0..g.len())
        .map(|k| {
            let (i, j) = g.node(k);
            g.weight(i, j) * psi.values[k].norm_sqr()
        })
        .collect();
    pairwise_sum(&weighted) / pairwise_sum(&mass)
}

/// Normalized Gaussian packet `N exp(-|r-c|^2 / (4 sigma^2)) exp(i k.r)`.
///
/// `sigma` is the standard deviation of |psi|^2 per axis.
pub fn gaussian_packet(
    grid: Grid,
    center: [f64; 2],
    sigma: f64,
    wave_vector: [f64; 2],
) -> Result<ComplexField> {
    if !(sigma >= 3.0 * grid.min_spacing()) {
        return Err(Error::Domain("packet width must be at least 3 grid spacings"));
    }
    // Envelope at the nearest boundary must be below 1e-8 of the peak.
    let d = grid.boundary_distance(center);
    if !(d > 0.0) || math::exp(-d * d / (4.0 * sigma * sigma)) >= 1e-8 {
        return Err(Error::Domain("packet touches the domain boundary"));
    }
    let two_d = grid.dims() == 2;
    let psi = ComplexField::from_fn(grid, |x, y| {
        let dx = x - center[0];
        let dy = if two_d { y - center[1] } else { 0.0 };
        let envelope = math::exp(-(dx * dx + dy * dy) / (4.0 * sigma * sigma));
        let phase = wave_vector[0] * x + if two_d { wave_vector[1] * y } else { 0.0 };
        Complex64::new(envelope * math::cos(phase), envelope * math::sin(phase))
    })?;
    normalize(&psi)
}

/// `A exp(i S / hbar)` pointwise.
pub fn amplitude_phase_compose(
    amplitude: &RealField,
    phase: &RealField,
    hbar: f64,
) -> Result<ComplexField> {
    amplitude.zip_map(phase, |a, s| {
        let t = s / hbar;
        Complex64::new(a * math::cos(t), a * math::sin(t))
    })
}

/// Amplitude and continuously unwrapped phase of a complex field.
#[derive(Debug, Clone)]
pub struct PhaseDecomposition {
    pub amplitude: RealField,
    /// Unwrapped action `S` (phase times hbar); 0 where masked.
    pub phase: RealField,
    /// `true` where |psi| exceeded the threshold and the phase is defined.
    pub mask: Vec<bool>,
}

pub const DEFAULT_AMPLITUDE_THRESHOLD: f64 = 1e-12;

/// Splits psi into `A = |psi|` and `S`, unwrapping by breadth-first flood from the
/// largest-amplitude node (further disconnected regions are seeded in row-major order).
pub fn amplitude_phase_decompose(
    psi: &ComplexField,
    hbar: f64,
    threshold: f64,
) -> Result<PhaseDecomposition> {
    let g = *psi.grid();
    let amp: Vec<f64> = psi.values.iter().map(|z| z.norm()).collect();
    let mask: Vec<bool> = amp.iter().map(|&a| a > threshold).collect();
    let peak = (0..amp.len())
        .filter(|&k| mask[k])
        .fold(None, |best: Option<usize>, k| match best {
            Some(b) if amp[b] >= amp[k] => Some(b),
            _ => Some(k),
        })
        .ok_or(Error::AmplitudeBelowThreshold)?;

    let mut phase = vec![0.0; g.len()];
    let mut visited = vec![false; g.len()];
    let mut queue = VecDeque::new();
    let seeds = core::iter::once(peak).chain(0..g.len());
    for seed in seeds {
        if !mask[seed] || visited[seed] {
            continue;
        }
        visited[seed] = true;
        phase[seed] = psi.values[seed].arg();
        queue.push_back(seed);
        while let Some(k) = queue.pop_front() {
            let (i, j) = g.node(k);
            let mut neighbours = [usize::MAX; 4];
            if i > 0 {
                neighbours[0] = k - 1;
            }
            if i + 1 < g.nx() {
                neighbours[1] = k + 1;
            }
            if j > 0 {
                neighbours[2] = k - g.nx();
            }
            if j + 1 < g.ny() {
                neighbours[3] = k + g.nx();
            }
            for n in neighbours.into_iter().filter(|&n| n != usize::MAX) {
                if !mask[n] || visited[n] {
                    continue;
                }
                visited[n] = true;
                phase[n] = phase[k] + wrap(psi.values[n].arg() - psi.values[k].arg());
                queue.push_back(n);
            }
        }
    }
    let action = phase.into_iter().map(|p| p * hbar).collect();
    Ok(PhaseDecomposition {
        amplitude: Field { grid: g, values: amp },
        phase: Field { grid: g, values: action },
        mask,
    })
}

/// Wraps an angle into (-pi, pi].
pub(crate) fn wrap(mut a: f64) -> f64 {
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Summary statistics of a residual over unmasked nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    /// Root-mean-square over the counted nodes.
    pub l2: f64,
    pub masked_fraction: f64,
}

impl ResidualStats {
    /// Statistics over nodes where `include` is true.
    pub fn over(field: &RealField, include: impl Fn(usize, usize, usize) -> bool) -> Self {
        let g = field.grid();
        let mut max = 0.0f64;
        let mut squares = Vec::with_capacity(g.len());
        for k in 0..g.len() {
            let (i, j) = g.node(k);
            if include(k, i, j) {
                let v = field.values[k];
                max = max.max(math::abs(v));
                squares.push(v * v);
            }
        }
        let counted = squares.len();
        let l2 = if counted == 0 { 0.0 } else { math::sqrt(pairwise_sum(&squares) / counted as f64) };
        ResidualStats { max, l2, masked_fraction: 1.0 - counted as f64 / g.len() as f64 }
    }

    /// Statistics over nodes at least `margin` nodes away from every boundary.
    pub fn interior(field: &RealField, margin: usize) -> Self {
        let g = *field.grid();
        Self::over(field, |_, i, j| {
            let ok_x = i >= margin && i + margin < g.nx();
            ok_x && (g.dims() == 1 || (j >= margin && j + margin < g.ny()))
        })
    }

    pub fn masked(field: &RealField, mask: &[bool]) -> Self {
        Self::over(field, |k, _, _| mask[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, a: f64, b: f64) -> Grid {
        Grid::line(a, b, n).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::line(0.0, 1.0, 7).is_err());
        assert!(Grid::line(1.0, 1.0, 16).is_err());
        assert!(Grid::plane((0.0, 1.0, 8), (0.0, -1.0, 8)).is_err());
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        assert!((g.x().spacing() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn field_rejects_non_finite_and_wrong_count() {
        let g = line(8, 0.0, 1.0);
        assert!(RealField::from_values(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(RealField::from_values(g, v).is_err());
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let g = line(33, 0.0, 1.0);
        let s = RealField::from_fn(g, |x, _| 2.0 * x).unwrap();
        let d = &gradient(&s)[0];
        assert!(d.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let c = RealField::constant(g, 3.5);
        assert!(gradient(&c)[0].values().iter().all(|v| v.abs() < 1e-12));
    }

    fn sin_gradient_error(n: usize) -> f64 {
        let g = line(n, 0.0, 2.0 * PI);
        let s = RealField::from_fn(g, |x, _| math::sin(x)).unwrap();
        let d = &gradient(&s)[0];
        (0..n).map(|i| (d.values()[i] - math::cos(g.x().coord(i))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gradient_is_second_order() {
        let e256 = sin_gradient_error(256);
        assert!(e256 < 1e-3, "{e256}");
        let ratio = e256 / sin_gradient_error(511);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_of_quadratic_and_constant() {
        let g = line(17, -1.0, 1.0);
        let f = RealField::from_fn(g, |x, _| x * x).unwrap();
        assert!(laplacian(&f).values().iter().all(|v| (v - 2.0).abs() < 1e-10));
        let c = RealField::constant(g, 1.0);
        assert!(laplacian(&c).values().iter().all(|v| v.abs() < 1e-12));
    }

    fn plane_wave_laplacian_error(n: usize) -> f64 {
        let k = 3.0;
        let g = line(n, 0.0, 2.0);
        let f = ComplexField::from_fn(g, |x, _| Complex64::new(0.0, k * x).exp()).unwrap();
        let lap = laplacian(&f);
        (0..n)
            .map(|i| (lap.values()[i] + f.values()[i] * (k * k)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_plane_wave_eigenfunction_second_order() {
        let e1 = plane_wave_laplacian_error(201);
        let e2 = plane_wave_laplacian_error(401);
        assert!(e1 < 0.05, "{e1}");
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_2d_sums_axes() {
        let g = Grid::plane((-1.0, 1.0, 21), (-1.0, 1.0, 21)).unwrap();
        let f = RealField::from_fn(g, |x, y| x * x + 3.0 * y * y).unwrap();
        assert!(laplacian(&f).values().iter().all(|v| (v - 8.0).abs() < 1e-9));
    }

    #[test]
    fn norm_integral_basics() {
        let g = line(64, -1.0, 1.0);
        assert_eq!(norm_squared_integral(&ComplexField::zeros(g)), 0.0);
        let psi = ComplexField::from_fn(g, |x, _| Complex64::new(1.0 + x, 0.5)).unwrap();
        let n1 = norm_squared_integral(&psi);
        let n2 = norm_squared_integral(&psi.scale(2.0));
        assert!((n2 - 4.0 * n1).abs() < 1e-12);
    }

    #[test]
    fn normalize_zero_field_errors_and_is_idempotent() {
        let g = line(64, -1.0, 1.0);
        assert_eq!(normalize(&ComplexField::zeros(g)), Err(Error::Normalization));
        let psi = ComplexField::from_fn(g, |x, _| Complex64::new(1.0 + x * x, x)).unwrap();
        let once = normalize(&psi).unwrap();
        assert!((norm_squared_integral(&once) - 1.0).abs() < 1e-12);
        let twice = normalize(&once).unwrap();
        assert!((norm_squared_integral(&twice) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_norm_and_mean() {
        let g = line(1024, -20.0, 20.0);
        let psi = gaussian_packet(g, [1.5, 0.0], 1.0, [2.0, 0.0]).unwrap();
        assert!((norm_squared_integral(&psi) - 1.0).abs() < 1e-12);
        let mean = expectation(&psi, |x, _| x);
        assert!((mean - 1.5).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn closed_form_gaussian_integral_matches_trapezoid() {
        // Unnormalized packet: integral of exp(-x^2/(2 s^2)) is s sqrt(2 pi).
        let g = line(2001, -15.0, 15.0);
        let s = 1.3;
        let psi = ComplexField::from_fn(g, |x, _| {
            Complex64::new(math::exp(-x * x / (4.0 * s * s)), 0.0)
        })
        .unwrap();
        let expected = s * math::sqrt(2.0 * PI);
        assert!((norm_squared_integral(&psi) / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_rejects_boundary_and_narrow() {
        let g = line(256, -5.0, 5.0);
        assert!(matches!(gaussian_packet(g, [0.0, 0.0], 1.0, [0.0; 2]), Err(Error::Domain(_))));
        assert!(matches!(gaussian_packet(g, [0.0, 0.0], 0.05, [0.0; 2]), Err(Error::Domain(_))));
    }

    #[test]
    fn compose_decompose_plane_wave() {
        let g = line(200, 0.0, 10.0);
        let hbar = 0.7;
        let k = 2.3;
        let psi = ComplexField::from_fn(g, |x, _| Complex64::new(0.0, k * x).exp()).unwrap();
        let d = amplitude_phase_decompose(&psi, hbar, DEFAULT_AMPLITUDE_THRESHOLD).unwrap();
        assert!(d.amplitude.values().iter().all(|a| (a - 1.0).abs() < 1e-12));
        let offset = d.phase.values()[0];
        for i in 0..200 {
            let expect = hbar * k * g.x().coord(i) + offset;
            assert!((d.phase.values()[i] - expect).abs() < 1e-9);
        }
        let back = amplitude_phase_compose(&d.amplitude, &d.phase, hbar).unwrap();
        for (a, b) in back.values().iter().zip(psi.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn decompose_real_positive_is_constant_phase() {
        let g = Grid::plane((0.0, 1.0, 9), (0.0, 1.0, 9)).unwrap();
        let psi = ComplexField::from_fn(g, |x, y| Complex64::new(1.0 + x + y, 0.0)).unwrap();
        let d = amplitude_phase_decompose(&psi, 1.0, DEFAULT_AMPLITUDE_THRESHOLD).unwrap();
        assert!(d.phase.values().iter().all(|s| s.abs() < 1e-15));
        assert!(amplitude_phase_decompose(&ComplexField::zeros(g), 1.0, 1e-12).is_err());
    }

    #[test]
    fn compose_trivial_cases() {
        let g = line(8, 0.0, 1.0);
        let one = amplitude_phase_compose(&RealField::constant(g, 1.0), &RealField::zeros(g), 1.0)
            .unwrap();
        assert!(one.values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        let zero = amplitude_phase_compose(&RealField::zeros(g), &RealField::constant(g, 2.0), 1.0)
            .unwrap();
        assert!(zero.values().iter().all(|z| z.norm() == 0.0));
        let other = Grid::line(0.0, 2.0, 8).unwrap();
        assert_eq!(
            amplitude_phase_compose(&RealField::zeros(g), &RealField::zeros(other), 1.0),
            Err(Error::GridMismatch)
        );
    }

    #[test]
    fn interpolation_is_exact_for_bilinear() {
        let g = Grid::plane((0.0, 1.0, 11), (0.0, 2.0, 9)).unwrap();
        let f = RealField::from_fn(g, |x, y| 1.0 + 2.0 * x - y + 0.5 * x * y).unwrap();
        let v = f.interpolate([0.33, 1.27]).unwrap();
        assert!((v - (1.0 + 0.66 - 1.27 + 0.5 * 0.33 * 1.27)).abs() < 1e-12);
        assert!(f.interpolate([1.0, 2.0]).is_some());
        assert!(f.interpolate([1.01, 0.0]).is_none());
    }
}
