//! Equal-width histograms and total-variation distances.

use alloc::vec;
use alloc::vec::Vec;

use crate::fields::Axis;
use crate::math;

/// Equal-width bins over `[min, max)` plus under/overflow tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<f64>,
    pub underflow: f64,
    pub overflow: f64,
}

impl Histogram {
    pub fn new(min: f64, max: f64, bins: usize) -> Self {
        assert!(max > min && bins > 0, "histogram needs a positive range and at least one bin");
        Histogram { min, max, counts: vec![0.0; bins], underflow: 0.0, overflow: 0.0 }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins() as f64
    }

    pub fn center(&self, b: usize) -> f64 {
        self.min + (b as f64 + 0.5) * self.width()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins()).map(|b| self.min + b as f64 * self.width()).collect()
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.min && x < self.max) {
            return None;
        }
        Some((math::floor((x - self.min) / self.width()) as usize).min(self.bins() - 1))
    }

    pub fn add(&mut self, x: f64, weight: f64) {
        match self.bin_of(x) {
            Some(b) => self.counts[b] += weight,
            None if x < self.min => self.underflow += weight,
            None => self.overflow += weight,
        }
    }

    pub fn from_samples(min: f64, max: f64, bins: usize, samples: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::new(min, max, bins);
        for x in samples {
            h.add(x, 1.0);
        }
        h
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum::<f64>() + self.underflow + self.overflow
    }

    /// Probabilities including the two outside tallies (first and last entries).
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        let mut p = Vec::with_capacity(self.bins() + 2);
        p.push(self.underflow);
        p.extend_from_slice(&self.counts);
        p.push(self.overflow);
        if total > 0.0 {
            for v in &mut p {
                *v /= total;
            }
        }
        p
    }

    /// Bin masses of a non-negative piecewise-linear density sampled on `axis`.
    pub fn from_density(min: f64, max: f64, bins: usize, axis: &Axis, density: &[f64]) -> Self {
        let mut h = Histogram::new(min, max, bins);
        let lo = axis.min;
        let hi = axis.max();
        let edges = h.edges();
        for b in 0..bins {
            h.counts[b] = integrate_linear(axis, density, edges[b], edges[b + 1]);
        }
        h.underflow = integrate_linear(axis, density, lo, min);
        h.overflow = integrate_linear(axis, density, max, hi);
        h
    }
}

/// Half the L1 distance between two normalized distributions.
pub fn tv_distance(a: &Histogram, b: &Histogram) -> f64 {
    assert_eq!(a.bins(), b.bins(), "histograms must share binning");
    let pa = a.probabilities();
    let pb = b.probabilities();
    0.5 * pa.iter().zip(&pb).map(|(x, y)| math::abs(x - y)).sum::<f64>()
}

/// Exact integral over `[a, b]` of the piecewise-linear interpolant of `values` on `axis`.
/// The interval is clipped to the axis.
pub fn integrate_linear(axis: &Axis, values: &[f64], a: f64, b: f64) -> f64 {
    let a = a.max(axis.min);
    let b = b.min(axis.max());
    if !(b > a) {
        return 0.0;
    }
    let h = axis.spacing();
    let value_at = |x: f64| {
        let u = axis.locate(x);
        let i = (math::floor(u) as usize).min(axis.points - 2);
        let f = u - i as f64;
        values[i] * (1.0 - f) + values[i + 1] * f
    };
    let first = (math::floor(axis.locate(a)) as usize).min(axis.points - 2);
    let last = (math::floor(axis.locate(b)) as usize).min(axis.points - 2);
    let mut total = 0.0;
    for cell in first..=last {
        let x0 = axis.coord(cell).max(a);
        let x1 = (axis.coord(cell) + h).min(b);
        if x1 > x0 {
            total += 0.5 * (value_at(x0) + value_at(x1)) * (x1 - x0);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_and_outside_tallies() {
        let h = Histogram::from_samples(0.0, 1.0, 4, [0.1, 0.3, 0.3, 0.99, -1.0, 1.0]);
        assert_eq!(h.counts, vec![1.0, 2.0, 0.0, 1.0]);
        assert_eq!(h.underflow, 1.0);
        assert_eq!(h.overflow, 1.0);
        assert_eq!(h.total(), 6.0);
    }

    #[test]
    fn tv_identical_is_zero_disjoint_is_one() {
        let a = Histogram::from_samples(0.0, 1.0, 2, [0.1, 0.2]);
        let b = Histogram::from_samples(0.0, 1.0, 2, [0.7, 0.8]);
        assert_eq!(tv_distance(&a, &a), 0.0);
        assert!((tv_distance(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_integral_exact() {
        let axis = Axis::new(0.0, 2.0, 9).unwrap();
        let values: Vec<f64> = (0..9).map(|i| 1.0 + 3.0 * axis.coord(i)).collect();
        // integral of 1+3x from 0.3 to 1.7 = 1.4 + 1.5 (1.7^2 - 0.3^2)
        let exact = 1.4 + 1.5 * (1.7f64 * 1.7 - 0.09);
        assert!((integrate_linear(&axis, &values, 0.3, 1.7) - exact).abs() < 1e-12);
        assert_eq!(integrate_linear(&axis, &values, 3.0, 4.0), 0.0);
    }
}
