//! Thomas elimination for complex tridiagonal systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place.
///
/// `lower[0]` and `upper[n-1]` are ignored. `scratch` must hold `n` entries.
/// Fails if a pivot vanishes, which for the Crank-Nicolson operators only happens
/// when diagonal dominance is badly violated.
pub fn solve_in_place(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = rhs.len();
    debug_assert!(lower.len() >= n && diag.len() >= n && upper.len() >= n && scratch.len() >= n);
    if n == 0 {
        return Ok(());
    }
    let tiny = 1e-300;
    let mut pivot = diag[0];
    if pivot.norm_sqr() < tiny {
        return Err(Error::SolveFailure { row: 0 });
    }
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        if pivot.norm_sqr() < tiny || !(pivot.re.is_finite() && pivot.im.is_finite()) {
            return Err(Error::SolveFailure { row: i });
        }
        scratch[i] = upper[i] / pivot;
        let r = rhs[i] - lower[i] * rhs[i - 1];
        rhs[i] = r / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
    Ok(())
}
