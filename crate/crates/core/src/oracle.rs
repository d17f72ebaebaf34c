//! Brute-force spectral oracle for Dirichlet truncations of a Jacobi matrix.
//!
//! Counts come from the LDLᵀ pivots of J_N − E; eigenvalues are bracketed by
//! bisection on that count. Nothing here touches the Verblunsky recursion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::JacobiCoeffs;

/// Bisection stops once the bracket is narrower than this.
pub const RESOLUTION: f64 = 1e-12;
/// Hard cap on bisection steps per eigenvalue.
pub const MAX_BISECTIONS: usize = 80;

fn pivots_below(j: &JacobiCoeffs, n: usize, e: f64) -> usize {
    let a = j.a_slice();
    let b = j.b_slice();
    let mut count = 0;
    let mut d = 1.0f64;
    for k in 0..n {
        d = if k == 0 {
            e - b[0]
        } else if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            (e - b[k]) - a[k - 1] * a[k - 1] / d
        };
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues of the N×N truncation strictly above `e`.
pub fn eig_count_above(j: &JacobiCoeffs, n: usize, e: f64) -> Result<usize> {
    j.check_len(n)?;
    if !e.is_finite() {
        return Err(Error::InvalidInput("energy must be finite".into()));
    }
    Ok(pivots_below(j, n, e))
}

/// Count at `e` together with the counts at e ± 4 ulp, to expose ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountDetail {
    pub count: usize,
    pub below: usize,
    pub above: usize,
}

impl CountDetail {
    pub fn is_tie(&self) -> bool {
        self.below != self.above
    }
}

pub fn eig_count_detail(j: &JacobiCoeffs, n: usize, e: f64) -> Result<CountDetail> {
    let count = eig_count_above(j, n, e)?;
    let nudge = 4.0 * crate::numerics::ulp(e);
    Ok(CountDetail {
        count,
        below: pivots_below(j, n, e - nudge),
        above: pivots_below(j, n, e + nudge),
    })
}

/// Gershgorin interval containing every truncation eigenvalue.
fn gershgorin(j: &JacobiCoeffs, n: usize) -> (f64, f64) {
    let a = &j.a_slice()[..n];
    let b = &j.b_slice()[..n];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let r = a[k] + if k > 0 { a[k - 1] } else { 0.0 };
        lo = lo.min(b[k] - r);
        hi = hi.max(b[k] + r);
    }
    (lo - 1.0, hi + 1.0)
}

/// The eigenvalue with exactly `idx` eigenvalues above it, inside (lo, hi).
fn bisect(j: &JacobiCoeffs, n: usize, idx: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= RESOLUTION {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pivots_below(j, n, mid) > idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedSpectrum {
    pub n: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub resolution: f64,
}

/// Every eigenvalue of the N×N truncation.
pub fn truncated_spectrum(j: &JacobiCoeffs, n: usize) -> Result<TruncatedSpectrum> {
    j.check_len(n)?;
    let (lo, hi) = gershgorin(j, n);
    let mut ev: Vec<f64> = crate::parallel::map_range(0..n, |idx| bisect(j, n, idx, lo, hi));
    ev.reverse();
    Ok(TruncatedSpectrum {
        n,
        eigenvalues: ev,
        resolution: RESOLUTION,
    })
}

/// Truncation eigenvalues above 2 (descending) and below −2 (ascending).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutsideSpectrum {
    pub above: Vec<f64>,
    pub below: Vec<f64>,
}

impl OutsideSpectrum {
    pub fn is_empty(&self) -> bool {
        self.above.is_empty() && self.below.is_empty()
    }
}

pub fn eigs_outside(j: &JacobiCoeffs, n: usize) -> Result<OutsideSpectrum> {
    j.check_len(n)?;
    let (lo, hi) = gershgorin(j, n);
    let n_above = pivots_below(j, n, 2.0);
    let n_not_below = pivots_below(j, n, -2.0);
    let above = (0..n_above).map(|idx| bisect(j, n, idx, 2.0, hi)).collect();
    let below = (n_not_below..n)
        .rev()
        .map(|idx| bisect(j, n, idx, lo, -2.0))
        .collect();
    Ok(OutsideSpectrum { above, below })
}
