//! Shared numeric helpers: compensated summation, tolerance policy, fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partial sums longer than this use compensated summation.
pub const KAHAN_THRESHOLD: usize = 1000;

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Running partial sums, compensated when the sequence is long.
pub fn partial_sums<I>(terms: I) -> Vec<f64>
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: ExactSizeIterator,
{
    let iter = terms.into_iter();
    let compensated = iter.len() > KAHAN_THRESHOLD;
    let mut out = Vec::with_capacity(iter.len());
    let mut acc = KahanSum::new();
    let mut plain = 0.0;
    for t in iter {
        if compensated {
            acc.add(t);
            out.push(acc.value());
        } else {
            plain += t;
            out.push(plain);
        }
    }
    out
}

/// Sum of a sequence, compensated when it is long.
pub fn sum(terms: &[f64]) -> f64 {
    if terms.len() > KAHAN_THRESHOLD {
        terms.iter().copied().collect::<KahanSum>().value()
    } else {
        terms.iter().sum()
    }
}

/// Tolerance policy shared by every verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for identity checks.
    pub eq_tol: f64,
    /// Exclusion margin near ±1 for Verblunsky coefficients.
    pub gamma_margin: f64,
    /// Relative threshold below which a solution value counts as a node.
    pub osc_zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            gamma_margin: 1e-12,
            osc_zero_tol: 1e-13,
        }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, gamma_margin: f64, osc_zero_tol: f64) -> Result<Self> {
        let t = Self {
            eq_tol,
            gamma_margin,
            osc_zero_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.eq_tol) && positive(self.gamma_margin) && positive(self.osc_zero_tol)) {
            return Err(Error::InvalidInput("tolerances must be strictly positive".into()));
        }
        if self.eq_tol > 1e-6 || self.gamma_margin > 1e-6 {
            return Err(Error::InvalidInput(
                "eq_tol and gamma_margin must not exceed 1e-6".into(),
            ));
        }
        Ok(())
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = sum(xs) / n;
    let my = sum(ys) / n;
    let mut sxy = KahanSum::new();
    let mut sxx = KahanSum::new();
    for (x, y) in xs.iter().zip(ys) {
        sxy.add((x - mx) * (y - my));
        sxx.add((x - mx) * (x - mx));
    }
    if sxx.value() == 0.0 {
        0.0
    } else {
        sxy.value() / sxx.value()
    }
}

/// `count` logarithmically spaced values in `[lo, hi)`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / count as f64).exp())
        .collect()
}

/// Unit in the last place of `x`.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else if x.is_finite() {
        f64::from_bits(x.to_bits() + 1) - x
    } else {
        f64::INFINITY
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Indices `1..=n` sampled logarithmically (always including the endpoints).
pub fn log_indices(n: usize, per_decade: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![1usize];
    let decades = (n as f64).log10();
    let steps = (decades * per_decade as f64).ceil() as usize;
    for i in 1..=steps {
        let v = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
        if v > *out.last().unwrap() && v <= n {
            out.push(v);
        }
    }
    if *out.last().unwrap() != n {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_harmonic_tail() {
        let terms: Vec<f64> = (1..=1_000_000).map(|n| 1.0 / n as f64).collect();
        let exact = 14.392_726_722_865_723_631_381_127_9_f64;
        let naive: f64 = terms.iter().sum();
        let comp = sum(&terms);
        assert!((comp - exact).abs() <= (naive - exact).abs());
        assert!((comp - exact).abs() < 1e-13);
    }

    #[test]
    fn tolerances_reject_loose_values() {
        assert!(Tolerances::new(1e-5, 1e-12, 1e-13).is_err());
        assert!(Tolerances::new(1e-9, 0.0, 1e-13).is_err());
        assert!(Tolerances::default().validate().is_ok());
    }

    #[test]
    fn slope_of_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((ls_slope(&xs, &ys) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn log_indices_cover_range() {
        let idx = log_indices(1000, 10);
        assert_eq!(idx[0], 1);
        assert_eq!(*idx.last().unwrap(), 1000);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn wrap_pi_range() {
        for x in [-10.0, -3.2, 0.0, 3.2, 7.0, 100.0] {
            let y = wrap_pi(x);
            assert!(y > -std::f64::consts::PI - 1e-15 && y <= std::f64::consts::PI);
        }
    }
}
