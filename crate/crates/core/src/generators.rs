//! Potentials for the named examples.

use crate::eigenfunctions::SolutionTrace;
use crate::error::{Error, Result};
use crate::potential::Potential;

/// V(n) = λ(−1)ⁿ/n for n = 1..N.
pub fn gen_alternating(lambda: f64, n: usize) -> Result<Potential> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    Potential::new(
        (1..=n)
            .map(|k| {
                let s = if k % 2 == 0 { lambda } else { -lambda };
                s / k as f64
            })
            .collect(),
    )
}

/// Sign of the embedded eigenfunction: +, +, −, − for n ≡ 1, 2, 3, 0 (mod 4).
fn wvn_sign(n: usize) -> f64 {
    match n % 4 {
        1 | 2 => 1.0,
        _ => -1.0,
    }
}

/// Wigner–von Neumann type construction: a square-summable zero-energy
/// eigenfunction ψ(n) = ±n^{−α} and the potential it solves.
///
/// The returned trace holds ψ(0) = 0, ψ(1), …, ψ(N+1) at energy 0; V has N sites.
pub fn gen_wvn(alpha: f64, n: usize) -> Result<(Potential, SolutionTrace)> {
    if !(alpha > 0.5) {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} must exceed 1/2 for a square-summable eigenfunction"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput("N must be at least 3".into()));
    }
    let psi: Vec<f64> = (0..=n + 1)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                wvn_sign(k) * (k as f64).powf(-alpha)
            }
        })
        .collect();
    let v: Vec<f64> = (1..=n)
        .map(|k| -(psi[k + 1] + psi[k - 1]) / psi[k])
        .collect();
    Ok((Potential::new(v)?, SolutionTrace::from_values(psi, 0.0)))
}

/// Three-site potential attaining |V(n)| = √(2/n) with σ(h_V) ⊆ [−2, 2].
///
/// Obtained from the optimal Verblunsky sequence: γ vanishes at even indices
/// below 2n−4, γ_{2n−4} = −(2n)^{−1/2}, γ_{2n−3} = −1/(2n−1), γ_{2n−2} = (2n)^{−1/2},
/// and γ ≡ 0 from 2n−1 on. Feeding that sequence through the coefficient map
/// gives
///
/// V(n−1) = −√(n/(2(n−1)²)),  V(n) = √(2/n),  V(n+1) = −√(1/(2n)),
///
/// with V(n−1) absent when n = 1. The returned potential has n + 1 sites.
pub fn gen_extremal(n: usize) -> Result<Potential> {
    if n == 0 {
        return Err(Error::InvalidInput("site must be positive".into()));
    }
    let nf = n as f64;
    let mut v = vec![0.0; n + 1];
    if n >= 2 {
        v[n - 2] = -(nf / (2.0 * (nf - 1.0) * (nf - 1.0))).sqrt();
    }
    v[n - 1] = (2.0 / nf).sqrt();
    v[n] = -(1.0 / (2.0 * nf)).sqrt();
    Potential::new(v)
}
