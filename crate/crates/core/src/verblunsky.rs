//! Jacobi ↔ Verblunsky coefficient maps, spectrum certification, the
//! two-step Schur transformation, and m-function evaluation.
//!
//! A Jacobi matrix has σ(J) ⊆ [−2, 2] exactly when there is a sequence
//! γ₀, γ₁, … in (−1, 1) with
//!
//! ```text
//! b_{n+1}   = (1 − γ_{2n−1}) γ_{2n} − (1 + γ_{2n−1}) γ_{2n−2}
//! a_{n+1}²  = (1 − γ_{2n−1}) (1 − γ_{2n}²) (1 + γ_{2n+1})
//! ```
//!
//! where γ₋₁ = −1 (and γ₋₂ is multiplied by zero). Solving these forward is the
//! certification recursion; a coefficient leaving (−1, 1) certifies spectrum
//! outside [−2, 2].

use num_complex::Complex64;
use serde_json::json;

use crate::error::{Error, Result};
use crate::numerics::{ulp, Tolerances};
use crate::potential::JacobiCoeffs;

/// Verblunsky coefficients γ₀, γ₁, …; the sentinel γ₋₁ = −1 is implicit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaSeq {
    gamma: Vec<f64>,
}

impl GammaSeq {
    pub fn new(gamma: Vec<f64>) -> Self {
        Self { gamma }
    }

    /// γⱼ for j ≥ −2 (γ₋₁ = −1; γ₋₂ is reported as 0).
    #[inline]
    pub fn at(&self, j: isize) -> f64 {
        match j {
            -1 => -1.0,
            j if j < -1 => 0.0,
            j => self.gamma[j as usize],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// γ_{2j} for j = 0, 1, …
    pub fn even(&self) -> impl Iterator<Item = f64> + '_ {
        self.gamma.iter().step_by(2).copied()
    }

    /// γ_{2j+1} for j = 0, 1, …
    pub fn odd(&self) -> impl Iterator<Item = f64> + '_ {
        self.gamma.iter().skip(1).step_by(2).copied()
    }

    /// Coefficients shifted left by `k`.
    pub fn shifted(&self, k: usize) -> GammaSeq {
        GammaSeq::new(self.gamma[k.min(self.gamma.len())..].to_vec())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.gamma
    }
}

/// Outcome of running the certification recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertStatus {
    /// All γ₀ … γ_{2N−1} computed from N sites lie inside (−1 + margin, 1 − margin).
    Certified(usize),
    /// First index with |γₖ| ≥ 1 − margin.
    ViolatedAt { index: usize, value: f64 },
    /// A divisor (1 − γ) or (1 − γ²) fell below 1e3·ulp while computing γₖ.
    Indeterminate { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertResult {
    pub status: CertStatus,
    pub gamma: GammaSeq,
    /// Smallest 1 − |γ| seen among the accepted coefficients.
    pub min_margin: f64,
}

impl CertResult {
    pub fn is_certified(&self) -> bool {
        matches!(self.status, CertStatus::Certified(_))
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.status, CertStatus::ViolatedAt { .. })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let (status, index) = match self.status {
            CertStatus::Certified(_) => ("certified", None),
            CertStatus::ViolatedAt { index, .. } => ("violated", Some(index)),
            CertStatus::Indeterminate { index } => ("indeterminate", Some(index)),
        };
        let mut v = json!({
            "status": status,
            "gamma": self.gamma.as_slice(),
            "min_margin": self.min_margin,
        });
        if let Some(i) = index {
            v["index"] = json!(i);
        }
        if let CertStatus::Certified(n) = self.status {
            v["sites"] = json!(n);
        }
        v
    }
}

/// One step of the forward recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Ok,
    Violated { index: usize, value: f64 },
    Indeterminate { index: usize },
}

/// Streaming form of the certification recursion: feed (aₙ, bₙ) site by site.
///
/// Only the last two coefficients are kept, so arbitrarily long horizons run
/// in constant memory.
#[derive(Debug, Clone)]
pub struct GammaRecursion {
    margin: f64,
    sites: usize,
    prev_odd: f64,
    prev_even: f64,
    min_margin: f64,
}

impl GammaRecursion {
    pub fn new(tol: &Tolerances) -> Self {
        Self {
            margin: tol.gamma_margin,
            sites: 0,
            prev_odd: -1.0,
            prev_even: 0.0,
            min_margin: 1.0,
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn min_margin(&self) -> f64 {
        self.min_margin
    }

    fn accept(&mut self, index: usize, g: f64) -> Step {
        if !g.is_finite() {
            return Step::Indeterminate { index };
        }
        let m = 1.0 - g.abs();
        if m <= self.margin {
            return Step::Violated { index, value: g };
        }
        self.min_margin = self.min_margin.min(m);
        Step::Ok
    }

    /// Consume site n+1 = `self.sites() + 1`, producing (γ_{2n}, γ_{2n+1}).
    pub fn push(&mut self, a: f64, b: f64, out: Option<&mut Vec<f64>>) -> Step {
        let n = self.sites;
        let guard = 1e3 * ulp(1.0);
        let one_minus_odd = 1.0 - self.prev_odd;
        if one_minus_odd.abs() < guard {
            return Step::Indeterminate { index: 2 * n };
        }
        let even = (b + (1.0 + self.prev_odd) * self.prev_even) / one_minus_odd;
        let mut out = out;
        if let Some(o) = out.as_deref_mut() {
            o.push(even);
        }
        match self.accept(2 * n, even) {
            Step::Ok => {}
            s => return s,
        }
        let one_minus_even_sq = (1.0 - even) * (1.0 + even);
        if one_minus_even_sq.abs() < guard {
            return Step::Indeterminate { index: 2 * n + 1 };
        }
        let odd = a * a / (one_minus_odd * one_minus_even_sq) - 1.0;
        if let Some(o) = out {
            o.push(odd);
        }
        match self.accept(2 * n + 1, odd) {
            Step::Ok => {}
            s => return s,
        }
        self.prev_even = even;
        self.prev_odd = odd;
        self.sites += 1;
        Step::Ok
    }
}

/// Run the recursion over an iterator of (aₙ, bₙ) pairs, keeping every γ.
pub fn gamma_from_sites<I>(sites: I, tol: &Tolerances) -> CertResult
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut rec = GammaRecursion::new(tol);
    let mut gamma = Vec::new();
    for (a, b) in sites {
        match rec.push(a, b, Some(&mut gamma)) {
            Step::Ok => {}
            Step::Violated { index, value } => {
                return CertResult {
                    status: CertStatus::ViolatedAt { index, value },
                    gamma: GammaSeq::new(gamma),
                    min_margin: rec.min_margin(),
                }
            }
            Step::Indeterminate { index } => {
                gamma.truncate(index);
                return CertResult {
                    status: CertStatus::Indeterminate { index },
                    gamma: GammaSeq::new(gamma),
                    min_margin: rec.min_margin(),
                };
            }
        }
    }
    CertResult {
        status: CertStatus::Certified(rec.sites()),
        gamma: GammaSeq::new(gamma),
        min_margin: rec.min_margin(),
    }
}

/// Status-only certification over a streamed horizon (no γ storage).
pub fn certify_streaming<I>(sites: I, tol: &Tolerances) -> (CertStatus, f64)
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut rec = GammaRecursion::new(tol);
    for (a, b) in sites {
        match rec.push(a, b, None) {
            Step::Ok => {}
            Step::Violated { index, value } => {
                return (CertStatus::ViolatedAt { index, value }, rec.min_margin())
            }
            Step::Indeterminate { index } => {
                return (CertStatus::Indeterminate { index }, rec.min_margin())
            }
        }
    }
    (CertStatus::Certified(rec.sites()), rec.min_margin())
}

/// γ₀ … γ_{2N−1} from the first N sites of `j`.
pub fn gamma_from_jacobi(j: &JacobiCoeffs, n: usize, tol: &Tolerances) -> Result<CertResult> {
    j.check_len(n)?;
    Ok(gamma_from_sites(
        j.a_slice()[..n].iter().copied().zip(j.b_slice()[..n].iter().copied()),
        tol,
    ))
}

/// Jacobi coefficients generated by a Verblunsky sequence.
///
/// Site n+1 needs γ_{2n−1}, γ_{2n} and γ_{2n+1}, so a sequence of length L
/// determines ⌊L/2⌋ complete sites.
pub fn jacobi_from_gamma(g: &GammaSeq) -> Result<JacobiCoeffs> {
    if let Some(i) = g.as_slice().iter().position(|x| !(x.abs() < 1.0)) {
        return Err(Error::GammaOutOfRange {
            index: i,
            value: g.as_slice()[i],
        });
    }
    let m = g.len() / 2;
    if m == 0 {
        return Err(Error::InvalidInput("need at least γ₀ and γ₁".into()));
    }
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for n in 0..m as isize {
        let (gm2, gm1, g0, g1) = (g.at(2 * n - 2), g.at(2 * n - 1), g.at(2 * n), g.at(2 * n + 1));
        b.push((1.0 - gm1) * g0 - (1.0 + gm1) * gm2);
        a.push(((1.0 - gm1) * (1.0 - g0) * (1.0 + g0) * (1.0 + g1)).sqrt());
    }
    JacobiCoeffs::new(a, b)
}

/// Jacobi matrix produced by two iterations of the Schur algorithm.
///
/// The first row becomes b = κ²b₂ + (κ² − 1)b₁, a = κa₂ with κ² = 2/(1 − γ₁);
/// the rest is (b₃, a₃, b₄, …) unchanged. Its Verblunsky coefficients are those
/// of `j` shifted by two.
pub fn schur_step2(j: &JacobiCoeffs, tol: &Tolerances) -> Result<JacobiCoeffs> {
    j.check_len(2)?;
    let head = gamma_from_jacobi(j, 1, tol)?;
    match head.status {
        CertStatus::Certified(_) => {}
        CertStatus::ViolatedAt { index, value } => return Err(Error::GammaOutOfRange { index, value }),
        CertStatus::Indeterminate { index } => {
            return Err(Error::SingularDivisor { index, value: 0.0 })
        }
    }
    let g1 = head.gamma.at(1);
    let d = 1.0 - g1;
    if d.abs() < 1e3 * ulp(1.0) {
        return Err(Error::SingularDivisor { index: 1, value: d });
    }
    let kappa_sq = 2.0 / d;
    let mut a = Vec::with_capacity(j.len() - 1);
    let mut b = Vec::with_capacity(j.len() - 1);
    a.push(kappa_sq.sqrt() * j.a(2));
    b.push(kappa_sq * j.b(2) + (kappa_sq - 1.0) * j.b(1));
    a.extend_from_slice(&j.a_slice()[2..]);
    b.extend_from_slice(&j.b_slice()[2..]);
    JacobiCoeffs::new(a, b)
}

/// Truncated continued-fraction value of m₀(z) = ⟨δ₁, (J − z)⁻¹ δ₁⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MFunctionEval {
    pub z: Complex64,
    pub value: Complex64,
    pub depth: usize,
}

/// Distance from [−2, 2] below which the continued fraction is not evaluated.
pub const BAND_EXCLUSION: f64 = 1e-8;

fn band_distance(z: Complex64) -> f64 {
    let dx = if z.re > 2.0 {
        z.re - 2.0
    } else if z.re < -2.0 {
        -2.0 - z.re
    } else {
        0.0
    };
    dx.hypot(z.im)
}

/// m-function of the free operator: the root of m² + zm + 1 = 0 with |m| < 1.
pub fn free_m(z: Complex64) -> Complex64 {
    let s = (z * z - 4.0).sqrt();
    let r1 = (-z + s) / 2.0;
    let r2 = (-z - s) / 2.0;
    if r1.norm() <= r2.norm() {
        r1
    } else {
        r2
    }
}

/// Evaluate m₀(z) by the backward recursion
/// m⁽ʲ⁾ = 1 / (−z + b_{j+1} − a_{j+1}² m⁽ʲ⁺¹⁾), seeded with the free value at `depth`.
pub fn m_function(j: &JacobiCoeffs, z: Complex64, depth: usize) -> Result<MFunctionEval> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be positive".into()));
    }
    j.check_len(depth)?;
    if band_distance(z) < BAND_EXCLUSION {
        return Err(Error::NearBand { re: z.re, im: z.im });
    }
    let mut m = free_m(z);
    for site in (1..=depth).rev() {
        let a = j.a(site);
        m = (-z + j.b(site) - a * a * m).inv();
    }
    Ok(MFunctionEval { z, value: m, depth })
}

/// Right-hand side of the m₂/m₀ relation for two Schur steps.
pub fn m2_from_m0(j: &JacobiCoeffs, z: Complex64, m0: Complex64) -> Complex64 {
    let (a1, b1) = (j.a(1), j.b(1));
    let pref = (4.0 - b1 * b1 - a1 * a1) / (a1 * a1);
    pref * ((z - b1) * m0 + 1.0) / ((z * z - 4.0) * m0 + (z + b1))
}
