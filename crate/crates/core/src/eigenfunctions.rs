//! Generalized eigenfunctions at the band edges and their relation to the
//! Jacobi and Verblunsky coefficients.
//!
//! u solves Ju = 2u and w solves Jw = −2w, both with ψ(0) = 0, ψ(1) = 1;
//! v(n) = (−1)^{n−1} w(n) solves the +2 equation for the reflected matrix
//! (b ↦ −b). σ(J) ⊆ [−2, 2] holds exactly when u and v stay positive.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{partial_sums, Tolerances};
use crate::potential::{fmt17, JacobiCoeffs, Potential};
use crate::verblunsky::{gamma_from_jacobi, CertStatus, GammaSeq};

const RESCALE_HI: f64 = 1.340_780_792_994_259_7e154; // 2^512
const RESCALE_LO: f64 = 7.458_340_731_200_207e-155; // 2^-512

#[inline]
fn ldexp(m: f64, e: i32) -> f64 {
    if e == 0 {
        m
    } else {
        m * 2f64.powi(e)
    }
}

/// Values ψ(0), ψ(1), …, ψ(L) of a solution of the three-term recursion.
///
/// Each value is stored as mantissa · 2^exp2 so long runs at growing energies
/// never overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    mant: Vec<f64>,
    exp2: Vec<i32>,
    energy: f64,
}

impl SolutionTrace {
    /// Wrap plain values (no exponent offsets).
    pub fn from_values(psi: Vec<f64>, energy: f64) -> Self {
        let exp2 = vec![0; psi.len()];
        Self {
            mant: psi,
            exp2,
            energy,
        }
    }

    /// Solve aₙψ(n+1) + a_{n−1}ψ(n−1) + bₙψ(n) = Eψ(n) for n = 1..N from (ψ(0), ψ(1)).
    pub fn solve(j: &JacobiCoeffs, energy: f64, boundary: (f64, f64), n: usize) -> Result<Self> {
        j.check_len(n)?;
        if !(boundary.0.is_finite() && boundary.1.is_finite()) || boundary == (0.0, 0.0) {
            return Err(Error::InvalidInput("boundary pair must be finite and nonzero".into()));
        }
        let mut mant = Vec::with_capacity(n + 2);
        let mut exp2 = Vec::with_capacity(n + 2);
        mant.push(boundary.0);
        exp2.push(0);
        mant.push(boundary.1);
        exp2.push(0);
        let (mut prev, mut cur, mut e) = (boundary.0, boundary.1, 0i32);
        let a = j.a_slice();
        let b = j.b_slice();
        for k in 0..n {
            let a_prev = if k == 0 { 1.0 } else { a[k - 1] };
            let next = ((energy - b[k]) * cur - a_prev * prev) / a[k];
            prev = cur;
            cur = next;
            let big = cur.abs().max(prev.abs());
            if big > RESCALE_HI {
                prev *= RESCALE_LO;
                cur *= RESCALE_LO;
                e += 512;
            } else if big < RESCALE_LO && big > 0.0 {
                prev *= RESCALE_HI;
                cur *= RESCALE_HI;
                e -= 512;
            }
            mant.push(cur);
            exp2.push(e);
        }
        Ok(Self { mant, exp2, energy })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Last stored index L (values are ψ(0..=L)).
    pub fn last(&self) -> usize {
        self.mant.len() - 1
    }

    pub fn boundary(&self) -> (f64, f64) {
        (self.value(0), self.value(1))
    }

    /// ψ(n) as a plain float (may be ±inf if the true value exceeds f64 range).
    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        ldexp(self.mant[n], self.exp2[n])
    }

    #[inline]
    pub fn mantissa(&self, n: usize) -> f64 {
        self.mant[n]
    }

    #[inline]
    pub fn exponent(&self, n: usize) -> i32 {
        self.exp2[n]
    }

    /// ψ(n) / ψ(m) computed on the split representation.
    #[inline]
    pub fn ratio(&self, n: usize, m: usize) -> f64 {
        ldexp(self.mant[n] / self.mant[m], self.exp2[n] - self.exp2[m])
    }

    /// Sign of ψ(n) (−1, 0 or 1).
    #[inline]
    pub fn sign(&self, n: usize) -> i8 {
        let m = self.mant[n];
        if m > 0.0 {
            1
        } else if m < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Plain values ψ(0..=L); requires the trace to fit in f64 range.
    pub fn values(&self) -> Result<Vec<f64>> {
        let out: Vec<f64> = (0..self.mant.len()).map(|n| self.value(n)).collect();
        if let Some(i) = out.iter().position(|x| !x.is_finite()) {
            return Err(Error::Breakdown {
                site: i,
                detail: "solution exceeds floating-point range".into(),
            });
        }
        Ok(out)
    }

    /// n ↦ (−1)^{n−1} ψ(n) at the negated energy (maps w to v).
    pub fn alternated(&self) -> Self {
        let mant = self
            .mant
            .iter()
            .enumerate()
            .map(|(n, &m)| if n % 2 == 1 { m } else { -m })
            .collect();
        Self {
            mant,
            exp2: self.exp2.clone(),
            energy: -self.energy,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,psi,exp2")?;
        for n in 0..self.mant.len() {
            writeln!(w, "{},{},{}", n, fmt17(self.mant[n]), self.exp2[n])?;
        }
        Ok(())
    }
}

/// Band edge at which to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Plus,
    Minus,
}

impl Edge {
    pub fn energy(self) -> f64 {
        match self {
            Edge::Plus => 2.0,
            Edge::Minus => -2.0,
        }
    }
}

impl std::str::FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+2" | "2" | "plus" => Ok(Edge::Plus),
            "-2" | "minus" => Ok(Edge::Minus),
            other => Err(Error::InvalidInput(format!("edge must be +2 or -2, got {other}"))),
        }
    }
}

/// u (for `Edge::Plus`) or w (for `Edge::Minus`) on 0..=N+1 with ψ(0) = 0, ψ(1) = 1.
pub fn solve_edge(j: &JacobiCoeffs, edge: Edge, n: usize) -> Result<SolutionTrace> {
    SolutionTrace::solve(j, edge.energy(), (0.0, 1.0), n)
}

/// u and v for a Schrödinger operator, with V padded by zeros to N sites.
pub fn edge_pair(v: &Potential, n: usize) -> Result<(SolutionTrace, SolutionTrace)> {
    let j = JacobiCoeffs::schrodinger(&v.padded(n));
    let u = solve_edge(&j, Edge::Plus, n)?;
    let w = solve_edge(&j, Edge::Minus, n)?;
    Ok((u, w.alternated()))
}

/// Number of nodes of ψ(1..=L): sites k < L where ψ(k) is numerically zero or
/// ψ changes sign between k and k+1.
///
/// A value counts as zero when |ψ(k)| < osc_zero_tol · max(|ψ(k−1)|, |ψ(k)|, |ψ(k+1)|).
/// For a trace of length N+1 this equals the number of eigenvalues of the N×N
/// truncation strictly above the trace energy.
pub fn oscillation_count(t: &SolutionTrace, tol: &Tolerances) -> usize {
    let last = t.last();
    if last < 2 {
        return 0;
    }
    let zeroish = |k: usize| -> bool {
        if t.sign(k) == 0 {
            return true;
        }
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(last);
        let e_max = (lo..=hi)
            .filter(|&i| t.mantissa(i) != 0.0)
            .map(|i| t.exponent(i))
            .max()
            .unwrap_or(0);
        let scale = (lo..=hi)
            .map(|i| ldexp(t.mantissa(i), t.exponent(i) - e_max).abs())
            .fold(0.0, f64::max);
        ldexp(t.mantissa(k), t.exponent(k) - e_max).abs() < tol.osc_zero_tol * scale
    };
    let signs: Vec<i8> = (0..=last).map(|k| if zeroish(k) { 0 } else { t.sign(k) }).collect();
    (1..last)
        .filter(|&k| signs[k] == 0 || signs[k] * signs[k + 1] < 0)
        .count()
}

/// W(n) = u(n+1)w(n) − u(n)w(n+1) and W̃(n) = u(n+1)w(n) + u(n)w(n+1) for n = 0..L−1.
#[derive(Debug, Clone, PartialEq)]
pub struct WronskianPair {
    pub w: Vec<f64>,
    pub w_tilde: Vec<f64>,
}

impl WronskianPair {
    pub fn new(u: &[f64], w: &[f64]) -> Self {
        let len = u.len().min(w.len()).saturating_sub(1);
        let mut wr = Vec::with_capacity(len);
        let mut wt = Vec::with_capacity(len);
        for n in 0..len {
            let (p, q) = (u[n + 1] * w[n], u[n] * w[n + 1]);
            wr.push(p - q);
            wt.push(p + q);
        }
        Self { w: wr, w_tilde: wt }
    }
}

fn edge_values(u: &SolutionTrace, w: &SolutionTrace) -> Result<(Vec<f64>, Vec<f64>)> {
    if u.energy() != 2.0 || w.energy() != -2.0 {
        return Err(Error::InvalidInput(
            "expected u at energy +2 and w at energy -2".into(),
        ));
    }
    Ok((u.values()?, w.values()?))
}

/// Σ_{k=1}^{n} u(k)w(k) for n = 0..=L (index 0 holds the empty sum).
fn uw_sums(u: &[f64], w: &[f64]) -> Vec<f64> {
    let len = u.len().min(w.len());
    let mut out = vec![0.0];
    out.extend(partial_sums((1..len).map(|k| u[k] * w[k])));
    out
}

/// Recover a₁..a_N and b₁..b_N from u, w on 0..=N+1 via the Wronskian formulas.
pub fn jacobi_from_uw(u: &SolutionTrace, w: &SolutionTrace) -> Result<JacobiCoeffs> {
    let (uv, wv) = edge_values(u, w)?;
    let n = uv.len().min(wv.len()) - 2;
    if n == 0 {
        return Err(Error::TooShort { needed: 1, available: 0 });
    }
    let wr = WronskianPair::new(&uv, &wv);
    let s = uw_sums(&uv, &wv);
    let guard = |k: usize| -> Result<()> {
        let scale = (uv[k + 1] * wv[k]).abs() + (uv[k] * wv[k + 1]).abs();
        if wr.w[k].abs() <= 1e-14 * scale || wr.w[k] == 0.0 {
            return Err(Error::SingularDivisor { index: k, value: wr.w[k] });
        }
        Ok(())
    };
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 1..=n {
        guard(k)?;
        a.push(4.0 * s[k] / wr.w[k]);
        let head = wr.w_tilde[k] / wr.w[k] * s[k];
        let prev = if k == 1 {
            0.0
        } else {
            wr.w_tilde[k - 1] / wr.w[k - 1] * s[k - 1]
        };
        let uw = uv[k] * wv[k];
        if uw == 0.0 {
            return Err(Error::SingularDivisor { index: k, value: 0.0 });
        }
        b.push(-2.0 / uw * (head + prev));
    }
    JacobiCoeffs::new(a, b)
}

/// γ₀ … γ_{2N−1} from u, w on 0..=N+1.
pub fn gamma_from_uw(u: &SolutionTrace, w: &SolutionTrace) -> Result<GammaSeq> {
    let (uv, wv) = edge_values(u, w)?;
    let n = uv.len().min(wv.len()) - 2;
    let wr = WronskianPair::new(&uv, &wv);
    let s = uw_sums(&uv, &wv);
    let mut g = Vec::with_capacity(2 * n);
    for k in 0..n {
        let den = wr.w[k + 1];
        if den == 0.0 {
            return Err(Error::SingularDivisor { index: 2 * k, value: 0.0 });
        }
        g.push(-wr.w_tilde[k + 1] / den);
        let uw = uv[k + 2] * wv[k + 2];
        if uw == 0.0 {
            return Err(Error::SingularDivisor { index: 2 * k + 1, value: 0.0 });
        }
        g.push(-1.0 - 2.0 * s[k + 1] / uw);
    }
    Ok(GammaSeq::new(g))
}

/// Discrete logarithmic derivatives F(n) = 1 − u(n+1)/u(n+2), G(n) = 1 − v(n+1)/v(n+2).
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivs {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl LogDerivs {
    /// F and G for n = 0..L−2 from the traces u and v.
    pub fn from_traces(u: &SolutionTrace, v: &SolutionTrace) -> Result<Self> {
        let len = u.last().min(v.last()) - 1;
        let mut f = Vec::with_capacity(len);
        let mut g = Vec::with_capacity(len);
        for n in 0..len {
            if u.sign(n + 2) == 0 || v.sign(n + 2) == 0 {
                return Err(Error::SingularDivisor { index: n, value: 0.0 });
            }
            f.push(1.0 - u.ratio(n + 1, n + 2));
            g.push(1.0 - v.ratio(n + 1, n + 2));
        }
        Ok(Self { f, g })
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// F, G from the Verblunsky coefficients and the off-diagonal a.
pub fn logderiv_bridge(g: &GammaSeq, a: &[f64]) -> Result<LogDerivs> {
    let n = (g.len() / 2).min(a.len());
    let mut f = Vec::with_capacity(n);
    let mut gg = Vec::with_capacity(n);
    for k in 0..n {
        let (ge, go) = (g.at(2 * k as isize), g.at(2 * k as isize + 1));
        let an = a[k];
        let common = an - 1.0 - go;
        let mixed = ge + go * ge;
        f.push((common - mixed) / an);
        gg.push((common + mixed) / an);
    }
    Ok(LogDerivs { f, g: gg })
}

/// Inverse of [`logderiv_bridge`]: γ from F, G and a.
pub fn gamma_from_logderivs(ld: &LogDerivs, a: &[f64]) -> Result<GammaSeq> {
    let n = ld.len().min(a.len());
    let mut g = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (f, gg) = (ld.f[k], ld.g[k]);
        let den = 2.0 - f - gg;
        if den.abs() < 1e3 * f64::EPSILON {
            return Err(Error::SingularDivisor { index: 2 * k, value: den });
        }
        g.push(-(f - gg) / den);
        g.push(-a[k] * (f + gg) / 2.0 + a[k] - 1.0);
    }
    Ok(GammaSeq::new(g))
}

/// Lower-growth diagnostic for an edge solution: inf of |ψ(n)|·√n over the final
/// decade, compared against the decade before it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EdgeGrowthReport {
    pub horizon: usize,
    pub inf_final: f64,
    pub inf_previous: f64,
    pub positive: bool,
    pub pass: bool,
}

pub fn edge_growth_check(u: &SolutionTrace) -> EdgeGrowthReport {
    let n = u.last();
    let window_inf = |lo: usize, hi: usize| -> f64 {
        let mut inf = f64::INFINITY;
        let mut neg = false;
        for k in lo.max(1)..=hi {
            let val = u.value(k);
            if val <= 0.0 {
                neg = true;
            }
            inf = inf.min(val * (k as f64).sqrt());
        }
        if neg {
            inf.min(0.0)
        } else {
            inf
        }
    };
    let inf_final = window_inf(n / 10, n);
    let inf_previous = window_inf(n / 100, n / 10);
    let positive = inf_final > 0.0;
    EdgeGrowthReport {
        horizon: n,
        inf_final,
        inf_previous,
        positive,
        pass: positive && inf_final >= 0.5 * inf_previous.min(f64::MAX),
    }
}

/// Default horizon for [`reduce_to_no_bound_states`].
pub const REDUCTION_HORIZON: usize = 100_000;

/// Result of removing the finitely many bound states of h_V.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub k: usize,
    pub v2: Potential,
    /// Certification of V₂ over the remaining horizon.
    pub recertified: CertStatus,
}

/// Shift past the last node of u·v and absorb the boundary term:
/// V₂(n) = V(n+k) + (u(k)/u(k+1))·δ_{n,1}.
pub fn reduce_to_no_bound_states(v: &Potential, tol: &Tolerances) -> Result<Reduction> {
    reduce_with_horizon(v, tol, REDUCTION_HORIZON.max(v.len()))
}

pub fn reduce_with_horizon(v: &Potential, tol: &Tolerances, horizon: usize) -> Result<Reduction> {
    let (u, vv) = edge_pair(v, horizon)?;
    let last = u.last();
    let mut last_change = None;
    for n in 1..last {
        let cu = u.sign(n) * u.sign(n + 1) <= 0;
        let cv = vv.sign(n) * vv.sign(n + 1) <= 0;
        if cu || cv {
            last_change = Some(n);
        }
    }
    let k = match last_change {
        None => 0,
        Some(m) if m + 1 > horizon / 10 => {
            return Err(Error::Inconclusive {
                last_change: m,
                horizon,
            })
        }
        Some(m) => m + 1,
    };
    let mut vals: Vec<f64> = (1..=horizon - k).map(|n| v.at_or_zero(n + k)).collect();
    if k > 0 {
        vals[0] += u.ratio(k, k + 1);
    }
    let keep = v.len().saturating_sub(k).max(1);
    let full = Potential::new(vals)?;
    let cert = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&full), full.len(), tol)?;
    Ok(Reduction {
        k,
        v2: Potential::new(full.values()[..keep].to_vec())?,
        recertified: cert.status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_alternating, gen_extremal};
    use crate::oracle::eig_count_above;
    use crate::verblunsky::{gamma_from_jacobi, jacobi_from_gamma};
    use crate::corpus::schrodinger_from_even;
    use crate::corpus::strategies::{decaying_gamma, even_coefficients};
    use proptest::prelude::*;

    fn free(n: usize) -> JacobiCoeffs {
        JacobiCoeffs::schrodinger(&Potential::new(vec![0.0; n]).unwrap())
    }

    #[test]
    fn free_edge_solutions() {
        let j = free(100);
        let u = solve_edge(&j, Edge::Plus, 100).unwrap();
        let w = solve_edge(&j, Edge::Minus, 100).unwrap();
        for n in 0..=101 {
            assert_eq!(u.value(n), n as f64);
            let s = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(w.value(n), s * n as f64);
            assert_eq!(w.alternated().value(n), n as f64);
        }
    }

    #[test]
    fn delta_bump_has_one_node() {
        let v = Potential::new(vec![3.0]).unwrap();
        let j = JacobiCoeffs::schrodinger(&v.padded(10));
        let u = solve_edge(&j, Edge::Plus, 10).unwrap();
        assert_eq!(u.value(2), -1.0);
        assert_eq!(u.value(3), -3.0);
        assert_eq!(u.value(4), -5.0);
        assert_eq!(oscillation_count(&u, &Tolerances::default()), 1);
    }

    #[test]
    fn extremal_edge_positive() {
        let v = gen_extremal(2).unwrap();
        let (u, vv) = edge_pair(&v, 10_000).unwrap();
        for n in 1..=10_001 {
            assert!(u.value(n) > 0.0 && vv.value(n) > 0.0, "n = {n}");
        }
    }

    #[test]
    fn rescaling_keeps_ratios() {
        let j = free(2000);
        let t = SolutionTrace::solve(&j, 3.0, (0.0, 1.0), 2000).unwrap();
        assert!(t.exponent(2001) > 0);
        let r = t.ratio(2001, 2000);
        let fixed = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((r - fixed).abs() < 1e-12);
        assert_eq!(oscillation_count(&t, &Tolerances::default()), 0);
    }

    #[test]
    fn free_reconstruction() {
        let j = free(50);
        let u = solve_edge(&j, Edge::Plus, 50).unwrap();
        let w = solve_edge(&j, Edge::Minus, 50).unwrap();
        let r = jacobi_from_uw(&u, &w).unwrap();
        assert_eq!(r.len(), 50);
        for n in 1..=50 {
            assert!((r.a(n) - 1.0).abs() < 1e-13);
            assert!(r.b(n).abs() < 1e-13);
        }
        let g = gamma_from_uw(&u, &w).unwrap();
        for n in 0..50 {
            assert!(g.at(2 * n).abs() < 1e-15);
            assert!((g.at(2 * n + 1) + 1.0 / (n as f64 + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn extremal_reconstruction() {
        let v = gen_extremal(2).unwrap();
        let j = JacobiCoeffs::schrodinger(&v.padded(20));
        let u = solve_edge(&j, Edge::Plus, 20).unwrap();
        let w = solve_edge(&j, Edge::Minus, 20).unwrap();
        let r = jacobi_from_uw(&u, &w).unwrap();
        let want = [-1.0, 1.0, -0.5];
        for n in 1..=20 {
            let expect = if n <= 3 { want[n - 1] } else { 0.0 };
            assert!((r.b(n) - expect).abs() < 1e-10, "b({n}) = {}", r.b(n));
            assert!((r.a(n) - 1.0).abs() < 1e-10);
        }
        let g = gamma_from_uw(&u, &w).unwrap();
        assert!((g.at(1) + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn free_log_derivatives() {
        let j = free(40);
        let u = solve_edge(&j, Edge::Plus, 40).unwrap();
        let v = solve_edge(&j, Edge::Minus, 40).unwrap().alternated();
        let ld = LogDerivs::from_traces(&u, &v).unwrap();
        for n in 0..ld.len() {
            let want = 1.0 / (n as f64 + 2.0);
            assert!((ld.f[n] - want).abs() < 1e-15);
            assert!((ld.g[n] - want).abs() < 1e-15);
        }
        let g = gamma_from_logderivs(&ld, j.a_slice()).unwrap();
        for n in 0..ld.len() {
            assert!(g.at(2 * n as isize).abs() < 1e-15);
            assert!((g.at(2 * n as isize + 1) + 1.0 / (n as f64 + 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_reduction() {
        let v = Potential::new(vec![3.0]).unwrap();
        let r = reduce_with_horizon(&v, &Tolerances::default(), 1000).unwrap();
        assert_eq!(r.k, 2);
        assert!((r.v2.at(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(r.recertified, CertStatus::Certified(_)));
        let g = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&r.v2), 1, &Tolerances::default())
            .unwrap();
        assert!((g.gamma.at(0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((g.gamma.at(1) + 17.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn certified_needs_no_reduction() {
        let v = gen_alternating(0.5, 200).unwrap();
        let r = reduce_with_horizon(&v, &Tolerances::default(), 2000).unwrap();
        assert_eq!(r.k, 0);
        assert_eq!(r.v2, v);
    }

    #[test]
    fn persistent_nodes_are_inconclusive() {
        let v = gen_alternating(1.5, 100_000).unwrap();
        let r = reduce_with_horizon(&v, &Tolerances::default(), 100_000);
        assert!(matches!(r, Err(Error::Inconclusive { .. })), "{r:?}");
    }

    #[test]
    fn growth_report_free() {
        let j = free(1000);
        let u = solve_edge(&j, Edge::Plus, 1000).unwrap();
        let rep = edge_growth_check(&u);
        assert!(rep.pass);
        assert!((rep.inf_final - 100f64.powf(1.5)).abs() < 1e-6);
    }

    fn random_certified(g: Vec<f64>) -> JacobiCoeffs {
        let len = g.len() / 2 * 2;
        jacobi_from_gamma(&GammaSeq::new(g[..len].to_vec())).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn uw_round_trip(g in decaying_gamma(0.3, 4..120)) {
            let j = random_certified(g);
            let n = j.len();
            let u = solve_edge(&j, Edge::Plus, n).unwrap();
            let w = solve_edge(&j, Edge::Minus, n).unwrap();
            let r = jacobi_from_uw(&u, &w).unwrap();
            for k in 1..=n {
                prop_assert!((r.a(k) - j.a(k)).abs() < 1e-9 * j.a(k).max(1.0));
                prop_assert!((r.b(k) - j.b(k)).abs() < 1e-9 * j.b(k).abs().max(1.0));
            }
            let gu = gamma_from_uw(&u, &w).unwrap();
            let gj = gamma_from_jacobi(&j, n, &Tolerances::default()).unwrap();
            for k in 0..gu.len() {
                prop_assert!((gu.at(k as isize) - gj.gamma.at(k as isize)).abs() < 1e-9);
            }
        }

        #[test]
        fn bridge_round_trip(g in decaying_gamma(0.3, 4..120)) {
            let j = random_certified(g);
            let gj = gamma_from_jacobi(&j, j.len(), &Tolerances::default()).unwrap().gamma;
            let ld = logderiv_bridge(&gj, j.a_slice()).unwrap();
            let back = gamma_from_logderivs(&ld, j.a_slice()).unwrap();
            for k in 0..back.len() {
                prop_assert!((back.at(k as isize) - gj.at(k as isize)).abs() < 1e-12);
            }
            let u = solve_edge(&j, Edge::Plus, j.len()).unwrap();
            let v = solve_edge(&j, Edge::Minus, j.len()).unwrap().alternated();
            let direct = LogDerivs::from_traces(&u, &v).unwrap();
            for k in 0..ld.len() {
                prop_assert!((direct.f[k] - ld.f[k]).abs() < 1e-9);
                prop_assert!((direct.g[k] - ld.g[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn schrodinger_ratio_identity(even in even_coefficients(1..60)) {
            let inst = schrodinger_from_even(&even).unwrap();
            prop_assume!(inst.is_some());
            let v = inst.unwrap().potential.padded(even.len() + 20);
            let j = JacobiCoeffs::schrodinger(&v);
            let cert = gamma_from_jacobi(&j, j.len(), &Tolerances::default()).unwrap();
            prop_assert!(cert.is_certified());
            let u = solve_edge(&j, Edge::Plus, j.len()).unwrap();
            for n in 0..j.len() {
                let (ge, go) = (cert.gamma.at(2 * n as isize), cert.gamma.at(2 * n as isize + 1));
                let lhs = u.ratio(n + 1, n + 2);
                prop_assert!((lhs - (1.0 + go + ge + go * ge)).abs() < 1e-10);
            }
        }

        #[test]
        fn sturm_identity(vals in prop::collection::vec(-3.0f64..3.0, 1..80),
                          e in -5.0f64..5.0) {
            let j = JacobiCoeffs::schrodinger(&Potential::new(vals).unwrap());
            let n = j.len();
            let t = SolutionTrace::solve(&j, e, (0.0, 1.0), n).unwrap();
            prop_assert_eq!(oscillation_count(&t, &Tolerances::default()), eig_count_above(&j, n, e).unwrap());
        }

        #[test]
        fn count_is_scale_invariant(vals in prop::collection::vec(-3.0f64..3.0, 1..60),
                                    e in -4.0f64..4.0, c in 1e-3f64..1e3) {
            let j = JacobiCoeffs::schrodinger(&Potential::new(vals).unwrap());
            let t1 = SolutionTrace::solve(&j, e, (0.0, 1.0), j.len()).unwrap();
            let t2 = SolutionTrace::solve(&j, e, (0.0, c), j.len()).unwrap();
            let tol = Tolerances::default();
            prop_assert_eq!(oscillation_count(&t1, &tol), oscillation_count(&t2, &tol));
        }
    }
}
