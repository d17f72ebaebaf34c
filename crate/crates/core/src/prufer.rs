//! Discrete Prüfer variables at interior energies E = 2 cos k.
//!
//! With x₁ = ψ(n−1) and x₂ = (ψ(n) − cos k · ψ(n−1)) / sin k the state is
//! x₁ = R sin(θ/2 − k), x₂ = R cos(θ/2 − k), so that ψ(n) = R sin(θ/2).
//! One step of ψ(n+1) + ψ(n−1) + V(n)ψ(n) = Eψ(n) multiplies R² by
//! 1 − (V/sin k) sin θ + (V/sin k)² sin²(θ/2).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{ls_slope, partial_sums, wrap_pi, KahanSum};
use crate::potential::{fmt17, JacobiCoeffs, Potential};
use crate::verblunsky::{gamma_from_jacobi, CertStatus, GammaSeq};
use crate::Tolerances;

const FOUR_PI: f64 = 4.0 * PI;

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 && k < PI {
        Ok(())
    } else {
        Err(Error::BadQuasimomentum(k))
    }
}

/// Amplitude and phase of a solution at one site.
///
/// The phase is kept as θ = 4π·winding + frac with frac ∈ [0, 4π), so ψ(n) =
/// R sin(frac/2) without loss of precision on long runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruferState {
    pub log_r: f64,
    frac: f64,
    winding: i64,
    pub k: f64,
    pub site: usize,
}

impl PruferState {
    fn from_parts(log_r: f64, theta: f64, k: f64, site: usize) -> Self {
        let mut s = Self {
            log_r,
            frac: 0.0,
            winding: 0,
            k,
            site,
        };
        s.set_theta(theta);
        s
    }

    fn set_theta(&mut self, theta: f64) {
        let w = (theta / FOUR_PI).floor();
        self.winding = w as i64;
        self.frac = theta - w * FOUR_PI;
        self.normalize();
    }

    fn normalize(&mut self) {
        if self.frac >= FOUR_PI {
            self.frac -= FOUR_PI;
            self.winding += 1;
        } else if self.frac < 0.0 {
            self.frac += FOUR_PI;
            self.winding -= 1;
        }
    }

    /// θ as a continuous real lift.
    pub fn theta(&self) -> f64 {
        self.winding as f64 * FOUR_PI + self.frac
    }

    /// θ reduced to [0, 4π).
    pub fn theta_reduced(&self) -> f64 {
        self.frac
    }

    pub fn r(&self) -> f64 {
        self.log_r.exp()
    }

    /// (ψ(n−1), ψ(n)).
    pub fn psi_pair(&self) -> (f64, f64) {
        let r = self.r();
        let half = 0.5 * self.frac;
        (r * (half - self.k).sin(), r * half.sin())
    }

    /// ψ(n)² + ψ(n−1)² on a log scale.
    pub fn log_energy(&self) -> f64 {
        let half = 0.5 * self.frac;
        let s = half.sin().powi(2) + (half - self.k).sin().powi(2);
        2.0 * self.log_r + s.ln()
    }
}

/// Prüfer state of the pair (ψ(n−1), ψ(n)) at site n.
pub fn prufer_transform(pair: (f64, f64), k: f64, site: usize) -> Result<PruferState> {
    check_k(k)?;
    let (prev, cur) = pair;
    if !(prev.is_finite() && cur.is_finite()) || (prev == 0.0 && cur == 0.0) {
        return Err(Error::InvalidInput("ψ pair must be finite and nonzero".into()));
    }
    let x1 = prev;
    let x2 = (cur - k.cos() * prev) / k.sin();
    let r = x1.hypot(x2);
    let half = x1.atan2(x2) + k;
    Ok(PruferState::from_parts(r.ln(), 2.0 * half, k, site))
}

/// Inverse of [`prufer_transform`]: (ψ(n−1), ψ(n)).
pub fn prufer_inverse(s: &PruferState) -> (f64, f64) {
    s.psi_pair()
}

/// Advance one site with potential value `vn` = V(n).
pub fn prufer_step(s: &PruferState, vn: f64) -> Result<PruferState> {
    let mut out = *s;
    out.site += 1;
    let k = s.k;
    if vn == 0.0 {
        out.frac += 2.0 * k;
        out.normalize();
        return Ok(out);
    }
    let t = vn / k.sin();
    let beta = 0.5 * s.frac;
    let (sb, cb) = beta.sin_cos();
    let ts = t * sb;
    let q = ts * (ts - 2.0 * cb);
    if !(q > -1.0) || !q.is_finite() {
        return Err(Error::Breakdown {
            site: s.site,
            detail: format!("amplitude ratio 1 + {q:e} is not positive"),
        });
    }
    out.log_r += 0.5 * q.ln_1p();
    let beta_new = sb.atan2(cb - ts);
    let delta = wrap_pi(beta_new - beta);
    out.frac += 2.0 * (k + delta);
    let w = (out.frac / FOUR_PI).floor();
    out.frac -= w * FOUR_PI;
    out.winding += w as i64;
    out.normalize();
    Ok(out)
}

/// Additive split V(n) = W(n) − W(n−1) + Q(n) with W(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// W(1..N).
    pub w: Vec<f64>,
    /// Q(1..N).
    pub q: Vec<f64>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// max_n |V(n) − (W(n) − W(n−1) + Q(n))| relative to the local scale.
    pub fn identity_defect(&self, v: &Potential) -> f64 {
        let mut worst = 0.0f64;
        for n in 1..=self.w.len() {
            let wp = if n == 1 { 0.0 } else { self.w[n - 2] };
            let rebuilt = self.w[n - 1] - wp + self.q[n - 1];
            let scale = v.at(n).abs() + self.w[n - 1].abs() + wp.abs() + self.q[n - 1].abs();
            if scale > 0.0 {
                worst = worst.max((v.at(n) - rebuilt).abs() / scale);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// W(n) = γ_{2n−2}.
    Gamma,
    /// W(n) = −Σ_{m>n} V(m), V extended by zero.
    Tail,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Strategy::Gamma),
            "tail" => Ok(Strategy::Tail),
            other => Err(Error::InvalidInput(format!("unknown strategy {other}"))),
        }
    }
}

fn residual_q(v: &Potential, w: &[f64]) -> Vec<f64> {
    (1..=v.len())
        .map(|n| {
            let wp = if n == 1 { 0.0 } else { w[n - 2] };
            v.at(n) - w[n - 1] + wp
        })
        .collect()
}

/// W from the Verblunsky coefficients of an already certified potential.
pub fn decompose_from_gamma(v: &Potential, g: &GammaSeq) -> Result<Decomposition> {
    let n = v.len();
    if g.len() < 2 * n - 1 {
        return Err(Error::TooShort {
            needed: 2 * n - 1,
            available: g.len(),
        });
    }
    let w: Vec<f64> = (0..n).map(|m| g.at(2 * m as isize)).collect();
    let q = residual_q(v, &w);
    Ok(Decomposition { w, q })
}

/// Q(n) = −γ_{2n−3}(γ_{2n−2} + γ_{2n−4}) for n ≥ 2 and Q(1) = γ₀.
pub fn q_from_gamma(g: &GammaSeq, n: usize) -> Vec<f64> {
    (1..=n as isize)
        .map(|m| {
            if m == 1 {
                g.at(0)
            } else {
                -g.at(2 * m - 3) * (g.at(2 * m - 2) + g.at(2 * m - 4))
            }
        })
        .collect()
}

pub fn decompose(v: &Potential, strategy: Strategy, tol: &Tolerances) -> Result<Decomposition> {
    match strategy {
        Strategy::Gamma => {
            let cert = gamma_from_jacobi(&JacobiCoeffs::schrodinger(v), v.len(), tol)?;
            match cert.status {
                CertStatus::Certified(_) => decompose_from_gamma(v, &cert.gamma),
                CertStatus::ViolatedAt { index, value } => {
                    Err(Error::GammaOutOfRange { index, value })
                }
                CertStatus::Indeterminate { index } => {
                    Err(Error::SingularDivisor { index, value: 0.0 })
                }
            }
        }
        Strategy::Tail => {
            let n = v.len();
            let mut w = vec![0.0; n];
            let mut acc = KahanSum::new();
            for m in (1..n).rev() {
                acc.add(v.at(m + 1));
                w[m - 1] = -acc.value();
            }
            let q = residual_q(v, &w);
            Ok(Decomposition { w, q })
        }
    }
}

/// Tail decomposition of a potential given as a function of the site, with the
/// tails summed to M = 10·N.
///
/// Each tail uses the average of two consecutive partial sums at the horizon;
/// the returned Cauchy difference compares the limit estimates at M/2 and M.
pub fn decompose_tail_fn<F>(f: F, n: usize) -> Result<(Potential, Decomposition, f64)>
where
    F: Fn(usize) -> f64,
{
    let horizon = 10 * n;
    let mut s = KahanSum::new();
    let mut sums = Vec::with_capacity(horizon + 2);
    sums.push(0.0);
    for m in 1..=horizon + 1 {
        s.add(f(m));
        sums.push(s.value());
    }
    let limit_at = |m: usize| 0.5 * (sums[m] + sums[m + 1]);
    let quarter = limit_at(horizon / 4);
    let half = limit_at(horizon / 2);
    let full = limit_at(horizon);
    let (d_prev, d_last) = ((half - quarter).abs(), (full - half).abs());
    if d_last > 1e-12 && d_last >= 0.5 * d_prev {
        return Err(Error::NotConvergent { cauchy: d_last });
    }
    let v = Potential::new((1..=n).map(&f).collect())?;
    let w: Vec<f64> = (1..=n).map(|m| -(full - sums[m])).collect();
    let q = residual_q(&v, &w);
    Ok((v, Decomposition { w, q }, d_last))
}

/// Trajectory of a Prüfer evolution plus its growth diagnostics.
#[derive(Debug, Clone)]
pub struct Evolution {
    /// States at sites 1..=N+1.
    pub states: Vec<PruferState>,
    /// Σ_{n≤N} V(n) sin θ(n) / sin k.
    pub v_functional: f64,
    /// 2 Σ_{n≤N} W(n) cos(½(θ(n+1) + θ(n))), when a decomposition is supplied.
    pub w_functional: Option<f64>,
    /// Least-squares slope of log(ψ(n+1)² + ψ(n)²) against log n over the final decade.
    pub growth_exponent: f64,
    /// Least-squares slope of log R against log n over the final decade.
    pub amplitude_exponent: f64,
}

impl Evolution {
    pub fn last(&self) -> &PruferState {
        self.states.last().expect("nonempty trajectory")
    }

    /// ψ(1), …, ψ(N+1) reconstructed from the trajectory.
    pub fn psi(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.psi_pair().1).collect()
    }

    /// φ(n) = ½(θ(n+1) + θ(n)) for n = 1..N.
    pub fn mid_phases(&self) -> Vec<f64> {
        self.states
            .windows(2)
            .map(|w| {
                let d = (w[1].winding - w[0].winding) as f64 * FOUR_PI + w[1].frac - w[0].frac;
                w[0].frac + 0.5 * d
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,logR,theta")?;
        for s in &self.states {
            writeln!(w, "{},{},{}", s.site, fmt17(s.log_r), fmt17(s.theta()))?;
        }
        Ok(())
    }
}

fn decade_fit(states: &[PruferState], pick: impl Fn(&PruferState) -> f64) -> f64 {
    let n = states.len().saturating_sub(1);
    if n < 10 {
        return 0.0;
    }
    let lo = (n / 10).max(1);
    let xs: Vec<f64> = (lo..=n).map(|m| (m as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=n).map(|m| pick(&states[m])).collect();
    ls_slope(&xs, &ys)
}

/// Evolve from (ψ(0), ψ(1)) through V(1..N).
pub fn evolve(v: &Potential, k: f64, boundary: (f64, f64), n: usize) -> Result<Evolution> {
    evolve_with(v, k, boundary, n, None)
}

pub fn evolve_with(
    v: &Potential,
    k: f64,
    boundary: (f64, f64),
    n: usize,
    decomposition: Option<&Decomposition>,
) -> Result<Evolution> {
    check_k(k)?;
    if n > v.len() {
        return Err(Error::TooShort {
            needed: n,
            available: v.len(),
        });
    }
    let sin_k = k.sin();
    let mut states = Vec::with_capacity(n + 1);
    let mut s = prufer_transform(boundary, k, 1)?;
    states.push(s);
    let mut vf = KahanSum::new();
    for m in 1..=n {
        let vn = v.at(m);
        vf.add(vn * s.theta_reduced().sin() / sin_k);
        s = prufer_step(&s, vn)?;
        states.push(s);
    }
    let mut evo = Evolution {
        states,
        v_functional: vf.value(),
        w_functional: None,
        growth_exponent: 0.0,
        amplitude_exponent: 0.0,
    };
    if let Some(d) = decomposition {
        let phases = evo.mid_phases();
        let mut acc = KahanSum::new();
        for (m, phi) in phases.iter().enumerate().take(d.len().min(n)) {
            acc.add(2.0 * d.w[m] * phi.cos());
        }
        evo.w_functional = Some(acc.value());
    }
    // states[m] sits at site m+1 and encodes (ψ(m), ψ(m+1)).
    evo.growth_exponent = decade_fit(&evo.states, |s| s.log_energy());
    evo.amplitude_exponent = decade_fit(&evo.states, |s| s.log_r);
    Ok(evo)
}

/// Largest |ψ_Prüfer(n) − ψ_direct(n)| / max(|ψ(n−1)|, |ψ(n)|) over the run.
pub fn dual_path_error(v: &Potential, k: f64, boundary: (f64, f64), n: usize) -> Result<f64> {
    let evo = evolve(v, k, boundary, n)?;
    let e = 2.0 * k.cos();
    let (mut prev, mut cur) = boundary;
    let mut worst = 0.0f64;
    for m in 1..=n {
        let next = (e - v.at(m)) * cur - prev;
        prev = cur;
        cur = next;
        let (pp, pc) = evo.states[m].psi_pair();
        let scale = prev.abs().max(cur.abs());
        worst = worst.max((pc - cur).abs().max((pp - prev).abs()) / scale);
    }
    Ok(worst)
}

/// Truncated Fourier tail Ŵ(k; n) = Σ_{m=n}^{M} W(m) e^{2ikm}, M = len(W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTail {
    pub value: Complex64,
    /// max |S_m − S_M| over the last half of the summation range.
    pub error_estimate: f64,
    /// The same oscillation measured over the preceding quarter.
    pub previous_estimate: f64,
}

impl FourierTail {
    pub fn converging(&self) -> bool {
        self.error_estimate <= 1e-12 || self.error_estimate < 0.75 * self.previous_estimate
    }
}

/// `w[m-1]` holds W(m).
pub fn w_hat_tail(w: &[f64], k: f64, n: usize) -> Result<FourierTail> {
    let m_max = w.len();
    if n == 0 || n > m_max {
        return Err(Error::InvalidInput(format!(
            "start index {n} outside 1..={m_max}"
        )));
    }
    let count = m_max - n + 1;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    let mut partial = Vec::with_capacity(count);
    for m in n..=m_max {
        let (s, c) = (2.0 * k * m as f64).sin_cos();
        re.add(w[m - 1] * c);
        im.add(w[m - 1] * s);
        partial.push(Complex64::new(re.value(), im.value()));
    }
    let value = *partial.last().unwrap();
    let osc = |lo: usize, hi: usize, anchor: Complex64| -> f64 {
        partial[lo..hi]
            .iter()
            .fold(0.0f64, |acc, p| acc.max((p - anchor).norm()))
    };
    let half = count / 2;
    let quarter = count / 4;
    let error_estimate = osc(half, count, value);
    let previous_estimate = osc(quarter, half.max(quarter + 1).min(count), partial[half.max(1) - 1]);
    Ok(FourierTail {
        value,
        error_estimate,
        previous_estimate,
    })
}

/// Weighted phase sum Σ_{n≤N} cos²(φ(n))/n against 0.6·log N.
pub fn cos_square_sums(evo: &Evolution) -> Vec<f64> {
    let phases = evo.mid_phases();
    partial_sums(
        phases
            .iter()
            .enumerate()
            .map(|(i, phi)| phi.cos().powi(2) / (i + 1) as f64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_alternating, gen_wvn};
    use proptest::prelude::*;

    #[test]
    fn boundary_state() {
        for k in [0.3, 1.0, 2.5] {
            let s = prufer_transform((0.0, 1.0), k, 1).unwrap();
            assert!((s.r() - 1.0 / k.sin()).abs() < 1e-14);
            assert!((0.5 * s.theta() - k).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_edge_quasimomenta() {
        assert!(prufer_transform((0.0, 1.0), 0.0, 1).is_err());
        assert!(prufer_transform((0.0, 1.0), PI, 1).is_err());
    }

    #[test]
    fn free_solution_amplitude() {
        let k = 0.7;
        for n in 1..40 {
            let psi = |m: f64| (k * m).sin() / k.sin();
            let s = prufer_transform((psi(n as f64 - 1.0), psi(n as f64)), k, n).unwrap();
            assert!((s.r() - 1.0 / k.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn free_steps_are_exact() {
        let k = 1.1;
        let v = Potential::new(vec![0.0; 1000]).unwrap();
        let evo = evolve(&v, k, (0.0, 1.0), 1000).unwrap();
        let r0 = evo.states[0].log_r;
        for w in evo.states.windows(2) {
            assert_eq!(w[1].log_r, r0);
            assert!((w[1].theta() - w[0].theta() - 2.0 * k).abs() < 1e-11);
        }
        assert_eq!(evo.v_functional, 0.0);
        assert!(evo.growth_exponent.abs() < 1e-2, "{}", evo.growth_exponent);
        assert!(evo.amplitude_exponent.abs() < 1e-20);
    }

    #[test]
    fn step_matches_recursion() {
        let k = 0.9;
        let s = prufer_transform((0.3, -0.8), k, 4).unwrap();
        let vn = 0.37;
        let t = prufer_step(&s, vn).unwrap();
        let (p, c) = s.psi_pair();
        let next = (2.0 * k.cos() - vn) * c - p;
        let (tp, tc) = t.psi_pair();
        assert!((tp - c).abs() < 1e-14);
        assert!((tc - next).abs() < 1e-14);
    }

    #[test]
    fn large_potential_keeps_sign() {
        let k = 0.2;
        let s = prufer_transform((0.5, 1.0), k, 1).unwrap();
        let t = prufer_step(&s, 5.0).unwrap();
        let next = (2.0 * k.cos() - 5.0) * 1.0 - 0.5;
        assert!((t.psi_pair().1 - next).abs() < 1e-12);
    }

    #[test]
    fn alternating_dual_path() {
        let v = gen_alternating(1.0, 10_000).unwrap();
        let err = dual_path_error(&v, PI / 3.0, (0.0, 1.0), 10_000).unwrap();
        assert!(err < 1e-8, "{err:e}");
    }

    #[test]
    fn wvn_amplitude_decay() {
        let (v, psi) = gen_wvn(0.75, 100_000).unwrap();
        let evo = evolve(&v, PI / 2.0, psi.boundary(), 100_000).unwrap();
        assert!((evo.amplitude_exponent + 0.75).abs() < 0.05 * 0.75);
    }

    #[test]
    fn zero_potential_decomposes_to_zero() {
        let v = Potential::new(vec![0.0; 30]).unwrap();
        for s in [super::Strategy::Gamma, super::Strategy::Tail] {
            let d = decompose(&v, s, &Tolerances::default()).unwrap();
            assert!(d.w.iter().chain(d.q.iter()).all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gamma_decomposition_matches_closed_form_q() {
        let v = gen_alternating(0.8, 500).unwrap();
        let tol = Tolerances::default();
        let cert = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&v), 500, &tol).unwrap();
        let d = decompose_from_gamma(&v, &cert.gamma).unwrap();
        let q = q_from_gamma(&cert.gamma, 500);
        for (a, b) in d.q.iter().zip(&q) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(d.identity_defect(&v) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn tail_of_alternating() {
        let (v, d, cauchy) = decompose_tail_fn(|m| if m % 2 == 0 { 1.0 } else { -1.0 } / m as f64, 10_000)
            .unwrap();
        assert!(cauchy < 1e-9);
        for n in [100usize, 1000, 5000] {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * n as f64);
            assert!((d.w[n - 1] - want).abs() < 1.0 / (n * n) as f64);
        }
        assert!(d.identity_defect(&v) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn divergent_tail_is_reported() {
        let r = decompose_tail_fn(|m| 1.0 / m as f64, 1000);
        assert!(matches!(r, Err(Error::NotConvergent { .. })));
    }

    #[test]
    fn geometric_fourier_tail() {
        let r = 0.5f64;
        let w: Vec<f64> = (1..=200).map(|m| r.powi(m)).collect();
        let k = 0.8;
        let t = w_hat_tail(&w, k, 3).unwrap();
        let z = Complex64::from_polar(r, 2.0 * k);
        let want = z.powu(3) / (1.0 - z);
        assert!((t.value - want).norm() < 1e-14);
        assert!(t.converging());
        let zero = w_hat_tail(&[0.0; 50], k, 1).unwrap();
        assert_eq!(zero.value, Complex64::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn transform_round_trip(p in -10.0f64..10.0, c in -10.0f64..10.0, k in 0.01f64..3.13) {
            prop_assume!(p.abs() + c.abs() > 1e-3);
            let s = prufer_transform((p, c), k, 1).unwrap();
            let (p2, c2) = prufer_inverse(&s);
            let scale = p.abs().max(c.abs());
            prop_assert!((p - p2).abs() < 1e-14 * scale / k.sin());
            prop_assert!((c - c2).abs() < 1e-14 * scale / k.sin());
        }

        #[test]
        fn step_agrees_with_recursion(p in -3.0f64..3.0, c in -3.0f64..3.0,
                                     k in 0.05f64..3.09, vn in -4.0f64..4.0) {
            prop_assume!(p.abs() + c.abs() > 1e-2);
            let s = prufer_transform((p, c), k, 1).unwrap();
            let t = prufer_step(&s, vn).unwrap();
            let next = (2.0 * k.cos() - vn) * c - p;
            let scale = p.abs().max(c.abs()).max(next.abs());
            prop_assert!((t.psi_pair().1 - next).abs() < 1e-12 * scale / k.sin());
            let inc = t.theta() - s.theta() - 2.0 * k;
            prop_assert!(inc > -2.0 * PI && inc <= 2.0 * PI);
            if vn.abs() < 2.0 * k.sin() {
                prop_assert!(inc > -PI && inc <= PI + 1e-12);
            }
        }
    }
}
