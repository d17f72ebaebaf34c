//! Finite-range checks of the Verblunsky-coefficient and potential estimates
//! for operators with no spectrum outside [−2, 2].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{log_grid, log_indices, partial_sums, Tolerances};
use crate::potential::Potential;
use crate::prufer::decompose_from_gamma;
use crate::verblunsky::GammaSeq;

/// Samples per decade kept in the serialized traces.
pub const TRACE_DENSITY: usize = 20;
/// Allowed drift of a running constant estimate over the final decade.
pub const STABILITY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundKind {
    /// lhs(n) ≤ rhs(n) at every sample.
    Pointwise,
    /// lhs(n) − slope·log n stays bounded: its running supremum settles.
    LogBounded { slope: f64 },
    /// Partial sums of a nonnegative series settle: decade increments shrink.
    Convergent,
    /// #{|x| ≥ λ} ≤ constant/λ on a λ-grid.
    WeakL1 { constant: f64 },
}

/// Outcome of one inequality check. Traces are (abscissa, value) pairs, with
/// the abscissa a site index or a level λ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub kind: BoundKind,
    pub lhs_trace: Vec<(f64, f64)>,
    pub rhs_trace: Vec<(f64, f64)>,
    /// min over samples of rhs − lhs.
    pub margin: f64,
    /// Empirical constant for bounds with a free constant.
    pub constant_estimate: Option<f64>,
    /// For log-bounded sums: inf of lhs − slope·log n over the final decade.
    pub lower_constant_estimate: Option<f64>,
    /// Drift of the constant estimate over the final decade (or ratio of
    /// decade increments for convergent series).
    pub stability: Option<f64>,
    pub pass: bool,
}

fn downsample(xs: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    log_indices(values.len(), TRACE_DENSITY)
        .into_iter()
        .map(|n| (xs[n - 1], values[n - 1]))
        .collect()
}

fn site_axis(n: usize) -> Vec<f64> {
    (1..=n).map(|m| m as f64).collect()
}

impl BoundReport {
    /// `lhs[i]`, `rhs[i]` belong to index `i + 1`. Each sample may fall short by
    /// eq_tol · max(|lhs|, |rhs|, floor); such ties enter the margin as 0.
    pub fn pointwise(name: &str, lhs: &[f64], rhs: &[f64], floor: f64, tol: &Tolerances) -> Self {
        Self::pointwise_at(name, &site_axis(lhs.len()), lhs, rhs, floor, tol)
    }

    /// Pointwise comparison sampled at abscissas `xs`.
    pub fn pointwise_at(
        name: &str,
        xs: &[f64],
        lhs: &[f64],
        rhs: &[f64],
        floor: f64,
        tol: &Tolerances,
    ) -> Self {
        let mut margin = f64::INFINITY;
        let mut pass = true;
        for (l, r) in lhs.iter().zip(rhs) {
            let scale = l.abs().max(r.abs()).max(floor);
            let d = r - l;
            if !(d >= -tol.eq_tol * scale) {
                pass = false;
                margin = margin.min(d);
            } else {
                margin = margin.min(d.max(0.0));
            }
        }
        if lhs.is_empty() {
            margin = 0.0;
        }
        Self {
            name: name.into(),
            kind: BoundKind::Pointwise,
            lhs_trace: downsample(xs, lhs),
            rhs_trace: downsample(xs, rhs),
            margin,
            constant_estimate: None,
            lower_constant_estimate: None,
            stability: None,
            pass,
        }
    }

    /// `lhs[i]` is the partial sum up to index i + 1.
    pub fn log_bounded(name: &str, lhs: &[f64], slope: f64) -> Self {
        Self::log_bounded_at(name, &site_axis(lhs.len()), lhs, slope)
    }

    /// `lhs[i]` is the running quantity at abscissa `xs[i]` (positive, increasing).
    pub fn log_bounded_at(name: &str, xs: &[f64], lhs: &[f64], slope: f64) -> Self {
        let n = lhs.len();
        let excess: Vec<f64> = lhs.iter().zip(xs).map(|(l, x)| l - slope * x.ln()).collect();
        let x_last = xs.get(n.wrapping_sub(1)).copied().unwrap_or(1.0);
        let early = xs.partition_point(|&x| x <= x_last / 10.0).max(1).min(n);
        let sup = |m: usize| excess[..m].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (c_full, c_early) = if n == 0 { (0.0, 0.0) } else { (sup(n), sup(early)) };
        let tail_start = xs.partition_point(|&x| x < x_last / 10.0).min(n.saturating_sub(1));
        let lower = excess[tail_start.min(n)..].iter().cloned().fold(f64::INFINITY, f64::min);
        let rhs: Vec<f64> = xs.iter().map(|x| slope * x.ln() + c_full).collect();
        let margin = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| r - l)
            .fold(f64::INFINITY, f64::min);
        let drift = c_full - c_early;
        Self {
            name: name.into(),
            kind: BoundKind::LogBounded { slope },
            lhs_trace: downsample(xs, lhs),
            rhs_trace: downsample(xs, &rhs),
            margin: if n == 0 { 0.0 } else { margin },
            constant_estimate: Some(c_full),
            lower_constant_estimate: if n == 0 { None } else { Some(lower) },
            stability: Some(drift),
            pass: drift.is_finite() && drift <= STABILITY_TOL * c_full.abs().max(1.0),
        }
    }

    /// `partial[i]` is the partial sum of a nonnegative series up to index i + 1.
    pub fn convergent(name: &str, partial: &[f64]) -> Self {
        let n = partial.len();
        let at = |m: usize| if m == 0 { 0.0 } else { partial[m.min(n) - 1] };
        let inc_last = at(n) - at(n / 10);
        let inc_prev = at(n / 10) - at(n / 100);
        let total = at(n);
        let slack = 1e-12 * total.abs().max(1.0);
        Self {
            name: name.into(),
            kind: BoundKind::Convergent,
            lhs_trace: downsample(&site_axis(n), partial),
            rhs_trace: Vec::new(),
            margin: inc_prev - inc_last,
            constant_estimate: Some(total),
            lower_constant_estimate: None,
            stability: Some(if inc_prev > 0.0 { inc_last / inc_prev } else { 0.0 }),
            pass: total.is_finite() && inc_last <= inc_prev + slack,
        }
    }

    /// Level-set counting #{i : |x_i| ≥ λ} ≤ constant/λ over `levels`.
    pub fn weak_l1(name: &str, values: &[f64], constant: f64, levels: &[f64]) -> Self {
        Self::weak_l1_measure(name, values, 1.0, constant, levels)
    }

    /// Level-set measure with each sample carrying weight `cell`.
    pub fn weak_l1_measure(name: &str, values: &[f64], cell: f64, constant: f64, levels: &[f64]) -> Self {
        let mut mags: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let mut lhs = Vec::with_capacity(levels.len());
        let mut rhs = Vec::with_capacity(levels.len());
        let mut margin = f64::INFINITY;
        for &lam in levels {
            let measure = mags.partition_point(|&m| m >= lam) as f64 * cell;
            lhs.push((lam, measure));
            rhs.push((lam, constant / lam));
            margin = margin.min(constant / lam - measure);
        }
        Self {
            name: name.into(),
            kind: BoundKind::WeakL1 { constant },
            lhs_trace: lhs,
            rhs_trace: rhs,
            margin,
            constant_estimate: None,
            lower_constant_estimate: None,
            stability: None,
            pass: margin >= 0.0,
        }
    }
}

/// The λ-grid used by the counting checks: 50 log-spaced levels in [1e-4, 1).
pub fn lambda_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 50)
}

fn require(g: &GammaSeq, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    if g.len() < 2 * n {
        return Err(Error::TooShort {
            needed: 2 * n,
            available: g.len(),
        });
    }
    Ok(())
}

/// Checks on γ₀ … γ_{2N−1}:
/// odd monotonicity, the lower bound on odd terms, the weighted quadratic sum,
/// weak-ℓ¹ counting of even terms and the two logarithmic sums.
pub fn verify_gamma_bounds(g: &GammaSeq, n: usize, tol: &Tolerances) -> Result<Vec<BoundReport>> {
    require(g, n)?;
    let even: Vec<f64> = g.even().take(n).collect();
    let odd: Vec<f64> = g.odd().take(n).collect();

    // γ_{2m−1} ≤ γ_{2m+1} ≤ 0, written as max(γ_{2m+1}, γ_{2m−1} + (γ_{2m+1} − …)) ≤ …
    let mut mono_l = Vec::with_capacity(n);
    let mut mono_r = Vec::with_capacity(n);
    for m in 0..n {
        let prev = if m == 0 { -1.0 } else { odd[m - 1] };
        let cur = odd[m];
        let slack = (cur - prev).min(-cur);
        mono_l.push(cur);
        mono_r.push(cur + slack);
    }
    let odd_mono = BoundReport::pointwise("odd_monotone", &mono_l, &mono_r, 1.0, tol);

    let weighted: Vec<f64> = partial_sums(
        even.iter()
            .enumerate()
            .map(|(j, x)| ((j + 1) * (j + 2)) as f64 * x * x),
    );
    let lower: Vec<f64> = (0..n)
        .map(|m| {
            let d = (m + 2) as f64;
            -1.0 / d + weighted[m] / (d * d)
        })
        .collect();
    let odd_lower = BoundReport::pointwise("odd_lower", &lower, &odd, 1.0, tol);

    let cap: Vec<f64> = (0..n).map(|m| (m + 2) as f64).collect();
    let quad = BoundReport::pointwise("even_weighted_sum", &weighted, &cap, 1.0, tol);

    let weak = BoundReport::weak_l1("even_weak_l1", &even, 9.0, &lambda_grid());

    let lin: Vec<f64> = partial_sums(even.iter().enumerate().map(|(j, x)| (j + 1) as f64 * x * x));
    let log_quad = BoundReport::log_bounded("even_log_quadratic", &lin, 0.25);

    let abs: Vec<f64> = partial_sums(even.iter().map(|x| x.abs()));
    let log_abs = BoundReport::log_bounded("even_log_abs", &abs, 0.5);

    Ok(vec![odd_mono, odd_lower, quad, weak, log_quad, log_abs])
}

/// Checks on V(1..N) given its certified coefficients γ₀ … γ_{2N−1}:
/// weak-ℓ¹ counting, the weighted square sums, the logarithmic ℓ¹ bound, the
/// W-decomposition bound and the sharp pointwise bound |V(n)| ≤ √(2/n).
pub fn verify_potential_bounds(
    v: &Potential,
    g: &GammaSeq,
    n: usize,
    tol: &Tolerances,
) -> Result<Vec<BoundReport>> {
    require(g, n)?;
    let v = v.padded(n);
    let vals = v.values();

    let weak = BoundReport::weak_l1("potential_weak_l1", vals, 54.0, &lambda_grid());

    let mut out = vec![weak];
    for eps in [0.1, 0.5] {
        let s = partial_sums(
            vals.iter()
                .enumerate()
                .map(|(i, x)| ((i + 1) as f64).powf(1.0 - eps) * x * x),
        );
        out.push(BoundReport::convergent(&format!("potential_weighted_l2_eps{eps}"), &s));
    }

    let l1 = partial_sums(vals.iter().map(|x| x.abs()));
    out.push(BoundReport::log_bounded("potential_log_l1", &l1, 1.0));

    let d = decompose_from_gamma(&v, g)?;
    let ws = partial_sums(d.w.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w * w));
    out.push(BoundReport::log_bounded("decomposition_log_w", &ws, 0.25));

    let lhs: Vec<f64> = vals
        .iter()
        .enumerate()
        .map(|(i, x)| x.abs() * ((i + 1) as f64 / 2.0).sqrt())
        .collect();
    out.push(BoundReport::pointwise("sharp_pointwise", &lhs, &vec![1.0; n], 1.0, tol));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_alternating, gen_extremal};
    use crate::potential::JacobiCoeffs;
    use crate::verblunsky::gamma_from_jacobi;

    fn gamma_of(v: &Potential, n: usize) -> GammaSeq {
        let r = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&v.padded(n)), n, &Tolerances::default())
            .unwrap();
        assert!(r.is_certified(), "{:?}", r.status);
        r.gamma
    }

    #[test]
    fn free_case_is_tight() {
        let n = 1000;
        let v = Potential::new(vec![0.0; n]).unwrap();
        let g = gamma_of(&v, n);
        let tol = Tolerances::default();
        let reps = verify_gamma_bounds(&g, n, &tol).unwrap();
        assert!(reps.iter().all(|r| r.pass), "{reps:#?}");
        let lower = reps.iter().find(|r| r.name == "odd_lower").unwrap();
        assert!(lower.margin.abs() < 1e-12);
        let preps = verify_potential_bounds(&v, &g, n, &tol).unwrap();
        assert!(preps.iter().all(|r| r.pass));
        let l1 = preps.iter().find(|r| r.name == "potential_log_l1").unwrap();
        assert!(l1.lhs_trace.iter().all(|&(_, y)| y == 0.0));
    }

    #[test]
    fn extremal_even_sum() {
        let v = gen_extremal(3).unwrap();
        let g = gamma_of(&v, 10);
        assert!((g.at(2) + 1.0 / 6f64.sqrt()).abs() < 1e-14);
        assert!((g.at(3) + 0.2).abs() < 1e-14);
        assert!((g.at(4) - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        let reps = verify_gamma_bounds(&g, 10, &Tolerances::default()).unwrap();
        let quad = reps.iter().find(|r| r.name == "even_weighted_sum").unwrap();
        assert!(quad.pass);
        let sum_at_2 = quad.lhs_trace.iter().find(|&&(x, _)| x == 3.0).unwrap().1;
        assert!((sum_at_2 - 3.0).abs() < 1e-13);
    }

    #[test]
    fn extremal_sharp_equality() {
        for m in [1usize, 2, 7, 30] {
            let v = gen_extremal(m).unwrap();
            let n = 200;
            let g = gamma_of(&v, n);
            let reps = verify_potential_bounds(&v, &g, n, &Tolerances::default()).unwrap();
            let sharp = reps.iter().find(|r| r.name == "sharp_pointwise").unwrap();
            assert!(sharp.pass);
            assert!(sharp.margin >= 0.0 && sharp.margin < 1e-12);
            assert!((v.at(m).abs() * (m as f64 / 2.0).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_suite() {
        let n = 100_000;
        let v = gen_alternating(1.0, n).unwrap();
        let r = gamma_from_jacobi(&JacobiCoeffs::schrodinger(&v), n, &Tolerances::default()).unwrap();
        assert!(r.is_certified());
        let tol = Tolerances::default();
        let mut reps = verify_gamma_bounds(&r.gamma, n, &tol).unwrap();
        reps.extend(verify_potential_bounds(&v, &r.gamma, n, &tol).unwrap());
        for rep in &reps {
            assert!(rep.pass, "{} failed: {:?}", rep.name, rep);
        }
        let l1 = reps.iter().find(|r| r.name == "potential_log_l1").unwrap();
        let lower = l1.lower_constant_estimate.unwrap();
        assert!((lower - 0.5772156649).abs() < 1e-4, "{lower}");
    }

    #[test]
    fn weak_l1_counts() {
        let rep = BoundReport::weak_l1("t", &[0.5, -0.5, 0.1], 0.5, &[0.4, 0.05]);
        assert_eq!(rep.lhs_trace, vec![(0.4, 2.0), (0.05, 3.0)]);
        assert!(!rep.pass);
    }

    #[test]
    fn log_bounded_detects_drift() {
        let s: Vec<f64> = (1..=10_000).map(|n| 0.3 * (n as f64).ln()).collect();
        assert!(!BoundReport::log_bounded("t", &s, 0.25).pass);
        assert!(BoundReport::log_bounded("t", &s, 0.3).pass);
    }

    #[test]
    fn convergent_detects_divergence() {
        let harmonic = partial_sums((1..10_001usize).map(|n| 1.0 / n as f64));
        assert!(!BoundReport::convergent("t", &harmonic).pass);
        let p2 = partial_sums((1..10_001usize).map(|n| 1.0 / (n * n) as f64));
        assert!(BoundReport::convergent("t", &p2).pass);
    }
}
