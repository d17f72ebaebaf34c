use serde::Serialize;

use super::{cumulative, cutoff, GammaFields};
use crate::bounds::{lambda_grid, BoundReport};
use crate::numerics::Tolerances;

/// V = W′ + Q on the sample grid with W = g·Γₑ.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuumDecomposition {
    pub grid: Vec<f64>,
    pub h: f64,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub q: Vec<f64>,
    /// sup over x ≥ 1 of |Q + 2ΓₑΓₒ|.
    pub closed_form_defect: f64,
    /// ∫|Q| over the whole window and over [1, x_max].
    pub q_l1: f64,
    pub q_l1_tail: f64,
    /// ∫₁ˣ tW² ≤ ¼ log x + 1.
    pub w_bound: BoundReport,
}

impl ContinuumDecomposition {
    pub fn identity_defect(&self, potential: &[f64]) -> f64 {
        potential
            .iter()
            .zip(self.w_prime.iter().zip(&self.q))
            .map(|(v, (dw, q))| (v - dw - q).abs())
            .fold(0.0, f64::max)
    }
}

pub fn continuum_decompose(f: &GammaFields, tol: &Tolerances) -> ContinuumDecomposition {
    let de = f.gamma_e_prime();
    let n = f.len();
    let mut w = Vec::with_capacity(n);
    let mut w_prime = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut defect = 0.0f64;
    let one = f.index_at(1.0);
    for i in 0..n {
        let (g, dg) = cutoff(f.grid[i]);
        let wi = g * f.gamma_e[i];
        let dwi = dg * f.gamma_e[i] + g * de[i];
        let qi = f.potential[i] - dwi;
        if i >= one {
            defect = defect.max((qi + 2.0 * f.gamma_e[i] * f.gamma_o[i]).abs());
        }
        w.push(wi);
        w_prime.push(dwi);
        q.push(qi);
    }
    let abs_q: Vec<f64> = q.iter().map(|x| x.abs()).collect();
    let q_int = cumulative(&abs_q, f.h);
    let q_l1 = q_int.last().copied().unwrap_or(0.0);
    let q_l1_tail = q_l1 - q_int.get(one).copied().unwrap_or(q_l1);

    let xs = &f.grid[one.min(n)..];
    let tw2: Vec<f64> = xs.iter().zip(&w[one.min(n)..]).map(|(x, w)| x * w * w).collect();
    let lhs = cumulative(&tw2, f.h);
    let rhs: Vec<f64> = xs.iter().map(|x| 0.25 * x.ln() + 1.0).collect();
    let w_bound = BoundReport::pointwise_at("w_log_bound", xs, &lhs, &rhs, 1.0, tol);

    ContinuumDecomposition {
        grid: f.grid.clone(),
        h: f.h,
        w,
        w_prime,
        q,
        closed_form_defect: defect,
        q_l1,
        q_l1_tail,
        w_bound,
    }
}

/// Bounds on Γₑ, Γₒ over the sampled window, plus the W bound of the
/// decomposition. Integrals start at the first grid point.
pub fn verify_continuum_bounds(f: &GammaFields, tol: &Tolerances) -> Vec<BoundReport> {
    let xs = &f.grid;
    let zeros = vec![0.0; f.len()];
    let upper = BoundReport::pointwise_at("gamma_o_upper", xs, &f.gamma_o, &zeros, 1.0, tol);
    let inv: Vec<f64> = xs.iter().map(|x| -1.0 / x).collect();
    let lower = BoundReport::pointwise_at("gamma_o_lower", xs, &inv, &f.gamma_o, 1.0, tol);

    let quad: Vec<f64> = xs
        .iter()
        .zip(f.gamma_e.iter().zip(&f.gamma_o))
        .map(|(x, (e, o))| {
            let shifted = o + 1.0 / x;
            x * x * (e * e + shifted * shifted)
        })
        .collect();
    let quad_int = cumulative(&quad, f.h);
    let quadratic = BoundReport::pointwise_at("gamma_quadratic", xs, &quad_int, xs, 1.0, tol);

    let weak = BoundReport::weak_l1_measure("gamma_e_weak_l1", &f.gamma_e, f.h, 5.0, &lambda_grid());

    // sup over y ≤ x of ∫ᵧˣ tΓₑ² − ¼ log(x/y) against 1.
    let te2: Vec<f64> = xs.iter().zip(&f.gamma_e).map(|(x, e)| x * e * e).collect();
    let te2_int = cumulative(&te2, f.h);
    let mut running_min = f64::INFINITY;
    let pair_excess: Vec<f64> = te2_int
        .iter()
        .zip(xs)
        .map(|(i, x)| {
            let j = i - 0.25 * x.ln();
            running_min = running_min.min(j);
            j - running_min
        })
        .collect();
    let ones = vec![1.0; f.len()];
    let windowed = BoundReport::pointwise_at("gamma_e_log_window", xs, &pair_excess, &ones, 1.0, tol);

    let one = f.index_at(1.0).min(f.len());
    let abs_e: Vec<f64> = f.gamma_e[one..].iter().map(|e| e.abs()).collect();
    let l1 = cumulative(&abs_e, f.h);
    let log_l1 = BoundReport::log_bounded_at("gamma_e_log_l1", &xs[one..], &l1, 0.5);

    let d = continuum_decompose(f, tol);
    vec![upper, lower, quadratic, weak, windowed, log_l1, d.w_bound]
}

/// Diagnostics for W: sup of |W|·(x/log x)^{1/4} on [e, x_max] and ∫|W⁴W′|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WRegularity {
    pub scaled_sup: f64,
    pub scaled_sup_at: f64,
    pub w4_dw_l1: f64,
    /// Contribution of the second half of the window to ∫|W⁴W′|.
    pub w4_dw_tail: f64,
}

pub fn check_w_regularity(d: &ContinuumDecomposition) -> WRegularity {
    let e = std::f64::consts::E;
    let (mut sup, mut at) = (0.0f64, f64::NAN);
    for (x, w) in d.grid.iter().zip(&d.w) {
        if *x >= e {
            let s = w.abs() * (x / x.ln()).powf(0.25);
            if s > sup {
                sup = s;
                at = *x;
            }
        }
    }
    let integrand: Vec<f64> = d.w.iter().zip(&d.w_prime).map(|(w, dw)| (w.powi(4) * dw).abs()).collect();
    let int = cumulative(&integrand, d.h);
    let total = int.last().copied().unwrap_or(0.0);
    let half = d.grid.last().map_or(0.0, |x| 0.5 * x);
    let mid = d.grid.partition_point(|&x| x < half);
    WRegularity {
        scaled_sup: sup,
        scaled_sup_at: at,
        w4_dw_l1: total,
        w4_dw_tail: total - int.get(mid).copied().unwrap_or(total),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{integrate_uv, ContinuumPotential};

    #[test]
    fn free_fields() {
        let tol = Tolerances::default();
        let f = integrate_uv(&ContinuumPotential::free(), 10.0, 1e-4).unwrap();
        let reps = verify_continuum_bounds(&f, &tol);
        assert!(reps.iter().all(|r| r.pass), "{reps:#?}");
        let lower = reps.iter().find(|r| r.name == "gamma_o_lower").unwrap();
        assert!(lower.margin.abs() < 1e-9);
        let quad = reps.iter().find(|r| r.name == "gamma_quadratic").unwrap();
        assert!(quad.lhs_trace.iter().all(|&(_, y)| y.abs() < 1e-12));
        let d = continuum_decompose(&f, &tol);
        assert!(d.w.iter().chain(&d.q).all(|x| x.abs() < 1e-12));
        let reg = check_w_regularity(&d);
        assert_eq!(reg.scaled_sup, 0.0);
        assert_eq!(reg.w4_dw_l1, 0.0);
    }

    #[test]
    fn damped_sine_suite() {
        let tol = Tolerances::default();
        let p = ContinuumPotential::damped_sine(0.3);
        let f = integrate_uv(&p, 10.0, 1e-4).unwrap();
        for r in verify_continuum_bounds(&f, &tol) {
            assert!(r.pass && r.margin >= 0.0, "{r:?}");
        }
        let d = continuum_decompose(&f, &tol);
        assert!(d.identity_defect(&f.potential) < 1e-12);
        assert!(d.closed_form_defect < 1e-6);
        assert!(d.w_bound.pass);

        let f2 = integrate_uv(&p, 10.0, 5e-5).unwrap();
        let d2 = continuum_decompose(&f2, &tol);
        assert!((d.q_l1_tail - d2.q_l1_tail).abs() < 1e-3 * d2.q_l1_tail);
        let (r1, r2) = (check_w_regularity(&d), check_w_regularity(&d2));
        assert!((r1.scaled_sup - r2.scaled_sup).abs() <= 0.01 * r2.scaled_sup);
        assert!((r1.w4_dw_l1 - r2.w4_dw_l1).abs() <= 0.01 * r2.w4_dw_l1);
    }
}
