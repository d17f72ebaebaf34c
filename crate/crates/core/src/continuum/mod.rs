//! Continuum counterpart: zero-energy solutions of −u″ ± Vu = 0 on the
//! half-line, the fields Γₑ, Γₒ, their bounds, the decomposition V = W′ + Q
//! and Prüfer evolution for −ψ″ + Vψ = k²ψ.

mod analysis;
mod fields;
mod potential;
mod prufer;

pub use analysis::{
    check_w_regularity, continuum_decompose, verify_continuum_bounds, ContinuumDecomposition,
    WRegularity,
};
pub use fields::{
    cumulative, derivative, integrate_uv, GammaFields, RiccatiResiduals, WindowReport, MAX_STEP,
    RICHARDSON_LIMIT,
};
pub use potential::ContinuumPotential;
pub use prufer::{continuum_dual_path_error, continuum_prufer, AmplitudeReport, ContinuumPrufer};

/// A continuum potential together with its integration window.
#[derive(Debug, Clone)]
pub struct ContinuumCase {
    pub name: String,
    pub potential: ContinuumPotential,
    pub x_max: f64,
}

/// free, ±0.3·sin(x)/(1+x) on [h, 10], and the sparse oscillation on [h, 3]
/// (beyond x ≈ 3 its frequency 2e^{2x} is not resolved at h = 1e-4).
pub fn continuum_corpus() -> Vec<ContinuumCase> {
    let sine = ContinuumPotential::damped_sine(0.3);
    vec![
        ContinuumCase {
            name: "free".into(),
            potential: ContinuumPotential::free(),
            x_max: 10.0,
        },
        ContinuumCase {
            name: "damped_sine".into(),
            x_max: 10.0,
            potential: sine.clone(),
        },
        ContinuumCase {
            name: "damped_sine_negated".into(),
            x_max: 10.0,
            potential: sine.negated(),
        },
        ContinuumCase {
            name: "sparse_oscillation".into(),
            potential: ContinuumPotential::sparse_oscillation(),
            x_max: 3.0,
        },
    ]
}

/// Smooth cutoff g with g = 0 on [0, ½], g = 1 on [1, ∞); returns (g, g′).
pub fn cutoff(x: f64) -> (f64, f64) {
    if x <= 0.5 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let t = 2.0 * x - 1.0;
    let phi = |s: f64| (-1.0 / s).exp();
    let (a, b) = (phi(t), phi(1.0 - t));
    let (da, db) = (a / (t * t), b / ((1.0 - t) * (1.0 - t)));
    let den = a + b;
    (a / den, 2.0 * (da * b + a * db) / (den * den))
}

#[cfg(test)]
mod tests {
    use super::cutoff;

    #[test]
    fn cutoff_is_smooth_step() {
        assert_eq!(cutoff(0.3), (0.0, 0.0));
        assert_eq!(cutoff(1.2), (1.0, 0.0));
        assert!((cutoff(0.75).0 - 0.5).abs() < 1e-15);
        for x in [0.55, 0.7, 0.9, 0.99] {
            let d = 1e-6;
            let fd = (cutoff(x + d).0 - cutoff(x - d).0) / (2.0 * d);
            assert!((fd - cutoff(x).1).abs() < 1e-6);
        }
    }
}
