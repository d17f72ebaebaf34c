//! Deterministic test corpora: free, extremal, alternating and random
//! certified Schrödinger potentials, plus random Jacobi matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{gen_alternating, gen_extremal};
use crate::potential::{JacobiCoeffs, Potential};
use crate::verblunsky::GammaSeq;

/// Default seed of the random part of the corpus.
pub const CORPUS_SEED: u64 = 0x5eed_0001;

/// A finite-support Schrödinger potential with its exact Verblunsky
/// coefficients γ₀ … γ_{2L+1}. Past the support the even coefficients vanish
/// and the odd ones follow the free recursion, so the operator is certified
/// for every horizon.
#[derive(Debug, Clone)]
pub struct CertifiedInstance {
    pub potential: Potential,
    pub gamma: GammaSeq,
}

/// Builds the Schrödinger operator whose even coefficients are `even`
/// (followed by zeros). Returns None when some odd coefficient would leave
/// (−1, 0].
pub fn schrodinger_from_even(even: &[f64]) -> Result<Option<CertifiedInstance>> {
    if even.iter().any(|g| !(g.abs() < 1.0)) {
        return Err(Error::InvalidInput("even coefficients must lie in (-1, 1)".into()));
    }
    let l = even.len();
    let mut gamma = Vec::with_capacity(2 * l + 2);
    let mut values = Vec::with_capacity(l + 1);
    let (mut odd_prev, mut even_prev) = (-1.0, 0.0);
    for n in 0..=l {
        let ge = even.get(n).copied().unwrap_or(0.0);
        let go = 1.0 / ((1.0 - odd_prev) * (1.0 - ge * ge)) - 1.0;
        if !(go > -1.0 && go <= 0.0) {
            return Ok(None);
        }
        values.push((1.0 - odd_prev) * ge - (1.0 + odd_prev) * even_prev);
        gamma.push(ge);
        gamma.push(go);
        odd_prev = go;
        even_prev = ge;
    }
    Ok(Some(CertifiedInstance {
        potential: Potential::new(values)?,
        gamma: GammaSeq::new(gamma),
    }))
}

/// Random certified instance: γ_{2n} = c·ξₙ/(n + 1) for n < L with ξ uniform
/// in [−1, 1], L uniform in [5, max_len] and c uniform in (0, 0.5].
pub fn random_certified<R: Rng>(rng: &mut R, max_len: usize) -> CertifiedInstance {
    let max_len = max_len.max(5);
    loop {
        let l = rng.gen_range(5..=max_len);
        let c = 0.5 * (1.0 - rng.gen::<f64>());
        let even: Vec<f64> = (0..l)
            .map(|n| c * rng.gen_range(-1.0..=1.0) / (n + 1) as f64)
            .collect();
        if let Ok(Some(inst)) = schrodinger_from_even(&even) {
            return inst;
        }
    }
}

/// Random Jacobi matrix with a ∈ [0.5, 1.5] and b ∈ [−3, 3].
pub fn random_jacobi<R: Rng>(rng: &mut R, n: usize) -> JacobiCoeffs {
    let a = (0..n).map(|_| rng.gen_range(0.5..=1.5)).collect();
    let b = (0..n).map(|_| rng.gen_range(-3.0..=3.0)).collect();
    JacobiCoeffs::new(a, b).expect("positive off-diagonal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Free,
    Extremal,
    Alternating,
    Random,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub family: Family,
    pub potential: Potential,
}

/// The discrete corpus at horizon `n`: free, extremal 1 … 50, alternating
/// λ(−1)ⁿ/n for λ ∈ {0.5, 0.9, 1.0} and `random` certified instances.
pub fn discrete_corpus(n: usize, seed: u64, random: usize) -> Result<Vec<CorpusEntry>> {
    let mut out = vec![CorpusEntry {
        name: "free".into(),
        family: Family::Free,
        potential: Potential::new(vec![0.0])?,
    }];
    for m in 1..=50 {
        out.push(CorpusEntry {
            name: format!("extremal_{m}"),
            family: Family::Extremal,
            potential: gen_extremal(m)?,
        });
    }
    for lambda in [0.5, 0.9, 1.0] {
        out.push(CorpusEntry {
            name: format!("alternating_{lambda}"),
            family: Family::Alternating,
            potential: gen_alternating(lambda, n)?,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..random {
        out.push(CorpusEntry {
            name: format!("random_{i:03}"),
            family: Family::Random,
            potential: random_certified(&mut rng, 200).potential,
        });
    }
    Ok(out)
}

/// Proptest strategies shared by the unit tests.
#[cfg(test)]
pub(crate) mod strategies {
    use proptest::prelude::*;

    /// Even-length coefficient vectors with amplitude `amp`/(1 + k/4).
    pub fn decaying_gamma(amp: f64, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, len).prop_map(move |g| {
            let even = g.len() / 2 * 2;
            g[..even]
                .iter()
                .enumerate()
                .map(|(k, x)| amp * x / (1.0 + k as f64 / 4.0))
                .collect()
        })
    }

    /// Even coefficients for the certified Schrödinger construction.
    pub fn even_coefficients(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, len).prop_map(|g| {
            g.iter()
                .enumerate()
                .map(|(n, x)| 0.5 * x / (n + 1) as f64)
                .collect()
        })
    }
}
