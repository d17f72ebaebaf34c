use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::cutoff;
use crate::error::{Error, Result};

type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sample points per unit window when measuring local L² norms.
const L2_POINTS: usize = 2000;

/// A potential on the half-line given as a sampler, optionally together with an
/// antiderivative A (A′ = V). When A is present the solutions are integrated in
/// quasi-derivative form, which tolerates rapidly oscillating V.
#[derive(Clone)]
pub struct ContinuumPotential {
    label: String,
    sampler: Sampler,
    antiderivative: Option<Sampler>,
}

impl fmt::Debug for ContinuumPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuumPotential")
            .field("label", &self.label)
            .field("antiderivative", &self.antiderivative.is_some())
            .finish()
    }
}

impl ContinuumPotential {
    pub fn new<F>(label: impl Into<String>, v: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            sampler: Arc::new(v),
            antiderivative: None,
        }
    }

    pub fn with_antiderivative<F, G>(label: impl Into<String>, v: F, a: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            sampler: Arc::new(v),
            antiderivative: Some(Arc::new(a)),
        }
    }

    pub fn free() -> Self {
        Self::with_antiderivative("free", |_| 0.0, |_| 0.0)
    }

    /// amp · sin(x)/(1 + x).
    pub fn damped_sine(amp: f64) -> Self {
        Self::new(format!("damped_sine({amp})"), move |x: f64| amp * x.sin() / (1.0 + x))
    }

    /// V = d/dx [g(x) sin(e^{2x})/(4x)] with the smooth cutoff g, supplied with
    /// its antiderivative. Equal to d/dx [sin(e^{2x})/(4x)] for x ≥ 1.
    pub fn sparse_oscillation() -> Self {
        let core = |x: f64| (2.0 * x).exp().sin() / (4.0 * x);
        Self::with_antiderivative(
            "sparse_oscillation",
            move |x: f64| {
                let (g, dg) = cutoff(x);
                if g == 0.0 && dg == 0.0 {
                    return 0.0;
                }
                let e = (2.0 * x).exp();
                let dcore = e * e.cos() / (2.0 * x) - e.sin() / (4.0 * x * x);
                dg * core(x) + g * dcore
            },
            move |x: f64| {
                let g = cutoff(x).0;
                if g == 0.0 {
                    0.0
                } else {
                    g * core(x)
                }
            },
        )
    }

    /// Closed-form potential in the variable `x`, e.g. `0.3*sin(x)/(1+x)`.
    pub fn parse_expr(expr: &str) -> Result<Self> {
        use exmex::prelude::*;
        let parsed = exmex::parse::<f64>(expr).map_err(|e| Error::Parse(e.to_string()))?;
        match parsed.var_names() {
            [] => {
                let c = parsed.eval(&[]).map_err(|e| Error::Parse(e.to_string()))?;
                Ok(Self::new(expr, move |_| c))
            }
            [x] if x == "x" => Ok(Self::new(expr, move |t| parsed.eval(&[t]).unwrap_or(f64::NAN))),
            names => Err(Error::Parse(format!("expected the single variable x, found {names:?}"))),
        }
    }

    /// Named corpus potentials (`free`, `damped_sine`, `sparse_oscillation`),
    /// an existing CSV path, or a closed-form expression in x.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "free" => return Ok(Self::free()),
            "damped_sine" => return Ok(Self::damped_sine(0.3)),
            "sparse_oscillation" => return Ok(Self::sparse_oscillation()),
            _ => {}
        }
        let path = Path::new(spec);
        if path.is_file() {
            Self::read_csv(path)
        } else {
            Self::parse_expr(spec)
        }
    }

    /// Piecewise-linear interpolation of samples; constant extension outside the
    /// sampled range.
    pub fn from_samples(label: impl Into<String>, xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.len() != vs.len() || xs.is_empty() {
            return Err(Error::InvalidInput("need equally many x and V samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("sample abscissas must increase strictly".into()));
        }
        if vs.iter().chain(&xs).any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        let interp = move |x: f64| {
            let i = xs.partition_point(|&t| t <= x);
            if i == 0 {
                vs[0]
            } else if i == xs.len() {
                vs[vs.len() - 1]
            } else {
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                vs[i - 1] + t * (vs[i] - vs[i - 1])
            }
        };
        Ok(Self::new(label, interp))
    }

    /// Reads `x,V` rows (header optional).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected x,V", line + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if line == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: not numeric", line + 1))),
            }
        }
        Self::from_samples(path.display().to_string(), xs, vs)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.sampler)(x)
    }

    pub fn antiderivative(&self, x: f64) -> Option<f64> {
        self.antiderivative.as_ref().map(|a| a(x))
    }

    pub fn has_antiderivative(&self) -> bool {
        self.antiderivative.is_some()
    }

    pub fn negated(&self) -> Self {
        let s = self.sampler.clone();
        Self {
            label: format!("-{}", self.label),
            sampler: Arc::new(move |x| -s(x)),
            antiderivative: self.antiderivative.clone().map(|a| {
                let f: Sampler = Arc::new(move |x| -a(x));
                f
            }),
        }
    }

    /// sup over unit windows [n, n+1] ∩ [0, x_max] of (∫|V|²)^{1/2}, by the
    /// midpoint rule.
    pub fn local_l2_bound(&self, x_max: f64) -> f64 {
        let windows = x_max.ceil().max(1.0) as usize;
        (0..windows)
            .map(|n| {
                let lo = n as f64;
                let hi = (lo + 1.0).min(x_max);
                let dx = (hi - lo) / L2_POINTS as f64;
                let s: f64 = (0..L2_POINTS)
                    .map(|i| self.value(lo + (i as f64 + 0.5) * dx).powi(2))
                    .sum();
                (s * dx).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation() {
        let p = ContinuumPotential::from_samples("t", vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(2.0), 1.0);
        assert_eq!(p.value(5.0), 0.0);
        assert_eq!(p.value(-1.0), 0.0);
        assert!(ContinuumPotential::from_samples("t", vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn local_l2_of_sine() {
        let p = ContinuumPotential::new("s", |x: f64| (2.0 * std::f64::consts::PI * x).sin());
        assert!((p.local_l2_bound(4.0) - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn antiderivative_matches_sampler() {
        let p = ContinuumPotential::sparse_oscillation();
        for x in [0.7, 1.3, 2.9] {
            let d = 1e-6;
            let fd = (p.antiderivative(x + d).unwrap() - p.antiderivative(x - d).unwrap()) / (2.0 * d);
            assert!((fd - p.value(x)).abs() < 1e-5 * p.value(x).abs().max(1.0));
        }
        assert_eq!(p.negated().value(1.0), -p.value(1.0));
    }

    #[test]
    fn expressions() {
        let p = ContinuumPotential::parse("0.3*sin(x)/(1+x)").unwrap();
        assert!((p.value(2.0) - 0.1 * 2f64.sin()).abs() < 1e-15);
        assert_eq!(ContinuumPotential::parse("2.5").unwrap().value(7.0), 2.5);
        assert!(ContinuumPotential::parse("y+1").is_err());
        assert_eq!(ContinuumPotential::parse("free").unwrap().value(3.0), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "x,V\n0,1\n2,3\n").unwrap();
        let p = ContinuumPotential::read_csv(&path).unwrap();
        assert_eq!(p.value(1.0), 2.0);
    }
}
