use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::fields::{integrate, rk4, step_count, RICHARDSON_LIMIT};
use super::{cumulative, ContinuumDecomposition, ContinuumPotential};
use crate::error::{Error, Result};

/// Prüfer amplitude and phase of the Dirichlet solution of −ψ″ + Vψ = k²ψ,
/// with ψ = R sin(θ/2) and ψ′ = kR cos(θ/2), on the grid xᵢ = h + i·h.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuumPrufer {
    pub k: f64,
    pub h: f64,
    pub grid: Vec<f64>,
    pub log_r: Vec<f64>,
    pub theta: Vec<f64>,
    pub richardson: f64,
}

/// The amplitude functional −∫ W cos θ and its deviation from log(R(x)/R(x₀)).
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeReport {
    pub functional: Vec<f64>,
    pub residual: Vec<f64>,
    /// sup of |residual| over [1, x_max] and over [1, x_max/2].
    pub sup_residual: f64,
    pub sup_residual_half: f64,
}

fn dirichlet_start(k: f64, x0: f64) -> (f64, f64) {
    ((k * x0).sin() / k, (k * x0).cos())
}

pub fn continuum_prufer(pot: &ContinuumPotential, k: f64, x_max: f64, h: f64) -> Result<ContinuumPrufer> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("k = {k} must be positive")));
    }
    let steps = step_count(x_max, h)?;
    let x0 = h;
    let f = |x: f64, s: &[f64; 2]| {
        let vx = pot.value(x);
        let (sn, cs) = s[1].sin_cos();
        [vx / (2.0 * k) * sn, 2.0 * k - vx / k * (1.0 - cs)]
    };
    let (psi, dpsi) = dirichlet_start(k, x0);
    let y0 = [(psi * psi + dpsi * dpsi / (k * k)).sqrt().ln(), 2.0 * psi.atan2(dpsi / k)];
    let ok = |x: f64, s: &[f64; 2]| {
        if s.iter().all(|t| t.is_finite()) {
            Ok(())
        } else {
            Err(Error::Breakdown {
                site: (x / h) as usize,
                detail: "non-finite Pruefer state".into(),
            })
        }
    };
    let fine = integrate(&f, x0, y0, 0.5 * h, 2 * steps, 2, &ok)?;
    let coarse = integrate(&f, x0, y0, h, steps, 1, &ok)?;
    let est = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) / 15.0)
        .fold(0.0, f64::max);
    let per_unit = est / (x_max - x0);
    if !(per_unit <= RICHARDSON_LIMIT) {
        return Err(Error::StepSize {
            estimate: per_unit,
            limit: RICHARDSON_LIMIT,
        });
    }
    Ok(ContinuumPrufer {
        k,
        h,
        grid: (0..fine.len()).map(|i| x0 + i as f64 * h).collect(),
        log_r: fine.iter().map(|s| s[0]).collect(),
        theta: fine.iter().map(|s| s[1]).collect(),
        richardson: per_unit,
    })
}

impl ContinuumPrufer {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// (ψ, ψ′) at sample `i`.
    pub fn psi(&self, i: usize) -> (f64, f64) {
        let r = self.log_r[i].exp();
        let (s, c) = (0.5 * self.theta[i]).sin_cos();
        (r * s, self.k * r * c)
    }

    /// Compares log(R/R(x₀)) with −∫ W cos θ. The decomposition must come from
    /// fields on the same grid.
    pub fn amplitude_report(&self, d: &ContinuumDecomposition) -> Result<AmplitudeReport> {
        if d.grid.len() != self.len() || (d.h - self.h).abs() > 1e-15 * self.h {
            return Err(Error::InvalidInput("decomposition grid differs from the Pruefer grid".into()));
        }
        let integrand: Vec<f64> = d.w.iter().zip(&self.theta).map(|(w, t)| w * t.cos()).collect();
        let functional: Vec<f64> = cumulative(&integrand, self.h).into_iter().map(|x| -x).collect();
        let residual: Vec<f64> = self
            .log_r
            .iter()
            .zip(&functional)
            .map(|(l, f)| l - self.log_r[0] - f)
            .collect();
        let one = self.grid.partition_point(|&x| x < 1.0);
        let half = self.grid.partition_point(|&x| x <= 0.5 * self.grid[self.len() - 1]);
        let sup = |lo: usize, hi: usize| {
            residual[lo.min(hi)..hi].iter().fold(0.0f64, |m, r| m.max(r.abs()))
        };
        Ok(AmplitudeReport {
            sup_residual: sup(one, residual.len()),
            sup_residual_half: sup(one, half),
            functional,
            residual,
        })
    }

    /// CSV with header `x,logR,theta`.
    pub fn write_csv(&self, out: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
        writeln!(w, "x,logR,theta")?;
        for i in 0..self.len() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.grid[i], self.log_r[i], self.theta[i])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates ψ″ = (V − k²)ψ directly with the same scheme and start and
/// returns the relative distance of (ψ, ψ′/k) from the Prüfer reconstruction at
/// the last sample.
pub fn continuum_dual_path_error(p: &ContinuumPrufer, pot: &ContinuumPotential) -> f64 {
    let k = p.k;
    let x0 = p.grid[0];
    let f = |x: f64, s: &[f64; 2]| [s[1], (pot.value(x) - k * k) * s[0]];
    let (psi, dpsi) = dirichlet_start(k, x0);
    let mut y = [psi, dpsi];
    let h = 0.5 * p.h;
    for i in 0..2 * (p.len() - 1) {
        y = rk4(&f, x0 + i as f64 * h, &y, h);
    }
    let (a, b) = p.psi(p.len() - 1);
    let diff = (a - y[0]).hypot((b - y[1]) / k);
    diff / y[0].hypot(y[1] / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{continuum_decompose, integrate_uv};
    use crate::numerics::Tolerances;

    #[test]
    fn free_phase_is_linear() {
        let p = continuum_prufer(&ContinuumPotential::free(), 1.3, 10.0, 1e-4).unwrap();
        for i in 0..p.len() {
            assert!((p.log_r[i] - p.log_r[0]).abs() < 1e-12);
            assert!((p.theta[i] - 2.0 * 1.3 * p.grid[i]).abs() < 1e-8);
        }
        assert!(continuum_dual_path_error(&p, &ContinuumPotential::free()) < 1e-10);
    }

    #[test]
    fn damped_sine_dual_path() {
        let pot = ContinuumPotential::damped_sine(0.3);
        let p = continuum_prufer(&pot, 1.0, 10.0, 1e-4).unwrap();
        assert!(continuum_dual_path_error(&p, &pot) < 1e-6);
        let tol = Tolerances::default();
        let d = continuum_decompose(&integrate_uv(&pot, 10.0, 1e-4).unwrap(), &tol);
        let rep = p.amplitude_report(&d).unwrap();
        assert!(rep.sup_residual.is_finite() && rep.sup_residual < 1.0, "{}", rep.sup_residual);
    }

    #[test]
    fn rejects_nonpositive_k() {
        assert!(continuum_prufer(&ContinuumPotential::free(), 0.0, 1.0, 1e-4).is_err());
    }
}
