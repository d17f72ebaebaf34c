use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::ContinuumPotential;
use crate::error::{Error, Result};

/// Largest admissible step.
pub const MAX_STEP: f64 = 1e-3;
/// Richardson error allowed per unit length.
pub const RICHARDSON_LIMIT: f64 = 1e-8;

type State = [f64; 6];

/// Classical fourth-order step for y′ = f(x, y).
pub(crate) fn rk4<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    x: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], s: f64| std::array::from_fn(|i| a[i] + s * b[i]);
    let k1 = f(x, y);
    let k2 = f(x + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(x + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(x + h, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates from `x0` with `steps` steps of size `h`, recording every
/// `stride`-th state (including the first). `check` may abort a run.
pub(crate) fn integrate<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    h: f64,
    steps: usize,
    stride: usize,
    check: &impl Fn(f64, &[f64; N]) -> Result<()>,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(steps / stride + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        y = rk4(f, x, &y, h);
        check(x + h, &y)?;
        if (i + 1) % stride == 0 {
            out.push(y);
        }
    }
    Ok(out)
}

/// Step count and step validation shared by the continuum integrators.
pub(crate) fn step_count(x_max: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= MAX_STEP) {
        return Err(Error::InvalidInput(format!("step h = {h} must lie in (0, {MAX_STEP}]")));
    }
    if !(x_max > h) || !x_max.is_finite() {
        return Err(Error::InvalidInput(format!("x_max = {x_max} must exceed h = {h}")));
    }
    Ok(((x_max - h) / h).round() as usize)
}

/// Sampled zero-energy solutions for ±V and the fields Γₑ, Γₒ built from them.
#[derive(Debug, Clone, Serialize)]
pub struct GammaFields {
    pub label: String,
    pub h: f64,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub gamma_e: Vec<f64>,
    pub gamma_o: Vec<f64>,
    pub potential: Vec<f64>,
    /// Antiderivative samples when integrated in quasi-derivative form.
    pub antiderivative: Option<Vec<f64>>,
    /// Richardson error estimate per unit length.
    pub richardson: f64,
    /// Largest relative change of the Wronskian of u with a second solution of
    /// the same equation.
    pub wronskian_drift: f64,
}

/// Positivity of u, v on the integration window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowReport {
    pub x_max: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiResiduals {
    pub from: f64,
    pub to: f64,
    /// sup |Γₑ′ − V − 2ΓₑΓₒ|
    pub even: f64,
    /// sup |Γₒ′ − Γₒ² − Γₑ²|
    pub odd: f64,
}

impl RiccatiResiduals {
    pub fn max(&self) -> f64 {
        self.even.max(self.odd)
    }
}

/// Fourth-order central differences, second-order at the ends.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            d[0] = (values[1] - values[0]) / h;
            d[1] = d[0];
        }
        return d;
    }
    for i in 0..n {
        d[i] = if i >= 2 && i + 2 < n {
            (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)
        } else if i == 0 {
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * values[i] - 4.0 * values[i - 1] + values[i - 2]) / (2.0 * h)
        } else {
            (values[i + 1] - values[i - 1]) / (2.0 * h)
        };
    }
    d
}

/// Cumulative trapezoid integral on a uniform grid, starting at 0.
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = crate::numerics::KahanSum::new();
    out.push(0.0);
    for w in values.windows(2) {
        acc.add(0.5 * h * (w[0] + w[1]));
        out.push(acc.value());
    }
    out.truncate(values.len());
    out
}

fn rhs(pot: &ContinuumPotential) -> impl Fn(f64, &State) -> State + '_ {
    let quasi = pot.has_antiderivative();
    move |x, s| {
        if quasi {
            let a = pot.antiderivative(x).unwrap_or(0.0);
            let q = |y: f64, p: f64, a: f64| [p + a * y, -a * p - a * a * y];
            let [u1, u2] = q(s[0], s[1], a);
            let [v1, v2] = q(s[2], s[3], -a);
            let [y1, y2] = q(s[4], s[5], a);
            [u1, u2, v1, v2, y1, y2]
        } else {
            let vx = pot.value(x);
            [s[1], vx * s[0], s[3], -vx * s[2], s[5], vx * s[4]]
        }
    }
}

/// Integrates −u″ + Vu = 0 and −v″ − Vv = 0 with u, v ≈ x near the origin, on
/// the grid xᵢ = h + i·h up to `x_max`. Fails with a zero-crossing report when
/// u or v vanishes and with a step-size report when halving h changes the
/// solutions by more than the Richardson limit.
pub fn integrate_uv(pot: &ContinuumPotential, x_max: f64, h: f64) -> Result<GammaFields> {
    let steps = step_count(x_max, h)?;
    let x0 = h;
    let a0 = pot.antiderivative(x0).unwrap_or(0.0);
    // u, u′ (or quasi-derivative), v, v′, companion y with y(x₀) = 1, y′(x₀) = 0.
    let y0: State = [x0, 1.0 - a0 * x0, x0, 1.0 + a0 * x0, 1.0, -a0];
    let f = rhs(pot);
    let check = |x: f64, s: &State| {
        if !(s[0] > 0.0 && s[2] > 0.0) || s.iter().any(|t| !t.is_finite()) {
            Err(Error::ZeroCrossing { x })
        } else {
            Ok(())
        }
    };
    let fine = integrate(&f, x0, y0, 0.5 * h, 2 * steps, 2, &check)?;
    let coarse = integrate(&f, x0, y0, h, steps, 1, &check)?;

    let rel = |a: &State, b: &State, i: usize| {
        let d = (a[i] - b[i]).hypot(a[i + 1] - b[i + 1]);
        d / a[i].hypot(a[i + 1])
    };
    let est = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| rel(a, b, 0).max(rel(a, b, 2)) / 15.0)
        .fold(0.0, f64::max);
    let per_unit = est / (x_max - x0);
    if !(per_unit <= RICHARDSON_LIMIT) {
        return Err(Error::StepSize {
            estimate: per_unit,
            limit: RICHARDSON_LIMIT,
        });
    }

    let n = fine.len();
    let grid: Vec<f64> = (0..n).map(|i| x0 + i as f64 * h).collect();
    let anti: Option<Vec<f64>> = pot
        .has_antiderivative()
        .then(|| grid.iter().map(|&x| pot.antiderivative(x).unwrap_or(0.0)).collect());
    let a_at = |i: usize| anti.as_ref().map_or(0.0, |a| a[i]);
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    let mut gamma_e = Vec::with_capacity(n);
    let mut gamma_o = Vec::with_capacity(n);
    let w0 = y0[0] * y0[5] - y0[4] * y0[1];
    let mut drift = 0.0f64;
    for (i, s) in fine.iter().enumerate() {
        let a = a_at(i);
        let (pu, pv) = (s[1] / s[0], s[3] / s[2]);
        u.push(s[0]);
        v.push(s[2]);
        du.push(s[1] + a * s[0]);
        dv.push(s[3] - a * s[2]);
        gamma_e.push(0.5 * (pu - pv) + a);
        gamma_o.push(-0.5 * (pu + pv));
        let w = s[0] * s[5] - s[4] * s[1];
        drift = drift.max((w - w0).abs() / w0.abs());
    }
    Ok(GammaFields {
        label: pot.label().to_string(),
        h,
        potential: grid.iter().map(|&x| pot.value(x)).collect(),
        grid,
        u,
        du,
        v,
        dv,
        gamma_e,
        gamma_o,
        antiderivative: anti,
        richardson: per_unit,
        wronskian_drift: drift,
    })
}

impl GammaFields {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    /// First sample index with x ≥ `x`.
    pub fn index_at(&self, x: f64) -> usize {
        self.grid.partition_point(|&t| t < x - 0.5 * self.h)
    }

    pub fn window(&self) -> WindowReport {
        let min_u = self.u.iter().cloned().fold(f64::INFINITY, f64::min);
        let min_v = self.v.iter().cloned().fold(f64::INFINITY, f64::min);
        WindowReport {
            x_max: self.x_max(),
            min_u,
            min_v,
            positive: min_u > 0.0 && min_v > 0.0,
        }
    }

    /// Γₑ′. In quasi-derivative form V is added exactly and only the smooth part
    /// Γₑ − A is differentiated numerically.
    pub fn gamma_e_prime(&self) -> Vec<f64> {
        match &self.antiderivative {
            Some(a) => {
                let smooth: Vec<f64> = self.gamma_e.iter().zip(a).map(|(g, a)| g - a).collect();
                derivative(&smooth, self.h)
                    .into_iter()
                    .zip(&self.potential)
                    .map(|(d, v)| d + v)
                    .collect()
            }
            None => derivative(&self.gamma_e, self.h),
        }
    }

    pub fn gamma_o_prime(&self) -> Vec<f64> {
        derivative(&self.gamma_o, self.h)
    }

    /// Sup-norm residuals of the Riccati system on [from, x_max], skipping the
    /// two samples at each end where the difference stencil is one-sided.
    pub fn riccati_residuals(&self, from: f64) -> RiccatiResiduals {
        let de = self.gamma_e_prime();
        let dod = self.gamma_o_prime();
        let n = self.len();
        let lo = self.index_at(from).max(2);
        let hi = n.saturating_sub(2);
        let (mut even, mut odd) = (0.0f64, 0.0f64);
        for i in lo..hi {
            let (e, o) = (self.gamma_e[i], self.gamma_o[i]);
            even = even.max((de[i] - self.potential[i] - 2.0 * e * o).abs());
            odd = odd.max((dod[i] - o * o - e * e).abs());
        }
        RiccatiResiduals {
            from,
            to: self.x_max(),
            even,
            odd,
        }
    }

    /// sup |Γₑ + Γₑ⁻| and sup |Γₒ − Γₒ⁻| against the fields of −V.
    pub fn sign_symmetry_defect(&self, negated: &GammaFields) -> f64 {
        self.gamma_e
            .iter()
            .zip(&negated.gamma_e)
            .map(|(a, b)| (a + b).abs())
            .chain(self.gamma_o.iter().zip(&negated.gamma_o).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with header `x,gamma_e,gamma_o,u,v`.
    pub fn write_csv(&self, out: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
        writeln!(w, "x,gamma_e,gamma_o,u,v")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid[i], self.gamma_e[i], self.gamma_o[i], self.u[i], self.v[i]
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_closed_form() {
        let f = integrate_uv(&ContinuumPotential::free(), 10.0, 1e-4).unwrap();
        let lo = f.index_at(0.1);
        for i in lo..f.len() {
            let x = f.grid[i];
            assert!(f.gamma_e[i].abs() < 1e-12);
            assert!((f.gamma_o[i] + 1.0 / x).abs() < 1e-9);
            assert!((f.u[i] - x).abs() < 1e-9 * x);
        }
        assert!((f.x_max() - 10.0).abs() < 1e-9);
        assert!(f.riccati_residuals(0.5).max() < 1e-8);
        assert!(f.wronskian_drift < 1e-12);
    }

    #[test]
    fn derivative_is_fourth_order() {
        let h = 1e-2;
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d = derivative(&ys, h);
        for i in 2..198 {
            assert!((d[i] - xs[i].cos()).abs() < 1e-9);
        }
        let c = cumulative(&ys, h);
        assert!((c[199] - (1.0 - xs[199].cos())).abs() < 1e-4);
    }

    #[test]
    fn damped_sine_riccati() {
        let p = ContinuumPotential::damped_sine(0.3);
        let f = integrate_uv(&p, 10.0, 1e-4).unwrap();
        assert!(f.window().positive);
        let r = f.riccati_residuals(0.5);
        assert!(r.max() < 1e-5, "{r:?}");
        assert!(f.wronskian_drift < 1e-10);
        let g = integrate_uv(&p.negated(), 10.0, 1e-4).unwrap();
        assert!(f.sign_symmetry_defect(&g) < 1e-10);
    }

    #[test]
    fn bound_state_reports_zero() {
        let p = ContinuumPotential::new("well", |x: f64| if x < 2.0 { -4.0 } else { 0.0 });
        assert!(matches!(integrate_uv(&p, 10.0, 1e-3), Err(Error::ZeroCrossing { x }) if x < 2.0));
    }

    #[test]
    fn rejects_bad_steps() {
        let p = ContinuumPotential::free();
        assert!(integrate_uv(&p, 10.0, 1e-2).is_err());
        assert!(integrate_uv(&p, 1e-4, 1e-4).is_err());
    }
}
