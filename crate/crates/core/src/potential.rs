//! Coefficient sequences for half-line Jacobi and Schrödinger operators.
//!
//! All sequences are 1-indexed: `values[0]` holds V(1). Serialized forms carry
//! explicit site indices.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete Schrödinger potential V(1), …, V(N).
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("potential must have at least one site".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("V({}) is not finite", i + 1)));
        }
        Ok(Self { values })
    }

    /// V(n) for 1 ≤ n ≤ N.
    #[inline]
    pub fn at(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// V(n), or zero past the stored range.
    #[inline]
    pub fn at_or_zero(&self, n: usize) -> f64 {
        if n >= 1 && n <= self.values.len() {
            self.values[n - 1]
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Extend (or cut) to exactly `n` sites, padding with zeros.
    pub fn padded(&self, n: usize) -> Potential {
        let mut values = self.values.clone();
        values.resize(n.max(1), 0.0);
        Potential { values }
    }

    /// The potential −V.
    pub fn negated(&self) -> Potential {
        Potential {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Shifted potential n ↦ V(n + k).
    pub fn shifted(&self, k: usize) -> Result<Potential> {
        Potential::new(self.values[k.min(self.values.len())..].to_vec())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Off-diagonal `a` and diagonal `b` of a Jacobi matrix, both 1-indexed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiCoeffs {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl JacobiCoeffs {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "a and b lengths differ ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(Error::InvalidInput("Jacobi matrix must have at least one site".into()));
        }
        if let Some(i) = a.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(format!("a({}) = {} is not positive", i + 1, a[i])));
        }
        if let Some(i) = b.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("b({}) is not finite", i + 1)));
        }
        Ok(Self { a, b })
    }

    /// Schrödinger case: aₙ ≡ 1, bₙ = V(n).
    pub fn schrodinger(v: &Potential) -> Self {
        Self {
            a: vec![1.0; v.len()],
            b: v.values().to_vec(),
        }
    }

    #[inline]
    pub fn a(&self, n: usize) -> f64 {
        self.a[n - 1]
    }

    #[inline]
    pub fn b(&self, n: usize) -> f64 {
        self.b[n - 1]
    }

    pub fn a_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn b_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_schrodinger(&self) -> bool {
        self.a.iter().all(|&x| x == 1.0)
    }

    /// Largest |aₙ| and |bₙ|.
    pub fn bounds(&self) -> (f64, f64) {
        let amax = self.a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let bmax = self.b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (amax, bmax)
    }

    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::TooShort {
                needed: n,
                available: self.len(),
            });
        }
        Self::new(self.a[..n].to_vec(), self.b[..n].to_vec())
    }

    /// Matrix with the first `k` rows and columns removed.
    pub fn tail(&self, k: usize) -> Result<Self> {
        Self::new(self.a[k..].to_vec(), self.b[k..].to_vec())
    }

    /// The Schrödinger potential, when aₙ ≡ 1.
    pub fn to_potential(&self) -> Option<Potential> {
        if self.is_schrodinger() {
            Potential::new(self.b.clone()).ok()
        } else {
            None
        }
    }

    /// Extends with free sites (a = 1, b = 0) up to `n`.
    pub fn padded(&self, n: usize) -> JacobiCoeffs {
        let mut out = self.clone();
        if n > out.a.len() {
            out.a.resize(n, 1.0);
            out.b.resize(n, 0.0);
        }
        out
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n > self.len() {
            Err(Error::TooShort {
                needed: n,
                available: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// Format a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    n0: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl JacobiCoeffs {
    /// CSV with header `n,a,b`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,a,b")?;
        for (i, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            writeln!(w, "{},{},{}", i + 1, fmt17(*a), fmt17(*b))?;
        }
        Ok(())
    }

    /// JSON object `{"n0":1,"a":[…],"b":[…]}`.
    pub fn to_json(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|x| fmt17(*x)).collect();
        let b: Vec<String> = self.b.iter().map(|x| fmt17(*x)).collect();
        format!("{{\"n0\":1,\"a\":[{}],\"b\":[{}]}}", a.join(","), b.join(","))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: JacobiJson = serde_json::from_str(s)?;
        if j.n0 != 1 {
            return Err(Error::Parse(format!("n0 must be 1, got {}", j.n0)));
        }
        Self::new(j.a, j.b)
    }
}

impl Potential {
    /// CSV with header `n,v`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,v")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, fmt17(*v))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        JacobiCoeffs::schrodinger(self).to_json()
    }
}

/// Read either `n,v` (Schrödinger) or `n,a,b` (Jacobi) CSV.
pub fn read_coeffs_csv<R: Read>(r: R) -> Result<JacobiCoeffs> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let n_col = col("n").ok_or_else(|| Error::Parse("missing column `n`".into()))?;
    let (a_col, b_col, v_col) = (col("a"), col("b"), col("v"));
    if v_col.is_none() && (a_col.is_none() || b_col.is_none()) {
        return Err(Error::Parse("expected header `n,v` or `n,a,b`".into()));
    }
    let parse = |s: &str, line: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Parse(format!("line {}: bad number `{}`", line, s)))
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let n: usize = rec[n_col]
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad index", line)))?;
        if n != row + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected site index {}, found {}",
                line,
                row + 1,
                n
            )));
        }
        if let Some(vc) = v_col {
            a.push(1.0);
            b.push(parse(&rec[vc], line)?);
        } else {
            a.push(parse(&rec[a_col.unwrap()], line)?);
            b.push(parse(&rec[b_col.unwrap()], line)?);
        }
    }
    JacobiCoeffs::new(a, b)
}

/// Read a potential or Jacobi matrix from a `.csv` or `.json` path.
pub fn read_coeffs_path(path: &std::path::Path) -> Result<JacobiCoeffs> {
    let data = std::fs::read(path)?;
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    if is_json {
        JacobiCoeffs::from_json(std::str::from_utf8(&data).map_err(|e| Error::Parse(e.to_string()))?)
    } else {
        read_coeffs_csv(&data[..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(Potential::new(vec![]).is_err());
        assert!(Potential::new(vec![1.0, f64::NAN]).is_err());
        assert!(JacobiCoeffs::new(vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(JacobiCoeffs::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_carries_explicit_indices() {
        let v = Potential::new(vec![-1.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,v\n1,"));
        assert!(text.contains("\n2,5.0000000000000000e-1"));
    }

    #[test]
    fn csv_rejects_index_gap() {
        let text = "n,v\n1,0.5\n3,0.1\n";
        assert!(read_coeffs_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn json_shape() {
        let j = JacobiCoeffs::new(vec![1.0], vec![0.25]).unwrap();
        let s = j.to_json();
        assert!(s.starts_with("{\"n0\":1,\"a\":["));
        assert_eq!(JacobiCoeffs::from_json(&s).unwrap(), j);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            a in prop::collection::vec(1e-3f64..10.0, 1..40),
            seed in prop::collection::vec(-1e3f64..1e3, 40),
        ) {
            let b: Vec<f64> = seed[..a.len()].to_vec();
            let j = JacobiCoeffs::new(a, b).unwrap();
            let mut buf = Vec::new();
            j.write_csv(&mut buf).unwrap();
            let back = read_coeffs_csv(&buf[..]).unwrap();
            prop_assert_eq!(back, j);
        }
    }
}
