//! Corpus-driven verification: every entry of a JSON configuration runs
//! through certification, the bound suites, oracle cross-checks, Prüfer
//! dual-path checks, edge growth and (for continuum entries) the Γ-field suite.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{verify_gamma_bounds, verify_potential_bounds, BoundReport};
use crate::continuum::{
    check_w_regularity, continuum_decompose, continuum_dual_path_error, continuum_prufer,
    integrate_uv, verify_continuum_bounds, ContinuumPotential, RiccatiResiduals, WRegularity,
    WindowReport,
};
use crate::corpus::{random_certified, CORPUS_SEED};
use crate::eigenfunctions::{edge_growth_check, oscillation_count, solve_edge, Edge, EdgeGrowthReport};
use crate::error::{Error, Result};
use crate::generators::{gen_alternating, gen_extremal, gen_wvn};
use crate::numerics::Tolerances;
use crate::oracle::{eig_count_above, eigs_outside};
use crate::parallel;
use crate::potential::{read_coeffs_path, JacobiCoeffs, Potential};
use crate::prufer::dual_path_error;
use crate::verblunsky::{gamma_from_jacobi, CertStatus};

/// Limit on the Prüfer reconstruction error along the discrete path.
pub const DUAL_PATH_LIMIT: f64 = 1e-8;
/// Limit on the Riccati residuals of continuum fields on [0.5, x_max].
pub const RICCATI_LIMIT: f64 = 1e-5;
/// Limit on the continuum Prüfer reconstruction error.
pub const CONTINUUM_DUAL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// No spectrum outside the band (no zero crossing in the continuum window).
    #[default]
    Certified,
    /// A bound state must be detected.
    Violated,
    /// Record the outcome without judging it.
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Source {
    Free,
    Extremal { n: usize },
    Alternating { lambda: f64 },
    Wvn { alpha: f64 },
    /// `count` random certified potentials from a seeded stream.
    RandomCertified {
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "one")]
        count: usize,
        #[serde(default = "default_random_len")]
        max_len: usize,
    },
    Values { values: Vec<f64> },
    /// CSV file (`n,v` or `n,a,b`), relative to the configuration file.
    File { path: PathBuf },
}

fn default_seed() -> u64 {
    CORPUS_SEED
}

fn one() -> usize {
    1
}

fn default_random_len() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub name: String,
    #[serde(flatten)]
    pub source: Source,
    #[serde(default)]
    pub expect: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "snake_case")]
pub enum ContinuumSource {
    Free,
    DampedSine { amp: f64 },
    SparseOscillation,
    /// Closed-form expression in x.
    Expr { expr: String },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: ContinuumSource,
    pub x_max: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub expect: Expectation,
}

fn default_h() -> f64 {
    1e-4
}

fn default_k() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Truncation size for the oracle cross-checks.
    #[serde(default = "default_oracle_sites")]
    pub oracle_sites: usize,
    /// Sites and energy count for the Prüfer dual-path check.
    #[serde(default = "default_prufer_sites")]
    pub prufer_sites: usize,
    #[serde(default = "default_prufer_energies")]
    pub prufer_energies: usize,
    /// Horizon of the edge-growth check (defaults to `horizon`).
    #[serde(default)]
    pub edge_horizon: Option<usize>,
    /// Keep per-n traces in the bound reports.
    #[serde(default = "default_true")]
    pub traces: bool,
    #[serde(default)]
    pub entries: Vec<EntrySpec>,
    #[serde(default)]
    pub continuum: Vec<ContinuumSpec>,
}

fn default_horizon() -> usize {
    100_000
}

fn default_oracle_sites() -> usize {
    2000
}

fn default_prufer_sites() -> usize {
    10_000
}

fn default_prufer_energies() -> usize {
    10
}

fn default_true() -> bool {
    true
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            tolerances: Tolerances::default(),
            oracle_sites: default_oracle_sites(),
            prufer_sites: default_prufer_sites(),
            prufer_energies: default_prufer_energies(),
            edge_horizon: None,
            traces: true,
            entries: Vec::new(),
            continuum: Vec::new(),
        }
    }
}

impl SuiteConfig {
    /// free, extremal 1 … 50, alternating λ ∈ {0.5, 0.9, 1.0}, 200 random
    /// certified potentials and the continuum corpus.
    pub fn default_corpus() -> Self {
        let mut entries = vec![EntrySpec {
            name: "free".into(),
            source: Source::Free,
            expect: Expectation::Certified,
        }];
        entries.extend((1..=50).map(|n| EntrySpec {
            name: format!("extremal_{n:02}"),
            source: Source::Extremal { n },
            expect: Expectation::Certified,
        }));
        entries.extend([0.5, 0.9, 1.0].map(|lambda| EntrySpec {
            name: format!("alternating_{lambda}"),
            source: Source::Alternating { lambda },
            expect: Expectation::Certified,
        }));
        entries.push(EntrySpec {
            name: "random".into(),
            source: Source::RandomCertified {
                seed: CORPUS_SEED,
                count: 200,
                max_len: 200,
            },
            expect: Expectation::Certified,
        });
        let continuum = vec![
            continuum_spec("free", ContinuumSource::Free, 10.0),
            continuum_spec("damped_sine", ContinuumSource::DampedSine { amp: 0.3 }, 10.0),
            continuum_spec("damped_sine_negated", ContinuumSource::DampedSine { amp: -0.3 }, 10.0),
            continuum_spec("sparse_oscillation", ContinuumSource::SparseOscillation, 3.0),
        ];
        Self {
            entries,
            continuum,
            ..Self::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.tolerances.validate()?;
        if cfg.horizon == 0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        Ok(cfg)
    }
}

fn continuum_spec(name: &str, source: ContinuumSource, x_max: f64) -> ContinuumSpec {
    ContinuumSpec {
        name: name.into(),
        source,
        x_max,
        h: default_h(),
        k: default_k(),
        expect: Expectation::Certified,
    }
}

/// A resolved discrete entry.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub expect: Expectation,
    pub jacobi: JacobiCoeffs,
    pub potential: Option<Potential>,
}

fn resolve(spec: &EntrySpec, base: &Path, horizon: usize) -> Result<Vec<Resolved>> {
    let schr = |name: String, v: Potential| Resolved {
        name,
        expect: spec.expect,
        jacobi: JacobiCoeffs::schrodinger(&v),
        potential: Some(v),
    };
    let single = |v: Potential| Ok(vec![schr(spec.name.clone(), v)]);
    match &spec.source {
        Source::Free => single(Potential::new(vec![0.0])?),
        Source::Extremal { n } => single(gen_extremal(*n)?),
        Source::Alternating { lambda } => single(gen_alternating(*lambda, horizon)?),
        Source::Wvn { alpha } => single(gen_wvn(*alpha, horizon)?.0),
        Source::Values { values } => single(Potential::new(values.clone())?),
        Source::RandomCertified { seed, count, max_len } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..*count)
                .map(|i| {
                    let v = random_certified(&mut rng, *max_len).potential;
                    schr(format!("{}_{i:03}", spec.name), v)
                })
                .collect())
        }
        Source::File { path } => {
            let j = read_coeffs_path(&base.join(path))?;
            Ok(vec![Resolved {
                name: spec.name.clone(),
                expect: spec.expect,
                potential: j.to_potential(),
                jacobi: j,
            }])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &str, pass: bool, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            limit,
            detail: None,
        }
    }

    fn failed(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            pass: false,
            value: f64::NAN,
            limit: f64::NAN,
            detail: Some(detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub name: String,
    pub expect: Expectation,
    pub sites: usize,
    pub certification: Certification,
    pub checks: Vec<Check>,
    pub bounds: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_growth: Option<EdgeGrowthReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumSummary {
    pub window: WindowReport,
    pub riccati: RiccatiResiduals,
    pub symmetry_defect: f64,
    pub wronskian_drift: f64,
    pub q_l1: f64,
    pub q_l1_tail: f64,
    pub closed_form_defect: f64,
    pub regularity: WRegularity,
    pub prufer_dual_path: f64,
    pub amplitude_residual: f64,
    pub amplitude_residual_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuumReport {
    pub name: String,
    pub expect: Expectation,
    pub x_max: f64,
    pub h: f64,
    pub k: f64,
    pub checks: Vec<Check>,
    pub bounds: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<ContinuumSummary>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub horizon: usize,
    pub tolerances: Tolerances,
    pub entries: Vec<EntryReport>,
    pub continuum: Vec<ContinuumReport>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn first_failure(&self) -> Option<&str> {
        self.failures.first().map(String::as_str)
    }
}

fn prufer_energies(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| std::f64::consts::PI * j as f64 / (count + 1) as f64)
        .collect()
}

/// Runs every check on one discrete entry.
pub fn verify_entry(r: &Resolved, cfg: &SuiteConfig) -> Result<EntryReport> {
    let tol = &cfg.tolerances;
    let n = cfg.horizon.max(r.jacobi.len());
    let j = r.jacobi.padded(n);
    let cert = gamma_from_jacobi(&j, n, tol)?;
    let (status, index) = match cert.status {
        CertStatus::Certified(_) => ("certified", None),
        CertStatus::ViolatedAt { index, .. } => ("violated", Some(index)),
        CertStatus::Indeterminate { index } => ("indeterminate", Some(index)),
    };
    let mut checks = Vec::new();
    let mut bounds = Vec::new();
    let mut edge_growth = None;
    let expected = match r.expect {
        Expectation::Certified => cert.is_certified(),
        Expectation::Violated => cert.is_violated(),
        Expectation::Any => true,
    };
    checks.push(Check {
        detail: Some(status.into()),
        ..Check::new("certification", expected, cert.min_margin, tol.gamma_margin)
    });

    let n_o = cfg.oracle_sites.min(n).max(1);
    let outside = eigs_outside(&j, n_o)?;
    let count_outside = (outside.above.len() + outside.below.len()) as f64;
    if cert.is_certified() {
        let u = solve_edge(&j, Edge::Plus, n_o)?;
        let w = solve_edge(&j, Edge::Minus, n_o)?;
        let sturm = oscillation_count(&u, tol) == eig_count_above(&j, n_o, 2.0)?
            && oscillation_count(&w, tol) == eig_count_above(&j, n_o, -2.0)?;
        checks.push(Check {
            detail: (!sturm).then(|| "oscillation count differs from the oracle".to_string()),
            ..Check::new("oracle_band", outside.is_empty() && sturm, count_outside, 0.0)
        });
    } else if r.expect == Expectation::Violated {
        checks.push(Check::new("oracle_bound_state", !outside.is_empty(), count_outside, 1.0));
    }

    if let (true, Some(v)) = (cert.is_certified(), &r.potential) {
        let v = v.padded(n);
        let mut gb = verify_gamma_bounds(&cert.gamma, n, tol)?;
        gb.extend(verify_potential_bounds(&v, &cert.gamma, n, tol)?);
        let ok = gb.iter().all(|b| b.pass);
        let worst = gb.iter().map(|b| b.margin).fold(f64::INFINITY, f64::min);
        checks.push(Check::new("bounds", ok, worst, 0.0));
        bounds = gb;

        let np = cfg.prufer_sites.min(n);
        let mut worst = 0.0f64;
        for k in prufer_energies(cfg.prufer_energies) {
            worst = worst.max(dual_path_error(&v, k, (0.0, 1.0), np)?);
        }
        checks.push(Check::new("prufer_dual_path", worst <= DUAL_PATH_LIMIT, worst, DUAL_PATH_LIMIT));

        let ne = cfg.edge_horizon.unwrap_or(n);
        let jg = r.jacobi.padded(ne);
        let g = edge_growth_check(&solve_edge(&jg, Edge::Plus, ne)?);
        checks.push(Check::new("edge_growth", g.pass, g.inf_final, 0.0));
        edge_growth = Some(g);
    }

    if !cfg.traces {
        for b in &mut bounds {
            b.lhs_trace.clear();
            b.rhs_trace.clear();
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(EntryReport {
        name: r.name.clone(),
        expect: r.expect,
        sites: n,
        certification: Certification {
            status,
            index,
            min_margin: cert.min_margin,
        },
        checks,
        bounds,
        edge_growth,
        pass,
    })
}

fn continuum_potential(src: &ContinuumSource, base: &Path) -> Result<ContinuumPotential> {
    Ok(match src {
        ContinuumSource::Free => ContinuumPotential::free(),
        ContinuumSource::DampedSine { amp } => ContinuumPotential::damped_sine(*amp),
        ContinuumSource::SparseOscillation => ContinuumPotential::sparse_oscillation(),
        ContinuumSource::Expr { expr } => ContinuumPotential::parse_expr(expr)?,
        ContinuumSource::File { path } => ContinuumPotential::read_csv(&base.join(path))?,
    })
}

/// Γ-field suite, decomposition and Prüfer checks for one continuum entry.
pub fn verify_continuum_entry(
    spec: &ContinuumSpec,
    pot: &ContinuumPotential,
    tol: &Tolerances,
    traces: bool,
) -> ContinuumReport {
    let mut report = ContinuumReport {
        name: spec.name.clone(),
        expect: spec.expect,
        x_max: spec.x_max,
        h: spec.h,
        k: spec.k,
        checks: Vec::new(),
        bounds: Vec::new(),
        summary: None,
        pass: false,
    };
    let fields = match (integrate_uv(pot, spec.x_max, spec.h), spec.expect) {
        (Err(Error::ZeroCrossing { x }), Expectation::Violated | Expectation::Any) => {
            report.checks.push(Check::new("zero_crossing", true, x, spec.x_max));
            report.pass = true;
            return report;
        }
        (Err(e), _) => {
            report.checks.push(Check::failed("integrate", e.to_string()));
            return report;
        }
        (Ok(_), Expectation::Violated) => {
            report.checks.push(Check::failed("zero_crossing", "u and v stay positive".into()));
            return report;
        }
        (Ok(f), _) => f,
    };
    let negated = integrate_uv(&pot.negated(), spec.x_max, spec.h);
    let window = fields.window();
    let riccati = fields.riccati_residuals(0.5);
    let bounds = verify_continuum_bounds(&fields, tol);
    let d = continuum_decompose(&fields, tol);
    let regularity = check_w_regularity(&d);
    let checks = &mut report.checks;
    checks.push(Check::new("window_positive", window.positive, window.min_u.min(window.min_v), 0.0));
    checks.push(Check::new("riccati", riccati.max() <= RICCATI_LIMIT, riccati.max(), RICCATI_LIMIT));
    let symmetry = match &negated {
        Ok(g) => fields.sign_symmetry_defect(g),
        Err(_) => f64::NAN,
    };
    checks.push(Check::new("sign_symmetry", symmetry <= RICCATI_LIMIT, symmetry, RICCATI_LIMIT));
    let ok = bounds.iter().all(|b| b.pass && b.margin >= 0.0);
    let worst = bounds.iter().map(|b| b.margin).fold(f64::INFINITY, f64::min);
    checks.push(Check::new("bounds", ok, worst, 0.0));
    let identity = d.identity_defect(&fields.potential);
    checks.push(Check::new("decomposition_identity", identity <= 1e-9, identity, 1e-9));

    let (dual, amp, amp_half) = match continuum_prufer(pot, spec.k, spec.x_max, spec.h) {
        Ok(p) => {
            let dual = continuum_dual_path_error(&p, pot);
            match p.amplitude_report(&d) {
                Ok(a) => (dual, a.sup_residual, a.sup_residual_half),
                Err(_) => (dual, f64::NAN, f64::NAN),
            }
        }
        Err(e) => {
            checks.push(Check::failed("prufer", e.to_string()));
            (f64::NAN, f64::NAN, f64::NAN)
        }
    };
    checks.push(Check::new("prufer_dual_path", dual <= CONTINUUM_DUAL_LIMIT, dual, CONTINUUM_DUAL_LIMIT));
    checks.push(Check::new("amplitude_residual", amp.is_finite(), amp, f64::INFINITY));

    report.summary = Some(ContinuumSummary {
        window,
        riccati,
        symmetry_defect: symmetry,
        wronskian_drift: fields.wronskian_drift,
        q_l1: d.q_l1,
        q_l1_tail: d.q_l1_tail,
        closed_form_defect: d.closed_form_defect,
        regularity,
        prufer_dual_path: dual,
        amplitude_residual: amp,
        amplitude_residual_half: amp_half,
    });
    report.bounds = bounds;
    if !traces {
        for b in &mut report.bounds {
            b.lhs_trace.clear();
            b.rhs_trace.clear();
        }
    }
    report.pass = report.checks.iter().all(|c| c.pass);
    report
}

/// Runs the whole configuration. Relative file paths resolve against `base`.
/// Input problems (unreadable files, bad generator parameters) are errors;
/// failed checks are recorded in the report.
pub fn verify_all(cfg: &SuiteConfig, base: &Path) -> Result<SuiteReport> {
    cfg.tolerances.validate()?;
    let mut resolved = Vec::new();
    for spec in &cfg.entries {
        resolved.extend(resolve(spec, base, cfg.horizon)?);
    }
    let mut names: Vec<&str> = resolved.iter().map(|r| r.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("duplicate entry name {}", w[0])));
    }
    let potentials = cfg
        .continuum
        .iter()
        .map(|s| continuum_potential(&s.source, base))
        .collect::<Result<Vec<_>>>()?;

    let mut entries = parallel::map(&resolved, |r| verify_entry(r, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let idx: Vec<usize> = (0..cfg.continuum.len()).collect();
    let mut continuum = parallel::map(&idx, |&i| {
        verify_continuum_entry(&cfg.continuum[i], &potentials[i], &cfg.tolerances, cfg.traces)
    });
    continuum.sort_by(|a, b| a.name.cmp(&b.name));

    let mut failures = Vec::new();
    for e in &entries {
        for c in e.checks.iter().filter(|c| !c.pass) {
            failures.push(format!("{}: {} (value {:e}, limit {:e})", e.name, c.name, c.value, c.limit));
        }
    }
    for e in &continuum {
        for c in e.checks.iter().filter(|c| !c.pass) {
            let what = c.detail.clone().unwrap_or_else(|| format!("value {:e}, limit {:e}", c.value, c.limit));
            failures.push(format!("continuum {}: {} ({what})", e.name, c.name));
        }
    }
    Ok(SuiteReport {
        horizon: cfg.horizon,
        tolerances: cfg.tolerances,
        pass: failures.is_empty(),
        entries,
        continuum,
        failures,
    })
}
