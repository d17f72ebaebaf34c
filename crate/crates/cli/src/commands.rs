use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use spectral_gate::bounds::{verify_gamma_bounds, verify_potential_bounds, BoundReport};
use spectral_gate::continuum::{continuum_prufer, integrate_uv, ContinuumPotential};
use spectral_gate::corpus::random_certified;
use spectral_gate::eigenfunctions::{edge_growth_check, oscillation_count, solve_edge, Edge};
use spectral_gate::generators::{gen_alternating, gen_extremal, gen_wvn};
use spectral_gate::oracle::{eigs_outside, truncated_spectrum};
use spectral_gate::potential::read_coeffs_path;
use spectral_gate::prufer::evolve;
use spectral_gate::suite::{verify_all, verify_continuum_entry, ContinuumSource, ContinuumSpec, Expectation, SuiteConfig};
use spectral_gate::verblunsky::gamma_from_jacobi;
use spectral_gate::{JacobiCoeffs, Potential, Tolerances};

use crate::manifest::RunManifest;
use crate::{Command, Expect, Format, GenKind, Outcome};

pub fn load_tolerances(path: Option<&Path>) -> Result<Tolerances> {
    let Some(path) = path else {
        return Ok(Tolerances::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let tol: Tolerances = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    tol.validate()?;
    Ok(tol)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_json(value: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load(path: &Path, n: Option<usize>) -> Result<(JacobiCoeffs, usize)> {
    let j = read_coeffs_path(path).with_context(|| format!("reading {}", path.display()))?;
    let n = n.unwrap_or(j.len());
    if n == 0 {
        bail!("horizon must be positive");
    }
    Ok((j.padded(n), n))
}

fn load_potential(path: &Path, n: Option<usize>) -> Result<(Potential, usize)> {
    let (j, n) = load(path, n)?;
    match j.to_potential() {
        Some(v) => Ok((v, n)),
        None => bail!("{} is not a Schrödinger potential (a ≠ 1)", path.display()),
    }
}

pub fn run(cmd: &Command, tol: &Tolerances) -> Result<Outcome> {
    match cmd {
        Command::Gen {
            kind,
            n,
            lambda,
            alpha,
            seed,
            index,
            format,
            out,
        } => gen(*kind, *n, *lambda, *alpha, *seed, *index, *format, out.as_deref()),
        Command::Certify { input, n, expect, out } => certify(input, *n, *expect, out.as_deref(), tol),
        Command::Evolve { edge, input, n, out } => evolve_edge(edge, input, *n, out.as_deref(), tol),
        Command::Prufer { input, k, n, out } => prufer(input, *k, *n, out.as_deref()),
        Command::Bounds { input, n, report } => bounds(input, *n, report.as_deref(), tol),
        Command::Eig { input, n, outside_only } => eig(input, *n, *outside_only),
        Command::Continuum {
            potential,
            xmax,
            h,
            k,
            out,
            prufer_out,
            report,
        } => continuum(potential, *xmax, *h, *k, out.as_deref(), prufer_out.as_deref(), report.as_deref(), tol),
        Command::VerifyAll { config, report, no_traces } => {
            verify(config.as_deref(), report.as_deref(), *no_traces, tol)
        }
        Command::CheckManifest { path } => {
            RunManifest::read(path)?.verify()?;
            println!("{}: all hashes match", path.display());
            Ok(Outcome {
                pass: true,
                ..Outcome::default()
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    kind: GenKind,
    n: usize,
    lambda: f64,
    alpha: f64,
    seed: u64,
    index: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<Outcome> {
    let v = match kind {
        GenKind::Free => Potential::new(vec![0.0; n.max(1)])?,
        GenKind::Alternating => gen_alternating(lambda, n)?,
        GenKind::Extremal => gen_extremal(n)?,
        GenKind::Wvn => gen_wvn(alpha, n)?.0,
        GenKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut inst = random_certified(&mut rng, n.max(5));
            for _ in 0..index {
                inst = random_certified(&mut rng, n.max(5));
            }
            inst.potential
        }
    };
    let mut outcome = Outcome {
        pass: true,
        ..Outcome::default()
    };
    let mut sink: Box<dyn Write> = match out {
        Some(p) => {
            outcome.outputs.push(p.to_path_buf());
            Box::new(create(p)?)
        }
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => v.write_csv(&mut sink)?,
        Format::Json => writeln!(sink, "{}", v.to_json())?,
    }
    sink.flush()?;
    Ok(outcome)
}

fn certify(input: &Path, n: Option<usize>, expect: Expect, out: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let (j, n) = load(input, n)?;
    let cert = gamma_from_jacobi(&j, n, tol)?;
    let pass = match expect {
        Expect::Certified => cert.is_certified(),
        Expect::Violated => cert.is_violated(),
    };
    let full = cert.to_json_value();
    let mut summary = full.clone();
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("gamma");
        obj.insert("horizon".into(), json!(n));
        obj.insert("pass".into(), json!(pass));
    }
    print_json(&summary)?;
    let mut outcome = Outcome {
        pass,
        inputs: vec![input.to_path_buf()],
        outputs: Vec::new(),
    };
    if let Some(p) = out {
        write_json(p, &full)?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}

fn evolve_edge(edge: &str, input: &Path, n: Option<usize>, out: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let edge: Edge = edge.parse()?;
    let (j, n) = load(input, n)?;
    let trace = solve_edge(&j, edge, n)?;
    let growth = match edge {
        Edge::Plus => edge_growth_check(&trace),
        Edge::Minus => edge_growth_check(&trace.alternated()),
    };
    let last = trace.last();
    let log10_abs = (trace.mantissa(last).abs().log2() + trace.exponent(last) as f64) * std::f64::consts::LOG10_2;
    print_json(&json!({
        "edge": edge.energy(),
        "horizon": n,
        "oscillations": oscillation_count(&trace, tol),
        "sign_last": trace.sign(last),
        "log10_abs_last": log10_abs,
        "edge_growth": growth,
    }))?;
    let mut outcome = Outcome {
        pass: growth.pass,
        inputs: vec![input.to_path_buf()],
        outputs: Vec::new(),
    };
    if let Some(p) = out {
        let mut w = create(p)?;
        trace.write_csv(&mut w)?;
        w.flush()?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}

fn prufer(input: &Path, k: f64, n: Option<usize>, out: Option<&Path>) -> Result<Outcome> {
    let (v, n) = load_potential(input, n)?;
    let evo = evolve(&v.padded(n), k, (0.0, 1.0), n)?;
    let last = evo.last();
    print_json(&json!({
        "k": k,
        "horizon": n,
        "log_r": last.log_r,
        "theta": last.theta(),
        "v_functional": evo.v_functional,
        "growth_exponent": evo.growth_exponent,
        "amplitude_exponent": evo.amplitude_exponent,
    }))?;
    let mut outcome = Outcome {
        pass: true,
        inputs: vec![input.to_path_buf()],
        outputs: Vec::new(),
    };
    if let Some(p) = out {
        let mut w = create(p)?;
        evo.write_csv(&mut w)?;
        w.flush()?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}

fn summarize(reports: &[BoundReport]) -> Vec<Value> {
    reports
        .iter()
        .map(|b| {
            json!({
                "name": b.name,
                "pass": b.pass,
                "margin": b.margin,
                "constant_estimate": b.constant_estimate,
            })
        })
        .collect()
}

fn bounds(input: &Path, n: Option<usize>, report: Option<&Path>, tol: &Tolerances) -> Result<Outcome> {
    let (j, n) = load(input, n)?;
    let cert = gamma_from_jacobi(&j, n, tol)?;
    let mut outcome = Outcome {
        pass: false,
        inputs: vec![input.to_path_buf()],
        outputs: Vec::new(),
    };
    if !cert.is_certified() {
        let mut v = cert.to_json_value();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("gamma");
        }
        print_json(&json!({"certification": v, "pass": false}))?;
        eprintln!("input is not certified; bounds not evaluated");
        return Ok(outcome);
    }
    let mut reports = verify_gamma_bounds(&cert.gamma, n, tol)?;
    if let Some(v) = j.to_potential() {
        reports.extend(verify_potential_bounds(&v.padded(n), &cert.gamma, n, tol)?);
    }
    outcome.pass = reports.iter().all(|b| b.pass);
    print_json(&json!({
        "horizon": n,
        "bounds": summarize(&reports),
        "pass": outcome.pass,
    }))?;
    if let Some(p) = report {
        write_json(p, &json!({"horizon": n, "bounds": reports, "pass": outcome.pass}))?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}

fn eig(input: &Path, n: Option<usize>, outside_only: bool) -> Result<Outcome> {
    let (j, n) = load(input, n)?;
    if outside_only {
        let out = eigs_outside(&j, n)?;
        print_json(&serde_json::to_value(&out)?)?;
    } else {
        let spec = truncated_spectrum(&j, n)?;
        print_json(&serde_json::to_value(&spec)?)?;
    }
    Ok(Outcome {
        pass: true,
        inputs: vec![input.to_path_buf()],
        outputs: Vec::new(),
    })
}

#[allow(clippy::too_many_arguments)]
fn continuum(
    spec: &str,
    x_max: f64,
    h: f64,
    k: f64,
    out: Option<&Path>,
    prufer_out: Option<&Path>,
    report: Option<&Path>,
    tol: &Tolerances,
) -> Result<Outcome> {
    let pot = ContinuumPotential::parse(spec)?;
    let mut outcome = Outcome::default();
    let path = PathBuf::from(spec);
    if path.is_file() {
        outcome.inputs.push(path.clone());
    }
    let cs = ContinuumSpec {
        name: pot.label().to_string(),
        source: ContinuumSource::File { path },
        x_max,
        h,
        k,
        expect: Expectation::Certified,
    };
    let rep = verify_continuum_entry(&cs, &pot, tol, report.is_some());
    outcome.pass = rep.pass;
    print_json(&json!({
        "potential": rep.name,
        "x_max": x_max,
        "checks": rep.checks,
        "bounds": summarize(&rep.bounds),
        "summary": rep.summary,
        "pass": rep.pass,
    }))?;
    if let Some(p) = out {
        integrate_uv(&pot, x_max, h)?.write_csv(p)?;
        outcome.outputs.push(p.to_path_buf());
    }
    if let Some(p) = prufer_out {
        continuum_prufer(&pot, k, x_max, h)?.write_csv(p)?;
        outcome.outputs.push(p.to_path_buf());
    }
    if let Some(p) = report {
        write_json(p, &rep)?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}

fn verify(config: Option<&Path>, report: Option<&Path>, no_traces: bool, tol: &Tolerances) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let (mut cfg, base) = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            outcome.inputs.push(p.to_path_buf());
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (SuiteConfig::from_json(&text)?, base)
        }
        None => {
            let mut cfg = SuiteConfig::default_corpus();
            cfg.tolerances = *tol;
            (cfg, PathBuf::from("."))
        }
    };
    if no_traces {
        cfg.traces = false;
    }
    let rep = verify_all(&cfg, &base)?;
    outcome.pass = rep.pass;
    let continuum_failed = rep.continuum.iter().filter(|c| !c.pass).count();
    print_json(&json!({
        "entries": rep.entries.len(),
        "entries_failed": rep.entries.iter().filter(|e| !e.pass).count(),
        "continuum": rep.continuum.len(),
        "continuum_failed": continuum_failed,
        "failures": rep.failures.len(),
        "pass": rep.pass,
    }))?;
    if let Some(first) = rep.first_failure() {
        eprintln!("first failure: {first}");
    }
    if let Some(p) = report {
        write_json(p, &rep)?;
        outcome.outputs.push(p.to_path_buf());
    }
    Ok(outcome)
}
