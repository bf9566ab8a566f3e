use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinform::spin7::{
    cayley_form, find_spin7_logged, is_conformal_spin7, FinderConfig, FormRecord, IterationRecord, SelfDual4Form, Spin7Certificate, Vec35,
};
use spinform::Error;

use crate::io::{read_json, write_csv, write_json, CliResult, Failure};
use crate::{Common, Format};

#[derive(Args)]
pub struct VerifyArgs {
    /// Form JSON file, or `cayley` for the canonical form.
    pub form: String,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Seed form JSON file; omitted means a random perturbation of the Cayley form.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Relative size of the random perturbation of the Cayley form.
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    /// Iteration log (CSV); kept when the descent fails.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

fn load_form(spec: &str) -> CliResult<SelfDual4Form> {
    if spec == "cayley" {
        return Ok(cayley_form());
    }
    read_json::<FormRecord>(spec.as_ref())?.to_form().map_err(Failure::from)
}

#[derive(Serialize)]
struct VerifyReport {
    degenerate: bool,
    #[serde(flatten)]
    certificate: Option<Spin7Certificate>,
}

pub fn verify(a: &VerifyArgs, c: &Common) -> CliResult {
    let tol = c.tol.unwrap_or(1e-8);
    let form = load_form(&a.form)?;
    let (report, outcome) = match is_conformal_spin7(&form.space, &form.phi, tol) {
        Ok(cert) => {
            eprintln!(
                "residual {:.3e}, self-dual defect {:.3e}, |Φ| = {:.12}: {}",
                cert.residual,
                cert.selfdual_defect,
                cert.norm,
                if cert.is_metric {
                    "metric Spin(7)"
                } else if cert.is_conformal {
                    "conformal Spin(7)"
                } else {
                    "not conformal Spin(7)"
                }
            );
            let ok = cert.is_conformal;
            (VerifyReport { degenerate: false, certificate: Some(cert) }, ok)
        }
        Err(Error::Degenerate(m)) => {
            eprintln!("degenerate form: {m}");
            (VerifyReport { degenerate: true, certificate: None }, false)
        }
        Err(e) => return Err(e.into()),
    };
    write_json(c.out.as_deref(), &report)?;
    if outcome {
        Ok(())
    } else {
        Err(Failure::Verification("form is not a conformal Spin(7) form".into()))
    }
}

/// Cayley form plus a uniform random direction of relative size `epsilon`.
fn perturbed_cayley(seed: u64, epsilon: f64) -> SelfDual4Form {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = cayley_form();
    let x0 = base.coords();
    let v = Vec35::from_fn(|_, _| rng.random_range(-1.0..1.0));
    base.with_coords(&(x0 + v * (epsilon * x0.norm() / v.norm())))
}

#[derive(Serialize)]
struct OptimizeReport {
    iterations: usize,
    restarts: usize,
    certificate: Spin7Certificate,
    #[serde(flatten)]
    form: FormRecord,
}

fn write_log(a: &OptimizeArgs, log: &[IterationRecord]) -> CliResult {
    let Some(path) = &a.log else { return Ok(()) };
    let header = ["iteration", "grad_norm", "form_norm", "step", "restarts"].map(String::from);
    let rows: Vec<Vec<f64>> = log
        .iter()
        .map(|r| vec![r.iteration as f64, r.grad_norm, r.form_norm, r.step, r.restarts as f64])
        .collect();
    write_csv(Some(path), &header, &rows)
}

pub fn optimize(a: &OptimizeArgs, c: &Common) -> CliResult {
    if c.format == Format::Csv {
        return Err(Failure::Input("optimize writes the form as JSON; use --log for the CSV iteration log".into()));
    }
    let seed = match &a.input {
        Some(p) => load_form(&p.to_string_lossy())?,
        None => perturbed_cayley(c.seed, a.epsilon),
    };
    let cfg = FinderConfig {
        tol: c.tol.unwrap_or(1e-10),
        max_iterations: a.max_iterations,
        ..FinderConfig::default()
    };
    let mut log = Vec::new();
    let result = find_spin7_logged(&seed, &cfg, &mut log);
    write_log(a, &log)?;
    let outcome = result?;
    let cert = outcome.certificate;
    eprintln!(
        "{} iterations, {} restarts; residual {:.3e}, |Φ| = {:.12}",
        outcome.iterations, outcome.restarts, cert.residual, cert.norm
    );
    let ok = cert.is_conformal;
    write_json(
        c.out.as_deref(),
        &OptimizeReport {
            iterations: outcome.iterations,
            restarts: outcome.restarts,
            certificate: cert,
            form: FormRecord::from_form(&outcome.form),
        },
    )?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification("final form failed certification".into()))
    }
}
