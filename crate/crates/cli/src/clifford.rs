use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinform::clifford_rep::{selfcheck as run_checks, CliffordModule, SelfCheck, Spinor};
use spinform::{Multivector, QuadraticSpace};

use crate::io::{write_table, CliResult, Failure};
use crate::Common;

/// Signatures with a verified real module and pinned symmetry table.
pub const SIGNATURES: [(usize, usize); 5] = [(2, 0), (1, 1), (2, 2), (3, 1), (8, 0)];

#[derive(Args)]
pub struct SelfcheckArgs {
    /// Signature `p,q`; repeat for several. Defaults to all supported signatures.
    #[arg(long = "signature", value_parser = parse_signature)]
    pub signatures: Vec<(usize, usize)>,
    /// Random draws per signature.
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
}

fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let sig = (
        p.trim().parse().map_err(|e| format!("{e}"))?,
        q.trim().parse().map_err(|e| format!("{e}"))?,
    );
    if SIGNATURES.contains(&sig) {
        Ok(sig)
    } else {
        Err(format!("unsupported signature ({},{}); choose from {}", sig.0, sig.1, list()))
    }
}

fn list() -> String {
    SIGNATURES.iter().map(|(p, q)| format!("{p},{q}")).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    tol: f64,
    passed: bool,
    checks: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    passed: bool,
    worst: f64,
    #[serde(flatten)]
    check: SelfCheck,
}

fn uniform_form(r: &mut ChaCha8Rng, sp: QuadraticSpace) -> Multivector {
    let c = (0..sp.num_blades()).map(|_| r.random_range(-1.0..1.0)).collect();
    Multivector::from_coeffs(sp, c).expect("coefficient count matches the space")
}

pub fn selfcheck(a: &SelfcheckArgs, c: &Common) -> CliResult {
    let tol = c.tol.unwrap_or(1e-9);
    let sigs = if a.signatures.is_empty() { SIGNATURES.to_vec() } else { a.signatures.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut checks = Vec::new();
    for (p, q) in sigs {
        let sp = QuadraticSpace::signature(p, q)?;
        let n = CliffordModule::new(sp, 1)?.dim();
        let samples: Vec<_> = (0..a.draws)
            .map(|_| {
                let (x, y) = (uniform_form(&mut rng, sp), uniform_form(&mut rng, sp));
                let xi = Spinor::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                (x, y, xi)
            })
            .collect();
        let check = run_checks(sp, &samples)?;
        let sym: Vec<String> = check
            .symmetry
            .iter()
            .map(|s| format!("σ={:+} s={:+} (expected {:+})", s.sigma, s.measured, s.expected))
            .collect();
        eprintln!(
            "({p},{q}) dim Σ = {n}: worst residual {:.2e}; {}{}",
            check.worst(),
            sym.join(", "),
            if check.passed(tol) { "" } else { "  FAILED" }
        );
        checks.push(Entry {
            passed: check.passed(tol),
            worst: check.worst(),
            check,
        });
    }
    let passed = checks.iter().all(|e| e.passed);
    let table: Vec<(String, f64)> = checks
        .iter()
        .flat_map(|e| {
            let [p, q] = e.check.signature;
            let k = |name: &str| format!("{p},{q}:{name}");
            let mut rows = vec![
                (k("clifford_relation"), e.check.clifford_relation),
                (k("homomorphism"), e.check.homomorphism),
                (k("adjoint_transport"), e.check.adjoint_transport),
                (k("trace"), e.check.trace),
                (k("fierz"), e.check.fierz),
            ];
            rows.extend(e.check.null_dirac.map(|v| (k("null_dirac"), v)));
            rows.extend(e.check.symmetry.iter().map(|s| (k(&format!("symmetry_sigma{:+}", s.sigma)), s.measured as f64)));
            rows
        })
        .collect();
    write_table(c, &Report { seed: c.seed, tol, passed, checks }, &table)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("self-check exceeded tolerance {tol:e}")))
    }
}
