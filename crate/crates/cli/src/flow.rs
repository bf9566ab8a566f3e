use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinform::spinor_flow::{
    algebraic_defects, cauchy_residual, check_admissible, classify_group, flow_closed_form, flow_numeric, hamiltonian_constraint,
    hamiltonian_evolution, maximal_interval, ricci_anchor_defects, skew_cauchy_residual, torsion_flat_witness, CauchyResidual,
    Classification, FlowState, GroupSpec, Scenario, SkewCauchyResidual, TableRow, ThetaInvariants,
};
use spinform::{CauchyPair, GroupTag, Lapse};

use crate::io::{read_json, write_csv, write_json, write_table, CliResult, Failure};
use crate::{Common, Format};

/// Runs toward a finite end of the maximal interval stop at this fraction of it.
const STOP_FRACTION: f64 = 0.99;

#[derive(Args)]
pub struct ScenarioArg {
    /// Scenario JSON file.
    pub scenario: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Integration step; overrides the scenario.
    #[arg(long)]
    pub step: Option<f64>,
    /// End time; overrides the scenario.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Start time (at most 0); overrides the scenario.
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    /// Approximate number of rows in the time series.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args)]
pub struct TemplateArgs {
    /// Table row: abelian, e11, tau2_mixed, tau2_diagonal, tau2_l, tau2_n, tau2_general, tau3.
    #[arg(value_parser = parse_row)]
    pub row: TableRow,
    /// Row parameters; drawn from the seed when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub params: Option<Vec<f64>>,
    /// Constant lapse value.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lapse: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
}

fn parse_row(s: &str) -> Result<TableRow, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        let names: Vec<String> = TableRow::ALL.iter().map(|r| serde_json::to_value(r).unwrap().as_str().unwrap().to_string()).collect();
        format!("unknown row `{s}`; choose from {}", names.join(", "))
    })
}

fn load(path: &Path) -> CliResult<(Scenario, CauchyPair)> {
    let sc: Scenario = read_json(path)?;
    sc.lapse.validate()?;
    let pair = sc.pair()?;
    Ok((sc, pair))
}

fn rows(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    b: f64,
    theta: [[f64; 3]; 3],
    e: [[f64; 3]; 3],
    cauchy_residual: f64,
    hamiltonian: f64,
    hamiltonian_law: f64,
    closed_form_dev: f64,
}

impl Sample {
    fn new(pair: &CauchyPair, lapse: &Lapse, st: &FlowState) -> CliResult<Self> {
        let cf = flow_closed_form(pair, lapse, st.t)?;
        let (e, th) = (st.e_matrix(), st.theta_matrix());
        let scale = 1f64.max(cf.e_matrix().amax()).max(cf.theta_matrix().amax());
        let dev = (e - cf.e_matrix()).amax().max((th - cf.theta_matrix()).amax()) / scale;
        let num = st.pair(&pair.group);
        let res = cauchy_residual(&num).max() / (1f64.max(th.amax()) * 1f64.max(e.amax()).powi(2));
        Ok(Self {
            t: st.t,
            b: st.b,
            theta: st.theta,
            e: st.e,
            cauchy_residual: res,
            hamiltonian: hamiltonian_constraint(&num)?,
            hamiltonian_law: hamiltonian_evolution(pair, lapse, st.t)?,
            closed_form_dev: dev,
        })
    }

    fn hamiltonian_dev(&self) -> f64 {
        (self.hamiltonian - self.hamiltonian_law).abs() / self.hamiltonian_law.abs().max(1.0)
    }

    fn csv_row(&self) -> Vec<f64> {
        let th = &self.theta;
        let mut r = vec![self.t, self.b, th[0][0], th[0][1], th[0][2], th[1][1], th[1][2], th[2][2]];
        r.extend(self.e.iter().flatten());
        r.extend([self.cauchy_residual, self.hamiltonian, self.hamiltonian_law, self.closed_form_dev]);
        r
    }
}

fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["t", "B", "theta_uu", "theta_ul", "theta_un", "theta_ll", "theta_ln", "theta_nn"].map(String::from).to_vec();
    for a in ["u", "l", "n"] {
        h.extend((1..=3).map(|i| format!("e_{a}{i}")));
    }
    h.extend(["cauchy_residual", "hamiltonian", "hamiltonian_law", "closed_form_dev"].map(String::from));
    h
}

#[derive(Serialize)]
struct RunReport {
    group: GroupTag,
    /// `null` for an unbounded end.
    maximal_interval: [Option<f64>; 2],
    t_start: f64,
    t_end: f64,
    stopped_early: bool,
    step: f64,
    steps: usize,
    final_deviation: f64,
    max_deviation: f64,
    max_cauchy_residual: f64,
    max_hamiltonian_deviation: f64,
    passed: bool,
    series: Vec<Sample>,
}

pub fn run(a: &RunArgs, c: &Common) -> CliResult {
    let tol = c.tol.unwrap_or(1e-6);
    let (mut sc, pair) = load(&a.scenario)?;
    sc.step = a.step.unwrap_or(sc.step);
    sc.t_max = a.t_max.unwrap_or(sc.t_max);
    sc.t_min = a.t_min.unwrap_or(sc.t_min);
    if !(sc.t_min <= 0.0 && sc.t_max >= 0.0) {
        return Err(Failure::Input(format!("time range [{}, {}] must contain 0", sc.t_min, sc.t_max)));
    }
    let theta = pair.theta_matrix();
    let (lo, hi) = maximal_interval(&theta, &sc.lapse);
    let (t_end, late) = if sc.t_max >= hi { (hi * STOP_FRACTION, true) } else { (sc.t_max, false) };
    let (t_start, early) = if sc.t_min <= lo { (lo * STOP_FRACTION, true) } else { (sc.t_min, false) };
    eprintln!("maximal interval ({lo}, {hi})");
    if late || early {
        eprintln!("requested range [{}, {}] reaches a blow-up time; integrating over [{t_start}, {t_end}]", sc.t_min, sc.t_max);
    }
    let mut states: Vec<FlowState> = Vec::new();
    if t_start < 0.0 {
        states.extend(flow_numeric(&pair, &sc.lapse, t_start, sc.step)?.into_iter().skip(1).rev());
    }
    if t_end > 0.0 {
        states.extend(flow_numeric(&pair, &sc.lapse, t_end, sc.step)?);
    } else {
        states.extend(flow_numeric(&pair, &sc.lapse, 0.0, sc.step)?.into_iter().take(1));
    }
    let samples = states.iter().map(|s| Sample::new(&pair, &sc.lapse, s)).collect::<CliResult<Vec<_>>>()?;
    let max_of = |f: &dyn Fn(&Sample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_deviation = max_of(&|s| s.closed_form_dev);
    let max_cauchy_residual = max_of(&|s| s.cauchy_residual);
    let max_hamiltonian_deviation = max_of(&|s| s.hamiltonian_dev());
    let final_deviation = samples.last().map_or(0.0, |s| s.closed_form_dev);
    let passed = max_deviation <= tol && max_cauchy_residual <= tol && max_hamiltonian_deviation <= tol;
    eprintln!(
        "{} steps; final closed-form deviation {final_deviation:.3e} (max {max_deviation:.3e}); Cauchy residual ≤ {max_cauchy_residual:.3e}; ℋ law deviation ≤ {max_hamiltonian_deviation:.3e}",
        samples.len() - 1
    );
    let every = samples.len().div_ceil(a.samples.max(1)).max(1);
    let last = samples.len() - 1;
    let series: Vec<Sample> = samples.into_iter().enumerate().filter(|(i, _)| i % every == 0 || *i == last).map(|(_, s)| s).collect();
    match c.format {
        Format::Csv => write_csv(c.out.as_deref(), &csv_header(), &series.iter().map(Sample::csv_row).collect::<Vec<_>>())?,
        Format::Json => write_json(
            c.out.as_deref(),
            &RunReport {
                group: pair.group.tag.unwrap_or(classify_group(&theta)?.tag),
                maximal_interval: [finite(lo), finite(hi)],
                t_start,
                t_end,
                stopped_early: late || early,
                step: sc.step,
                steps: last,
                final_deviation,
                max_deviation,
                max_cauchy_residual,
                max_hamiltonian_deviation,
                passed,
                series,
            },
        )?,
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("flow deviates beyond tolerance {tol:e}")))
    }
}

#[derive(Serialize)]
struct CauchyReport {
    cauchy: CauchyResidual,
    algebraic: [f64; 4],
    hamiltonian: f64,
    ricci_anchor: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    skew: Option<SkewCauchyResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    torsion_flat: Option<[f64; 2]>,
    passed: bool,
}

pub fn check_cauchy(a: &ScenarioArg, c: &Common) -> CliResult {
    let tol = c.tol.unwrap_or(1e-9);
    let (sc, pair) = load(&a.scenario)?;
    let theta = pair.theta_matrix();
    let cauchy = cauchy_residual(&pair);
    let algebraic = algebraic_defects(&theta);
    let hamiltonian = hamiltonian_constraint(&pair)?;
    let (r1, r2) = ricci_anchor_defects(&pair)?;
    let skew_data = sc.skew_data()?;
    let skew = skew_data.as_ref().map(skew_cauchy_residual).transpose()?;
    let torsion_flat = skew_data.as_ref().map(torsion_flat_witness).transpose()?;
    let scale = 1f64.max(theta.amax()) * 1f64.max(pair.e_matrix().amax()).powi(2);
    let worst = skew.map_or(cauchy.max(), |s| s.max()) / scale;
    let passed = worst <= tol;
    let mut table: Vec<(String, f64)> = Vec::new();
    for (k, v) in ["u", "l", "n"].iter().zip(cauchy.structure) {
        table.push((format!("structure_{k}"), v));
    }
    table.push(("closed".into(), cauchy.closed));
    for (i, v) in algebraic.iter().enumerate() {
        table.push((format!("algebraic_{}", i + 1), *v));
    }
    table.push(("hamiltonian".into(), hamiltonian));
    table.push(("ricci_anchor_1".into(), r1));
    table.push(("ricci_anchor_2".into(), r2));
    if let Some(s) = skew {
        for (k, v) in ["u", "l", "n"].iter().zip(s.structure) {
            table.push((format!("skew_structure_{k}"), v));
        }
        table.push(("skew_closed".into(), s.closed));
    }
    if let Some([l, n]) = torsion_flat {
        table.push(("torsion_flat_l".into(), l));
        table.push(("torsion_flat_n".into(), n));
    }
    for (k, v) in &table {
        eprintln!("{k:>18}  {v:.3e}");
    }
    eprintln!("{}", if passed { "Cauchy constraints hold" } else { "Cauchy constraints FAIL" });
    write_table(
        c,
        &CauchyReport {
            cauchy,
            algebraic,
            hamiltonian,
            ricci_anchor: [r1, r2],
            skew,
            torsion_flat,
            passed,
        },
        &table,
    )?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("constraint residual {worst:.3e} exceeds {tol:e}")))
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    group: GroupTag,
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    invariants: ThetaInvariants,
}

pub fn classify(a: &ScenarioArg, c: &Common) -> CliResult {
    let sc: Scenario = read_json(&a.scenario)?;
    let theta = rows(&sc.theta);
    check_admissible(&theta)?;
    let Classification { tag, invariants } = classify_group(&theta)?;
    let mu = match tag {
        GroupTag::Tau3 { mu } => Some(mu),
        _ => None,
    };
    eprintln!("{tag}  (λ = {}, T = {}, Δ = {})", invariants.lambda, invariants.trace, invariants.det);
    let mut table = vec![
        ("lambda".to_string(), invariants.lambda),
        ("trace".to_string(), invariants.trace),
        ("det".to_string(), invariants.det),
    ];
    table.extend(mu.map(|m| ("mu".to_string(), m)));
    write_table(
        c,
        &ClassifyReport {
            group: tag,
            name: tag.to_string(),
            mu,
            invariants,
        },
        &table,
    )
}

fn draw_theta(row: TableRow, rng: &mut ChaCha8Rng) -> CliResult<Matrix3<f64>> {
    for _ in 0..1000 {
        let p: Vec<f64> = (0..row.arity())
            .map(|_| {
                let x: f64 = rng.random_range(0.3..1.5);
                if rng.random_bool(0.5) { x } else { -x }
            })
            .collect();
        let Ok(theta) = row.instantiate(&p) else { continue };
        let Ok(cl) = classify_group(&theta) else { continue };
        if std::mem::discriminant(&cl.tag) == std::mem::discriminant(&row.expected_family()) && CauchyPair::on_catalog(&theta).is_ok() {
            return Ok(theta);
        }
    }
    Err(Failure::Input(format!("no admissible parameters drawn for {row:?}")))
}

pub fn template(a: &TemplateArgs, c: &Common) -> CliResult {
    let theta = match &a.params {
        Some(p) => a.row.instantiate(p)?,
        None => draw_theta(a.row, &mut ChaCha8Rng::seed_from_u64(c.seed))?,
    };
    let pair = CauchyPair::on_catalog(&theta)?;
    let lapse = Lapse::constant(a.lapse);
    lapse.validate()?;
    let (_, hi) = maximal_interval(&theta, &lapse);
    let t_max = a.t_max.unwrap_or(if hi.is_finite() { 0.5 * hi } else { 1.0 });
    let mut sc = Scenario::new(pair.theta, lapse, t_max, a.step);
    sc.group = pair.group.tag.map(GroupSpec::Catalog);
    if c.format == Format::Csv {
        return Err(Failure::Input("scenarios are JSON".into()));
    }
    write_json(c.out.as_deref(), &sc)
}
