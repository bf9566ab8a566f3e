mod clifford;
mod flow;
mod io;
mod spin7;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};



#[derive(Parser)]
#[command(name = "spinform", version, about = "Spinor squares, Spin(7) forms and left-invariant parallel spinor flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Acceptance tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed of the ChaCha generator used for random draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the machine-readable output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Real Clifford module checks.
    #[command(subcommand)]
    Clifford(CliffordCmd),
    /// Conformal Spin(7) forms in dimension eight.
    #[command(subcommand)]
    Spin7(Spin7Cmd),
    /// Left-invariant parallel spinor flows on three-dimensional groups.
    #[command(subcommand)]
    Flow(FlowCmd),
}

#[derive(Subcommand)]
enum CliffordCmd {
    /// Randomized invariant checks of the Clifford modules and spinor squares.
    Selfcheck(clifford::SelfcheckArgs),
}

#[derive(Subcommand)]
enum Spin7Cmd {
    /// Certify a form (JSON file or `cayley`) as conformal Spin(7).
    Verify(spin7::VerifyArgs),
    /// Descend on the Spin(7) potential from a seed form.
    Optimize(spin7::OptimizeArgs),
}

#[derive(Subcommand)]
enum FlowCmd {
    /// Integrate a scenario and compare with the closed-form solution.
    Run(flow::RunArgs),
    /// Residual table of the constraint equations at the initial data.
    CheckCauchy(flow::ScenarioArg),
    /// Isomorphism type of the group determined by the shape operator.
    Classify(flow::ScenarioArg),
    /// Write a scenario for one row of the classification table.
    Template(flow::TemplateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match cli.command {
        Command::Clifford(CliffordCmd::Selfcheck(a)) => clifford::selfcheck(&a, c),
        Command::Spin7(Spin7Cmd::Verify(a)) => spin7::verify(&a, c),
        Command::Spin7(Spin7Cmd::Optimize(a)) => spin7::optimize(&a, c),
        Command::Flow(FlowCmd::Run(a)) => flow::run(&a, c),
        Command::Flow(FlowCmd::CheckCauchy(a)) => flow::check_cauchy(&a, c),
        Command::Flow(FlowCmd::Classify(a)) => flow::classify(&a, c),
        Command::Flow(FlowCmd::Template(a)) => flow::template(&a, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
