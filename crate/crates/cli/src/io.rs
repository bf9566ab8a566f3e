use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Common, Format};

/// Exit status 1 for a failed verification, 2 for unusable input.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Input(m) => m,
        }
    }
}

impl From<spinform::Error> for Failure {
    fn from(e: spinform::Error) -> Self {
        match e {
            spinform::Error::NonConvergence { .. } => Failure::Verification(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("write failed: {e}"))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io_failure)?;
    writeln!(w).map_err(io_failure)
}

/// Shortest round-trip text, in exponent form away from unit scale.
fn number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Writes a header and rows of numbers.
pub fn write_csv(path: Option<&Path>, header: &[String], rows: &[Vec<f64>]) -> CliResult {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(header).map_err(io_failure)?;
    for r in rows {
        w.write_record(r.iter().map(|x| number(*x))).map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)
}

/// Table output for commands whose natural shape is `name,value` rows.
pub fn write_table<T: Serialize>(c: &Common, value: &T, table: &[(String, f64)]) -> CliResult {
    match c.format {
        Format::Json => write_json(c.out.as_deref(), value),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(c.out.as_deref())?);
            w.write_record(["quantity", "value"]).map_err(io_failure)?;
            for (k, v) in table {
                w.write_record([k.clone(), number(*v)]).map_err(io_failure)?;
            }
            w.flush().map_err(io_failure)
        }
    }
}
