use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Reads input files while hashing their bytes in order.
#[derive(Default)]
pub struct Inputs {
    hasher: Option<Sha256>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        self.hash(text.as_bytes());
        Ok(text)
    }

    /// Hashes an input that arrives on the command line instead of a file.
    pub fn hash(&mut self, bytes: &[u8]) {
        self.hasher.get_or_insert_with(Sha256::new).update(bytes);
    }

    fn digest(self) -> Option<String> {
        self.hasher.map(|h| hex::encode(h.finalize()))
    }
}

/// What a subcommand hands back for reporting.
pub struct Outcome {
    pub inputs: Inputs,
    pub seeds: BTreeMap<&'static str, u64>,
    pub result: Value,
    pub summary: String,
    /// Set when the run produced a report but still has to exit non-zero.
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn new(inputs: Inputs, result: Value, summary: String) -> Self {
        Outcome { inputs, seeds: BTreeMap::new(), result, summary, failure: None }
    }

    pub fn seed(mut self, name: &'static str, value: u64) -> Self {
        self.seeds.insert(name, value);
        self
    }
}

#[derive(Serialize)]
struct Timing {
    wall_ms: f64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a [String],
    input_digest: Option<String>,
    seeds: BTreeMap<&'static str, u64>,
    result: Value,
    timing: Timing,
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn emit(command: &[String], outcome: Outcome, elapsed: Duration) {
    let report = RunReport {
        command,
        input_digest: outcome.inputs.digest(),
        seeds: outcome.seeds,
        result: outcome.result,
        timing: Timing { wall_ms: elapsed.as_secs_f64() * 1e3 },
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("reports are plain JSON values"));
    if !outcome.summary.is_empty() {
        eprintln!("{}", outcome.summary);
    }
    if let Some(e) = outcome.failure {
        eprintln!("error: {e}");
    }
}
