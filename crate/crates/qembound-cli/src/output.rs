//! Result emission: JSON records (one per line) on stdout and optional
//! JSON/CSV files under the output directory.
//!
//! Numeric CSV cells carry 17 significant digits; non-finite values are the
//! literal strings `inf`, `-inf`, and `nan`. Wall-clock timing goes to
//! stderr only, so records are byte-identical across reruns with the same
//! seed.

use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Format a float with 17 significant digits (or a sentinel literal).
pub fn csv_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Collects records for one command invocation and writes them at the end.
pub struct OutputSink {
    command: String,
    config_echo: Value,
    seed: u64,
    records: Vec<Value>,
    csv: Vec<(String, Vec<String>, Vec<Vec<String>>)>,
    out_dir: Option<PathBuf>,
    write_json: bool,
    write_csv: bool,
}

impl OutputSink {
    pub fn new(
        command: &str,
        config_echo: Value,
        seed: u64,
        out_dir: Option<PathBuf>,
        format: &str,
    ) -> Self {
        Self {
            command: command.to_string(),
            config_echo,
            seed,
            records: Vec::new(),
            csv: Vec::new(),
            out_dir,
            write_json: format.contains("json"),
            write_csv: format.contains("csv"),
        }
    }

    /// Append one output record.
    pub fn record(&mut self, outputs: Value) {
        self.records.push(json!({
            "command": self.command,
            "config": self.config_echo,
            "outputs": outputs,
            "provenance": {
                "tool_version": TOOL_VERSION,
                "master_seed": self.seed,
            },
        }));
    }

    /// Register a CSV table (name without extension).
    pub fn csv_table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) {
        self.csv.push((
            name.to_string(),
            header.iter().map(|s| s.to_string()).collect(),
            rows,
        ));
    }

    /// Print records to stdout and write any configured files.
    pub fn finish(self) -> Result<(), CliError> {
        let mut stdout = std::io::stdout().lock();
        for rec in &self.records {
            let line = serde_json::to_string(rec)
                .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
            writeln!(stdout, "{line}").map_err(|e| CliError::Numerical(e.to_string()))?;
        }
        drop(stdout);

        if let Some(dir) = &self.out_dir {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
            if self.write_json {
                let path = dir.join(format!("{}.jsonl", self.command));
                let mut body = String::new();
                for rec in &self.records {
                    body.push_str(&serde_json::to_string(rec).expect("serializable record"));
                    body.push('\n');
                }
                fs::write(&path, body)
                    .map_err(|e| CliError::Config(format!("cannot write {path:?}: {e}")))?;
            }
            if self.write_csv {
                for (name, header, rows) in &self.csv {
                    let path = dir.join(format!("{name}.csv"));
                    let mut body = header.join(",");
                    body.push('\n');
                    for row in rows {
                        body.push_str(&row.join(","));
                        body.push('\n');
                    }
                    fs::write(&path, body)
                        .map_err(|e| CliError::Config(format!("cannot write {path:?}: {e}")))?;
                }
            }
        }
        Ok(())
    }
}
