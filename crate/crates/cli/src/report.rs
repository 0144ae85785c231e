use std::path::Path;

use dqc1_core::Error;
use serde::Serialize;

use crate::Common;

pub const TOOL: &str = "dqc1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON report: tool, version, command, config echo, seed, then `body`'s fields.
pub fn json(command: &str, config: &impl Serialize, seed: u64, body: serde_json::Value) -> String {
    let mut out = serde_json::json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config": config,
        "seed": seed,
    });
    if let (Some(map), serde_json::Value::Object(extra)) = (out.as_object_mut(), body) {
        map.extend(extra);
    }
    serde_json::to_string_pretty(&out).expect("reports serialize") + "\n"
}

/// `#`-prefixed header lines carrying the same metadata as [`json`].
pub fn csv_preamble(command: &str, config: &impl Serialize, seed: u64) -> String {
    let config = serde_json::to_string(config).expect("configs serialize");
    format!("# {TOOL} {VERSION} {command}\n# seed: {seed}\n# config: {config}\n")
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(common: &Common, body: &str) -> Result<(), Error> {
    match &common.output {
        Some(path) => write_file(path, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<(), Error> {
    std::fs::write(path, body).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

/// Per-trial seed, stable in the trial index.
pub fn trial_seed(root: u64, trial: u64) -> u64 {
    root.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial.wrapping_mul(0xBF58_476D_1CE4_E5B9) ^ 0x94D0_49BB_1331_11EB)
}
