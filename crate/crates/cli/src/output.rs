use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_row<S: AsRef<str>>(fields: &[S]) -> String {
    let mut line = fields
        .iter()
        .map(|f| f.as_ref())
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `body` to `out` (plus its manifest) or to standard output.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::io(path.display(), e))?;
            manifest.write_for(path)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(())
}
