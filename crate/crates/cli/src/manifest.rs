use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSummary {
    /// Every evaluated point satisfies the positivity constraint.
    pub satisfied: bool,
    /// Smallest margin seen (None when no coefficients were defined).
    pub min_margin: Option<f64>,
    pub violating_points: usize,
    pub points: usize,
}

impl ConstraintSummary {
    pub fn from_margins(margins: impl IntoIterator<Item = Option<(bool, f64)>>) -> Self {
        let mut s = Self {
            satisfied: true,
            min_margin: None,
            violating_points: 0,
            points: 0,
        };
        for m in margins {
            s.points += 1;
            if let Some((ok, margin)) = m {
                s.min_margin = Some(s.min_margin.map_or(margin, |x: f64| x.min(margin)));
                if !ok {
                    s.satisfied = false;
                    s.violating_points += 1;
                }
            }
        }
        s
    }
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub constraint: ConstraintSummary,
    pub notes: Vec<String>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: impl Serialize, constraint: ConstraintSummary) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            constraint,
            notes: Vec::new(),
            timestamp: timestamp(),
        }
    }

    pub fn write_for(&self, output: &Path) -> CliResult<PathBuf> {
        let path = manifest_path(output);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// RFC 3339 UTC time; `SOURCE_DATE_EPOCH` pins it for reproducible builds.
pub fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}
