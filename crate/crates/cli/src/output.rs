use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Writes `body` as pretty JSON with the run configuration under
/// `run_config`.
pub fn write_json(dir: &Path, name: &str, run_config: &Value, body: &impl Serialize) -> Result<()> {
    let mut value = serde_json::to_value(body)?;
    match value.as_object_mut() {
        Some(map) => {
            map.insert("run_config".into(), run_config.clone());
        }
        None => {
            value = serde_json::json!({ "run_config": run_config, "data": value });
        }
    }
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Writes a CSV whose first line is `# run_config: <json>`.
pub fn write_csv(dir: &Path, name: &str, run_config: &Value, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = format!("# run_config: {}\n{}\n", serde_json::to_string(run_config)?, header.join(","));
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            first = false;
            write!(text, "{v:?}")?;
        }
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
