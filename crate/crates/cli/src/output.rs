use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cass_core::config::KeyValueConfig;
use cass_core::DMatrix;

use crate::error::{CliError, CliResult};

/// `# key = value` lines for the effective configuration.
pub fn config_header(config: &KeyValueConfig) -> String {
    let mut out = String::new();
    for (k, v) in config.iter() {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    out
}

pub fn config_json(config: &KeyValueConfig) -> serde_json::Map<String, serde_json::Value> {
    config
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
        .collect()
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

/// One sample (column of `x`) per row.
pub fn matrix_csv(config: &KeyValueConfig, x: &DMatrix<f64>) -> String {
    let mut out = config_header(config);
    for col in x.column_iter() {
        let row: Vec<String> = col.iter().map(f64::to_string).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

pub fn labels_csv(config: &KeyValueConfig, labels: &[usize]) -> String {
    let mut out = config_header(config);
    out.push_str("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        writeln!(out, "{i},{l}").unwrap();
    }
    out
}

pub fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}
