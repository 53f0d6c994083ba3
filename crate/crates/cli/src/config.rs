//! `key = value` configuration files.
//!
//! Each key names a long flag of the subcommand. The entries are spliced in
//! right after the subcommand name so that flags given on the command line,
//! which come later, override them.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{key}`", i + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Returns the `--config` path if one is present in `args`.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Splices config-file flags into `args`.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut injected = Vec::new();
    for (key, value) in parse(&text)? {
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    // subcommand is the first argument that is not an option or an option value
    let mut pos = 1;
    while pos < args.len() {
        let s = args[pos].to_string_lossy();
        if s == "--config" {
            pos += 2;
        } else if s.starts_with('-') {
            pos += 1;
        } else {
            break;
        }
    }
    let mut merged = args;
    let at = (pos + 1).min(merged.len());
    merged.splice(at..at, injected);
    Ok(merged)
}
