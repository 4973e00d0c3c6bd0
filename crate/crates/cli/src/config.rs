//! `key = value` run configuration.
//!
//! Each key names a long flag without its dashes (`h-min = 0.05`). Blank
//! lines and lines starting with `#` are ignored. A key with an empty value
//! stands for a bare switch. Values from the file are placed before the
//! command-line arguments, so flags given explicitly take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 6] = ["reconstruct", "denoise", "sweep", "synth", "metrics", "eigreport"];

pub fn parse(text: &str, origin: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected `key = value`, got `{line}`", origin.display(), lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("{}:{}: invalid key `{key}`", origin.display(), lineno + 1)));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(OsString::from(rest));
        }
    }
    None
}

/// Returns `args` with the entries of the `--config` file (if any) spliced in
/// right after the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let entries = parse(&text, path)?;

    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(args.len(), |i| i + 1);
    let mut injected = Vec::new();
    for (key, value) in entries {
        injected.push(OsString::from(format!("--{key}")));
        if !value.is_empty() {
            injected.push(OsString::from(value));
        }
    }
    let mut out = args;
    out.splice(at..at, injected);
    Ok(out)
}
