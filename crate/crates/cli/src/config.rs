//! Flat `key=value` config files. Entries are turned into `--key=value`
//! flags placed right after the subcommand, so flags given on the command
//! line (which come later) take precedence.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value", number + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key", number + 1);
        }
        entries.push((key, value.trim().to_string()));
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
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

/// Expands `--config FILE` into explicit flags. Boolean keys accept
/// `true`/`false`.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let injected: Vec<OsString> = parse(&text)?
        .into_iter()
        .filter(|(_, v)| v != "false")
        .map(|(k, v)| match v.as_str() {
            "true" => format!("--{k}").into(),
            _ => format!("--{k}={v}").into(),
        })
        .collect();
    // The subcommand is the first argument after the program name that is
    // not a flag.
    let Some(at) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(args);
    };
    let at = at + 2;
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
