//! `--config` files: `key=value` lines merged under the command-line flags.

use std::fs;

/// Reads `key=value` lines (blank lines and `#` comments ignored) and turns
/// them into `--key=value` arguments. `true` and `false` toggle switches.
pub fn config_args(path: &str) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config `{path}`: {e}"))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", no + 1))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(format!("{path}:{}: invalid key `{k}`", no + 1));
        }
        match v.trim() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            v => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

/// Inserts `extra` right after the subcommand token at `at`, so that later
/// flags typed by the user override them.
pub fn splice(argv: &[String], at: usize, extra: Vec<String>) -> Vec<String> {
    let mut out = argv[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at + 1..]);
    out
}
