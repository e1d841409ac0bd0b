//! Flat `key = value` configuration files.
//!
//! Each key names a long flag (`snr-start` or `snr_start`). Entries are turned
//! into command-line tokens and appended after the user's own arguments, but
//! only for flags the user did not pass, so flags always win over the file.

use std::fs;

use clap::Command;

/// Parses the file body into `(key, value)` pairs.
pub fn parse(text: &str, path: &str) -> Result<Vec<(String, String)>, String> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| format!("{path}:{}: expected key = value, got {line:?}", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("{path}:{}: empty key", n + 1));
        }
        if key == "config-file" {
            return Err(format!("{path}:{}: config files cannot include other config files", n + 1));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefix))
}

/// Whether `--key` on `sub` (or a global flag) is a switch without a value.
fn is_switch(cmd: &Command, sub: Option<&str>, key: &str) -> bool {
    let scopes = std::iter::once(cmd).chain(sub.and_then(|s| cmd.find_subcommand(s)));
    for scope in scopes {
        if let Some(arg) = scope.get_arguments().find(|a| a.get_long() == Some(key)) {
            return !arg.get_action().takes_values();
        }
    }
    false
}

/// Expands `--config-file` into extra arguments.
pub fn expand(args: Vec<String>, cmd: &Command) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut user = Vec::with_capacity(args.len());
    let mut iter = args.into_iter();
    while let Some(a) = iter.next() {
        if a == "--config-file" {
            path = Some(iter.next().ok_or("--config-file needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config-file=") {
            path = Some(p.to_string());
        } else {
            user.push(a);
        }
    }
    let Some(path) = path else { return Ok(user) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
    let sub = user.iter().skip(1).find(|a| names.contains(&a.as_str())).cloned();
    for (key, value) in parse(&text, &path)? {
        if given(&user, &key) {
            continue;
        }
        if is_switch(cmd, sub.as_deref(), &key) {
            match value.as_str() {
                "true" | "yes" | "1" => user.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                other => return Err(format!("{path}: {key} expects true or false, got {other:?}")),
            }
        } else {
            user.push(format!("--{key}={value}"));
        }
    }
    Ok(user)
}
