//! `--config` files: INI-style `key = value` lines whose keys are long flag
//! names. Keys before any `[section]` apply to every subcommand that has
//! that flag; keys under `[augment]`, `[decompose]`, ... only to that one.
//! Flags given on the command line win over the file.

use std::ffi::OsString;
use std::fs;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub section: Option<String>,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> CliResult<Vec<Entry>> {
    let mut section = None;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::usage(format!("config line {}: empty key", n + 1)));
        }
        out.push(Entry { section: section.clone(), key, value: value.trim().to_string() });
    }
    Ok(out)
}

/// Turns entries for `subcommand` into argument tokens, skipping keys in
/// `explicit` and section-less keys the subcommand does not `accept`.
/// `true` and `false` values denote switches.
pub fn to_args(
    entries: &[Entry],
    subcommand: &str,
    explicit: &[String],
    accepts: impl Fn(&str) -> bool,
) -> Vec<OsString> {
    let mut args = Vec::new();
    for e in entries {
        let applies = match e.section.as_deref() {
            Some(s) => s == subcommand,
            None => accepts(&e.key),
        };
        if !applies || explicit.contains(&e.key) {
            continue;
        }
        match e.value.to_ascii_lowercase().as_str() {
            "true" => args.push(format!("--{}", e.key).into()),
            "false" => {}
            _ => {
                args.push(format!("--{}", e.key).into());
                args.push(e.value.clone().into());
            }
        }
    }
    args
}

/// Removes `--config PATH` from `argv` and splices the file's flags in right
/// after the subcommand name.
pub fn expand(argv: Vec<OsString>, accepts: impl Fn(&str, &str) -> bool) -> CliResult<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or_else(|| CliError::usage("--config needs a path"))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    let Some(sub_pos) = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1) else {
        return Ok(rest);
    };
    let sub = rest[sub_pos].to_string_lossy().into_owned();
    let explicit: Vec<String> = rest[sub_pos + 1..]
        .iter()
        .filter_map(|a| {
            let a = a.to_string_lossy();
            let name = a.strip_prefix("--")?;
            Some(name.split('=').next().unwrap_or(name).to_string())
        })
        .collect();
    let extra = to_args(&entries, &sub, &explicit, |key| accepts(&sub, key));
    rest.splice(sub_pos + 1..sub_pos + 1, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_sections_and_switches() {
        let text = "# comment\nseed = 7\n[augment]\nangle=30\nflip_h = true\nflip-v = false\n[decompose]\npng = a.png\n";
        let entries = parse(text).unwrap();
        assert_eq!(entries.len(), 5);
        let all = |_: &str| true;
        assert_eq!(to_args(&entries, "augment", &[], all), os(&["--seed", "7", "--angle", "30", "--flip-h"]));
        assert_eq!(to_args(&entries, "decompose", &[], all), os(&["--seed", "7", "--png", "a.png"]));
        assert_eq!(to_args(&entries, "augment", &["angle".into()], all), os(&["--seed", "7", "--flip-h"]));
        assert_eq!(to_args(&entries, "decompose", &[], |k| k != "seed"), os(&["--png", "a.png"]));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse("just words").is_err());
        assert!(parse(" = 3").is_err());
    }

    #[test]
    fn expand_splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ini");
        fs::write(&path, "angle = 10\n").unwrap();
        let all = |_: &str, _: &str| true;
        let argv = os(&["polaraug", "augment", "--config", path.to_str().unwrap(), "--angle", "20"]);
        assert_eq!(expand(argv, all).unwrap(), os(&["polaraug", "augment", "--angle", "20"]));
        let argv = os(&["polaraug", "augment", "--config", path.to_str().unwrap(), "--seed=3"]);
        assert_eq!(expand(argv, all).unwrap(), os(&["polaraug", "augment", "--angle", "10", "--seed=3"]));
        let none = os(&["polaraug", "synth"]);
        assert_eq!(expand(none.clone(), all).unwrap(), none);
        assert!(expand(os(&["polaraug", "augment", "--config"]), all).is_err());
    }
}
