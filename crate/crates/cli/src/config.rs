//! Flat `key = value` configuration files.
//!
//! Keys are long option names (`max-steps` or `max_steps`). A key applies to
//! the chosen subcommand when that subcommand has such an option; other keys
//! are ignored so that one file can serve several commands. Options given on
//! the command line win over the file.

use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key = value",
                n + 1
            )));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

/// Path of `--config` in raw arguments, if any.
pub fn find_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
        if a == "--" {
            break;
        }
    }
    None
}

/// Appends `--key value` for every applicable config entry not already set
/// on the command line.
pub fn merge(
    mut cmd: Command,
    args: &[String],
    entries: &[(String, String)],
) -> Result<Vec<String>, CliError> {
    cmd.build();
    let matches = cmd
        .clone()
        .try_get_matches_from(args)
        .map_err(|e| CliError::Clap(Box::new(e)))?;
    let (mut leaf_cmd, mut leaf) = (&cmd, &matches);
    while let Some((name, sub)) = leaf.subcommand() {
        leaf_cmd = leaf_cmd
            .find_subcommand(name)
            .expect("matched subcommand exists");
        leaf = sub;
    }
    let mut out = args.to_vec();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some(arg) = leaf_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            continue;
        };
        if set_on_command_line(leaf, arg.get_id().as_str()) {
            continue;
        }
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" => out.push(format!("--{key}")),
                "false" => {}
                _ => {
                    return Err(CliError::Usage(format!(
                        "config key {key}: expected true or false"
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn set_on_command_line(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let e = parse("# comment\nseed = 7\n\nmax_steps=40\n").unwrap();
        assert_eq!(
            e,
            [
                ("seed".into(), "7".into()),
                ("max-steps".into(), "40".into())
            ]
        );
        assert!(parse("nonsense").is_err());
        assert!(parse(" = 3").is_err());
    }

    #[test]
    fn finds_the_path() {
        let a: Vec<String> = ["btarc", "--config", "x.cfg", "verify"]
            .map(String::from)
            .to_vec();
        assert_eq!(find_path(&a).as_deref(), Some("x.cfg"));
        let a: Vec<String> = ["btarc", "--config=y", "verify"].map(String::from).to_vec();
        assert_eq!(find_path(&a).as_deref(), Some("y"));
    }
}
