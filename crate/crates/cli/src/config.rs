//! JSON run configs. A config is an object whose keys are the long flag names
//! of a subcommand (underscores or hyphens), plus `command` when the
//! subcommand is not given on the command line. It is expanded into
//! arguments and parsed by the same parser as the command line, so unknown
//! keys and bad values are reported the same way.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

pub const COMMANDS: [&str; 8] = [
    "norm", "ladder", "embed", "wavelet", "sim2d", "dmj", "sim3d", "report",
];

fn config_path(args: &[String]) -> Option<(usize, usize, String)> {
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            return args.get(i + 1).map(|p| (i, 2, p.clone()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some((i, 1, p.to_string()));
        }
    }
    None
}

/// Flags for one config entry; `None` for entries that contribute nothing.
fn flag(key: &str, value: &Value) -> Result<Option<Vec<String>>> {
    let name = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            _ => bail!("config key `{key}`: expected a string, number or list of them"),
        }
    };
    Ok(match value {
        Value::Null | Value::Bool(false) => None,
        Value::Bool(true) => Some(vec![name]),
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            Some(vec![name, parts.join(",")])
        }
        Value::Object(_) => bail!("config key `{key}`: nested objects are not allowed"),
        v => Some(vec![name, scalar(v)?]),
    })
}

/// Replaces `--config PATH` by the flags it holds, placed right after the
/// subcommand. The subcommand on the command line wins over the config's
/// `command`; flags on the command line come later and so override the config.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let Some((at, width, path)) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {path}"))?;
    let json: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let Value::Object(map) = json else {
        bail!("config {path}: expected a JSON object");
    };
    let mut rest: Vec<String> = args[..at]
        .iter()
        .chain(&args[at + width..])
        .cloned()
        .collect();
    let sub = rest.iter().position(|a| COMMANDS.contains(&a.as_str()));
    let from_file = match map.get("command") {
        Some(Value::String(c)) => Some(c.clone()),
        Some(_) => bail!("config key `command`: expected a string"),
        None => None,
    };
    let sub = match (sub, from_file) {
        (Some(i), _) => i,
        (None, Some(c)) => {
            if !COMMANDS.contains(&c.as_str()) {
                bail!("config key `command`: unknown command `{c}`");
            }
            rest.insert(1, c);
            1
        }
        (None, None) => return Err(anyhow!("config {path} lacks `command` and none was given")),
    };
    let mut flags = Vec::new();
    for (k, v) in &map {
        if k != "command" {
            flags.extend(flag(k, v)?.unwrap_or_default());
        }
    }
    let tail = rest.split_off(sub + 1);
    rest.extend(flags);
    rest.extend(tail);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn no_config_is_identity() {
        let a = s(&["regladder", "embed", "--p", "2"]);
        assert_eq!(expand(a.clone()).unwrap(), a);
    }

    #[test]
    fn config_expands_after_the_subcommand() {
        let dir = std::env::temp_dir().join(format!("regladder-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(
            &p,
            r#"{"command": "dmj", "eps_list": [0.1, 0.05], "n": 64, "flag": true, "off": false}"#,
        )
        .unwrap();
        let out = expand(s(&[
            "regladder",
            "--seed",
            "3",
            "--config",
            p.to_str().unwrap(),
            "--n",
            "32",
        ]))
        .unwrap();
        assert_eq!(
            out,
            s(&[
                "regladder",
                "dmj",
                "--eps-list",
                "0.1,0.05",
                "--flag",
                "--n",
                "64",
                "--seed",
                "3",
                "--n",
                "32"
            ])
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
