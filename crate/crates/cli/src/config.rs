//! `--config file.json` support: keys of a JSON object become `--key value`
//! arguments unless the same flag is already on the command line.

use std::fs;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Expands `--config` in `args` (program name first, subcommand second).
pub fn merge_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some((pos, path, width)) = find_config(&args) else {
        return Ok(args);
    };
    args.drain(pos..pos + width);

    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let json: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let Value::Object(map) = json else {
        bail!("config {path}: expected a JSON object");
    };

    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let given = args
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value {
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) if flag == "--stream" || flag == "--reports" => {
                for item in items {
                    args.push(flag.clone());
                    args.push(scalar(&key, &item)?);
                }
            }
            Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(|v| scalar(&key, v))
                    .collect::<Result<Vec<_>>>()?
                    .join(",");
                args.push(flag);
                args.push(joined);
            }
            other => {
                args.push(flag);
                args.push(scalar(&key, &other)?);
            }
        }
    }
    Ok(args)
}

fn find_config(args: &[String]) -> Option<(usize, String, usize)> {
    args.iter().enumerate().skip(1).find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(|p| (i, p.clone(), 2))
        } else {
            a.strip_prefix("--config=").map(|p| (i, p.to_string(), 1))
        }
    })
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => bail!("config key {key}: unsupported value {v}"),
    }
}
