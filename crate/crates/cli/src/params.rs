use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Read a JSON object from `path`, or an empty object.
pub fn read_config(path: Option<&Path>) -> Result<Value, CliError> {
    let Some(path) = path else {
        return Ok(Value::Object(Map::new()));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Config(format!("{}: top level must be an object", path.display())));
    }
    Ok(value)
}

/// Overlay `top` onto `base` key by key, recursing into objects.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// Apply `a.b.c=<json>` overrides; bare words that are not JSON become strings.
pub fn apply_sets(base: &mut Value, sets: &[String]) -> Result<(), CliError> {
    for s in sets {
        let (path, raw) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {s:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        // the value replaces whatever sits at the path; intermediate objects are created
        let mut slot = &mut *base;
        for key in path.split('.') {
            if key.is_empty() {
                return Err(CliError::Config(format!("empty key in --set {s:?}")));
            }
            if !slot.is_object() {
                *slot = Value::Object(Map::new());
            }
            slot = slot.as_object_mut().unwrap().entry(key).or_insert(Value::Null);
        }
        *slot = value;
    }
    Ok(())
}

/// Config file overlaid with explicitly given flags, then checked against
/// the strict schema `T`.
pub fn resolve<T: DeserializeOwned, F: Serialize>(config: Option<&Path>, flags: &F) -> Result<(T, Value), CliError> {
    let mut value = read_config(config)?;
    let flags = serde_json::to_value(flags).map_err(|e| CliError::Runtime(e.into()))?;
    merge(&mut value, flags);
    let parsed = serde_json::from_value(value.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((parsed, value))
}

/// `--out-dir`, then `QBP_OUT_DIR`, then the current directory.
pub fn out_dir(flag: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    let dir = match (flag, std::env::var_os("QBP_OUT_DIR")) {
        (Some(d), _) => d.clone(),
        (None, Some(env)) => PathBuf::from(env),
        (None, None) => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(e.into()))?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_and_set() {
        let mut v = json!({"a": 1, "anneal": {"sweeps": 10, "num_reads": 5}});
        merge(&mut v, json!({"anneal": {"sweeps": 20}}));
        apply_sets(&mut v, &["anneal.num_reads=7".into(), "name=x".into(), "w2.fixed=0.5".into()]).unwrap();
        assert_eq!(v, json!({"a": 1, "anneal": {"sweeps": 20, "num_reads": 7}, "name": "x", "w2": {"fixed": 0.5}}));
        assert!(apply_sets(&mut v, &["novalue".into()]).is_err());
    }
}
