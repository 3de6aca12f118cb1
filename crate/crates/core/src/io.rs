//! Report files: JSON with fixed float formatting and CSV tables, each
//! tagged with the hash of the resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::waves::Profile;

/// 17 significant digits; non-finite values become `null`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and every float in `{:.16e}` form.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Hex SHA-256 of the formatted configuration.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(to_json_string(config).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes report files into one directory.
#[derive(Debug, Clone)]
pub struct OutputDir {
    pub dir: PathBuf,
    pub config: Value,
    pub hash: String,
}

impl OutputDir {
    pub fn create(dir: &Path, config: Value) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let hash = config_hash(&config);
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            hash,
        })
    }

    /// `{config_hash, config, report}` as `<name>.json`.
    pub fn write_report<T: Serialize>(&self, name: &str, report: &T) -> Result<PathBuf> {
        let mut map = serde_json::Map::new();
        map.insert("config_hash".into(), Value::from(self.hash.clone()));
        map.insert("config".into(), self.config.clone());
        map.insert("report".into(), serde_json::to_value(report)?);
        let path = self.dir.join(format!("{name}.json"));
        fs::write(&path, to_json_string(&Value::Object(map)))?;
        Ok(path)
    }

    /// `x,v1..v8` rows, one per node.
    pub fn write_profile(&self, name: &str, profile: &Profile) -> Result<PathBuf> {
        let header: Vec<String> = std::iter::once("x".to_string())
            .chain((1..=profile.ncomp).map(|c| format!("v{c}")))
            .collect();
        let rows = (0..profile.grid.nodes()).map(|i| {
            std::iter::once(profile.grid.x(i))
                .chain(profile.node(i).iter().copied())
                .collect::<Vec<_>>()
        });
        self.write_table(name, &header, rows)
    }

    pub fn write_table<I: IntoIterator<Item = Vec<f64>>>(
        &self,
        name: &str,
        header: &[String],
        rows: I,
    ) -> Result<PathBuf> {
        let mut text = format!("# config_hash: {}\n{}\n", self.hash, header.join(","));
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(format_float).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = self.dir.join(format!("{name}.csv"));
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(f64::NAN), "null");
        let v: Value = serde_json::from_str(&format_float(1.0 / 3.0)).unwrap();
        assert_eq!(v.as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn output_is_valid_json_and_keys_sorted() {
        let v =
            serde_json::json!({ "b": [1, 2.5, null], "a": { "z": true, "y": "s\"q" }, "c": [] });
        let text = to_json_string(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn hash_is_stable() {
        let v = serde_json::json!({ "x": 1.5 });
        assert_eq!(config_hash(&v), config_hash(&v.clone()));
        assert_eq!(config_hash(&v).len(), 64);
        assert_ne!(
            config_hash(&v),
            config_hash(&serde_json::json!({ "x": 1.25 }))
        );
    }
}
