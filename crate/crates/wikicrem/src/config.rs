//! `key = value` run configuration files. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::records::read_text;

pub const KEYS: [&str; 17] = [
    "input",
    "output",
    "detector",
    "scorer",
    "seed",
    "workers",
    "deterministic",
    "alpha",
    "beta",
    "holdout-n",
    "dataset-kind",
    "gap-candidates",
    "annotations",
    "genders",
    "dedupe-against",
    "floor",
    "log-level",
];

/// Parsed config file. Keys are kebab-case and match the long flag names.
/// `input` may be repeated; a later value of any other key replaces an
/// earlier one.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: Option<std::path::PathBuf>,
    values: BTreeMap<String, Vec<(usize, String)>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, Some(path))
    }

    pub fn parse(src: &str, path: Option<&Path>) -> Result<Self> {
        let p = path.unwrap_or(Path::new("<config>"));
        let mut values: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(p, i + 1, "expected key = value"))?;
            let k = k.trim().replace('_', "-");
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::parse(p, i + 1, format!("unknown key {k:?}")));
            }
            let v = v.trim().trim_matches('"').to_string();
            values.entry(k).or_default().push((i + 1, v));
        }
        Ok(Self { path: path.map(Path::to_path_buf), values })
    }

    pub fn all(&self, key: &str) -> Vec<String> {
        self.values.get(key).map(|v| v.iter().map(|(_, s)| s.clone()).collect()).unwrap_or_default()
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.values.get(key).and_then(|v| v.last()).map(|(_, s)| s.clone())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, s)) = self.values.get(key).and_then(|v| v.last()) else { return Ok(None) };
        let p = self.path.as_deref().unwrap_or(Path::new("<config>"));
        s.parse().map(Some).map_err(|e| Error::parse(p, *line, format!("{key}: {e}")))
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>> {
        let Some((line, s)) = self.values.get(key).and_then(|v| v.last()) else { return Ok(None) };
        match s.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(Some(true)),
            "false" | "no" | "0" | "off" => Ok(Some(false)),
            _ => Err(Error::parse(self.path.as_deref().unwrap_or(Path::new("<config>")), *line, format!("{key}: expected true or false"))),
        }
    }
}
