//! Experiment configuration: line-oriented `key=value` files with
//! `[section]` headers, merged under CLI flags, plus the canonical hash
//! embedded in every output file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flat view of a sectioned key=value file: keys are `section.key`.
#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: &Path) -> Result<ConfigMap> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigMap> {
        let mut section = String::from("experiment");
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    values.insert(format!("{section}.{}", k.trim()), v.trim().to_string());
                }
                None => bail!("config line {}: expected key=value, got `{raw}`", lineno + 1),
            }
        }
        Ok(ConfigMap { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Canonical rendering: sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Short hash of the canonical form, embedded in outputs so a run's
    /// provenance is checkable.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    pub fn stamp(&self) -> String {
        format!("config={} version={}", self.hash(), TOOL_VERSION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let cfg = ConfigMap::parse("[experiment]\nseed=5\nproblems = 1,2\n\n[budget]\nfit_ms=1000\n")
            .unwrap();
        assert_eq!(cfg.get("experiment.seed"), Some("5"));
        assert_eq!(cfg.get("experiment.problems"), Some("1,2"));
        assert_eq!(cfg.get("budget.fit_ms"), Some("1000"));
    }

    #[test]
    fn hash_is_stable_and_order_insensitive() {
        let a = ConfigMap::parse("[x]\nb=2\na=1\n").unwrap();
        let b = ConfigMap::parse("[x]\na=1\nb=2\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn malformed_lines_error() {
        assert!(ConfigMap::parse("nonsense").is_err());
    }
}
