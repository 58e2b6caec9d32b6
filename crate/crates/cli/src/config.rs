//! Flat `key = value` settings file shared by every subcommand.
//!
//! Precedence: built-in defaults, then the config file (`--config` or the
//! `MORPHKIT_CONFIG` environment variable), then command-line flags.
//! Unknown keys and out-of-range values are rejected.

use std::fmt::Display;
use std::str::FromStr;

use morphkit_core::affixes::AffixParams;
use morphkit_core::cascade::{SearchParams, SearchStrategy};
use morphkit_core::classify::TreeParams;
use morphkit_core::clustering::ClusterParams;
use morphkit_core::{Error, Result};

#[derive(Debug, Clone)]
pub struct Settings {
    pub affix: AffixParams,
    pub cluster: ClusterParams,
    pub tree: TreeParams,
    pub search: SearchParams,
    pub seed: u64,
    pub heldout_fraction: f64,
    pub test_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            affix: AffixParams::default(),
            cluster: ClusterParams::default(),
            tree: TreeParams::default(),
            search: SearchParams::default(),
            seed: 0,
            heldout_fraction: 0.1,
            test_fraction: 0.1,
        }
    }
}

fn parse_value<T>(key: &str, value: &str, lineno: usize) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| Error::parse(lineno, format!("bad value for {key}: {e}")))
}

impl Settings {
    /// Applies one key/value pair. `lineno` is only used in diagnostics;
    /// flag overrides pass 0.
    pub fn apply(&mut self, key: &str, value: &str, lineno: usize) -> Result<()> {
        match key {
            "max_affix_len" => self.affix.max_affix_len = parse_value(key, value, lineno)?,
            "min_count" => self.affix.min_count = parse_value(key, value, lineno)?,
            "branch_min" => self.affix.branch_min = parse_value(key, value, lineno)?,
            "min_stem_len" => self.affix.min_stem_len = parse_value(key, value, lineno)?,
            "max_prefixes" => self.affix.max_prefixes = parse_value(key, value, lineno)?,
            "window" => self.cluster.window = parse_value(key, value, lineno)?,
            "ortho_threshold" => self.cluster.ortho_threshold = parse_value(key, value, lineno)?,
            "sem_threshold" => self.cluster.sem_threshold = parse_value(key, value, lineno)?,
            "max_merge_rounds" => self.cluster.max_merge_rounds = parse_value(key, value, lineno)?,
            "min_leaf" => self.tree.min_leaf = parse_value(key, value, lineno)?,
            "max_depth" => self.tree.max_depth = parse_value(key, value, lineno)?,
            "search" => {
                self.search.strategy = SearchStrategy::parse(value)
                    .map_err(|e| Error::parse(lineno, e.to_string()))?;
            }
            "beam" => self.search.beam = parse_value(key, value, lineno)?,
            "seed" => self.seed = parse_value(key, value, lineno)?,
            "heldout_fraction" => self.heldout_fraction = parse_value(key, value, lineno)?,
            "test_fraction" => self.test_fraction = parse_value(key, value, lineno)?,
            _ => return Err(Error::parse(lineno, format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.affix.validate()?;
        self.cluster.validate()?;
        self.tree.validate()?;
        self.search.validate()?;
        for (name, f) in
            [("heldout_fraction", self.heldout_fraction), ("test_fraction", self.test_fraction)]
        {
            if !(f > 0.0 && f < 1.0) || !f.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be in (0,1), got {f}")));
            }
        }
        if self.heldout_fraction + self.test_fraction >= 1.0 {
            return Err(Error::InvalidParam(
                "heldout_fraction and test_fraction leave no training data".into(),
            ));
        }
        Ok(())
    }

    pub fn train_fraction(&self) -> f64 {
        1.0 - self.heldout_fraction - self.test_fraction
    }
}

/// Parses a settings file. Blank lines and `#` comments are skipped; every
/// other line must read `key = value`.
pub fn parse_config(text: &str, settings: &mut Settings) -> Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, "expected key = value"))?;
        settings.apply(key.trim(), value.trim(), lineno)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_defaults() {
        let mut s = Settings::default();
        parse_config("# tuning\nmin_count = 3\n\northo_threshold=0.7\nsearch = exhaustive\n", &mut s)
            .unwrap();
        assert_eq!(s.affix.min_count, 3);
        assert_eq!(s.cluster.ortho_threshold, 0.7);
        assert_eq!(s.search.strategy, SearchStrategy::Exhaustive);
        assert_eq!(s.affix.max_affix_len, 5);
        s.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_line() {
        let mut s = Settings::default();
        let err = parse_config("min_count = 3\nwidnow = 4\n", &mut s).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("widnow"), "{msg}");
        assert!(msg.contains('2'), "{msg}");
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut s = Settings::default();
        let err = parse_config("window = soon\n", &mut s).unwrap_err();
        assert!(err.to_string().contains("window"), "{err}");
        let err = parse_config("window\n", &mut Settings::default()).unwrap_err();
        assert!(err.to_string().contains("key = value"), "{err}");
    }

    #[test]
    fn fraction_sanity_is_enforced() {
        let mut s = Settings::default();
        s.heldout_fraction = 0.6;
        s.test_fraction = 0.5;
        assert!(s.validate().is_err());
        s.test_fraction = 0.0;
        assert!(s.validate().is_err());
    }
}
