//! `key = value` settings file. Blank lines and `#` comments are ignored.
//!
//! ```text
//! alpha = 0.1
//! threshold.post = 1.0          # per-key value-match threshold
//! key_attributes.person = bdate
//! layout = kv_dual
//! aliases = aliases.tsv         # relative to this file
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use provlink_core::analyzers::{AliasDictionary, Analyzer, StreetTypeDictionary};
use provlink_core::{Layout, MatchConfig};

use crate::error::{Error, Result};

/// Everything an engine needs besides its data directory.
#[derive(Debug, Clone)]
pub struct Settings {
    pub cfg: MatchConfig,
    pub analyzer: Analyzer,
    pub layout: Layout,
}

impl Default for Settings {
    fn default() -> Self {
        Self { cfg: MatchConfig::default(), analyzer: Analyzer::default(), layout: Layout::KvDual }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&read(path)?, &base)
    }

    /// Parses settings text; dictionary paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut s = Settings::default();
        let mut aliases: Option<PathBuf> = None;
        let mut streets: Option<PathBuf> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let bad = |what: &str| Error::Config(format!("line {}: {key}: {what}", n + 1));
            let real = || value.parse::<f64>().map_err(|_| bad("expected a number"));
            let int = || value.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
            let cfg = &mut s.cfg;
            match key {
                "alpha" => cfg.alpha = real()?,
                "beta" => cfg.beta = real()?,
                "ngram_n" => cfg.ngram_n = int()? as usize,
                "value_match_threshold" => cfg.value_match_threshold = real()?,
                "phonetic_weight" => cfg.phonetic_weight = real()?,
                "provenance_damping" => cfg.provenance_damping = real()?,
                "initial_weight" => cfg.initial_weight = real()?,
                "tau_store" => cfg.tau_store = real()?,
                "tau_match" => cfg.tau_match = real()?,
                "rho_max" => cfg.rho_max = u32::try_from(int()?).map_err(|_| bad("too large"))?,
                "candidates_k" => cfg.candidates_k = int()? as usize,
                "layout" => s.layout = value.parse().map_err(|_| bad("unknown layout"))?,
                "aliases" => aliases = Some(base.join(value)),
                "street_types" => streets = Some(base.join(value)),
                _ => {
                    if let Some(k) = key.strip_prefix("threshold.") {
                        cfg.key_thresholds.insert(k.to_string(), real()?);
                    } else if let Some(t) = key.strip_prefix("key_attributes.") {
                        let keys = value.split(',').map(str::trim).filter(|k| !k.is_empty()).map(String::from);
                        cfg.key_attributes.insert(t.to_string(), keys.collect());
                    } else {
                        return Err(bad("unknown setting"));
                    }
                }
            }
        }
        s.cfg.validate()?;
        let alias_dict = match aliases {
            Some(p) => AliasDictionary::parse(&read(&p)?),
            None => AliasDictionary::new(),
        };
        let street_dict = match streets {
            Some(p) => StreetTypeDictionary::parse(&read(&p)?),
            None => StreetTypeDictionary::default(),
        };
        s.analyzer = Analyzer::new(alias_dict, street_dict);
        Ok(s)
    }
}
