//! Structured text configuration for economies and strategy profiles.
//!
//! Economies are the unit of reproducibility, so the on-disk format is
//! explicit and versioned. Player indices in files are 1-based to match the
//! tables a human reads; the library uses 0-based indices internally.
//!
//! Economy schema (TOML, `version = 1`):
//!
//! ```toml
//! version = 1
//! k = 1.0
//!
//! # optional
//! [tolerances]
//! fixpoint = 1e-10
//! indifference = 1e-7
//!
//! [[players]]
//! w = 5.0
//! p = 1.0
//! pref = { family = "sqrt_additive", b = 4.0 }
//!
//! [[players]]
//! w = 5.0
//! p = 1.0
//! pref = { family = "cobb_douglas", a = 0.5 }
//! ```
//!
//! Supported families: `cobb_douglas { a }`, `sqrt_additive { b }`,
//! `root_sum`. Black-box utilities are a programmatic construct and have no
//! file form.
//!
//! Profile schema (`version = 1`): vectors `x`, `y` and a `links` list of
//! `[sponsor, target]` pairs, 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{Economy, LinkProfile, Player, Preference, StrategyProfile, Tolerances};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("invalid economy: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrefSpec {
    CobbDouglas { a: f64 },
    SqrtAdditive { b: f64 },
    RootSum,
}

impl From<&PrefSpec> for Preference {
    fn from(spec: &PrefSpec) -> Self {
        match spec {
            PrefSpec::CobbDouglas { a } => Preference::CobbDouglas { a: *a },
            PrefSpec::SqrtAdditive { b } => Preference::SqrtAdditive { b: *b },
            PrefSpec::RootSum => Preference::RootSum,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub w: f64,
    pub p: f64,
    pub pref: PrefSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    pub fixpoint: Option<f64>,
    pub indifference: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyFile {
    pub version: u32,
    pub k: f64,
    pub tolerances: Option<TolerancesSpec>,
    pub players: Vec<PlayerSpec>,
}

impl EconomyFile {
    pub fn into_economy(&self) -> Result<Economy, ConfigError> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        let players = self
            .players
            .iter()
            .map(|ps| Player::new(ps.w, ps.p, Preference::from(&ps.pref)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut tol = Tolerances::default();
        if let Some(t) = &self.tolerances {
            if let Some(f) = t.fixpoint {
                tol.fixpoint = f;
            }
            if let Some(i) = t.indifference {
                tol.indifference = i;
            }
        }
        Economy::with_tolerances(players, self.k, tol)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

pub fn load_economy(path: &Path) -> Result<Economy, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_economy(&text)
}

pub fn parse_economy(text: &str) -> Result<Economy, ConfigError> {
    let file: EconomyFile = toml::from_str(text)?;
    file.into_economy()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub version: u32,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `[sponsor, target]` pairs, 1-based.
    pub links: Vec<[usize; 2]>,
}

impl ProfileFile {
    pub fn into_profile(&self, n: usize) -> Result<StrategyProfile, ConfigError> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        if self.x.len() != n || self.y.len() != n {
            return Err(ConfigError::Invalid(format!(
                "profile has {} provisions and {} consumptions for {n} players",
                self.x.len(),
                self.y.len()
            )));
        }
        let mut links = LinkProfile::empty(n);
        for pair in &self.links {
            let (i, j) = (pair[0], pair[1]);
            if i == 0 || j == 0 || i > n || j > n {
                return Err(ConfigError::Invalid(format!(
                    "link [{i}, {j}] out of range (players are 1..={n})"
                )));
            }
            links
                .set(i - 1, j - 1, true)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(StrategyProfile { x: self.x.clone(), y: self.y.clone(), links })
    }

    pub fn from_profile(profile: &StrategyProfile) -> Self {
        Self {
            version: SCHEMA_VERSION,
            x: profile.x.clone(),
            y: profile.y.clone(),
            links: profile.links.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }
}

pub fn load_profile(path: &Path, n: usize) -> Result<StrategyProfile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ProfileFile = toml::from_str(&text)?;
    file.into_profile(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
version = 1
k = 1.0

[[players]]
w = 5.0
p = 1.0
pref = { family = "sqrt_additive", b = 4.0 }

[[players]]
w = 5.0
p = 1.0
pref = { family = "cobb_douglas", a = 0.5 }

[[players]]
w = 5.0
p = 1.5
pref = { family = "root_sum" }
"#;

    #[test]
    fn parses_all_families() {
        let econ = parse_economy(SAMPLE).unwrap();
        assert_eq!(econ.n(), 3);
        assert_eq!(econ.k(), 1.0);
        assert!(!econ.is_homogeneous());
    }

    #[test]
    fn rejects_bad_version() {
        let text = SAMPLE.replace("version = 1", "version = 9");
        assert!(matches!(parse_economy(&text), Err(ConfigError::Version(9))));
    }

    #[test]
    fn rejects_invalid_player() {
        let text = SAMPLE.replace("w = 5.0", "w = -5.0");
        assert!(matches!(parse_economy(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn profile_roundtrip() {
        let file = ProfileFile {
            version: 1,
            x: vec![4.0, 0.0, 0.0],
            y: vec![1.0, 4.0, 4.0],
            links: vec![[2, 1], [3, 1]],
        };
        let profile = file.into_profile(3).unwrap();
        assert!(profile.links.get(1, 0) && profile.links.get(2, 0));
        let back = ProfileFile::from_profile(&profile);
        assert_eq!(back.links, vec![[2, 1], [3, 1]]);
    }
}
