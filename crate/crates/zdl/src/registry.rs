//! The claim registry shipped as `claims.toml`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REGISTRY_TOML: &str = include_str!("../claims.toml");

pub const SUITES: &[&str] = &[
    "identities",
    "atkinson",
    "voronoi",
    "thm1",
    "lemma2",
    "large-values",
    "lemma1",
    "gap-sum",
    "pointwise",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub suite: String,
    #[serde(default)]
    pub criterion: Option<u32>,
    pub anchor: String,
    pub operation: String,
    pub statistic: String,
    pub band: [f64; 2],
    pub gated: bool,
    #[serde(default)]
    pub params: toml::Table,
}

impl Claim {
    pub fn in_band(&self, x: f64) -> bool {
        self.band[0] <= x && x <= self.band[1]
    }

    fn param(&self, key: &str) -> Result<&toml::Value> {
        self.params
            .get(key)
            .ok_or_else(|| Error::Usage(format!("claim {}: missing parameter `{key}`", self.id)))
    }

    fn bad(&self, key: &str, want: &str) -> Error {
        Error::Usage(format!(
            "claim {}: parameter `{key}` must be {want}",
            self.id
        ))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.param(key)? {
            toml::Value::Float(x) => Ok(*x),
            toml::Value::Integer(n) => Ok(*n as f64),
            _ => Err(self.bad(key, "a number")),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        match self.param(key)? {
            toml::Value::Integer(n) if *n >= 0 => Ok(*n as u64),
            _ => Err(self.bad(key, "a non-negative integer")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let arr = self
            .param(key)?
            .as_array()
            .ok_or_else(|| self.bad(key, "an array"))?;
        arr.iter()
            .map(|v| match v {
                toml::Value::Float(x) => Ok(*x),
                toml::Value::Integer(n) => Ok(*n as f64),
                _ => Err(self.bad(key, "an array of numbers")),
            })
            .collect()
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let arr = self
            .param(key)?
            .as_array()
            .ok_or_else(|| self.bad(key, "an array"))?;
        arr.iter()
            .map(|v| match v {
                toml::Value::Integer(n) if *n >= 0 => Ok(*n as u64),
                _ => Err(self.bad(key, "an array of non-negative integers")),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub claim: Vec<Claim>,
}

impl Registry {
    pub fn parse(text: &str) -> Result<Self> {
        let reg: Registry =
            toml::from_str(text).map_err(|e| Error::Usage(format!("claim registry: {e}")))?;
        for c in &reg.claim {
            if !SUITES.contains(&c.suite.as_str()) {
                return Err(Error::Usage(format!(
                    "claim {}: unknown suite {}",
                    c.id, c.suite
                )));
            }
            if !(c.band[0] <= c.band[1]) {
                return Err(Error::Usage(format!("claim {}: empty band", c.id)));
            }
        }
        Ok(reg)
    }

    pub fn builtin() -> Self {
        Self::parse(REGISTRY_TOML).expect("shipped claim registry is valid")
    }

    pub fn get(&self, id: &str) -> Option<&Claim> {
        self.claim.iter().find(|c| c.id == id)
    }

    /// Claims of one suite, or all of them for `"all"`.
    pub fn suite(&self, name: &str) -> Result<Vec<&Claim>> {
        if name == "all" {
            return Ok(self.claim.iter().collect());
        }
        if !SUITES.contains(&name) {
            return Err(Error::Usage(format!(
                "unknown suite `{name}` (expected one of: all, {})",
                SUITES.join(", ")
            )));
        }
        Ok(self.claim.iter().filter(|c| c.suite == name).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_and_ids_are_unique() {
        let reg = Registry::builtin();
        let mut ids: Vec<_> = reg.claim.iter().map(|c| c.id.as_str()).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n);
        for s in SUITES {
            assert!(!reg.suite(s).unwrap().is_empty(), "suite {s} is empty");
        }
        let crits: std::collections::BTreeSet<u32> =
            reg.claim.iter().filter_map(|c| c.criterion).collect();
        assert_eq!(crits, (1..=12).collect());
        assert!(reg.suite("nope").is_err());
    }

    #[test]
    fn infinite_band_edges() {
        let reg = Registry::builtin();
        let c = reg.get("thm1-fifth-moment").unwrap();
        assert_eq!(c.band[0], f64::NEG_INFINITY);
        assert!(!c.gated);
        assert!(c.in_band(2.0) && !c.in_band(2.3));
    }
}
