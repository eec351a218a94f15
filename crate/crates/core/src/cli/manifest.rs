use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::{FactorKind, FactorMetric};
use crate::product::{MetricParams, ProductManifold};

use super::checks;

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub kind: FactorKind,
    #[serde(default = "one")]
    pub dim: usize,
    /// Number of identical copies.
    #[serde(default = "one")]
    pub count: usize,
}

/// A batch of checks over a product manifold and a `(t, k)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub factors: Vec<FactorSpec>,
    pub t_grid: Vec<f64>,
    pub k_grid: Vec<u32>,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub checks: Vec<String>,
}

impl RunManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        let m: RunManifest =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string() + &span_hint(&e)))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reports the first offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("`{field}`: {why}")));
        if self.factors.is_empty() {
            return bad("factors", "at least one factor is required");
        }
        for (i, f) in self.factors.iter().enumerate() {
            if f.dim == 0 {
                return bad(&format!("factors[{i}].dim"), "must be positive");
            }
            if f.count == 0 {
                return bad(&format!("factors[{i}].count"), "must be positive");
            }
            if f.kind == FactorKind::PoincareDisk && f.dim != 1 {
                return bad(&format!("factors[{i}].dim"), "the Poincaré disk has dimension 1");
            }
        }
        if self.t_grid.is_empty() {
            return bad("t_grid", "must be nonempty");
        }
        if let Some(i) = self.t_grid.iter().position(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad(&format!("t_grid[{i}]"), "must be a finite nonnegative number");
        }
        if self.k_grid.is_empty() {
            return bad("k_grid", "must be nonempty");
        }
        if let Some(i) = self.k_grid.iter().position(|&k| k < 2) {
            return bad(&format!("k_grid[{i}]"), "must be at least 2");
        }
        if self.samples < 1 {
            return bad("samples", "must be at least 1");
        }
        for (name, tol) in &self.tolerances {
            if !checks::is_registered(name) {
                return bad(&format!("tolerances.{name}"), "no check with this name");
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return bad(&format!("tolerances.{name}"), "must be a positive number");
            }
        }
        if let Some((i, name)) = self.checks.iter().enumerate().find(|(_, c)| !checks::is_registered(c)) {
            return bad(&format!("checks[{i}]"), &format!("unknown check `{name}`"));
        }
        Ok(())
    }

    pub fn manifold(&self) -> Result<ProductManifold> {
        let mut factors = Vec::new();
        for f in &self.factors {
            let fm = FactorMetric::new(f.kind, f.dim)?;
            factors.extend(std::iter::repeat_n(fm, f.count));
        }
        ProductManifold::new(factors)
    }

    /// The `(t, k)` grid, `t` varying fastest.
    pub fn grid(&self) -> Result<Vec<MetricParams>> {
        let mut out = Vec::new();
        for &k in &self.k_grid {
            for &t in &self.t_grid {
                out.push(MetricParams::new(t, k)?);
            }
        }
        Ok(out)
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .unwrap_or_else(|| checks::default_tolerance(check))
    }
}

fn span_hint(e: &toml::de::Error) -> String {
    e.span().map(|s| format!(" (at byte {})", s.start)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
t_grid = [0.0, 1.0]
k_grid = [2]
samples = 10
seed = 7
checks = ["berwald"]

[[factors]]
kind = "poincare_disk"
count = 2
"#;

    #[test]
    fn parses_and_builds() {
        let m = RunManifest::from_toml(BASIC).unwrap();
        assert_eq!(m.manifold().unwrap().factor_count(), 2);
        assert_eq!(m.grid().unwrap().len(), 2);
        assert_eq!(m.tolerance("berwald"), checks::default_tolerance("berwald"));
    }

    #[test]
    fn first_offending_field() {
        let e = RunManifest::from_toml(&BASIC.replace("[\"berwald\"]", "[\"berwald\", \"nope\"]")).unwrap_err();
        assert!(e.to_string().contains("checks[1]"), "{e}");
        let e = RunManifest::from_toml(&BASIC.replace("k_grid = [2]", "k_grid = [1]")).unwrap_err();
        assert!(e.to_string().contains("k_grid[0]"), "{e}");
        let e = RunManifest::from_toml(&BASIC.replace("samples = 10", "samples = 0")).unwrap_err();
        assert!(e.to_string().contains("samples"), "{e}");
        let e = RunManifest::from_toml(&BASIC.replace("seed = 7", "seed = 7\ncolour = 1")).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = RunManifest::from_toml(&(BASIC.to_string() + "[tolerances]\nberwald = -1.0\n")).unwrap_err();
        assert!(e.to_string().contains("tolerances.berwald"), "{e}");
    }
}
