//! Simulation manifests.
//!
//! A manifest is a TOML file describing a simulation grid: lists of n, p,
//! rho, p0, and r2 values, the replicate count, the base seed, and the
//! methods to compare. Every combination of the five lists becomes one grid
//! cell; cells are enumerated with n outermost and r2 innermost, and that
//! order (together with the base seed) fixes every replicate's data.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::airholp::{AirHolpConfig, DEFAULT_C, DEFAULT_DELTA, DEFAULT_MAX_ITER, DEFAULT_R0};
use crate::error::{Error, Result};
use crate::simgen::SimSetting;

/// A screening method requested in a manifest or on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMethod {
    Sis,
    Holp,
    RidgeHolp,
    AirHolp,
}

impl SimMethod {
    /// Kebab-case name used in files and flags.
    pub fn name(&self) -> &'static str {
        match self {
            SimMethod::Sis => "sis",
            SimMethod::Holp => "holp",
            SimMethod::RidgeHolp => "ridge-holp",
            SimMethod::AirHolp => "air-holp",
        }
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sis" => Ok(SimMethod::Sis),
            "holp" => Ok(SimMethod::Holp),
            "ridge-holp" => Ok(SimMethod::RidgeHolp),
            "air-holp" => Ok(SimMethod::AirHolp),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected sis, holp, ridge-holp, or air-holp)"
            ))),
        }
    }
}

impl std::fmt::Display for SimMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Adaptive-method overrides carried by a manifest.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AirOverrides {
    pub r0: f64,
    pub c: f64,
    pub delta: f64,
    pub max_iter: usize,
}

impl Default for AirOverrides {
    fn default() -> Self {
        Self {
            r0: DEFAULT_R0,
            c: DEFAULT_C,
            delta: DEFAULT_DELTA,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl AirOverrides {
    /// Expands into a full config with retention size `m`.
    pub fn config(&self, m: usize) -> AirHolpConfig {
        AirHolpConfig {
            r0: self.r0,
            c: self.c,
            m,
            delta: self.delta,
            max_iter: self.max_iter,
        }
    }
}

/// Grid specification parsed from a TOML manifest.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Observation counts.
    pub n: Vec<usize>,
    /// Predictor counts.
    pub p: Vec<usize>,
    /// Pairwise correlations.
    pub rho: Vec<f64>,
    /// True support sizes.
    pub p0: Vec<usize>,
    /// Target population R^2 values.
    pub r2: Vec<f64>,
    /// Replicates per cell.
    pub replicates: usize,
    /// Base seed; per-replicate seeds derive from it.
    pub seed: u64,
    /// Methods to compare, e.g. ["sis", "ridge-holp", "air-holp"].
    pub methods: Vec<String>,
    /// Penalty used by the fixed-ridge method.
    #[serde(default = "default_ridge_penalty")]
    pub ridge_penalty: f64,
    /// Retention size; per-cell ceil(n / ln n) when absent.
    #[serde(default)]
    pub m: Option<usize>,
    /// Adaptive-method overrides.
    #[serde(default)]
    pub air: AirOverrides,
    /// Output directory; the --out-dir flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_ridge_penalty() -> f64 {
    10.0
}

/// One expanded grid cell; the index fixes its position in enumeration
/// order and thereby its replicate seeds.
#[derive(Clone, Copy, Debug)]
pub struct GridCell {
    pub index: usize,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub p0: usize,
    pub r2: f64,
}

impl RunManifest {
    /// Parses and validates a manifest file. TOML syntax and type errors
    /// keep the parser's line/column positions.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let manifest: RunManifest = toml::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks list presence, field ranges, and method names.
    pub fn validate(&self) -> Result<()> {
        for (field, empty) in [
            ("n", self.n.is_empty()),
            ("p", self.p.is_empty()),
            ("rho", self.rho.is_empty()),
            ("p0", self.p0.is_empty()),
            ("r2", self.r2.is_empty()),
            ("methods", self.methods.is_empty()),
        ] {
            if empty {
                return Err(Error::Data(format!("manifest field '{field}' must not be empty")));
            }
        }
        if self.replicates == 0 {
            return Err(Error::Data("manifest needs at least 1 replicate".into()));
        }
        if !(self.ridge_penalty.is_finite() && self.ridge_penalty >= 0.0) {
            return Err(Error::Data(format!(
                "ridge_penalty must be finite and non-negative, got {}",
                self.ridge_penalty
            )));
        }
        if self.m == Some(0) {
            return Err(Error::Data("retention size m must be at least 1".into()));
        }
        let methods = self.parsed_methods()?;
        for (i, a) in methods.iter().enumerate() {
            if methods[..i].contains(a) {
                return Err(Error::Data(format!("method '{a}' is listed twice")));
            }
        }
        for cell in self.cells() {
            let probe = SimSetting {
                n: cell.n,
                p: cell.p,
                rho: cell.rho,
                p0: cell.p0,
                r2: cell.r2,
                seed: 0,
            };
            probe.validate().map_err(|e| {
                Error::Data(format!(
                    "manifest cell (n={}, p={}, rho={}, p0={}, r2={}) is invalid: {e}",
                    cell.n, cell.p, cell.rho, cell.p0, cell.r2
                ))
            })?;
        }
        Ok(())
    }

    /// Methods in manifest order.
    pub fn parsed_methods(&self) -> Result<Vec<SimMethod>> {
        self.methods
            .iter()
            .map(|name| name.parse().map_err(|_| {
                Error::Data(format!(
                    "manifest method '{name}' is unknown (expected sis, holp, ridge-holp, or air-holp)"
                ))
            }))
            .collect()
    }

    /// Cartesian expansion of the grid lists, n outermost, r2 innermost.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        let mut index = 0;
        for &n in &self.n {
            for &p in &self.p {
                for &rho in &self.rho {
                    for &p0 in &self.p0 {
                        for &r2 in &self.r2 {
                            cells.push(GridCell {
                                index,
                                n,
                                p,
                                rho,
                                p0,
                                r2,
                            });
                            index += 1;
                        }
                    }
                }
            }
        }
        cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_toml() -> &'static str {
        r#"
n = [30, 40]
p = [60]
rho = [0.0, 0.5]
p0 = [3]
r2 = [0.8]
replicates = 2
seed = 7
methods = ["sis", "air-holp"]
"#
    }

    #[test]
    fn parses_a_minimal_manifest() {
        let manifest: RunManifest = toml::from_str(minimal_toml()).unwrap();
        manifest.validate().unwrap();
        assert_eq!(manifest.cells().len(), 4);
        assert_eq!(manifest.ridge_penalty, 10.0);
        assert_eq!(manifest.air.r0, DEFAULT_R0);
        assert_eq!(
            manifest.parsed_methods().unwrap(),
            vec![SimMethod::Sis, SimMethod::AirHolp]
        );
    }

    #[test]
    fn cell_enumeration_is_row_major_with_r2_innermost() {
        let manifest: RunManifest = toml::from_str(
            r#"
n = [10, 20]
p = [30]
rho = [0.1]
p0 = [2]
r2 = [0.5, 0.9]
replicates = 1
seed = 0
methods = ["sis"]
"#,
        )
        .unwrap();
        let cells = manifest.cells();
        assert_eq!(cells.len(), 4);
        assert_eq!((cells[0].n, cells[0].r2), (10, 0.5));
        assert_eq!((cells[1].n, cells[1].r2), (10, 0.9));
        assert_eq!((cells[2].n, cells[2].r2), (20, 0.5));
        assert_eq!((cells[3].n, cells[3].r2), (20, 0.9));
        assert_eq!(cells[3].index, 3);
    }

    #[test]
    fn rejects_unknown_fields_with_position() {
        let err = toml::from_str::<RunManifest>(&format!("{}\nbogus = 1\n", minimal_toml()))
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn rejects_invalid_cells_and_methods() {
        let mut manifest: RunManifest = toml::from_str(minimal_toml()).unwrap();
        manifest.p0 = vec![100];
        let err = manifest.validate().unwrap_err().to_string();
        assert!(err.contains("p0=100"), "{err}");

        let mut manifest: RunManifest = toml::from_str(minimal_toml()).unwrap();
        manifest.methods = vec!["lasso".into()];
        assert!(manifest.validate().is_err());

        let mut manifest: RunManifest = toml::from_str(minimal_toml()).unwrap();
        manifest.methods = vec!["sis".into(), "sis".into()];
        assert!(manifest.validate().is_err());

        let mut manifest: RunManifest = toml::from_str(minimal_toml()).unwrap();
        manifest.replicates = 0;
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn air_overrides_expand_to_configs() {
        let manifest: RunManifest = toml::from_str(&format!(
            "{}\n[air]\nr0 = 5.0\ndelta = 0.1\n",
            minimal_toml()
        ))
        .unwrap();
        let config = manifest.air.config(9);
        assert_eq!(config.r0, 5.0);
        assert_eq!(config.delta, 0.1);
        assert_eq!(config.c, DEFAULT_C);
        assert_eq!(config.m, 9);
    }
}
