//! Global tuning knobs with the defaults used throughout the crate.

use serde::{Deserialize, Serialize};

/// Relative geometric tolerance (scaled by the local element diameter).
pub const EPS_GEO: f64 = 1e-12;

/// Kernel slivers below this fraction of the element measure count as empty.
pub const KERNEL_SLIVER_FRACTION: f64 = 1e-12;

/// Relative tolerance on degenerate element measures.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    /// Geometric tolerance relative to the local element diameter.
    pub eps_geo: f64,
    /// Weight rescaling divisor passed to the partitioner.
    pub c_w: f64,
    /// Node-weight imbalance tolerance of the K-way partitioner.
    pub imbalance_tol: f64,
    /// Grid-line perturbation amplitude of the quad/hex generators,
    /// as a fraction of the cell size.
    pub perturbation: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            eps_geo: EPS_GEO,
            c_w: 10.0,
            imbalance_tol: 0.03,
            perturbation: 0.45,
        }
    }
}

impl Config {
    /// Parses a `key=value` per line config file; unknown keys are rejected.
    pub fn parse(text: &str) -> crate::Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                crate::Error::InvalidArgument(format!("config line {}: missing '='", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                crate::Error::InvalidArgument(format!("config line {}: bad number", lineno + 1))
            })?;
            match key.trim() {
                "eps_geo" => cfg.eps_geo = value,
                "c_w" => cfg.c_w = value,
                "imbalance_tol" => cfg.imbalance_tol = value,
                "perturbation" => cfg.perturbation = value,
                other => {
                    return Err(crate::Error::InvalidArgument(format!(
                        "unknown config key '{other}'"
                    )))
                }
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_comments() {
        let cfg = Config::parse("c_w = 5\n# comment\nimbalance_tol=0.1\n").unwrap();
        assert_eq!(cfg.c_w, 5.0);
        assert_eq!(cfg.imbalance_tol, 0.1);
        assert_eq!(cfg.eps_geo, EPS_GEO);
    }

    #[test]
    fn rejects_unknown_key() {
        assert!(Config::parse("nope=1").is_err());
    }
}
