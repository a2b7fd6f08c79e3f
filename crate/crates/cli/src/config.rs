//! Run configuration: a TOML file whose every field has an embedded default, overridden
//! field by field from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twistratios::lfun::TruncationPolicy;
use twistratios::ratios::{ShiftPair, WeightSpec};
use twistratios::Complex64;

/// The defaults, verbatim. Also written next to every report.
pub const DEFAULT_CONFIG: &str = r#"# twistratios run configuration

[form]
# Only the level-1 weight-12 form (Ramanujan's Delta) ships with a coefficient oracle.
label = "1.12.a.a"
n_max = 1000000

[shifts]
alpha_re = 0.30
alpha_im = 0.0
beta_re = 0.35
beta_im = 0.0

[grid]
x = [250.0, 500.0, 1000.0, 2000.0]

[weight]
kind = "bump"
lo = 1.0
hi = 2.0

[policy]
tolerance = 1e-12
max_terms = 5000000
smoothing = 1.0

[run]
# 0 lets the thread pool pick one worker per core.
workers = 0
out = "reports"
seed = 20240601
fast = false
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormConfig {
    pub label: String,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftConfig {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub workers: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub fast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub form: FormConfig,
    pub shifts: ShiftConfig,
    pub grid: GridConfig,
    pub weight: WeightSpec,
    pub policy: TruncationPolicy,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_CONFIG).expect("embedded default configuration parses")
    }
}

impl RunConfig {
    /// Defaults overlaid with the tables present in `text`. Missing keys keep their
    /// default; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let mut base: toml::Table = toml::from_str(DEFAULT_CONFIG).expect("embedded default configuration parses");
        let user: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        for (key, value) in user {
            match (base.get_mut(&key), value) {
                (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => {
                    for (k, v) in src {
                        dst.insert(k, v);
                    }
                }
                (Some(_), _) => return Err(format!("[{key}] must be a table")),
                (None, _) => return Err(format!("unknown section [{key}]")),
            }
        }
        toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn shift_pair(&self) -> ShiftPair {
        let s = &self.shifts;
        ShiftPair::new(Complex64::new(s.alpha_re, s.alpha_im), Complex64::new(s.beta_re, s.beta_im))
    }

    /// Every violated constraint, checked before any computation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.form.label != "1.12.a.a" {
            out.push(format!("form.label = {:?}: only \"1.12.a.a\" is available", self.form.label));
        }
        if self.form.n_max < 1000 {
            out.push(format!("form.n_max = {} is below 1000", self.form.n_max));
        }
        out.extend(self.shift_pair().violations().into_iter().map(|v| format!("shifts: {v}")));
        let mut xs = self.grid.x.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 3 {
            out.push(format!("grid.x needs at least 3 distinct values, got {}", xs.len()));
        }
        if let Some(x) = xs.iter().find(|x| !(**x >= 10.0 && x.is_finite())) {
            out.push(format!("grid.x contains {x}; every X must be at least 10"));
        }
        match self.weight {
            WeightSpec::Bump { lo, hi } => {
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    out.push(format!("weight support [{lo}, {hi}] must satisfy 0 < lo < hi"));
                }
            }
        }
        if let Err(e) = self.policy.validate("policy") {
            out.push(e.to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let c = RunConfig::default();
        assert!(c.violations().is_empty(), "{:?}", c.violations());
        assert_eq!(c.grid.x, vec![250.0, 500.0, 1000.0, 2000.0]);
    }

    #[test]
    fn partial_override() {
        let c = RunConfig::from_toml("[shifts]\nalpha_re = 0.2\n").unwrap();
        assert_eq!(c.shifts.alpha_re, 0.2);
        assert_eq!(c.shifts.beta_re, 0.35);
        assert!(RunConfig::from_toml("[shifts]\ngamma = 1.0\n").is_err());
        assert!(RunConfig::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn lists_every_violation() {
        let mut c = RunConfig::default();
        c.shifts.alpha_re = 0.6;
        c.shifts.beta_re = -1.0;
        c.grid.x = vec![5.0, 100.0];
        assert_eq!(c.violations().len(), 4, "{:?}", c.violations());
    }
}
