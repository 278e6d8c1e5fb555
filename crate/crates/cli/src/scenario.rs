//! Scenario files.
//!
//! ```toml
//! name = "hopf_case1_before"
//! init = [0.0001, 0.399, 1]
//! analysis = ["equilibria", "spectral", "hopf", "simulate"]
//! t_end = 2000          # optional, default 2000
//! outputs = "case1b"    # optional artifact prefix, default = name
//!
//! [params]
//! a = 1.2
//! b = 1.2
//! c = 0.5
//! d = 0.5
//! mu = 0.03
//! nu = 0.03
//! alpha = 1e-11
//! beta = 0.34
//!
//! [frr]                 # optional
//! threshold = 0.00001
//! boost = 2
//! target = "auto"       # consumer1 | consumer2 | auto
//! trigger = "on_relaxation_minimum"   # or on_threshold_cross
//!
//! [expected]            # optional, printed reference values
//! hopf_case = 1
//! sigma = -0.049
//! lambda3 = -5.16e-11
//! re_lambda = -0.00134
//! eta_zy = 3.4e10
//! ```
//!
//! Zero-Hopf scenarios use `catalog`, `nf_a` and `nf_b` in `[expected]`.

use std::path::Path;

use lvrm_core::simulate::{FrrPolicy, FrrTarget, FrrTrigger, DEFAULT_T_END};
use lvrm_core::{ModelParams, SuccessState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Simulate,
    Equilibria,
    Spectral,
    Hopf,
    #[serde(rename = "zerohopf")]
    ZeroHopf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsTable {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl From<ParamsTable> for ModelParams {
    fn from(t: ParamsTable) -> Self {
        ModelParams::new(t.a, t.b, t.c, t.d, t.mu, t.nu, t.alpha, t.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrrTable {
    pub threshold: f64,
    pub boost: f64,
    #[serde(default = "default_target")]
    pub target: FrrTarget,
    #[serde(default = "default_trigger")]
    pub trigger: FrrTrigger,
}

fn default_target() -> FrrTarget {
    FrrTarget::Auto
}

fn default_trigger() -> FrrTrigger {
    FrrTrigger::OnRelaxationMinimum
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub hopf_case: Option<u8>,
    pub sigma: Option<f64>,
    pub lambda3: Option<f64>,
    /// Real part of the complex pair.
    pub re_lambda: Option<f64>,
    pub eta_yz: Option<f64>,
    pub eta_zy: Option<f64>,
    pub catalog: Option<String>,
    pub nf_a: Option<f64>,
    pub nf_b: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub params: ParamsTable,
    pub init: [f64; 3],
    #[serde(default)]
    pub frr: Option<FrrTable>,
    #[serde(default)]
    pub analysis: Vec<Analysis>,
    #[serde(default)]
    pub outputs: Option<String>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub expected: Option<Expected>,
}

impl Scenario {
    pub fn params(&self) -> ModelParams {
        self.params.into()
    }

    pub fn init(&self) -> SuccessState {
        SuccessState::new(self.init[0], self.init[1], self.init[2])
    }

    pub fn frr_policy(&self) -> Option<FrrPolicy> {
        self.frr.map(|f| FrrPolicy { threshold: f.threshold, boost: f.boost, target: f.target, trigger: f.trigger })
    }

    pub fn prefix(&self) -> &str {
        self.outputs.as_deref().unwrap_or(&self.name)
    }

    pub fn expected(&self) -> Expected {
        self.expected.clone().unwrap_or_default()
    }

    pub fn wants(&self, a: Analysis) -> bool {
        self.analysis.contains(&a)
    }

    /// Semantic checks that the schema cannot express; returns `(field, message)`.
    pub fn check(&self) -> Result<(), (String, String)> {
        if self.name.trim().is_empty() {
            return Err(("name".into(), "must not be empty".into()));
        }
        if let Err(lvrm_core::Error::Domain { field, requirement, value }) = self.params().validate() {
            return Err((format!("params.{field}"), format!("must be {requirement} (got {value})")));
        }
        for (i, v) in self.init.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err((format!("init[{i}]"), format!("must be finite and >= 0 (got {v})")));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(("t_end".into(), format!("must be positive (got {})", self.t_end)));
        }
        if let Some(f) = &self.frr {
            if !(f.threshold > 0.0 && f.threshold.is_finite()) {
                return Err(("frr.threshold".into(), format!("must be positive (got {})", f.threshold)));
            }
            if !(f.boost >= 0.0 && f.boost.is_finite()) {
                return Err(("frr.boost".into(), format!("must be >= 0 (got {})", f.boost)));
            }
        }
        if let Some(label) = self.expected.as_ref().and_then(|e| e.catalog.as_deref()) {
            if lvrm_core::zerohopf::CatalogType::from_label(label).is_none() {
                return Err(("expected.catalog".into(), format!("unknown catalog type {label:?}")));
            }
        }
        Ok(())
    }
}

/// Parse TOML text, reporting schema violations with their dotted field path.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    let input = |field: String, message: String| CliError::Input { path: path.to_path_buf(), field, message };
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let msg = e.into_inner().message().trim().to_string();
        input(if field == "." { "<root>".into() } else { field }, msg)
    })
}

pub fn parse_scenario(text: &str, path: &Path) -> CliResult<Scenario> {
    let sc: Scenario = parse_toml(text, path)?;
    sc.check().map_err(|(field, message)| CliError::Input { path: path.to_path_buf(), field, message })?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, path)
}
