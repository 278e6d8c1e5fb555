//! (alpha, beta) parameter-plane scans.
//!
//! ```toml
//! alpha = { lo = 1e-15, hi = 16, steps = 50 }
//! beta = { lo = 1e-15, hi = 16, steps = 50 }
//! quantities = ["sigma_sign", "lambda3_sign", "catalog", "positivity"]   # optional, default all
//!
//! [fixed]
//! a = 1.2
//! b = 1.2
//! c = 0.5
//! d = 0.5
//! mu = 0.03
//! nu = 0.03
//! ```
//!
//! Axes are log-spaced when `hi / lo > 1e3`, linear otherwise. Rows are
//! emitted alpha-major (all beta values for the first alpha, then the next).

use std::path::Path;

use lvrm_core::equilibrium::{positive_equilibrium, PositivityRegion};
use lvrm_core::export::fmt_num;
use lvrm_core::hopf::analyze_hopf;
use lvrm_core::spectral::analyze_point;
use lvrm_core::zerohopf::zero_hopf_reduce_frozen;
use lvrm_core::ModelParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::parse_toml;

pub const HEADER: &str = "alpha,beta,sigma_sign,lambda3_sign,catalog,positivity";
pub const LOG_SPACING_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SigmaSign,
    Lambda3Sign,
    #[serde(rename = "catalog")]
    CatalogType,
    #[serde(rename = "positivity")]
    EquilibriumPositivity,
}

pub const ALL_QUANTITIES: [Quantity; 4] =
    [Quantity::SigmaSign, Quantity::Lambda3Sign, Quantity::CatalogType, Quantity::EquilibriumPositivity];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn is_log(&self) -> bool {
        self.hi / self.lo > LOG_SPACING_RATIO
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.hi;
                }
                let s = i as f64 / last;
                if self.is_log() {
                    (self.lo.ln() + s * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + s * (self.hi - self.lo)
                }
            })
            .collect()
    }

    fn check(&self, name: &str) -> Result<(), (String, String)> {
        if !(self.lo > 0.0 && self.lo.is_finite()) {
            return Err((format!("{name}.lo"), format!("must be positive (got {})", self.lo)));
        }
        if !(self.hi > self.lo && self.hi.is_finite()) {
            return Err((format!("{name}.hi"), format!("must exceed lo (got {})", self.hi)));
        }
        if self.steps < 2 {
            return Err((format!("{name}.steps"), format!("must be >= 2 (got {})", self.steps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub alpha: Range,
    pub beta: Range,
    pub fixed: Fixed,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
}

fn default_quantities() -> Vec<Quantity> {
    ALL_QUANTITIES.to_vec()
}

impl ScanSpec {
    pub fn params(&self, alpha: f64, beta: f64) -> ModelParams {
        let f = &self.fixed;
        ModelParams::new(f.a, f.b, f.c, f.d, f.mu, f.nu, alpha, beta)
    }

    pub fn check(&self) -> Result<(), (String, String)> {
        self.alpha.check("alpha")?;
        self.beta.check("beta")?;
        if let Err(lvrm_core::Error::Domain { field, requirement, value }) = self.params(1.0, 1.0).validate() {
            return Err((format!("fixed.{field}"), format!("must be {requirement} (got {value})")));
        }
        Ok(())
    }

    fn wants(&self, q: Quantity) -> bool {
        self.quantities.contains(&q)
    }
}

pub fn load_spec(path: &Path) -> CliResult<ScanSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: ScanSpec = parse_toml(&text, path)?;
    spec.check().map_err(|(field, message)| CliError::Input { path: path.to_path_buf(), field, message })?;
    Ok(spec)
}

fn err_cell(e: &lvrm_core::Error) -> String {
    format!("ERR:{}", e.code())
}

fn sign_cell(v: f64) -> String {
    if v < 0.0 {
        "-1"
    } else if v > 0.0 {
        "1"
    } else {
        "0"
    }
    .to_string()
}

pub fn positivity_label(r: PositivityRegion) -> &'static str {
    match r {
        PositivityRegion::RegionI => "RegionI",
        PositivityRegion::RegionII => "RegionII",
        PositivityRegion::OtherPositive => "OtherPositive",
        PositivityRegion::NotPositive => "NotPositive",
    }
}

/// The four quantity cells for one grid point (unrequested ones empty).
pub fn cell(spec: &ScanSpec, alpha: f64, beta: f64) -> [String; 4] {
    let p = spec.params(alpha, beta);
    let eq = positive_equilibrium(&p);
    if eq.primary().is_none() {
        return std::array::from_fn(|k| if spec.wants(ALL_QUANTITIES[k]) { "NA".into() } else { String::new() });
    }
    let point = analyze_point(&p);
    let mut out: [String; 4] = Default::default();
    if spec.wants(Quantity::SigmaSign) {
        out[0] = match analyze_hopf(&p) {
            Ok(a) => sign_cell(a.sigma),
            Err(e) => err_cell(&e),
        };
    }
    if spec.wants(Quantity::Lambda3Sign) {
        out[1] = match &point {
            Ok((_, s)) => match s.lambda3 {
                Some(l) => sign_cell(l),
                None => "ERR:precondition".into(),
            },
            Err(e) => err_cell(e),
        };
    }
    if spec.wants(Quantity::CatalogType) {
        out[2] = match point.as_ref().map_err(Clone::clone).and_then(|(c, s)| zero_hopf_reduce_frozen(c, s)) {
            Ok(nf) => format!("Type{}", nf.catalog.label()),
            Err(e) => err_cell(&e),
        };
    }
    if spec.wants(Quantity::EquilibriumPositivity) {
        out[3] = positivity_label(eq.positivity_region).into();
    }
    out
}

/// Whole grid as CSV; identical for any worker count.
pub fn run_scan(spec: &ScanSpec, workers: usize) -> CliResult<String> {
    let alphas = spec.alpha.values();
    let betas = spec.beta.values();
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<String> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, b)| {
                let c = cell(spec, a, b);
                format!("{},{},{}", fmt_num(a), fmt_num(b), c.join(","))
            })
            .collect()
    });
    let mut out = String::with_capacity(rows.len() * 80);
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
