//! Per-scenario analyses: each writes its artifacts and returns a one-line summary.

use std::path::{Path, PathBuf};

use lvrm_core::equilibrium::{closed_form_xstar, positive_equilibrium, EquilibriumSet};
use lvrm_core::export::{events_jsonl, phase_portrait_export, Plane};
use lvrm_core::hopf::analyze_hopf;
use lvrm_core::model::asymmetry;
use lvrm_core::oracle::lyapunov_oracle;
use lvrm_core::simulate::{detect_relaxation, integrate, integrate_with_frr, EventKind, SimConfig, Trajectory};
use lvrm_core::spectral::{analyze_point, jacobian_origin, locate_nearby_hopf, spectral_report, SpectralReport};
use lvrm_core::zerohopf::{averaging_oracle, frozen_standard_form, reduction_coefficients, zero_hopf_reduce_frozen};
use lvrm_core::ModelParams;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::scenario::{Analysis, Scenario};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub analysis: Analysis,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Four significant digits in shortest exponent form, e.g. `3.4e10`.
pub fn sig4(v: f64) -> String {
    let r: f64 = format!("{v:.3e}").parse().unwrap_or(v);
    format!("{r:e}")
}

fn sign_char(v: f64) -> char {
    if v < 0.0 {
        '<'
    } else {
        '>'
    }
}

/// The larger of the two asymmetry ratios with its label.
pub fn dominant_eta(p: &ModelParams) -> (&'static str, f64) {
    let (yz, zy) = asymmetry(p).unwrap_or((f64::NAN, f64::NAN));
    if zy >= yz {
        ("eta_zy", zy)
    } else {
        ("eta_yz", yz)
    }
}

struct Writer<'a> {
    dir: &'a Path,
    prefix: &'a str,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, suffix: &str, contents: &str) -> CliResult<()> {
        std::fs::create_dir_all(self.dir).map_err(|e| CliError::io(self.dir, e))?;
        let path = self.dir.join(format!("{}_{suffix}", self.prefix));
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        self.put(suffix, &(text + "\n"))
    }
}

pub fn sim_config(sc: &Scenario, opts: &RunOptions) -> SimConfig {
    let mut cfg = SimConfig::new(sc.params(), sc.init(), opts.t_end.unwrap_or(sc.t_end));
    if let Some(r) = opts.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(a) = opts.abs_tol {
        cfg.abs_tol = a;
    }
    cfg.frr_policy = sc.frr_policy();
    cfg
}

fn write_trajectory(w: &mut Writer, traj: &Trajectory) -> CliResult<()> {
    let table = phase_portrait_export(traj, Plane::XYZ);
    w.put("trajectory.csv", &table.to_csv())?;
    w.put("markers.csv", &table.markers_csv())?;
    w.put("events.jsonl", &events_jsonl(traj))
}

fn simulate(sc: &Scenario, opts: &RunOptions, w: &mut Writer) -> CliResult<String> {
    let cfg = sim_config(sc, opts);
    cfg.validate().map_err(|e| CliError::numerical("simulate", e))?;
    let result = if cfg.frr_policy.is_some() { integrate_with_frr(&cfg) } else { integrate(&cfg) };
    let traj = match result {
        Ok(t) => t,
        Err(int) => {
            write_trajectory(w, &int.partial)?;
            return Err(CliError::numerical("simulate", int.error));
        }
    };
    write_trajectory(w, &traj)?;
    Ok(format!(
        "Simulate: {} points to t={}, {} FRR boosts, {} relaxation minima, min coordinate={:.3e}",
        traj.len(),
        traj.times.last().copied().unwrap_or(0.0),
        traj.count(EventKind::FrrTrigger),
        detect_relaxation(&traj).len(),
        traj.min_coordinate()
    ))
}

#[derive(Serialize)]
struct EquilibriaReport {
    params: ModelParams,
    #[serde(flatten)]
    set: EquilibriumSet,
    closed_form_xstar: Option<f64>,
}

fn equilibria(sc: &Scenario, w: &mut Writer) -> CliResult<String> {
    let p = sc.params();
    let set = positive_equilibrium(&p);
    let line = match set.primary() {
        Some(e) => format!(
            "Equilibria: E*=({:.6e}, {:.6e}, {:.6e}), {:?}, residual={:.1e}",
            e.x, e.y, e.z, set.positivity_region, set.residual
        ),
        None => "Equilibria: no interior equilibrium".to_string(),
    };
    w.json("equilibria.json", &EquilibriaReport { params: p, set, closed_form_xstar: closed_form_xstar(&p) })?;
    Ok(line)
}

#[derive(Serialize)]
struct SpectralOut {
    origin: SpectralReport,
    positive: Option<SpectralReport>,
}

fn spectral(sc: &Scenario, w: &mut Writer) -> CliResult<String> {
    let p = sc.params();
    let origin = spectral_report(&jacobian_origin(&p));
    let positive = analyze_point(&p).ok().map(|(_, s)| s);
    let line = match &positive {
        Some(s) => {
            let re = s.pair_real_part();
            format!(
                "Spectral: {:?}, Re(lambda+-)={}, lambda3={}",
                s.classification,
                re.map_or("-".into(), sig4),
                s.lambda3.map_or("-".into(), sig4)
            )
        }
        None => format!("Spectral: origin {:?}, no interior equilibrium", origin.classification),
    };
    w.json("spectral.json", &SpectralOut { origin, positive })?;
    Ok(line)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocatedHopf {
    pub ray: String,
    pub t: f64,
    pub params: ModelParams,
    pub sigma: Option<f64>,
    pub oracle_sigma: Option<f64>,
    pub lambda3: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfOut {
    pub params: ModelParams,
    pub re_lambda: Option<f64>,
    pub omega0: Option<f64>,
    pub lambda3: Option<f64>,
    pub sigma: Option<f64>,
    pub case: Option<u8>,
    pub eta_yz: f64,
    pub eta_zy: f64,
    pub error: Option<String>,
    pub located: Option<LocatedHopf>,
}

/// Hopf quantities at the scenario parameters plus the nearest located Hopf point.
pub fn hopf_report(p: &ModelParams) -> CliResult<HopfOut> {
    let (eta_yz, eta_zy) = asymmetry(p).map_err(|e| CliError::numerical("hopf", e))?;
    let spec = analyze_point(p).ok().map(|(_, s)| s);
    let at = analyze_hopf(p);
    let located = locate_nearby_hopf(p).ok().map(|(ray, hp)| {
        let an = analyze_hopf(&hp.params);
        LocatedHopf {
            ray: ray.to_string(),
            t: hp.t,
            params: hp.params,
            sigma: an.as_ref().ok().map(|a| a.sigma),
            oracle_sigma: lyapunov_oracle(&hp.params).ok(),
            lambda3: hp.spectrum.lambda3,
            error: an.err().map(|e| e.to_string()),
        }
    });
    Ok(HopfOut {
        params: *p,
        re_lambda: spec.as_ref().and_then(|s| s.pair_real_part()),
        omega0: spec.as_ref().and_then(|s| s.omega0),
        lambda3: spec.as_ref().and_then(|s| s.lambda3),
        sigma: at.as_ref().ok().map(|a| a.sigma),
        case: at.as_ref().ok().map(|a| a.report.case.number()),
        eta_yz,
        eta_zy,
        error: at.as_ref().err().map(|e| e.to_string()),
        located,
    })
}

fn hopf(sc: &Scenario, w: &mut Writer) -> CliResult<String> {
    let p = sc.params();
    let out = hopf_report(&p)?;
    w.json("hopf.json", &out)?;
    let at = analyze_hopf(&p).map_err(|e| CliError::numerical("hopf", e))?;
    let (label, eta) = dominant_eta(&p);
    Ok(format!(
        "Hopf: case {}, σ{}0, λ₃{}0, {}={}",
        at.report.case.number(),
        sign_char(at.sigma),
        sign_char(at.report.lambda3),
        label,
        sig4(eta)
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroHopfOut {
    pub params: ModelParams,
    pub spectrum: Option<SpectralReport>,
    pub a1: Option<f64>,
    pub c1: Option<f64>,
    pub c3: Option<f64>,
    pub nf_a: Option<f64>,
    pub nf_b: Option<i8>,
    pub catalog: Option<String>,
    /// (a1, c1, c3) by angular averaging.
    pub averaging: Option<(f64, f64, f64)>,
    pub error: Option<String>,
}

pub fn zerohopf_report(p: &ModelParams) -> ZeroHopfOut {
    let mut out = ZeroHopfOut {
        params: *p,
        spectrum: None,
        a1: None,
        c1: None,
        c3: None,
        nf_a: None,
        nf_b: None,
        catalog: None,
        averaging: None,
        error: None,
    };
    let (coeffs, spec) = match analyze_point(p) {
        Ok(v) => v,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    if let Ok(sf) = frozen_standard_form(&coeffs, &spec) {
        let (a1, c1, c3) = reduction_coefficients(&sf);
        out.a1 = Some(a1);
        out.c1 = Some(c1);
        out.c3 = Some(c3);
        out.averaging = Some(averaging_oracle(&sf, 1e-4));
    }
    match zero_hopf_reduce_frozen(&coeffs, &spec) {
        Ok(nf) => {
            out.nf_a = Some(nf.nf_a);
            out.nf_b = Some(nf.nf_b);
            out.catalog = Some(nf.catalog.label().to_string());
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out.spectrum = Some(spec);
    out
}

fn zerohopf(sc: &Scenario, w: &mut Writer) -> CliResult<String> {
    let p = sc.params();
    let out = zerohopf_report(&p);
    w.json("zerohopf.json", &out)?;
    let (coeffs, spec) = analyze_point(&p).map_err(|e| CliError::numerical("zerohopf", e))?;
    let nf = zero_hopf_reduce_frozen(&coeffs, &spec).map_err(|e| CliError::numerical("zerohopf", e))?;
    Ok(format!(
        "Zero-Hopf: Type {}, nf_a={}, nf_b={:+}, λ₃={}",
        nf.catalog.label(),
        sig4(nf.nf_a),
        nf.nf_b,
        spec.lambda3.map_or("-".into(), sig4)
    ))
}

pub fn run_analysis(sc: &Scenario, which: Analysis, opts: &RunOptions) -> CliResult<Outcome> {
    let mut w = Writer { dir: &opts.out_dir, prefix: sc.prefix(), written: vec![] };
    let summary = match which {
        Analysis::Simulate => simulate(sc, opts, &mut w),
        Analysis::Equilibria => equilibria(sc, &mut w),
        Analysis::Spectral => spectral(sc, &mut w),
        Analysis::Hopf => hopf(sc, &mut w),
        Analysis::ZeroHopf => zerohopf(sc, &mut w),
    }?;
    Ok(Outcome { analysis: which, summary, artifacts: w.written })
}

/// Every requested analysis in a fixed order; failures do not stop the others.
pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> Vec<CliResult<Outcome>> {
    let mut wanted = sc.analysis.clone();
    wanted.sort();
    wanted.dedup();
    wanted.into_iter().map(|a| run_analysis(sc, a, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_digit_formatting() {
        assert_eq!(sig4(0.34 / 1e-11), "3.4e10");
        assert_eq!(sig4(0.3 / 0.007), "4.286e1");
        assert_eq!(sig4(-0.049587), "-4.959e-2");
    }
}
