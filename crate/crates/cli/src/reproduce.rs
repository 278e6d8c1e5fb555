//! Reproduction matrix over the bundled corpus.

use std::fmt;
use std::path::Path;

use lvrm_core::equilibrium::{positive_equilibrium, RESIDUAL_TOL};
use lvrm_core::hopf::analyze_hopf;
use lvrm_core::model::asymmetry;
use lvrm_core::oracle::{lyapunov_oracle, ORACLE_LOCUS_TOL};
use lvrm_core::spectral::{analyze_point, locate_nearby_hopf};
use lvrm_core::zerohopf::{averaging_oracle, frozen_standard_form, zero_hopf_reduce_frozen, CatalogType};
use lvrm_core::ModelParams;

use crate::analysis::sig4;
use crate::corpus::{read_manifest, verify};
use crate::error::{CliError, CliResult};
use crate::scenario::{load_scenario, Expected, Scenario};

pub const RE_LAMBDA_BAND: f64 = 0.25;
pub const ORACLE_BAND: f64 = 0.20;
pub const NF_A_BAND: f64 = 0.10;
pub const AVERAGING_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub criterion: u8,
    pub check: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [c{:02}] {:<24} {:<13} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.criterion,
            self.scenario,
            self.check,
            self.detail
        )
    }
}

/// Whether `computed` rounds to `printed` at the printed number of significant digits (at most 4).
pub fn matches_printed(computed: f64, printed: f64) -> bool {
    let repr = format!("{printed:e}");
    let mantissa = repr.split('e').next().unwrap_or("");
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count().clamp(1, 4);
    let round = |v: f64| format!("{:.*e}", digits - 1, v);
    round(computed) == round(printed)
}

fn sign(v: f64) -> char {
    if v < 0.0 {
        '-'
    } else {
        '+'
    }
}

fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}

/// Expected (sigma, lambda3) signs for a Hopf case number.
pub fn case_signs(case: u8) -> Option<(char, char)> {
    match case {
        1 => Some(('-', '-')),
        2 => Some(('-', '+')),
        3 => Some(('+', '+')),
        4 => Some(('+', '-')),
        _ => None,
    }
}

fn row(sc: &Scenario, criterion: u8, check: &'static str, pass: bool, detail: String) -> Row {
    Row { scenario: sc.name.clone(), criterion, check, pass, detail }
}

fn equilibrium_row(sc: &Scenario) -> Option<Row> {
    let set = positive_equilibrium(&sc.params());
    set.primary()?;
    Some(row(
        sc,
        2,
        "equilibrium",
        set.residual <= RESIDUAL_TOL,
        format!("residual {:.1e} (tol {RESIDUAL_TOL:.0e})", set.residual),
    ))
}

fn hopf_sign_row(sc: &Scenario, case: u8) -> Row {
    let p = sc.params();
    let expected = case_signs(case).unwrap_or(('?', '?'));
    let lambda3 = analyze_point(&p).ok().and_then(|(_, s)| s.lambda3);
    match (analyze_hopf(&p), lambda3) {
        (Ok(a), Some(l3)) => {
            let got = (sign(a.sigma), sign(l3));
            row(
                sc,
                3,
                "hopf_signs",
                got == expected,
                format!(
                    "computed (σ{}, λ₃{}) σ={} λ₃={}; expected case {case} (σ{}, λ₃{})",
                    got.0,
                    got.1,
                    sig4(a.sigma),
                    sig4(l3),
                    expected.0,
                    expected.1
                ),
            )
        }
        (Err(e), _) => row(sc, 3, "hopf_signs", false, format!("{e}; expected case {case}")),
        (_, None) => row(sc, 3, "hopf_signs", false, "no real eigenvalue".into()),
    }
}

/// Our sigma against the projection oracle, at the scenario when it is on the locus, else at the nearest located point.
pub fn oracle_comparison(p: &ModelParams) -> Result<(f64, f64, String), String> {
    let on_locus =
        analyze_point(p).ok().and_then(|(_, s)| s.pair_real_part()).is_some_and(|re| re.abs() <= ORACLE_LOCUS_TOL);
    let (point, place) = if on_locus {
        (*p, "scenario".to_string())
    } else {
        let (ray, hp) = locate_nearby_hopf(p).map_err(|e| format!("no located point: {e}"))?;
        (hp.params, format!("located on {ray} ray, t={:.4}", hp.t))
    };
    let ours = analyze_hopf(&point).map_err(|e| format!("{place}: {e}"))?.sigma;
    let oracle = lyapunov_oracle(&point).map_err(|e| format!("{place}: oracle {e}"))?;
    Ok((ours, oracle, place))
}

fn oracle_row(sc: &Scenario) -> Row {
    match oracle_comparison(&sc.params()) {
        Ok((ours, oracle, place)) => {
            let pass = ours.signum() == oracle.signum() && rel_err(ours, oracle) <= ORACLE_BAND;
            row(sc, 4, "sigma_oracle", pass, format!("σ={} oracle={} ({place})", sig4(ours), sig4(oracle)))
        }
        Err(msg) => row(sc, 4, "sigma_oracle", false, msg),
    }
}

fn re_lambda_row(sc: &Scenario, printed: f64) -> Row {
    let re = analyze_point(&sc.params()).ok().and_then(|(_, s)| s.pair_real_part());
    match re {
        Some(re) => {
            let pass = sign(re) == sign(printed) && rel_err(re, printed) <= RE_LAMBDA_BAND;
            row(
                sc,
                5,
                "re_lambda",
                pass,
                format!("computed {} expected {} (band {:.0}%)", sig4(re), sig4(printed), RE_LAMBDA_BAND * 100.0),
            )
        }
        None => row(sc, 5, "re_lambda", false, "no complex pair".into()),
    }
}

fn eta_rows(sc: &Scenario, exp: &Expected) -> Vec<Row> {
    let Ok((yz, zy)) = asymmetry(&sc.params()) else { return vec![] };
    let mut out = vec![];
    for (check, printed, got) in [("eta_yz", exp.eta_yz, yz), ("eta_zy", exp.eta_zy, zy)] {
        if let Some(printed) = printed {
            out.push(row(
                sc,
                6,
                check,
                matches_printed(got, printed),
                format!("computed {} expected {printed:e}", sig4(got)),
            ));
        }
    }
    out
}

fn catalog_row(sc: &Scenario, exp: &Expected, label: &str) -> Row {
    let p = sc.params();
    let want = CatalogType::from_label(label);
    let (coeffs, spec) = match analyze_point(&p) {
        Ok(v) => v,
        Err(e) => return row(sc, 7, "catalog", false, e.to_string()),
    };
    let nf = match zero_hopf_reduce_frozen(&coeffs, &spec) {
        Ok(nf) => nf,
        Err(e) => return row(sc, 7, "catalog", false, format!("{e}; expected Type {label}")),
    };
    let type_ok = Some(nf.catalog) == want;
    let b_ok = exp.nf_b.is_none_or(|b| b == nf.nf_b);
    let a_ok = exp.nf_a.is_none_or(|a| rel_err(nf.nf_a, a) <= NF_A_BAND);
    let avg_ok = frozen_standard_form(&coeffs, &spec)
        .map(|sf| {
            let (a1, c1, c3) = averaging_oracle(&sf, 1e-4);
            rel_err(a1, nf.a1) <= AVERAGING_BAND
                && rel_err(c1, nf.c1) <= AVERAGING_BAND
                && rel_err(c3, nf.c3) <= AVERAGING_BAND
        })
        .unwrap_or(false);
    let pass = type_ok && ((a_ok && b_ok) || avg_ok);
    row(
        sc,
        7,
        "catalog",
        pass,
        format!(
            "computed Type {} nf_a={} nf_b={:+}; expected Type {label} nf_a={} nf_b={}",
            nf.catalog.label(),
            sig4(nf.nf_a),
            nf.nf_b,
            exp.nf_a.map_or("-".into(), |a| a.to_string()),
            exp.nf_b.map_or("-".into(), |b| format!("{b:+}"))
        ),
    )
}

/// All rows for one scenario (integrity excluded).
pub fn scenario_rows(sc: &Scenario) -> Vec<Row> {
    let exp = sc.expected();
    let mut rows: Vec<Row> = equilibrium_row(sc).into_iter().collect();
    if let Some(case) = exp.hopf_case {
        rows.push(hopf_sign_row(sc, case));
        rows.push(oracle_row(sc));
    }
    if let Some(re) = exp.re_lambda {
        rows.push(re_lambda_row(sc, re));
    }
    rows.extend(eta_rows(sc, &exp));
    if let Some(label) = exp.catalog.as_deref() {
        rows.push(catalog_row(sc, &exp, label));
    }
    rows
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub scenarios: usize,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

/// Run the matrix over every scenario listed in the corpus manifest.
///
/// A listed file that is missing or unparsable is an input error; a
/// checksum mismatch is reported as a failed `integrity` row.
pub fn reproduce_matrix(dir: &Path) -> CliResult<Report> {
    let manifest = read_manifest(dir)?;
    for e in &manifest {
        if !dir.join(&e.file).is_file() {
            return Err(CliError::Usage(format!(
                "scenario {} is listed in the manifest but {} is missing",
                e.name(),
                dir.join(&e.file).display()
            )));
        }
    }
    let mut report = Report { scenarios: manifest.len(), rows: vec![] };
    for e in &manifest {
        let sc = load_scenario(&dir.join(&e.file))?;
        let intact = verify(dir, e)?;
        report.rows.push(Row {
            scenario: sc.name.clone(),
            criterion: 0,
            check: "integrity",
            pass: intact,
            detail: if intact { "sha256 ok".into() } else { "sha256 differs from manifest".into() },
        });
        report.rows.extend(scenario_rows(&sc));
    }
    Ok(report)
}
