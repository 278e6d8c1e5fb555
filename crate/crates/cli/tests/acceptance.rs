//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use lvrm_cli::corpus::{bundled_dir, read_manifest};
use lvrm_cli::reproduce::{matches_printed, scenario_rows, Row, ORACLE_BAND};
use lvrm_cli::scan::{run_scan, Fixed, Quantity, Range, ScanSpec};
use lvrm_cli::scenario::{load_scenario, Scenario};
use lvrm_core::dopri::solve_fixed;
use lvrm_core::equilibrium::{positive_equilibrium, RESIDUAL_TOL};
use lvrm_core::hopf::{analyze_hopf, eigenvector};
use lvrm_core::model::{asymmetry, rhs};
use lvrm_core::oracle::lyapunov_oracle;
use lvrm_core::simulate::{
    integrate, integrate_with_frr, FrrPolicy, FrrTarget, FrrTrigger, SimConfig, DEFAULT_ABS_TOL,
};
use lvrm_core::spectral::{
    analyze_point, jacobian_origin, jacobian_positive, locate_nearby_hopf, scaling_ray, spectral_report, SEARCH_RAYS,
};
use lvrm_core::{ModelParams, SuccessState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn corpus() -> Vec<Scenario> {
    let dir = bundled_dir();
    read_manifest(&dir)
        .expect("corpus manifest")
        .iter()
        .map(|e| load_scenario(&dir.join(&e.file)).expect("corpus scenario"))
        .collect()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        log_uniform(rng, 5e-3, 0.1),
        log_uniform(rng, 5e-3, 0.1),
        log_uniform(rng, 1e-3, 1.0),
        log_uniform(rng, 1e-3, 1.0),
    )
}

/// Rows of the reproduction matrix for one criterion, summarised.
fn matrix(rows: &[Row], criterion: u8) -> Outcome {
    let sel: Vec<&Row> = rows.iter().filter(|r| r.criterion == criterion).collect();
    let failed: Vec<String> = sel.iter().filter(|r| !r.pass).map(|r| format!("{}:{}", r.scenario, r.check)).collect();
    let detail = if failed.is_empty() {
        format!("{}/{} rows", sel.len(), sel.len())
    } else {
        format!("{}/{} rows; failing {}", sel.len() - failed.len(), sel.len(), failed.join(" "))
    };
    outcome(!sel.is_empty() && failed.is_empty(), detail)
}

fn origin_spectrum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut p = random_params(&mut rng);
        p.mu = log_uniform(&mut rng, 1e-6, 10.0);
        p.nu = log_uniform(&mut rng, 1e-6, 10.0);
        let roots = spectral_report(&jacobian_origin(&p)).roots;
        let mut got: Vec<f64> = roots.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let mut want = vec![1.0, -p.mu, -p.nu];
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
        for z in roots {
            worst = worst.max(z.im.abs());
        }
    }
    outcome(worst <= 1e-12, format!("100 draws, max deviation {worst:.1e} (tol 1e-12)"))
}

type Big = FBig<HalfEven, 2>;

const ORACLE_BITS: usize = 256;

fn big(v: f64) -> Big {
    Big::try_from(v).expect("finite").with_precision(ORACLE_BITS).value()
}

fn big_field(s: &[Big; 3], p: &ModelParams) -> [Big; 3] {
    let one = big(1.0);
    let [x, y, z] = s;
    let fy = x / (&one + big(p.a) * x);
    let fz = x / (&one + big(p.b) * x);
    [
        x * (&one - x) - &fy * y - &fz * z,
        big(p.c) * &fy * y - big(p.mu) * y - big(p.alpha) * y * z,
        big(p.d) * &fz * z - big(p.nu) * z - big(p.beta) * z * y,
    ]
}

fn big_jacobian(s: &[Big; 3], p: &ModelParams) -> [[Big; 3]; 3] {
    let one = big(1.0);
    let [x, y, z] = s;
    let (ua, ub) = (&one + big(p.a) * x, &one + big(p.b) * x);
    let (fy, fz) = (x / &ua, x / &ub);
    let (dfy, dfz) = (&one / (&ua * &ua), &one / (&ub * &ub));
    [
        [&one - big(2.0) * x - &dfy * y - &dfz * z, -fy.clone(), -fz.clone()],
        [big(p.c) * &dfy * y, big(p.c) * &fy - big(p.mu) - big(p.alpha) * z, -(big(p.alpha) * y)],
        [big(p.d) * &dfz * z, -(big(p.beta) * z), big(p.d) * &fz - big(p.nu) - big(p.beta) * y],
    ]
}

fn det3(m: &[[Big; 3]; 3]) -> Big {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

fn solve3(m: &[[Big; 3]; 3], r: &[Big; 3]) -> Option<[Big; 3]> {
    let d = det3(m);
    if d.to_f64().value() == 0.0 {
        return None;
    }
    Some(std::array::from_fn(|k| {
        let mut mk = m.clone();
        for i in 0..3 {
            mk[i][k] = r[i].clone();
        }
        det3(&mk) / &d
    }))
}

/// Newton at 256-bit precision from a perturbed start.
fn newton_oracle(p: &ModelParams, start: [f64; 3]) -> Option<[f64; 3]> {
    let mut s = start.map(big);
    for _ in 0..100 {
        let dx = solve3(&big_jacobian(&s, p), &big_field(&s, p))?;
        let mut done = true;
        for i in 0..3 {
            s[i] = &s[i] - &dx[i];
            done &= dx[i].to_f64().value().abs() <= 1e-40 * s[i].to_f64().value().abs();
        }
        if done {
            return Some(s.map(|v| v.to_f64().value()));
        }
    }
    None
}

fn equilibrium_residual(scenarios: &[Scenario]) -> Outcome {
    let mut checked = 0;
    let mut bad = vec![];
    let (mut worst_res, mut worst_rel) = (0.0f64, 0.0f64);
    for sc in scenarios {
        let p = sc.params();
        let Some(e) = positive_equilibrium(&p).primary() else { continue };
        checked += 1;
        let v = e.to_array();
        let res = rhs(&v, &p).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let start = [v[0] * (1.0 + 1e-4), v[1] * (1.0 - 1e-4), v[2] * (1.0 + 1e-4)];
        let (rel, comp) = match newton_oracle(&p, start) {
            Some(o) => (0..3)
                .map(|i| ((v[i] - o[i]).abs() / o[i].abs(), ["X", "Y", "Z"][i]))
                .fold((0.0, "-"), |m, c| if c.0 > m.0 { c } else { m }),
            None => (f64::INFINITY, "no convergence"),
        };
        worst_res = worst_res.max(res);
        worst_rel = worst_rel.max(rel);
        if !(res <= RESIDUAL_TOL && rel <= 1e-8) {
            bad.push(format!("{} ({comp} {rel:.1e})", sc.name));
        }
    }
    outcome(
        checked == scenarios.len() && bad.is_empty(),
        format!(
            "{checked}/{} with E*, max residual {worst_res:.1e}, max oracle rel diff {worst_rel:.1e}{}",
            scenarios.len(),
            if bad.is_empty() { String::new() } else { format!("; failing {}", bad.join(", ")) }
        ),
    )
}

fn sigma_oracle(rows: &[Row]) -> Outcome {
    let scen = matrix(rows, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut located, mut agree, mut attempts) = (0, 0, 0);
    let mut worst = 0.0f64;
    while located < 100 && attempts < 20_000 {
        attempts += 1;
        let p = random_params(&mut rng);
        let complex = analyze_point(&p).is_ok_and(|(_, s)| s.has_complex_pair());
        if !complex {
            continue;
        }
        let Ok((_, hp)) = locate_nearby_hopf(&p) else { continue };
        located += 1;
        if let (Ok(a), Ok(o)) = (analyze_hopf(&hp.params), lyapunov_oracle(&hp.params)) {
            let rel = (a.sigma - o).abs() / o.abs();
            worst = worst.max(rel);
            if a.sigma.signum() == o.signum() && rel <= ORACLE_BAND {
                agree += 1;
            }
        }
    }
    outcome(
        scen.pass && located == 100 && agree == 100,
        format!("scenarios {}; random located {agree}/{located} agree, max rel diff {worst:.1e}", scen.detail),
    )
}

fn asymmetry_metrics(scenarios: &[Scenario]) -> Outcome {
    let checks = [
        ("hopf_case1_before", "eta_zy", 3.4e10),
        ("hopf_case2_after", "eta_yz", 42.86),
        ("hopf_case3_after", "eta_zy", 4.65),
        ("hopf_case4_after", "eta_zy", 4.56e11),
    ];
    let mut parts = vec![];
    let mut pass = true;
    for (name, which, printed) in checks {
        let sc = scenarios.iter().find(|s| s.name == name).expect("scenario in corpus");
        let (yz, zy) = asymmetry(&sc.params()).expect("positive alpha, beta");
        let got = if which == "eta_yz" { yz } else { zy };
        let ok = matches_printed(got, printed);
        pass &= ok;
        parts.push(format!("{name} {which}={got:.4e} vs {printed:e} {}", if ok { "ok" } else { "MISMATCH" }));
    }
    outcome(pass, parts.join("; "))
}

fn typeiia_scan() -> Outcome {
    let axis = Range { lo: 1e-15, hi: 16.0, steps: 50 };
    let spec = ScanSpec {
        alpha: axis,
        beta: axis,
        fixed: Fixed { a: 1.2, b: 1.2, c: 0.5, d: 0.5, mu: 0.03, nu: 0.03 },
        quantities: vec![Quantity::CatalogType],
    };
    let csv = run_scan(&spec, 0).expect("scan runs");
    let mut tally = std::collections::BTreeMap::<String, usize>::new();
    for line in csv.lines().skip(1) {
        let cell = line.split(',').nth(4).unwrap_or("").to_string();
        *tally.entry(cell).or_default() += 1;
    }
    let iia = tally.get("TypeIIa").copied().unwrap_or(0);
    let cells: usize = tally.values().sum();
    let breakdown: Vec<String> = tally.iter().map(|(k, v)| format!("{k}={v}")).collect();
    outcome(cells == 2500 && iia == 0, format!("{cells} cells, TypeIIa={iia} ({})", breakdown.join(" ")))
}

fn positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let floor = -10.0 * DEFAULT_ABS_TOL;
    let (mut worst, mut interrupted, mut below) = (f64::INFINITY, 0, 0);
    for _ in 0..200 {
        let mut p = random_params(&mut rng);
        p.alpha = log_uniform(&mut rng, 1e-12, 10.0);
        p.beta = log_uniform(&mut rng, 1e-12, 10.0);
        let mut init = [0.0; 3];
        for v in &mut init {
            *v = if rng.gen_bool(0.1) { 0.0 } else { log_uniform(&mut rng, 1e-8, 1.5) };
        }
        let mut cfg = SimConfig::new(p, SuccessState::from_array(init), 500.0);
        if rng.gen_bool(0.5) {
            cfg.frr_policy = Some(FrrPolicy {
                threshold: log_uniform(&mut rng, 1e-5, 0.5),
                boost: rng.gen_range(0.0..20.0),
                target: [FrrTarget::Consumer1, FrrTarget::Consumer2, FrrTarget::Auto][rng.gen_range(0..3)],
                trigger: if rng.gen_bool(0.5) { FrrTrigger::OnThresholdCross } else { FrrTrigger::OnRelaxationMinimum },
            });
        }
        let traj = match if cfg.frr_policy.is_some() { integrate_with_frr(&cfg) } else { integrate(&cfg) } {
            Ok(t) => t,
            Err(e) => {
                interrupted += 1;
                *e.partial
            }
        };
        let m = traj.min_coordinate();
        worst = worst.min(m);
        if m < floor {
            below += 1;
        }
    }
    outcome(
        below == 0,
        format!(
            "200 runs, min coordinate {worst:.2e} (floor {floor:.0e}), {below} below floor, {interrupted} interrupted"
        ),
    )
}

fn pair_re(p: &ModelParams) -> Option<f64> {
    analyze_point(p).ok()?.1.pair_real_part()
}

/// Ray coordinate where the pair real part equals `target`, starting from a Hopf point at `t0`.
fn offset_on_ray(p0: &ModelParams, dir: &[f64; 8], t0: f64, target: f64) -> Option<f64> {
    let re = |t: f64| pair_re(&p0.shifted(dir, t));
    let h = 1e-6 * (1.0 + t0.abs());
    let slope = (re(t0 + h)? - re(t0 - h)?) / (2.0 * h);
    let step = target / slope;
    let f0 = re(t0)? - target;
    let mut hi = None;
    for k in 0..30 {
        let t = t0 + step * 1.5f64.powi(k);
        if let Some(v) = re(t) {
            if (v - target).signum() != f0.signum() {
                hi = Some(t);
                break;
            }
        }
    }
    let (mut a, mut b) = (t0, hi?);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (re(m)? - target).signum() == f0.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// E* and the oscillatory eigenplane: right eigenvector `v` and left eigenvector `w` of the pair.
struct Plane {
    e: [f64; 3],
    v: [Complex64; 3],
    w: [Complex64; 3],
    wv: Complex64,
}

impl Plane {
    fn at(p: &ModelParams) -> Option<Plane> {
        let (coeffs, spec) = analyze_point(p).ok()?;
        let j = jacobian_positive(&coeffs);
        let lambda = spec.roots[0];
        let v = eigenvector(&j, lambda);
        let w = eigenvector(&j.transpose(), lambda);
        let wv = (0..3).map(|i| w[i] * v[i]).sum();
        Some(Plane { e: coeffs.equilibrium.to_array(), v, w, wv })
    }

    /// Modulus of the in-plane coordinate of `s - E*`.
    fn amplitude(&self, s: &SuccessState) -> f64 {
        let d = s.to_array();
        ((0..3).map(|i| self.w[i] * (d[i] - self.e[i])).sum::<Complex64>() / self.wv).norm()
    }

    /// E* displaced along Re v, scaled as a fraction of the largest displacement keeping the octant.
    fn kick(&self, rel: f64) -> SuccessState {
        let re = self.v.map(|z| z.re);
        let room = (0..3).filter(|&i| re[i] != 0.0).map(|i| self.e[i] / re[i].abs()).fold(f64::INFINITY, f64::min);
        let s = rel * room;
        SuccessState::new(self.e[0] + s * re[0], self.e[1] + s * re[1], self.e[2] + s * re[2])
    }
}

/// Largest in-plane amplitude over the last `tail` fraction of the run.
fn tail_amplitude(p: &ModelParams, plane: &Plane, init: SuccessState, t_end: f64, tail: f64) -> Option<f64> {
    let traj = integrate(&SimConfig::new(*p, init, t_end)).ok()?;
    let from = t_end * (1.0 - tail);
    let amps = traj.times.iter().zip(&traj.states).filter(|(t, _)| **t >= from).map(|(_, s)| plane.amplitude(s));
    Some(amps.fold(0.0, f64::max))
}

fn supercritical_scaling() -> Result<String, String> {
    let base = ModelParams::symmetric(1.2, 0.5, 0.03, 1e-11, 0.34);
    let (ray, hp) = locate_nearby_hopf(&base).map_err(|e| e.to_string())?;
    let mask = SEARCH_RAYS.iter().find(|(n, _)| *n == ray).map(|(_, m)| *m).ok_or("unknown ray")?;
    let dir = scaling_ray(&base, &mask);
    let sigma = analyze_hopf(&hp.params).map_err(|e| e.to_string())?.sigma;
    if sigma >= 0.0 {
        return Err(format!("located point has sigma {sigma:.3e} >= 0"));
    }
    let offsets = [1e-4, 4e-4];
    let mut amps = vec![];
    for mu in offsets {
        let t = offset_on_ray(&base, &dir, hp.t, mu).ok_or(format!("no point with Re {mu:e}"))?;
        let p = base.shifted(&dir, t);
        let plane = Plane::at(&p).ok_or("no eigenplane")?;
        amps.push(tail_amplitude(&p, &plane, plane.kick(0.01), 30.0 / offsets[0], 0.05).ok_or("integration failed")?);
    }
    let ratio = amps[1] / amps[0];
    let want = (offsets[1] / offsets[0]).sqrt();
    let detail = format!(
        "sigma {sigma:.3e} on {ray} ray, amplitudes {:.3e}/{:.3e} at Re {:e}/{:e}, ratio {ratio:.3} vs {want:.3}",
        amps[0], amps[1], offsets[0], offsets[1]
    );
    if (ratio / want - 1.0).abs() <= 0.3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn subcritical_divergence() -> Result<String, String> {
    let p0 = ModelParams::from_array([
        0.764577217932795,
        5.137647806457033,
        1.8577998382538277,
        2.3450816382851114,
        0.010524415997461112,
        0.011883920447538221,
        0.005582380356385948,
        0.0018140418741648622,
    ]);
    let sigma = analyze_hopf(&p0).map_err(|e| e.to_string())?.sigma;
    if sigma <= 0.0 {
        return Err(format!("point has sigma {sigma:.3e} <= 0"));
    }
    let dir = scaling_ray(&p0, &SEARCH_RAYS[0].1);
    let re = -2e-4;
    let t = offset_on_ray(&p0, &dir, 0.0, re).ok_or("no offset point")?;
    let p = p0.shifted(&dir, t);
    let plane = Plane::at(&p).ok_or("no eigenplane")?;
    let per_rel = plane.amplitude(&plane.kick(1.0));
    let predicted = 0.5 * (-re / sigma).sqrt();
    // Backward in time the unstable cycle attracts and the real direction contracts.
    let (cycle, settled) = reverse_cycle(&p, &plane, plane.kick(predicted / 3.0 / per_rel), 12.0 / -re)
        .ok_or("reverse-time run failed")?;
    if !(settled && cycle.is_finite() && cycle / per_rel < 1.0) {
        return Err(format!("no unstable cycle found backward in time (amplitude {cycle:.3e})"));
    }
    let init = plane.kick(0.5 * cycle / per_rel);
    let start = plane.amplitude(&init);
    let end = tail_amplitude(&p, &plane, init, 2.0 / -re, 0.02).ok_or("forward run failed")?;
    let detail = format!(
        "sigma {sigma:.3e} at Re {re:e}, unstable cycle amplitude {cycle:.3e} (weakly nonlinear estimate {predicted:.3e}), inside start {start:.3e} -> {end:.3e}"
    );
    if end < 0.5 * start {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Integrate the time-reversed field with fixed steps; returns the final in-plane amplitude
/// and whether it has settled (last two windows agree to 2%).
fn reverse_cycle(p: &ModelParams, plane: &Plane, init: SuccessState, t_end: f64) -> Option<(f64, bool)> {
    let back = |y: &[f64; 3]| rhs(y, p).map(|v| -v);
    let window = 200.0;
    let mut y = init.to_array();
    let mut t = 0.0;
    let mut windows = vec![];
    while t < t_end {
        let mut peak = 0.0f64;
        for _ in 0..(window as usize) {
            y = solve_fixed(&back, y, 1.0, 10);
            if !y.iter().all(|v| v.is_finite()) {
                return None;
            }
            peak = peak.max(plane.amplitude(&SuccessState::from_array(y)));
        }
        windows.push(peak);
        t += window;
    }
    let n = windows.len();
    let (last, prev) = (windows[n - 1], windows[n - 2]);
    Some((last, (last - prev).abs() <= 0.02 * last))
}

fn hopf_behaviour() -> Outcome {
    let sup = supercritical_scaling();
    let sub = subcritical_divergence();
    let show = |r: &Result<String, String>| match r {
        Ok(s) => format!("ok: {s}"),
        Err(s) => format!("fail: {s}"),
    };
    outcome(sup.is_ok() && sub.is_ok(), format!("supercritical {}; subcritical {}", show(&sup), show(&sub)))
}

type Criterion<'a> = (u8, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let scenarios = corpus();
    let rows: Vec<Row> = scenarios.iter().flat_map(scenario_rows).collect();
    let criteria: Vec<Criterion> = vec![
        (1, "origin spectrum", Box::new(origin_spectrum)),
        (2, "equilibrium residual", Box::new(|| equilibrium_residual(&scenarios))),
        (3, "hopf case signs", Box::new(|| matrix(&rows, 3))),
        (4, "sigma oracle equivalence", Box::new(|| sigma_oracle(&rows))),
        (5, "eigenvalue real parts", Box::new(|| matrix(&rows, 5))),
        (6, "asymmetry metrics", Box::new(|| asymmetry_metrics(&scenarios))),
        (7, "zero-hopf catalog", Box::new(|| matrix(&rows, 7))),
        (8, "typeIIa infeasibility", Box::new(typeiia_scan)),
        (9, "positive-octant invariance", Box::new(positivity)),
        (10, "hopf criticality behaviour", Box::new(hopf_behaviour)),
    ];
    let mut failed = 0;
    for (id, name, run) in &criteria {
        let t0 = Instant::now();
        let o = run();
        let secs = t0.elapsed().as_secs_f64();
        if !o.pass {
            failed += 1;
        }
        println!("{} c{id:02} {name}: {} [{secs:.2} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
