//! Adaptive integration with positivity guarding and FRR-triggered interventions.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dopri::{initial_step, next_factor, step, State, Step};
use crate::error::{Error, Result};
use crate::model::{frr, rhs, ModelParams, SuccessState};

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_T_END: f64 = 2000.0;
pub const DEFAULT_MAX_STEP: f64 = 1.0;
pub const MIN_STEP: f64 = 1e-14;

const COMPONENTS: [&str; 3] = ["X", "Y", "Z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrrTarget {
    Consumer1,
    Consumer2,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrrTrigger {
    OnThresholdCross,
    OnRelaxationMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrrPolicy {
    pub threshold: f64,
    pub boost: f64,
    pub target: FrrTarget,
    pub trigger: FrrTrigger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub init: SuccessState,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub frr_policy: Option<FrrPolicy>,
}

impl SimConfig {
    pub fn new(params: ModelParams, init: SuccessState, t_end: f64) -> Self {
        SimConfig {
            params,
            init,
            t_end,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_step: DEFAULT_MAX_STEP,
            frr_policy: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let dom = |field, requirement, value| Err(Error::Domain { field, requirement, value });
        for v in self.init.to_array() {
            if !(v >= 0.0 && v.is_finite()) {
                return dom("init", "in the closed positive octant", v);
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return dom("t_end", "positive", self.t_end);
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return dom("rel_tol", "in (0, 1)", self.rel_tol);
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return dom("abs_tol", "in (0, 1)", self.abs_tol);
        }
        if !(self.max_step > 0.0) {
            return dom("max_step", "positive", self.max_step);
        }
        if let Some(pol) = &self.frr_policy {
            if !(pol.threshold > 0.0 && pol.threshold.is_finite()) {
                return dom("frr.threshold", "positive", pol.threshold);
            }
            if !(pol.boost >= 0.0 && pol.boost.is_finite()) {
                return dom("frr.boost", "non-negative", pol.boost);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    FrrTrigger,
    RelaxationMin,
    PositivityClamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SuccessState>,
    pub events: Vec<Event>,
    /// Parameters at the start of the run.
    pub params: ModelParams,
    /// Parameters after all interventions.
    pub final_params: ModelParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn min_coordinate(&self) -> f64 {
        self.states.iter().flat_map(|s| s.to_array()).fold(f64::INFINITY, f64::min)
    }
}

/// Integration stopped early; `partial` holds everything accepted before the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct Interrupted {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

pub type SimResult = std::result::Result<Trajectory, Interrupted>;

/// Integrate without interventions; any policy on `cfg` is ignored.
pub fn integrate(cfg: &SimConfig) -> SimResult {
    run(cfg, None)
}

/// Integrate while applying `cfg.frr_policy`.
pub fn integrate_with_frr(cfg: &SimConfig) -> SimResult {
    let Some(pol) = cfg.frr_policy else {
        return Err(Interrupted {
            error: Error::Precondition("no FRR policy configured".into()),
            partial: Box::new(empty(cfg)),
        });
    };
    run(cfg, Some(pol))
}

fn empty(cfg: &SimConfig) -> Trajectory {
    Trajectory { times: vec![], states: vec![], events: vec![], params: cfg.params, final_params: cfg.params }
}

struct Monitor {
    pol: FrrPolicy,
    armed: bool,
    beyond: bool,
    xs: Vec<f64>,
}

impl Monitor {
    fn median_x(&self) -> f64 {
        let mut v = self.xs.clone();
        let mid = v.len() / 2;
        let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
        *m
    }

    fn boost(&mut self, p: &mut ModelParams, ratio: f64, t: f64, trigger: &str) -> Event {
        let name = match self.pol.target {
            FrrTarget::Consumer1 => "c",
            FrrTarget::Consumer2 => "d",
            FrrTarget::Auto if ratio < 1.0 => "c",
            FrrTarget::Auto => "d",
        };
        let slot = if name == "c" { &mut p.c } else { &mut p.d };
        let old = *slot;
        *slot += self.pol.boost;
        self.armed = false;
        self.beyond = false;
        Event {
            t,
            kind: EventKind::FrrTrigger,
            payload: json!({"coefficient": name, "old": old, "new": *slot, "frr": ratio, "trigger": trigger}),
        }
    }
}

fn frr_of(y: &State, p: &ModelParams) -> Option<f64> {
    frr(&SuccessState::from_array(*y), p)
}

/// Time in `(s.t0, s.t1()]` where FRR falls through `thr`, by bisection on the dense output.
fn locate_cross(s: &Step, p: &ModelParams, thr: f64) -> f64 {
    let (mut lo, mut hi) = (s.t0, s.t1());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match frr_of(&s.dense(mid), p) {
            Some(r) if r >= thr => lo = mid,
            _ => hi = mid,
        }
    }
    hi
}

fn run(cfg: &SimConfig, policy: Option<FrrPolicy>) -> SimResult {
    let mut traj = empty(cfg);
    if let Err(error) = cfg.validate() {
        return Err(Interrupted { error, partial: Box::new(traj) });
    }
    let (rtol, atol) = (cfg.rel_tol, cfg.abs_tol);
    let mut params = cfg.params;
    let mut t = 0.0;
    let mut y = cfg.init.to_array();
    traj.times.push(t);
    traj.states.push(cfg.init);

    let mut mon = policy.map(|pol| Monitor { pol, armed: true, beyond: false, xs: vec![y[0]] });

    let mut k1 = rhs(&y, &params);
    let mut h = initial_step(&|s: &State| rhs(s, &params), &y, &k1, rtol, atol, cfg.max_step);
    let mut rejected = false;

    while t < cfg.t_end {
        let remaining = cfg.t_end - t;
        if remaining <= MIN_STEP * t.abs().max(1.0) {
            break;
        }
        h = h.min(cfg.max_step).min(remaining);
        if h < MIN_STEP {
            traj.final_params = params;
            return Err(Interrupted { error: Error::Stiffness { t, h }, partial: Box::new(traj) });
        }
        let f = |s: &State| rhs(s, &params);
        let s = step(&f, t, &y, &k1, h, rtol, atol);
        if !(s.err <= 1.0) || !s.y1.iter().all(|v| v.is_finite()) {
            let fac = if s.err.is_finite() { next_factor(s.err, true) } else { 0.2 };
            h *= fac;
            rejected = true;
            continue;
        }
        let mut y1 = s.y1;
        let floor = -10.0 * atol;
        if y1.iter().any(|&v| v < floor) {
            h *= 0.5;
            rejected = true;
            continue;
        }
        let mut t1 = s.t1();
        let mut clamped = Vec::new();
        for (i, v) in y1.iter_mut().enumerate() {
            if *v < 0.0 {
                clamped.push((i, *v));
                *v = 0.0;
            }
        }
        let mut refresh = !clamped.is_empty();
        let mut new_events = Vec::new();
        for (i, v) in clamped {
            new_events.push(Event {
                t: t1,
                kind: EventKind::PositivityClamp,
                payload: json!({"component": COMPONENTS[i], "value": v}),
            });
        }

        if let Some(m) = mon.as_mut() {
            let thr = m.pol.threshold;
            let before = frr_of(&y, &params);
            let mut after = frr_of(&y1, &params);
            if m.pol.trigger == FrrTrigger::OnThresholdCross && m.armed {
                if let (Some(r0), Some(r1)) = (before, after) {
                    if r0 >= thr && r1 < thr {
                        t1 = locate_cross(&s, &params, thr);
                        y1 = s.dense(t1).map(|v| v.max(0.0));
                        after = frr_of(&y1, &params);
                        let ev = m.boost(&mut params, after.unwrap_or(r1), t1, "threshold_cross");
                        new_events.push(ev);
                        refresh = true;
                    }
                }
            }
            if let Some(r) = after {
                if !m.armed && r > 2.0 * thr {
                    m.armed = true;
                }
                if m.armed && r < thr {
                    m.beyond = true;
                }
            }
            m.xs.push(y1[0]);
            let n = traj.states.len();
            if n >= 2 {
                let (xa, xb) = (traj.states[n - 2].x, traj.states[n - 1].x);
                if xa > xb && xb <= y1[0] && xb < m.median_x() {
                    let tm = traj.times[n - 1];
                    new_events.push(Event { t: tm, kind: EventKind::RelaxationMin, payload: json!({"x": xb}) });
                    if m.pol.trigger == FrrTrigger::OnRelaxationMinimum && m.armed && m.beyond {
                        let ratio = frr_of(&y1, &params).unwrap_or(0.0);
                        let ev = m.boost(&mut params, ratio, t1, "relaxation_minimum");
                        new_events.push(ev);
                        refresh = true;
                    }
                }
            }
        }

        t = t1;
        y = y1;
        traj.times.push(t);
        traj.states.push(SuccessState::from_array(y));
        traj.events.extend(new_events);
        k1 = if refresh { rhs(&y, &params) } else { s.k7 };
        h *= next_factor(s.err, rejected);
        rejected = false;
    }
    traj.final_params = params;
    Ok(traj)
}

/// Local minima of X below the median of X, refined by a parabola through three samples.
pub fn detect_relaxation(traj: &Trajectory) -> Vec<Event> {
    let n = traj.len();
    if n < 3 {
        return vec![];
    }
    let mut xs: Vec<f64> = traj.states.iter().map(|s| s.x).collect();
    let mid = n / 2;
    let median = *xs.select_nth_unstable_by(mid, f64::total_cmp).1;
    let x = |i: usize| traj.states[i].x;
    let mut out = Vec::new();
    for i in 1..n - 1 {
        if !(x(i - 1) > x(i) && x(i) <= x(i + 1) && x(i) < median) {
            continue;
        }
        let (t0, t1, t2) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
        let (x0, x1, x2) = (x(i - 1), x(i), x(i + 1));
        let d01 = (x1 - x0) / (t1 - t0);
        let d12 = (x2 - x1) / (t2 - t1);
        let curv = (d12 - d01) / (t2 - t0);
        let (tv, xv) = if curv > 0.0 {
            let tv = 0.5 * (t0 + t1) - d01 / (2.0 * curv);
            let tv = tv.clamp(t0, t2);
            let xv = x1 + d01 * (tv - t1) + curv * (tv - t0) * (tv - t1);
            (tv, xv)
        } else {
            (t1, x1)
        };
        out.push(Event { t: tv, kind: EventKind::RelaxationMin, payload: json!({"x": xv}) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn h1b() -> ModelParams {
        ModelParams::symmetric(1.2, 0.5, 0.03, 1e-11, 0.34)
    }

    #[test]
    fn equilibria_stay_put() {
        for init in [SuccessState::ORIGIN, SuccessState::new(1.0, 0.0, 0.0)] {
            let tr = integrate(&SimConfig::new(h1b(), init, 50.0)).unwrap();
            assert!(tr.states.iter().all(|s| *s == init));
        }
    }

    #[test]
    fn times_increase_and_stay_positive() {
        let tr = integrate(&SimConfig::new(h1b(), SuccessState::new(0.0001, 0.399, 1.0), 300.0)).unwrap();
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert!(tr.min_coordinate() >= -1e-9);
        assert_eq!(tr.times.len(), tr.states.len());
    }

    #[test]
    fn relaxation_of_cosine() {
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let states = times.iter().map(|&t| SuccessState::new(0.5 + 0.4 * t.cos(), 0.0, 0.0)).collect();
        let tr = Trajectory { times, states, events: vec![], params: h1b(), final_params: h1b() };
        let ev = detect_relaxation(&tr);
        assert_eq!(ev.len(), 2);
        assert!((ev[0].t - PI).abs() < 1e-3 && (ev[1].t - 3.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn constant_trajectory_has_no_relaxation() {
        let tr = integrate(&SimConfig::new(h1b(), SuccessState::ORIGIN, 10.0)).unwrap();
        assert!(detect_relaxation(&tr).is_empty());
    }

    #[test]
    fn missing_policy_is_rejected() {
        let r = integrate_with_frr(&SimConfig::new(h1b(), SuccessState::ORIGIN, 1.0));
        assert!(matches!(r, Err(Interrupted { error: Error::Precondition(_), .. })));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = SimConfig::new(h1b(), SuccessState::new(-0.1, 0.0, 0.0), 1.0);
        assert!(integrate(&cfg).is_err());
        cfg.init = SuccessState::ORIGIN;
        cfg.rel_tol = 2.0;
        assert!(integrate(&cfg).is_err());
    }
}
