//! Interior equilibrium and the positivity regions.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::model::{jacobian, rhs, ModelParams, SuccessState};

/// Tolerance on the max-norm of the field at a reported equilibrium.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityRegion {
    RegionI,
    RegionII,
    OtherPositive,
    NotPositive,
}

/// Outcome of the two displayed region tests for a given X*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub origin: SuccessState,
    /// Interior equilibria, smallest X* first.
    pub positive: Vec<SuccessState>,
    pub positivity_region: PositivityRegion,
    /// Largest max-norm residual over `positive` (0 when empty).
    pub residual: f64,
}

impl EquilibriumSet {
    /// The interior equilibrium used by downstream analyses.
    pub fn primary(&self) -> Option<SuccessState> {
        self.positive.first().copied()
    }
}

/// Coefficients `[c0, c1, c2, c3]` of the cubic whose roots are the X* candidates.
///
/// Obtained by eliminating Y and Z from the three per-capita rates:
/// `ab(1-X)(1+aX)(1+bX) - alpha(dX - nu(1+bX)) - beta(cX - mu(1+aX)) = 0`
/// with `ab = alpha*beta`.
pub fn xstar_cubic(p: &ModelParams) -> [f64; 4] {
    let ab = p.alpha * p.beta;
    [
        ab + p.alpha * p.nu + p.beta * p.mu,
        ab * (p.a + p.b - 1.0) - p.alpha * (p.d - p.nu * p.b) - p.beta * (p.c - p.mu * p.a),
        ab * (p.a * p.b - p.a - p.b),
        -ab * p.a * p.b,
    ]
}

fn cubic_factored(p: &ModelParams, x: f64) -> f64 {
    let ab = p.alpha * p.beta;
    ab * (1.0 - x) * (1.0 + p.a * x) * (1.0 + p.b * x)
        - p.alpha * (p.d * x - p.nu * (1.0 + p.b * x))
        - p.beta * (p.c * x - p.mu * (1.0 + p.a * x))
}

/// Cardano closed form for X*, evaluated in complex arithmetic on principal branches.
///
/// Returns `None` when the result is not real to working precision. Severely
/// ill-conditioned when `alpha * beta` is small; use [`positive_equilibrium`].
pub fn closed_form_xstar(p: &ModelParams) -> Option<f64> {
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (mu, nu, al, be) = (p.mu, p.nu, p.alpha, p.beta);
    let ups = a * al * be;
    let xi = al * b * be;
    let ca = b * ups;
    let cb = -b * ups + xi + ups;
    let cc = al * be * (1.0 - a - b) + al * d - al * b * nu + be * c - a * be * mu;
    let cd = -(al * be + al * nu + be * mu);
    let pp = 3.0 * ca * cc - cb * cb;
    let qq = -2.0 * cb.powi(3) + 9.0 * ca * cb * cc - 27.0 * ca * ca * cd;
    let root = (Complex64::new(4.0 * pp.powi(3) + qq * qq, 0.0)).sqrt();
    let w = (root + qq).powf(1.0 / 3.0);
    if w.norm() == 0.0 {
        return None;
    }
    let cbrt2 = 2f64.cbrt();
    let x = -cb / (3.0 * ca) + w / (3.0 * cbrt2 * ca) - cbrt2 * pp / (3.0 * ca * w);
    if !x.re.is_finite() || x.im.abs() > 1e-8 * x.re.abs().max(1.0) {
        None
    } else {
        Some(x.re)
    }
}

/// Real roots of the X* cubic in (0, 1], ascending.
///
/// Any interior equilibrium has X* < 1 because the resource row forces
/// `1 - X = Y/(1+aX) + Z/(1+bX) >= 0`. The interval is split at the critical
/// points of the cubic so that each piece is monotone, then bisected.
fn xstar_roots(p: &ModelParams) -> Vec<f64> {
    let [_, c1, c2, c3] = xstar_cubic(p);
    let mut cuts = vec![0.0, 1.0];
    // derivative 3 c3 x^2 + 2 c2 x + c1
    for r in real_quadratic_roots(3.0 * c3, 2.0 * c2, c1) {
        if r > 0.0 && r < 1.0 {
            cuts.push(r);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (cubic_factored(p, lo), cubic_factored(p, hi));
        if fhi == 0.0 {
            out.push(hi);
            continue;
        }
        if flo.signum() == fhi.signum() || flo == 0.0 {
            continue;
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = cubic_factored(p, mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out.dedup();
    out
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Recover (Y, Z) from X without dividing by the smaller competition coefficient.
fn complete_state(p: &ModelParams, x: f64) -> SuccessState {
    let da = 1.0 + p.a * x;
    let db = 1.0 + p.b * x;
    // D(X) = beta*Y - alpha*Z, written so that it vanishes exactly in the symmetric family
    let dd = x * ((p.d - p.c) + x * (p.a * p.d - p.b * p.c)) / (da * db) + (p.mu - p.nu);
    if p.alpha <= p.beta {
        let z = db * (1.0 - x - dd / (p.beta * da)) / (1.0 + p.alpha * db / (p.beta * da));
        let y = (p.alpha * z + dd) / p.beta;
        SuccessState::new(x, y, z)
    } else {
        let y = da * (1.0 - x + dd / (p.alpha * db)) / (1.0 + p.beta * da / (p.alpha * db));
        let z = (p.beta * y - dd) / p.alpha;
        SuccessState::new(x, y, z)
    }
}

fn residual(s: &SuccessState, p: &ModelParams) -> f64 {
    let f = rhs(&s.to_array(), p);
    f[0].abs().max(f[1].abs()).max(f[2].abs())
}

/// The field evaluated in double-double arithmetic at an f64 point, rounded back to f64.
fn accurate_rhs(v: &[f64; 3], p: &ModelParams) -> [f64; 3] {
    let t = TwoFloat::from;
    let one = t(1.0);
    let [x, y, z] = v.map(t);
    let fy = x / (one + t(p.a) * x);
    let fz = x / (one + t(p.b) * x);
    [
        x * (one - x) - fy * y - fz * z,
        y * (t(p.c) * fy - t(p.mu) - t(p.alpha) * z),
        z * (t(p.d) * fz - t(p.nu) - t(p.beta) * y),
    ]
    .map(|r| r.hi())
}

fn max_abs(f: [f64; 3]) -> f64 {
    f[0].abs().max(f[1].abs()).max(f[2].abs())
}

/// Iterative refinement: f64 Newton steps driven by an accurate residual, kept only while they reduce it.
///
/// Near a consumer threshold (cX/(1+aX) close to mu) the plain f64 residual is
/// cancellation noise, which would leave Y* or Z* with few correct digits.
fn polish(s: SuccessState, p: &ModelParams) -> SuccessState {
    let mut best = s;
    let mut best_r = max_abs(accurate_rhs(&s.to_array(), p));
    for _ in 0..8 {
        if best_r == 0.0 {
            break;
        }
        let v = best.to_array();
        let j = Matrix3::from_fn(|i, k| jacobian(&v, p)[i][k]);
        let f = Vector3::from(accurate_rhs(&v, p));
        let Some(step) = j.lu().solve(&f) else { break };
        let cand = SuccessState::new(v[0] - step[0], v[1] - step[1], v[2] - step[2]);
        if !cand.is_finite() || cand == best {
            break;
        }
        let r = max_abs(accurate_rhs(&cand.to_array(), p));
        if r < best_r {
            best = cand;
            best_r = r;
        } else {
            break;
        }
    }
    best
}

/// Interior equilibria of the model and their positivity classification.
///
/// Never fails: when no interior equilibrium exists `positive` is empty.
pub fn positive_equilibrium(p: &ModelParams) -> EquilibriumSet {
    let mut positive = Vec::new();
    let mut worst = 0.0f64;
    if p.validate().is_ok() {
        for x in xstar_roots(p) {
            let s = polish(complete_state(p, x), p);
            let r = residual(&s, p);
            if s.x > 0.0 && s.y >= 0.0 && s.z >= 0.0 && r <= RESIDUAL_TOL {
                positive.push(s);
                worst = worst.max(r);
            }
        }
    }
    positive.sort_by(|u, v| u.x.total_cmp(&v.x));
    let positivity_region = match positive.first() {
        None => PositivityRegion::NotPositive,
        Some(e) => match region_predicates(p, e.x) {
            Region::I => PositivityRegion::RegionI,
            Region::II => PositivityRegion::RegionII,
            Region::Other => PositivityRegion::OtherPositive,
        },
    };
    EquilibriumSet { origin: SuccessState::ORIGIN, positive, positivity_region, residual: worst }
}

fn region_one(p: &ModelParams, xstar: f64) -> bool {
    let (a, b, c, d, mu, nu, al) = (p.a, p.b, p.c, p.d, p.mu, p.nu, p.alpha);
    if !(a > 1.0 && b >= a) {
        return false;
    }
    let nu_max = (-al * d - d * mu) / (a * mu - b * mu - c);
    let rad = (al * a * a * d + 4.0 * a * a * mu * nu - 4.0 * a * b * mu * nu - 4.0 * a * c * nu
        + 2.0 * al * a * d
        + 4.0 * a * d * mu
        + al * d)
        / (a * a * al * d);
    if rad < 0.0 {
        return false;
    }
    let x_max = 0.5 * rad.sqrt() + (a - 1.0) / (2.0 * a);
    nu > 0.0 && nu <= nu_max && xstar > 0.0 && xstar <= x_max
}

fn region_two(p: &ModelParams, xstar: f64) -> bool {
    let (a, b, c, d, mu, nu, be) = (p.a, p.b, p.c, p.d, p.mu, p.nu, p.beta);
    if !(b > 1.0 && a >= b) {
        return false;
    }
    let mu_max = (be * c + c * nu) / (a * nu - b * nu + d);
    let rad = (-4.0 * a * b * mu * nu + be * b * b * c + 4.0 * b * b * mu * nu + 2.0 * be * b * c + 4.0 * b * c * nu
        - 4.0 * b * d * mu
        + be * c)
        / (b * b * be * c);
    if rad < 0.0 {
        return false;
    }
    let x_max = 0.5 * rad.sqrt() + (b - 1.0) / (2.0 * b);
    mu > 0.0 && mu <= mu_max && xstar > 0.0 && xstar <= x_max
}

/// Region I is tested first, then Region II.
pub fn region_predicates(p: &ModelParams, xstar: f64) -> Region {
    if !xstar.is_finite() {
        return Region::Other;
    }
    if region_one(p, xstar) {
        Region::I
    } else if region_two(p, xstar) {
        Region::II
    } else {
        Region::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_family_has_equal_consumers() {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 0.1, 0.1);
        let e = positive_equilibrium(&p).primary().unwrap();
        assert!((e.y - e.z).abs() < 1e-14);
        assert!(positive_equilibrium(&p).residual <= RESIDUAL_TOL);
    }

    #[test]
    fn tiny_alpha_is_resolved() {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 1e-11, 0.34);
        let set = positive_equilibrium(&p);
        let e = set.primary().unwrap();
        assert!(set.residual <= RESIDUAL_TOL);
        // X* solves cX/(1+aX) = mu + alpha Z to leading order
        assert!((e.x - 0.03 / (0.5 - 0.036)).abs() < 1e-9);
    }

    #[test]
    fn no_interior_point_when_consumers_starve() {
        // c X/(1+aX) < mu on (0, 1]: consumers cannot persist
        let p = ModelParams::new(1.0, 1.0, 0.05, 0.05, 0.1, 0.1, 0.5, 0.5);
        let set = positive_equilibrium(&p);
        assert!(set.positive.is_empty());
        assert_eq!(set.positivity_region, PositivityRegion::NotPositive);
    }

    #[test]
    fn closed_form_agrees_on_well_scaled_input() {
        let p = ModelParams::new(1.4, 1.1, 0.9, 1.3, 0.1, 0.15, 0.6, 0.8);
        let e = positive_equilibrium(&p).primary().unwrap();
        let roots: Vec<f64> = xstar_roots(&p);
        let cf = closed_form_xstar(&p).unwrap();
        let [c0, c1, c2, c3] = xstar_cubic(&p);
        let pv = c0 + cf * (c1 + cf * (c2 + cf * c3));
        assert!(pv.abs() < 1e-10, "closed form is not a root: {pv}");
        assert!(roots.iter().any(|r| (r - e.x).abs() < 1e-12));
    }

    #[test]
    fn region_examples() {
        // a = b = 2 with small nu: Region I
        let p = ModelParams::new(2.0, 2.0, 1.0, 1.0, 0.1, 0.01, 0.1, 0.1);
        assert_eq!(region_predicates(&p, 0.2), Region::I);
        // a = b < 1 fails both
        let q = ModelParams::new(0.5, 0.5, 1.0, 1.0, 0.1, 0.01, 0.1, 0.1);
        assert_eq!(region_predicates(&q, 0.2), Region::Other);
        // nu too large for Region I, mu small: Region II
        let r = ModelParams::new(2.0, 2.0, 1.0, 1.0, 0.01, 0.5, 0.1, 0.1);
        assert_eq!(region_predicates(&r, 0.2), Region::II);
    }
}
