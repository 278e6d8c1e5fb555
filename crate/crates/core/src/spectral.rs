//! Jacobians, the characteristic cubic and the Hopf / zero-Hopf loci.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{expand_at_equilibrium, ExpansionCoeffs};
use crate::model::ModelParams;

pub const TOL_HOPF: f64 = 1e-8;
pub const TOL_ZERO: f64 = 1e-8;
/// Required |r_hopf| at a located Hopf point.
pub const HOPF_RESIDUAL_TOL: f64 = 1e-10;

/// `lambda^3 + p_a lambda^2 + p_b lambda + p_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
}

impl CharPoly {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z + self.p_a) * z + self.p_b) * z + self.p_c
    }

    fn deriv(&self, z: Complex64) -> Complex64 {
        (z * 3.0 + 2.0 * self.p_a) * z + self.p_b
    }

    /// `(lambda - r1)(lambda - r2)(lambda - r3)` for real-coefficient root sets.
    pub fn from_roots(r: &[Complex64; 3]) -> CharPoly {
        let s1 = r[0] + r[1] + r[2];
        let s2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let s3 = r[0] * r[1] * r[2];
        CharPoly { p_a: -s1.re, p_b: s2.re, p_c: -s3.re }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    SaddleIndex1,
    StableFocusNode,
    UnstableFocusNode,
    HopfCandidate,
    ZeroHopfCandidate,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub charpoly: CharPoly,
    /// Complex pair first (positive imaginary part leading), then the real root.
    pub roots: [Complex64; 3],
    pub classification: Classification,
    /// Imaginary part of the leading root when a complex pair is present.
    pub omega0: Option<f64>,
    /// The real root when a complex pair is present.
    pub lambda3: Option<f64>,
}

impl SpectralReport {
    pub fn has_complex_pair(&self) -> bool {
        self.omega0.is_some()
    }

    /// Real part of the complex pair.
    pub fn pair_real_part(&self) -> Option<f64> {
        self.omega0.map(|_| self.roots[0].re)
    }
}

pub fn jacobian_origin(p: &ModelParams) -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -p.mu, -p.nu))
}

pub fn jacobian_positive(coeffs: &ExpansionCoeffs) -> Matrix3<f64> {
    let l = coeffs.linear_block();
    Matrix3::from_fn(|i, j| l[i][j])
}

pub fn charpoly(j: &Matrix3<f64>) -> CharPoly {
    let minors = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)] + j[(0, 0)] * j[(2, 2)] - j[(0, 2)] * j[(2, 0)]
        + j[(1, 1)] * j[(2, 2)]
        - j[(1, 2)] * j[(2, 1)];
    let det = j[(0, 0)] * (j[(1, 1)] * j[(2, 2)] - j[(1, 2)] * j[(2, 1)])
        - j[(0, 1)] * (j[(1, 0)] * j[(2, 2)] - j[(1, 2)] * j[(2, 0)])
        + j[(0, 2)] * (j[(1, 0)] * j[(2, 1)] - j[(1, 1)] * j[(2, 0)]);
    CharPoly { p_a: -j.trace(), p_b: minors, p_c: -det }
}

/// Safeguarded Newton for a real root inside the Cauchy bound.
fn real_root(p: &CharPoly) -> f64 {
    let f = |x: f64| ((x + p.p_a) * x + p.p_b) * x + p.p_c;
    let df = |x: f64| (3.0 * x + 2.0 * p.p_a) * x + p.p_b;
    let bound = 1.0 + p.p_a.abs().max(p.p_b.abs()).max(p.p_c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = 0.0;
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || next == lo || next == hi {
            return next;
        }
        x = next;
    }
    x
}

fn polish_root(p: &CharPoly, z: Complex64) -> Complex64 {
    let d = p.deriv(z);
    if d.norm() == 0.0 {
        return z;
    }
    let cand = z - p.eval(z) / d;
    if cand.is_nan() || p.eval(cand).norm() >= p.eval(z).norm() {
        z
    } else {
        cand
    }
}

/// All three roots of the monic cubic.
///
/// A real root is found by safeguarded Newton and deflated; the residual
/// quadratic is solved in stable form and every root receives one Newton
/// polishing step on the undeflated cubic.
pub fn solve_cubic(p: &CharPoly) -> [Complex64; 3] {
    let r = real_root(p);
    let q1 = p.p_a + r;
    let q0 = p.p_b + r * q1;
    let disc = q1 * q1 - 4.0 * q0;
    let r = polish_root(p, Complex64::new(r, 0.0)).re;
    if disc < 0.0 {
        let z = Complex64::new(-0.5 * q1, 0.5 * (-disc).sqrt());
        let z = polish_root(p, z);
        let z = Complex64::new(z.re, z.im.abs());
        [z, z.conj(), Complex64::new(r, 0.0)]
    } else {
        let s = -0.5 * (q1 + q1.signum() * disc.sqrt());
        let (u, v) = if s == 0.0 { (0.0, 0.0) } else { (s, q0 / s) };
        let mut reals = [r, polish_root(p, u.into()).re, polish_root(p, v.into()).re];
        reals.sort_by(f64::total_cmp);
        reals.map(|x| Complex64::new(x, 0.0))
    }
}

pub fn classify(roots: &[Complex64; 3]) -> (Classification, Option<f64>, Option<f64>) {
    let pair = roots[0].im > 0.0;
    if pair {
        let (re, om, l3) = (roots[0].re, roots[0].im, roots[2].re);
        if re.abs() <= TOL_HOPF {
            let class =
                if l3.abs() <= TOL_ZERO { Classification::ZeroHopfCandidate } else { Classification::HopfCandidate };
            return (class, Some(om), Some(l3));
        }
    }
    let pos = roots.iter().filter(|z| z.re > 0.0).count();
    let neg = roots.iter().filter(|z| z.re < 0.0).count();
    let class = match (pos, neg) {
        (0, 3) => Classification::StableFocusNode,
        (3, 0) => Classification::UnstableFocusNode,
        (1, 2) => Classification::SaddleIndex1,
        _ => Classification::Other,
    };
    if pair {
        (class, Some(roots[0].im), Some(roots[2].re))
    } else {
        (class, None, None)
    }
}

pub fn spectral_report(j: &Matrix3<f64>) -> SpectralReport {
    let cp = charpoly(j);
    let roots = solve_cubic(&cp);
    let (classification, omega0, lambda3) = classify(&roots);
    SpectralReport { charpoly: cp, roots, classification, omega0, lambda3 }
}

/// `(r_hopf, (p_a, p_c))`.
pub fn hopf_residuals(p: &CharPoly) -> (f64, (f64, f64)) {
    (p.p_c - p.p_a * p.p_b, (p.p_a, p.p_c))
}

/// Expansion and spectrum at the interior equilibrium of `p`.
pub fn analyze_point(p: &ModelParams) -> Result<(ExpansionCoeffs, SpectralReport)> {
    p.validate()?;
    let coeffs = expand_at_equilibrium(p)?;
    let spec = spectral_report(&jacobian_positive(&coeffs));
    Ok((coeffs, spec))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub params: ModelParams,
    /// Ray coordinate of the located point.
    pub t: f64,
    pub r_hopf: f64,
    /// Central-difference estimate of d(Re lambda)/dt.
    pub transversality: f64,
    pub spectrum: SpectralReport,
}

fn ray_sample(p0: &ModelParams, dir: &[f64; 8], t: f64) -> Result<(f64, CharPoly, SpectralReport)> {
    let (_, spec) = analyze_point(&p0.shifted(dir, t))?;
    let (r, _) = hopf_residuals(&spec.charpoly);
    Ok((r, spec.charpoly, spec))
}

fn pair_re(spec: &SpectralReport) -> f64 {
    spec.pair_real_part().unwrap_or(f64::NAN)
}

/// Locate a Hopf point on the ray `p0 + t * dir`, `t` in `bracket`.
pub fn hopf_locate(p0: &ModelParams, dir: &[f64; 8], bracket: (f64, f64)) -> Result<HopfPoint> {
    let (mut lo, mut hi) = bracket;
    let (rlo, cplo, _) = ray_sample(p0, dir, lo)?;
    let (rhi, cphi, _) = ray_sample(p0, dir, hi)?;
    if !(rlo.signum() != rhi.signum() || rlo == 0.0 || rhi == 0.0) {
        return Err(Error::NotBracketed { lo, hi });
    }
    if cplo.p_b <= 0.0 || cphi.p_b <= 0.0 {
        return Err(Error::Precondition("p_b must be positive along the bracket".into()));
    }
    let slo = rlo.signum();
    let (mut best_t, mut best_r) = if rlo.abs() < rhi.abs() { (lo, rlo) } else { (hi, rhi) };
    for _ in 0..200 {
        if best_r == 0.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let (rm, cp, _) = ray_sample(p0, dir, mid)?;
        if cp.p_b <= 0.0 {
            return Err(Error::Precondition("p_b must be positive along the bracket".into()));
        }
        if rm.abs() < best_r.abs() {
            best_t = mid;
            best_r = rm;
        }
        if rm.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_r.abs() > HOPF_RESIDUAL_TOL {
        return Err(Error::NotConverged { iterations: 200, residual: best_r.abs() });
    }
    let h = 1e-6 * (bracket.1 - bracket.0).abs();
    let (_, _, sp) = ray_sample(p0, dir, best_t + h)?;
    let (_, _, sm) = ray_sample(p0, dir, best_t - h)?;
    let transversality = (pair_re(&sp) - pair_re(&sm)) / (2.0 * h);
    if transversality == 0.0 || !transversality.is_finite() {
        return Err(Error::NonTransversal(transversality));
    }
    let (_, _, spectrum) = ray_sample(p0, dir, best_t)?;
    Ok(HopfPoint { params: p0.shifted(dir, best_t), t: best_t, r_hopf: best_r, transversality, spectrum })
}

/// Among consecutive samples `ts` with a valid spectrum and `p_b > 0`, the
/// sign change of `r_hopf` whose midpoint is closest to `t = 0`.
pub fn find_hopf_bracket(p0: &ModelParams, dir: &[f64; 8], ts: &[f64]) -> Option<(f64, f64)> {
    let samples: Vec<Option<f64>> = ts
        .iter()
        .map(|&t| match ray_sample(p0, dir, t) {
            Ok((r, cp, _)) if cp.p_b > 0.0 && r.is_finite() => Some(r),
            _ => None,
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for k in 1..ts.len() {
        if let (Some(r0), Some(r1)) = (samples[k - 1], samples[k]) {
            if r0.signum() != r1.signum() {
                let mid = 0.5 * (ts[k - 1] + ts[k]).abs();
                if best.is_none_or(|(a, b)| mid < 0.5 * (a + b).abs()) {
                    best = Some((ts[k - 1], ts[k]));
                }
            }
        }
    }
    best
}

/// Parameter groups scaled, in order, when searching for a nearby Hopf point.
pub const SEARCH_RAYS: [(&str, [bool; 8]); 5] = [
    ("mu,nu", [false, false, false, false, true, true, false, false]),
    ("c,d", [false, false, true, true, false, false, false, false]),
    ("beta", [false, false, false, false, false, false, false, true]),
    ("alpha", [false, false, false, false, false, false, true, false]),
    ("a,b", [true, true, false, false, false, false, false, false]),
];

/// Ray direction that scales the selected parameters of `p` (so `t` is multiplier minus one).
pub fn scaling_ray(p: &ModelParams, mask: &[bool; 8]) -> [f64; 8] {
    let v = p.to_array();
    std::array::from_fn(|i| if mask[i] { v[i] } else { 0.0 })
}

/// Hopf point closest to `p` along the first of [`SEARCH_RAYS`] that brackets one,
/// scanning multipliers `2^(k/4)` for `k` in `-24..=24`.
pub fn locate_nearby_hopf(p: &ModelParams) -> Result<(&'static str, HopfPoint)> {
    p.validate()?;
    let ts: Vec<f64> = (-24..=24).map(|k| 2f64.powf(k as f64 / 4.0) - 1.0).collect();
    let mut last = Error::NotBracketed { lo: ts[0], hi: ts[ts.len() - 1] };
    for (name, mask) in SEARCH_RAYS {
        let dir = scaling_ray(p, &mask);
        if let Some(br) = find_hopf_bracket(p, &dir, &ts) {
            match hopf_locate(p, &dir, br) {
                Ok(hp) => return Ok((name, hp)),
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}
