//! Zero-Hopf reduction to the planar normal form and its catalog.
//!
//! After averaging over the angle, the quadratic truncation in cylindrical
//! coordinates reads `r' = a1 z r`, `z' = c1 r^2 + c3 z^2`. Rescaling with
//! `r_ = sqrt|c1 c3| r`, `z_ = -c3 z` gives
//! `r_' = a r_ z_`, `z_' = b r_^2 - z_^2` with `a = -a1/c3`, `b = -sign(c1 c3)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ExpansionCoeffs;
use crate::hopf::{eigenvector, StandardForm};
use crate::model::ModelParams;
use crate::spectral::{analyze_point, hopf_residuals, Classification, SpectralReport};

pub const REDUCTION_FLOOR: f64 = 1e-10;
pub const CATALOG_BOUNDARY_TOL: f64 = 1e-9;
pub const ZH_RESIDUAL_TOL: f64 = 1e-9;
pub const MAX_NEWTON_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatalogType {
    TypeI,
    TypeIIa,
    TypeIIb,
    TypeIII,
    TypeIVa,
    TypeIVb,
}

impl CatalogType {
    pub fn label(self) -> &'static str {
        match self {
            CatalogType::TypeI => "I",
            CatalogType::TypeIIa => "IIa",
            CatalogType::TypeIIb => "IIb",
            CatalogType::TypeIII => "III",
            CatalogType::TypeIVa => "IVa",
            CatalogType::TypeIVb => "IVb",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            CatalogType::TypeI,
            CatalogType::TypeIIa,
            CatalogType::TypeIIb,
            CatalogType::TypeIII,
            CatalogType::TypeIVa,
            CatalogType::TypeIVb,
        ]
        .into_iter()
        .find(|t| t.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroHopfNormalForm {
    pub a1: f64,
    pub c1: f64,
    pub c3: f64,
    pub nf_a: f64,
    pub nf_b: i8,
    pub catalog: CatalogType,
}

pub fn catalog_classify(nf_a: f64, nf_b: i8) -> Result<CatalogType> {
    if nf_b != 1 && nf_b != -1 {
        return Err(Error::Precondition(format!("nf_b must be +1 or -1, got {nf_b}")));
    }
    if !nf_a.is_finite() || nf_a.abs() <= CATALOG_BOUNDARY_TOL || (nf_a + 1.0).abs() <= CATALOG_BOUNDARY_TOL {
        return Err(Error::BoundaryCase(nf_a));
    }
    Ok(match (nf_b, nf_a > 0.0, nf_a > -1.0) {
        (1, true, _) => CatalogType::TypeI,
        (1, false, true) => CatalogType::TypeIIa,
        (1, false, false) => CatalogType::TypeIIb,
        (_, true, _) => CatalogType::TypeIII,
        (_, false, true) => CatalogType::TypeIVa,
        (_, false, false) => CatalogType::TypeIVb,
    })
}

/// Averaged quadratic coefficients `(a1, c1, c3)` read off the monomials of the standard form.
pub fn reduction_coefficients(sf: &StandardForm) -> (f64, f64, f64) {
    let [f, g, h] = &sf.fgh;
    let a1 = 0.5 * (f.get(1, 0, 1) + g.get(0, 1, 1));
    let c1 = 0.5 * (h.get(2, 0, 0) + h.get(0, 2, 0));
    let c3 = h.get(0, 0, 2);
    (a1, c1, c3)
}

/// The same coefficients by sampling the field on circles and averaging over the angle.
///
/// `amp` sets the sampling radius and height; the odd/even combinations
/// below cancel the linear part and every other quadratic monomial.
pub fn averaging_oracle(sf: &StandardForm, amp: f64) -> (f64, f64, f64) {
    const N: usize = 64;
    let [f, g, h] = &sf.fgh;
    let avg = |r: f64, z: f64| -> (f64, f64) {
        let mut rdot = 0.0;
        let mut zdot = 0.0;
        for k in 0..N {
            let th = 2.0 * PI * k as f64 / N as f64;
            let (s, c) = th.sin_cos();
            let pt = [r * c, r * s, z];
            rdot += c * f.eval(pt) + s * g.eval(pt);
            zdot += h.eval(pt);
        }
        (rdot / N as f64, zdot / N as f64)
    };
    let (r, z) = (amp, amp);
    let a1 = (avg(r, z).0 - avg(r, -z).0) / (2.0 * r * z);
    let c1 = (avg(r, 0.0).1 + avg(-r, 0.0).1) / (2.0 * r * r);
    let c3 = (avg(0.0, z).1 + avg(0.0, -z).1) / (2.0 * z * z);
    (a1, c1, c3)
}

fn normal_form(a1: f64, c1: f64, c3: f64) -> Result<ZeroHopfNormalForm> {
    if !(c1.abs() >= REDUCTION_FLOOR) {
        return Err(Error::DegenerateReduction(format!("|c1| = {:.3e}", c1.abs())));
    }
    if !(c3.abs() >= REDUCTION_FLOOR) {
        return Err(Error::DegenerateReduction(format!("|c3| = {:.3e}", c3.abs())));
    }
    let nf_a = -a1 / c3;
    let nf_b: i8 = if c1 * c3 > 0.0 { -1 } else { 1 };
    let catalog = catalog_classify(nf_a, nf_b)?;
    Ok(ZeroHopfNormalForm { a1, c1, c3, nf_a, nf_b, catalog })
}

/// Standard form with an arbitrary real third eigenvalue, without locus checks.
pub fn frozen_standard_form(coeffs: &ExpansionCoeffs, spec: &SpectralReport) -> Result<StandardForm> {
    let (Some(_), Some(l3)) = (spec.omega0, spec.lambda3) else {
        return Err(Error::Precondition("spectrum has no complex pair".into()));
    };
    let j = crate::spectral::jacobian_positive(coeffs);
    let v = eigenvector(&j, spec.roots[0]);
    let u = eigenvector(&j, Complex64::from(l3)).map(|z| z.re);
    StandardForm::from_basis(coeffs, spec.roots[0], l3, v, u)
}

/// Reduce at a zero-Hopf point.
pub fn zero_hopf_reduce(coeffs: &ExpansionCoeffs, spec: &SpectralReport) -> Result<ZeroHopfNormalForm> {
    if spec.classification != Classification::ZeroHopfCandidate {
        return Err(Error::Precondition(format!("spectrum is {:?}, not a zero-Hopf candidate", spec.classification)));
    }
    zero_hopf_reduce_frozen(coeffs, spec)
}

/// Apply the reduction formulas at any point with a complex pair.
///
/// Off the zero-Hopf locus this freezes the linear part and reports the
/// normal form the quadratic terms would produce there.
pub fn zero_hopf_reduce_frozen(coeffs: &ExpansionCoeffs, spec: &SpectralReport) -> Result<ZeroHopfNormalForm> {
    let sf = frozen_standard_form(coeffs, spec)?;
    let (a1, c1, c3) = reduction_coefficients(&sf);
    normal_form(a1, c1, c3)
}

/// Damped Newton on a map of two variables inside a rectangle, with a forward-difference Jacobian.
pub fn newton_2d<F>(f: F, start: [f64; 2], bounds: [(f64, f64); 2], tol: f64) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> Result<[f64; 2]>,
{
    let inside = |x: [f64; 2]| (0..2).all(|k| x[k] >= bounds[k].0 && x[k] <= bounds[k].1);
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut x = start;
    let mut r = f(x)?;
    for _ in 0..MAX_NEWTON_ITER {
        if norm(r) <= tol {
            return Ok(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * x[k].abs().max((bounds[k].1 - bounds[k].0).abs() * 1e-3);
            let mut xp = x;
            xp[k] += h;
            let rp = f(xp)?;
            jac[0][k] = (rp[0] - r[0]) / h;
            jac[1][k] = (rp[1] - r[1]) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = [(jac[1][1] * r[0] - jac[0][1] * r[1]) / det, (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det];
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-6 {
            let cand = [x[0] - step * dx[0], x[1] - step * dx[1]];
            if inside(cand) {
                if let Ok(rc) = f(cand) {
                    if norm(rc) < norm(r) {
                        x = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(r) <= tol {
        Ok(x)
    } else {
        Err(Error::NotConverged { iterations: MAX_NEWTON_ITER, residual: norm(r) })
    }
}

/// Locate `p_a = p_c = 0` on the plane `p0 + s d1 + t d2`, `(s, t)` in `rect`.
pub fn zero_hopf_locate(p0: &ModelParams, plane: (&[f64; 8], &[f64; 8]), rect: [(f64, f64); 2]) -> Result<ModelParams> {
    let at = |x: [f64; 2]| p0.shifted(plane.0, x[0]).shifted(plane.1, x[1]);
    let start = [0.0f64.clamp(rect[0].0, rect[0].1), 0.0f64.clamp(rect[1].0, rect[1].1)];
    let sol = newton_2d(
        |x| {
            let (_, spec) = analyze_point(&at(x))?;
            let (_, (pa, pc)) = hopf_residuals(&spec.charpoly);
            Ok([pa, pc])
        },
        start,
        rect,
        ZH_RESIDUAL_TOL,
    )?;
    let p = at(sol);
    let (_, spec) = analyze_point(&p)?;
    if spec.charpoly.p_b <= 0.0 {
        return Err(Error::WrongBranch(spec.charpoly.p_b));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand_at;
    use crate::model::SuccessState;
    use crate::spectral::{jacobian_positive, spectral_report};

    /// Coefficients with b1 = c1 = d1 = 0 so that trace and determinant vanish.
    fn synthetic() -> ExpansionCoeffs {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 0.1, 0.1);
        let mut e = expand_at(&p, SuccessState::new(0.1, 0.5, 0.5));
        e.b_vec = [0.0, -0.3, 0.1, 0.0, -1.0, -0.5, 0.2, 0.1, 0.0, 0.0, -0.4, 0.2, 0.0, 0.0];
        e.c_vec = [0.0, 1.0, 0.4, 0.0, 0.0, 0.6, -0.2, 0.0, 0.0, 0.3, -0.7];
        e.d_vec = [0.0, 0.4, 0.3, 0.0, 0.0, -0.24, 0.5, 0.1, 0.0, 0.0, 0.9];
        e
    }

    #[test]
    fn catalog_examples() {
        assert_eq!(catalog_classify(-0.271557, -1).unwrap(), CatalogType::TypeIVa);
        assert_eq!(catalog_classify(-4.36788, -1).unwrap(), CatalogType::TypeIVb);
        assert_eq!(catalog_classify(0.378167, 1).unwrap(), CatalogType::TypeI);
        assert_eq!(catalog_classify(-9.63212, 1).unwrap(), CatalogType::TypeIIb);
        assert_eq!(catalog_classify(0.063585, -1).unwrap(), CatalogType::TypeIII);
        assert_eq!(catalog_classify(-0.5, 1).unwrap(), CatalogType::TypeIIa);
        assert!(matches!(catalog_classify(0.0, 1), Err(Error::BoundaryCase(_))));
        assert!(matches!(catalog_classify(-1.0, -1), Err(Error::BoundaryCase(_))));
    }

    #[test]
    fn synthetic_point_is_zero_hopf() {
        let e = synthetic();
        let spec = spectral_report(&jacobian_positive(&e));
        assert_eq!(spec.classification, Classification::ZeroHopfCandidate);
        let om = spec.omega0.unwrap();
        assert!((om * om - 1.272).abs() < 1e-12);
    }

    #[test]
    fn reduction_agrees_with_averaging() {
        let e = synthetic();
        let spec = spectral_report(&jacobian_positive(&e));
        let nf = zero_hopf_reduce(&e, &spec).unwrap();
        let sf = frozen_standard_form(&e, &spec).unwrap();
        let (a1, c1, c3) = averaging_oracle(&sf, 1e-4);
        for (x, y) in [(a1, nf.a1), (c1, nf.c1), (c3, nf.c3)] {
            assert!((x - y).abs() <= 0.05 * y.abs(), "{x} vs {y}");
        }
        assert_eq!(catalog_classify(nf.nf_a, nf.nf_b).unwrap(), nf.catalog);
    }

    #[test]
    fn reduce_requires_zero_hopf_spectrum() {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 3.41, 0.13444002);
        let (e, spec) = analyze_point(&p).unwrap();
        assert!(matches!(zero_hopf_reduce(&e, &spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn newton_finds_root_of_planar_map() {
        let sol =
            newton_2d(|x| Ok([x[0] * x[0] - 2.0, x[0] * x[1] - 1.0]), [1.0, 1.0], [(0.0, 3.0), (0.0, 3.0)], 1e-12)
                .unwrap();
        assert!((sol[0] - 2f64.sqrt()).abs() < 1e-10 && (sol[1] - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn far_seed_does_not_converge() {
        let p0 = ModelParams::symmetric(1.2, 0.5, 0.03, 3.41, 0.13444002);
        let d1 = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.41, 0.0];
        let d2 = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.13444002];
        let r = zero_hopf_locate(&p0, (&d1, &d2), [(-0.5, 0.5), (-0.5, 0.5)]);
        assert!(matches!(r, Err(Error::NotConverged { .. })), "{r:?}");
    }
}
