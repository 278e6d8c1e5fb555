//! Standard form, quadratic center manifold and the first Lyapunov coefficient.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ExpansionCoeffs;
use crate::model::{asymmetry, ModelParams};
use crate::poly::Poly;
use crate::spectral::{analyze_point, jacobian_positive, SpectralReport};

/// Largest |Re lambda| / omega at which the pair is still treated as critical.
pub const NEAR_HOPF_RATIO: f64 = 0.1;
pub const MAX_CONDITION: f64 = 1e8;
pub const RESONANCE_TOL: f64 = 1e-12;
pub const SIGMA_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct StandardForm {
    /// Columns `Re v`, `-Im v`, `u`.
    pub m1: Matrix3<f64>,
    pub m1_inv: Matrix3<f64>,
    pub omega0: f64,
    pub a0: f64,
    /// Real part of the critical pair; zero on the Hopf locus.
    pub detuning: f64,
    /// `M1^-1 J1 M1`.
    pub linear: Matrix3<f64>,
    /// Nonlinear part of the transformed field in (u, v, w).
    pub fgh: [Poly; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterManifold {
    pub theta: f64,
    pub kappa: f64,
    pub iota: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HopfCase {
    /// lambda3 < 0, sigma < 0.
    Case1,
    /// lambda3 > 0, sigma < 0.
    Case2,
    /// lambda3 > 0, sigma > 0.
    Case3,
    /// lambda3 < 0, sigma > 0.
    Case4,
}

impl HopfCase {
    pub fn number(self) -> u8 {
        match self {
            HopfCase::Case1 => 1,
            HopfCase::Case2 => 2,
            HopfCase::Case3 => 3,
            HopfCase::Case4 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub sigma: f64,
    pub lambda3: f64,
    pub case: HopfCase,
    pub omega0: Option<f64>,
    pub eta_yz: f64,
    pub eta_zy: f64,
}

fn cross(a: [Complex64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Null vector of `J - lambda I`, scaled so its largest component is exactly 1.
pub fn eigenvector(j: &Matrix3<f64>, lambda: Complex64) -> [Complex64; 3] {
    let rows: Vec<[Complex64; 3]> = (0..3)
        .map(|i| {
            let mut r = [Complex64::from(j[(i, 0)]), Complex64::from(j[(i, 1)]), Complex64::from(j[(i, 2)])];
            r[i] -= lambda;
            r
        })
        .collect();
    let norm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let v = [cross(rows[0], rows[1]), cross(rows[0], rows[2]), cross(rows[1], rows[2])]
        .into_iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap();
    let pivot = *v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    v.map(|z| z / pivot)
}

/// Standard form at a (near-)Hopf spectrum.
pub fn to_standard_form(coeffs: &ExpansionCoeffs, spec: &SpectralReport) -> Result<StandardForm> {
    let (Some(om), Some(l3)) = (spec.omega0, spec.lambda3) else {
        return Err(Error::Precondition("spectrum has no complex pair".into()));
    };
    let re = spec.roots[0].re;
    if re.abs() > NEAR_HOPF_RATIO * om {
        return Err(Error::Precondition(format!("complex pair is not critical: Re = {re:.3e}, omega = {om:.3e}")));
    }
    if l3 == 0.0 {
        return Err(Error::Precondition("real eigenvalue is zero".into()));
    }
    let j = jacobian_positive(coeffs);
    let v = eigenvector(&j, spec.roots[0]);
    let u = eigenvector(&j, Complex64::from(l3)).map(|z| z.re);
    StandardForm::from_basis(coeffs, spec.roots[0], l3, v, u)
}

impl StandardForm {
    /// Build from an explicit eigenbasis; `v` belongs to `lambda`, `u` to `a0`.
    pub fn from_basis(
        coeffs: &ExpansionCoeffs,
        lambda: Complex64,
        a0: f64,
        v: [Complex64; 3],
        u: [f64; 3],
    ) -> Result<StandardForm> {
        let m1 = Matrix3::from_fn(|i, k| match k {
            0 => v[i].re,
            1 => -v[i].im,
            _ => u[i],
        });
        let sv = m1.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned(cond));
        }
        let m1_inv = m1.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let j = jacobian_positive(coeffs);
        let linear = m1_inv * j * m1;
        let m: [[f64; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| m1[(r, c)]));
        let nonlinear: Vec<Poly> =
            coeffs.field_polys().iter().map(|p| p.degrees(2, crate::poly::MAX_DEG).linear_substitute(&m)).collect();
        let fgh = std::array::from_fn(|i| (0..3).fold(Poly::zero(), |acc, r| acc + nonlinear[r].scale(m1_inv[(i, r)])));
        Ok(StandardForm { m1, m1_inv, omega0: lambda.im, a0, detuning: lambda.re, linear, fgh })
    }

    /// Quadratic coefficients (u^2, uv, v^2) of component `k`.
    fn quad(&self, k: usize) -> (f64, f64, f64) {
        let p = &self.fgh[k];
        (p.get(2, 0, 0), p.get(1, 1, 0), p.get(0, 2, 0))
    }
}

impl CenterManifold {
    pub fn poly(&self) -> Poly {
        let mut h = Poly::zero();
        h.set(2, 0, 0, self.theta);
        h.set(1, 1, 0, self.kappa);
        h.set(0, 2, 0, self.iota);
        h
    }

    /// Quadratic-order residual of the invariance equation, coefficient-wise.
    pub fn residual(&self, sf: &StandardForm) -> [f64; 3] {
        let (h20, h11, h02) = sf.quad(2);
        let (om, a0) = (sf.omega0, sf.a0);
        let (th, ka, io) = (self.theta, self.kappa, self.iota);
        [om * ka - a0 * th - h20, 2.0 * om * (io - th) - a0 * ka - h11, -om * ka - a0 * io - h02]
    }
}

/// Solve `H_u (-omega v) + H_v (omega u) = a0 H + h` at quadratic order.
pub fn center_manifold(sf: &StandardForm) -> Result<CenterManifold> {
    let (om, a0) = (sf.omega0, sf.a0);
    let ratio = a0.abs() / om.abs();
    if !(ratio > RESONANCE_TOL) {
        return Err(Error::Resonance(ratio));
    }
    let (h20, h11, h02) = sf.quad(2);
    let a = Matrix3::new(-a0, om, 0.0, -2.0 * om, -a0, 2.0 * om, 0.0, -om, -a0);
    let sol = a.lu().solve(&Vector3::new(h20, h11, h02)).ok_or(Error::Resonance(ratio))?;
    Ok(CenterManifold { theta: sol[0], kappa: sol[1], iota: sol[2] })
}

/// Derivatives of the reduced planar field `(f, g)(u, v, H(u, v))` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDerivatives {
    pub uu: f64,
    pub uv: f64,
    pub vv: f64,
    pub uuu: f64,
    pub uuv: f64,
    pub uvv: f64,
    pub vvv: f64,
}

impl ReducedDerivatives {
    fn of(p: &Poly) -> Self {
        ReducedDerivatives {
            uu: 2.0 * p.get(2, 0, 0),
            uv: p.get(1, 1, 0),
            vv: 2.0 * p.get(0, 2, 0),
            uuu: 6.0 * p.get(3, 0, 0),
            uuv: 2.0 * p.get(2, 1, 0),
            uvv: 2.0 * p.get(1, 2, 0),
            vvv: 6.0 * p.get(0, 3, 0),
        }
    }
}

pub fn reduced_derivatives(sf: &StandardForm, cm: &CenterManifold) -> (ReducedDerivatives, ReducedDerivatives) {
    let h = cm.poly();
    let f = sf.fgh[0].substitute_w(&h);
    let g = sf.fgh[1].substitute_w(&h);
    (ReducedDerivatives::of(&f), ReducedDerivatives::of(&g))
}

/// Guckenheimer's first Lyapunov coefficient of the reduced planar field.
pub fn first_lyapunov(sf: &StandardForm, cm: &CenterManifold) -> f64 {
    let (f, g) = reduced_derivatives(sf, cm);
    let om = sf.omega0;
    (f.uuu + f.uvv + g.uuv + g.vvv) / 16.0
        + (f.uv * (f.uu + f.vv) - g.uv * (g.uu + g.vv) - f.uu * g.uu + f.vv * g.vv) / (16.0 * om)
}

pub fn classify_hopf(sigma: f64, lambda3: f64, p: &ModelParams) -> Result<HopfReport> {
    if !(sigma.abs() > SIGMA_FLOOR) {
        return Err(Error::Degenerate(sigma.abs()));
    }
    let case = match (lambda3 < 0.0, sigma < 0.0) {
        (true, true) => HopfCase::Case1,
        (false, true) => HopfCase::Case2,
        (false, false) => HopfCase::Case3,
        (true, false) => HopfCase::Case4,
    };
    let (eta_yz, eta_zy) = asymmetry(p)?;
    Ok(HopfReport { sigma, lambda3, case, omega0: None, eta_yz, eta_zy })
}

/// Everything computed by the Hopf pipeline at one parameter point.
#[derive(Debug, Clone)]
pub struct HopfAnalysis {
    pub coeffs: ExpansionCoeffs,
    pub spectrum: SpectralReport,
    pub standard_form: StandardForm,
    pub center_manifold: CenterManifold,
    pub sigma: f64,
    pub report: HopfReport,
}

/// Equilibrium, spectrum, standard form, center manifold and sigma at `p`.
///
/// Accepts points near the Hopf locus (|Re lambda| <= 0.1 omega); the
/// offset is reported as `standard_form.detuning`.
pub fn analyze_hopf(p: &ModelParams) -> Result<HopfAnalysis> {
    let (coeffs, spectrum) = analyze_point(p)?;
    let standard_form = to_standard_form(&coeffs, &spectrum)?;
    let center_manifold = center_manifold(&standard_form)?;
    let sigma = first_lyapunov(&standard_form, &center_manifold);
    let mut report = classify_hopf(sigma, standard_form.a0, p)?;
    report.omega0 = Some(standard_form.omega0);
    Ok(HopfAnalysis { coeffs, spectrum, standard_form, center_manifold, sigma, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(omega: f64, a0: f64) -> StandardForm {
        StandardForm {
            m1: Matrix3::identity(),
            m1_inv: Matrix3::identity(),
            omega0: omega,
            a0,
            detuning: 0.0,
            linear: Matrix3::new(0.0, -omega, 0.0, omega, 0.0, 0.0, 0.0, 0.0, a0),
            fgh: [Poly::zero(), Poly::zero(), Poly::zero()],
        }
    }

    #[test]
    fn zero_forcing_gives_flat_manifold() {
        let cm = center_manifold(&toy(1.0, -1.0)).unwrap();
        assert_eq!((cm.theta, cm.kappa, cm.iota), (0.0, 0.0, 0.0));
    }

    #[test]
    fn toy_manifold_back_substitutes() {
        let mut sf = toy(1.0, -1.0);
        sf.fgh[2].set(2, 0, 0, 1.0);
        let cm = center_manifold(&sf).unwrap();
        assert!(cm.residual(&sf).iter().all(|r| r.abs() <= 1e-12));
        // solution of the 3x3 system, rational form (3/5, 2/5, 2/5)
        assert!((cm.theta - 0.6).abs() < 1e-15 && (cm.kappa - 0.4).abs() < 1e-15 && (cm.iota - 0.4).abs() < 1e-15);
    }

    #[test]
    fn resonant_manifold_rejected() {
        assert!(matches!(center_manifold(&toy(1.0, 0.0)), Err(Error::Resonance(_))));
    }

    #[test]
    fn cubic_toy_sigma() {
        let mut sf = toy(1.0, -1.0);
        let (u, v) = (Poly::var(0), Poly::var(1));
        let r2 = &u * &u + &v * &v;
        sf.fgh[0] = -(&u * &r2);
        sf.fgh[1] = -(&v * &r2);
        let cm = center_manifold(&sf).unwrap();
        assert!((first_lyapunov(&sf, &cm) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn case_table() {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 0.3, 0.007);
        assert_eq!(classify_hopf(-0.049, -5.16e-11, &p).unwrap().case, HopfCase::Case1);
        assert_eq!(classify_hopf(-53.55, 0.007, &p).unwrap().case, HopfCase::Case2);
        assert_eq!(classify_hopf(0.059, 0.0074, &p).unwrap().case, HopfCase::Case3);
        assert_eq!(classify_hopf(0.000725, -1.6e-4, &p).unwrap().case, HopfCase::Case4);
        assert!(matches!(classify_hopf(0.0, -1.0, &p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn standard_form_is_block_diagonal_off_locus() {
        let p = ModelParams::symmetric(1.2, 0.5, 0.03, 1e-11, 0.34);
        let an = analyze_hopf(&p).unwrap();
        let sf = &an.standard_form;
        let want = Matrix3::new(sf.detuning, -sf.omega0, 0.0, sf.omega0, sf.detuning, 0.0, 0.0, 0.0, sf.a0);
        assert!((sf.linear - want).abs().max() <= 1e-10);
        for p in &sf.fgh {
            assert!(p.degrees(0, 1).max_abs_coeff() <= 1e-10);
        }
        assert!(an.sigma < 0.0);
    }
}
