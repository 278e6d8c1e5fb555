//! Parameters, state and the dimensionless vector field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensional parameters of the original three-species system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DimensionalParams {
    pub rho: f64,
    pub K: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub mu_y: f64,
    pub mu_z: f64,
    pub m_y: f64,
    pub m_z: f64,
    pub alpha_yz: f64,
    pub alpha_zy: f64,
}

/// The eight dimensionless parameters of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub const PARAM_NAMES: [&str; 8] = ["a", "b", "c", "d", "mu", "nu", "alpha", "beta"];

/// A point (X, Y, Z) of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuccessState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SuccessState {
    pub const ORIGIN: SuccessState = SuccessState { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        SuccessState { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        SuccessState::new(v[0], v[1], v[2])
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Exchange the two consumers.
    pub fn swap_yz(self) -> Self {
        SuccessState::new(self.x, self.z, self.y)
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { field, requirement: "finite and strictly positive", value })
    }
}

impl DimensionalParams {
    pub fn validate(&self) -> Result<()> {
        positive("rho", self.rho)?;
        positive("K", self.K)?;
        positive("gamma_y", self.gamma_y)?;
        positive("gamma_z", self.gamma_z)?;
        positive("mu_y", self.mu_y)?;
        positive("mu_z", self.mu_z)?;
        positive("m_y", self.m_y)?;
        positive("m_z", self.m_z)?;
        positive("alpha_yz", self.alpha_yz)?;
        positive("alpha_zy", self.alpha_zy)
    }
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: f64, b: f64, c: f64, d: f64, mu: f64, nu: f64, alpha: f64, beta: f64) -> Self {
        ModelParams { a, b, c, d, mu, nu, alpha, beta }
    }

    /// Family with a = b, c = d and mu = nu, which the scenarios use.
    pub fn symmetric(a: f64, c: f64, mu: f64, alpha: f64, beta: f64) -> Self {
        ModelParams::new(a, a, c, c, mu, mu, alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in PARAM_NAMES.iter().zip(self.to_array()) {
            positive(name, v)?;
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.a, self.b, self.c, self.d, self.mu, self.nu, self.alpha, self.beta]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        ModelParams::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7])
    }

    /// Parameters of the system with the two consumers relabelled.
    pub fn swap_yz(&self) -> Self {
        ModelParams::new(self.b, self.a, self.d, self.c, self.nu, self.mu, self.beta, self.alpha)
    }

    /// `self + t * dir`, componentwise.
    pub fn shifted(&self, dir: &[f64; 8], t: f64) -> Self {
        let mut v = self.to_array();
        for (vi, di) in v.iter_mut().zip(dir) {
            *vi += t * di;
        }
        ModelParams::from_array(v)
    }
}

pub fn nondimensionalize(p: &DimensionalParams) -> Result<ModelParams> {
    p.validate()?;
    Ok(ModelParams {
        a: p.gamma_y * p.mu_y * p.K,
        b: p.gamma_z * p.mu_z * p.K,
        c: p.K * p.gamma_y / p.rho,
        d: p.K * p.gamma_z / p.rho,
        mu: p.m_y / p.rho,
        nu: p.m_z / p.rho,
        alpha: p.alpha_yz / p.gamma_z,
        beta: p.alpha_zy / p.gamma_y,
    })
}

/// Right-hand side of the dimensionless system.
pub fn vector_field(s: &SuccessState, p: &ModelParams) -> Result<SuccessState> {
    if !s.is_finite() {
        return Err(Error::Domain {
            field: "state",
            requirement: "finite",
            value: if s.x.is_finite() {
                if s.y.is_finite() {
                    s.z
                } else {
                    s.y
                }
            } else {
                s.x
            },
        });
    }
    Ok(SuccessState::from_array(rhs(&s.to_array(), p)))
}

/// Unchecked form of [`vector_field`] used in inner loops.
#[inline]
pub fn rhs(s: &[f64; 3], p: &ModelParams) -> [f64; 3] {
    let [x, y, z] = *s;
    let ra = x / (1.0 + p.a * x);
    let rb = x / (1.0 + p.b * x);
    [
        x * (1.0 - x) - y * ra - z * rb,
        p.c * y * ra - p.mu * y - p.alpha * y * z,
        p.d * z * rb - p.nu * z - p.beta * z * y,
    ]
}

/// Analytic Jacobian of [`rhs`].
pub fn jacobian(s: &[f64; 3], p: &ModelParams) -> [[f64; 3]; 3] {
    let [x, y, z] = *s;
    let da = 1.0 + p.a * x;
    let db = 1.0 + p.b * x;
    let ra = x / da;
    let rb = x / db;
    let ra1 = 1.0 / (da * da);
    let rb1 = 1.0 / (db * db);
    [
        [1.0 - 2.0 * x - y * ra1 - z * rb1, -ra, -rb],
        [p.c * y * ra1, p.c * ra - p.mu - p.alpha * z, -p.alpha * y],
        [p.d * z * rb1, -p.beta * z, p.d * rb - p.nu - p.beta * y],
    ]
}

/// Functional response ratio of consumer 1 to consumer 2.
///
/// Returns `None` when consumer 2's response vanishes (x or z not positive).
pub fn frr(s: &SuccessState, p: &ModelParams) -> Option<f64> {
    let den = p.d * s.x * s.z / (1.0 + p.b * s.x);
    if !(s.x > 0.0 && s.z > 0.0) || den == 0.0 || !den.is_finite() {
        return None;
    }
    let num = p.c * s.x * s.y / (1.0 + p.a * s.x);
    Some(num / den)
}

/// Competition asymmetry ratios `(alpha / beta, beta / alpha)`.
pub fn asymmetry(p: &ModelParams) -> Result<(f64, f64)> {
    positive("alpha", p.alpha)?;
    positive("beta", p.beta)?;
    Ok((p.alpha / p.beta, p.beta / p.alpha))
}
