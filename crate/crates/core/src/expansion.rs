//! Exact Taylor coefficients of the field about the interior equilibrium.
//!
//! With `(x, y, z) = (X - X*, Y - Y*, Z - Z*)` the shifted field reads
//!
//! ```text
//! x' = b1 x + b2 x^2 + b3 x^3 + b4 x^4 + b5 y + b6 z
//!      + (b7 x + b8 x^2 + b9 x^3 + b10 x^4) y + (b11 x + b12 x^2 + b13 x^3 + b14 x^4) z
//! y' = c1 y + c2 x + c3 x^2 + c4 x^3 + c5 x^4
//!      + (c6 x + c7 x^2 + c8 x^3 + c9 x^4) y + c10 z + c11 y z
//! z' = d1 z + d2 x + d3 x^2 + d4 x^3 + d5 x^4 + d6 y
//!      + (d7 x + d8 x^2 + d9 x^3 + d10 x^4) z + d11 y z
//! ```
//!
//! The saturating terms `X/(1+aX)` are expanded in closed form about X*.

use serde::{Deserialize, Serialize};

use crate::equilibrium::positive_equilibrium;
use crate::error::{Error, Result};
use crate::model::{ModelParams, SuccessState};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    /// b1..b14 stored at indices 0..14.
    pub b_vec: [f64; 14],
    /// c1..c11.
    pub c_vec: [f64; 11],
    /// d1..d11.
    pub d_vec: [f64; 11],
    /// (b1, b5, b6, c1, c2, c10, d1, d2, d6).
    pub delta: [f64; 9],
    pub equilibrium: SuccessState,
    pub params: ModelParams,
}

/// Taylor coefficients g0..g4 of `X/(1+kX)` about `x0`.
fn saturating_series(k: f64, x0: f64) -> [f64; 5] {
    let den = 1.0 + k * x0;
    let mut g = [0.0; 5];
    g[0] = x0 / den;
    // g_n = (-1)^(n+1) k^(n-1) / den^(n+1)
    let mut term = 1.0 / (den * den);
    for gn in g.iter_mut().skip(1) {
        *gn = term;
        term *= -k / den;
    }
    g
}

pub fn expand_at_equilibrium(p: &ModelParams) -> Result<ExpansionCoeffs> {
    let e = positive_equilibrium(p)
        .primary()
        .ok_or_else(|| Error::Precondition("no interior equilibrium to expand about".into()))?;
    Ok(expand_at(p, e))
}

/// Coefficients about an arbitrary base point `e` that is an interior equilibrium of `p`.
pub fn expand_at(p: &ModelParams, e: SuccessState) -> ExpansionCoeffs {
    let ga = saturating_series(p.a, e.x);
    let gb = saturating_series(p.b, e.x);
    let (xs, ys, zs) = (e.x, e.y, e.z);

    let mut b = [0.0; 14];
    b[0] = 1.0 - 2.0 * xs - ga[1] * ys - gb[1] * zs;
    b[1] = -1.0 - ga[2] * ys - gb[2] * zs;
    b[2] = -ga[3] * ys - gb[3] * zs;
    b[3] = -ga[4] * ys - gb[4] * zs;
    b[4] = -ga[0];
    b[5] = -gb[0];
    for n in 1..=4 {
        b[5 + n] = -ga[n];
        b[9 + n] = -gb[n];
    }

    let mut c = [0.0; 11];
    c[0] = p.c * ga[0] - p.mu - p.alpha * zs;
    for n in 1..=4 {
        c[n] = p.c * ga[n] * ys;
        c[4 + n] = p.c * ga[n];
    }
    c[9] = -p.alpha * ys;
    c[10] = -p.alpha;

    let mut d = [0.0; 11];
    d[0] = p.d * gb[0] - p.nu - p.beta * ys;
    for n in 1..=4 {
        d[n] = p.d * gb[n] * zs;
        d[5 + n] = p.d * gb[n];
    }
    d[5] = -p.beta * zs;
    d[10] = -p.beta;

    let delta = [b[0], b[4], b[5], c[0], c[1], c[9], d[0], d[1], d[5]];
    ExpansionCoeffs { b_vec: b, c_vec: c, d_vec: d, delta, equilibrium: e, params: *p }
}

impl ExpansionCoeffs {
    /// Linear block `((b1,b5,b6),(c2,c1,c10),(d2,d6,d1))`.
    pub fn linear_block(&self) -> [[f64; 3]; 3] {
        let (b, c, d) = (&self.b_vec, &self.c_vec, &self.d_vec);
        [[b[0], b[4], b[5]], [c[1], c[0], c[9]], [d[1], d[5], d[0]]]
    }

    /// The shifted field as three polynomials in (x, y, z).
    pub fn field_polys(&self) -> [Poly; 3] {
        let (b, c, d) = (&self.b_vec, &self.c_vec, &self.d_vec);
        let mut f = Poly::zero();
        let mut g = Poly::zero();
        let mut h = Poly::zero();
        f.set(1, 0, 0, b[0]);
        f.set(0, 1, 0, b[4]);
        f.set(0, 0, 1, b[5]);
        for n in 1..=4 {
            if n >= 2 {
                f.set(n, 0, 0, b[n - 1]);
            }
            f.set(n, 1, 0, b[5 + n]);
            f.set(n, 0, 1, b[9 + n]);
        }

        g.set(0, 1, 0, c[0]);
        g.set(0, 0, 1, c[9]);
        g.set(0, 1, 1, c[10]);
        for n in 1..=4 {
            g.set(n, 0, 0, c[n]);
            g.set(n, 1, 0, c[4 + n]);
        }

        h.set(0, 0, 1, d[0]);
        h.set(0, 1, 0, d[5]);
        h.set(0, 1, 1, d[10]);
        for n in 1..=4 {
            h.set(n, 0, 0, d[n]);
            h.set(n, 0, 1, d[5 + n]);
        }
        [f, g, h]
    }

    /// Evaluate the truncated expansion at the shift `s`.
    pub fn eval_truncated(&self, s: [f64; 3]) -> [f64; 3] {
        let [f, g, h] = self.field_polys();
        [f.eval(s), g.eval(s), h.eval(s)]
    }
}
