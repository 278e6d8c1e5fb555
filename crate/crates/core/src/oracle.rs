//! First Lyapunov coefficient by complex eigenvector projection.
//!
//! Works directly on the three-dimensional field with its second and third
//! derivative tensors, without a standard form or center-manifold polynomial.
//! The result is reported on the same scale as [`crate::hopf::first_lyapunov`]
//! (`sigma = omega * l1 / 4` for the shared eigenvector normalization).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;

use crate::equilibrium::positive_equilibrium;
use crate::error::{Error, Result};
use crate::model::{jacobian, ModelParams};

/// Largest |Re lambda| accepted by the oracle.
pub const ORACLE_LOCUS_TOL: f64 = 1e-6;

type C3 = [Complex64; 3];
pub type Tensor2 = [[[f64; 3]; 3]; 3];
pub type Tensor3 = [[[[f64; 3]; 3]; 3]; 3];

/// Jacobian with second and third derivative tensors of the field at `s`.
pub fn model_tensors(p: &ModelParams, s: [f64; 3]) -> (Matrix3<f64>, Tensor2, Tensor3) {
    let [x, y, z] = s;
    let da = 1.0 + p.a * x;
    let db = 1.0 + p.b * x;
    // derivatives of X/(1+kX)
    let d1 = |d: f64| 1.0 / (d * d);
    let d2 = |k: f64, d: f64| -2.0 * k / d.powi(3);
    let d3 = |k: f64, d: f64| 6.0 * k * k / d.powi(4);

    let jm = jacobian(&s, p);
    let j = Matrix3::from_fn(|r, c| jm[r][c]);

    let mut b: Tensor2 = [[[0.0; 3]; 3]; 3];
    let mut sym2 = |i: usize, j: usize, k: usize, v: f64| {
        b[i][j][k] = v;
        b[i][k][j] = v;
    };
    sym2(0, 0, 0, -2.0 - y * d2(p.a, da) - z * d2(p.b, db));
    sym2(0, 0, 1, -d1(da));
    sym2(0, 0, 2, -d1(db));
    sym2(1, 0, 0, p.c * y * d2(p.a, da));
    sym2(1, 0, 1, p.c * d1(da));
    sym2(1, 1, 2, -p.alpha);
    sym2(2, 0, 0, p.d * z * d2(p.b, db));
    sym2(2, 0, 2, p.d * d1(db));
    sym2(2, 1, 2, -p.beta);

    let mut c: Tensor3 = [[[[0.0; 3]; 3]; 3]; 3];
    let mut sym3 = |i: usize, idx: [usize; 3], v: f64| {
        let [p0, p1, p2] = idx;
        for (j, k, l) in [(p0, p1, p2), (p0, p2, p1), (p1, p0, p2), (p1, p2, p0), (p2, p0, p1), (p2, p1, p0)] {
            c[i][j][k][l] = v;
        }
    };
    sym3(0, [0, 0, 0], -y * d3(p.a, da) - z * d3(p.b, db));
    sym3(0, [0, 0, 1], -d2(p.a, da));
    sym3(0, [0, 0, 2], -d2(p.b, db));
    sym3(1, [0, 0, 0], p.c * y * d3(p.a, da));
    sym3(1, [0, 0, 1], p.c * d2(p.a, da));
    sym3(2, [0, 0, 0], p.d * z * d3(p.b, db));
    sym3(2, [0, 0, 2], p.d * d2(p.b, db));
    (j, b, c)
}

fn bilinear(t: &Tensor2, u: &C3, v: &C3) -> C3 {
    std::array::from_fn(|i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                acc += t[i][j][k] * u[j] * v[k];
            }
        }
        acc
    })
}

fn trilinear(t: &Tensor3, u: &C3, v: &C3, w: &C3) -> C3 {
    std::array::from_fn(|i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    acc += t[i][j][k][l] * u[j] * v[k] * w[l];
                }
            }
        }
        acc
    })
}

/// Null vector of `m` by fixing one component to 1 and solving the best 2x2 minor.
fn null_vector(m: &Matrix3<Complex64>) -> Option<C3> {
    let mut best: Option<(f64, C3)> = None;
    for fixed in 0..3 {
        let free: Vec<usize> = (0..3).filter(|&k| k != fixed).collect();
        for drop in 0..3 {
            let rows: Vec<usize> = (0..3).filter(|&r| r != drop).collect();
            let a = Matrix2::new(
                m[(rows[0], free[0])],
                m[(rows[0], free[1])],
                m[(rows[1], free[0])],
                m[(rows[1], free[1])],
            );
            let det = a.determinant().norm();
            let rhs = Vector2::new(-m[(rows[0], fixed)], -m[(rows[1], fixed)]);
            if let Some(sol) = a.lu().solve(&rhs) {
                let mut v = [Complex64::new(0.0, 0.0); 3];
                v[fixed] = Complex64::new(1.0, 0.0);
                v[free[0]] = sol[0];
                v[free[1]] = sol[1];
                let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let quality = det / scale;
                if quality.is_finite() && best.as_ref().is_none_or(|(q, _)| quality > *q) {
                    best = Some((quality, v));
                }
            }
        }
    }
    best.map(|(_, v)| v)
}

fn dot_conj(p: &C3, q: &C3) -> Complex64 {
    p.iter().zip(q).map(|(a, b)| a.conj() * b).sum()
}

fn solve_c(m: Matrix3<Complex64>, rhs: &C3) -> Result<C3> {
    let sol = m
        .lu()
        .solve(&Vector3::new(rhs[0], rhs[1], rhs[2]))
        .ok_or_else(|| Error::Precondition("singular linear system in projection".into()))?;
    Ok([sol[0], sol[1], sol[2]])
}

/// Projection-method sigma for a field with Jacobian `j` and derivative tensors `b`, `c`.
pub fn projection_sigma(j: &Matrix3<f64>, b: &Tensor2, c: &Tensor3) -> Result<f64> {
    let eig = j.complex_eigenvalues();
    let lambda = *eig.iter().max_by(|u, v| u.im.total_cmp(&v.im)).expect("three eigenvalues");
    if !(lambda.im > 0.0) {
        return Err(Error::Precondition("no complex eigenvalue pair".into()));
    }
    if lambda.re.abs() > ORACLE_LOCUS_TOL {
        return Err(Error::Precondition(format!("off the Hopf locus: |Re lambda| = {:.3e}", lambda.re.abs())));
    }
    let om = lambda.im;
    let jc: Matrix3<Complex64> = j.map(Complex64::from);
    let eye = Matrix3::<Complex64>::identity();
    let q = null_vector(&(jc - eye * lambda)).ok_or_else(|| Error::Precondition("eigenvector not found".into()))?;
    let pivot = *q.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let q = q.map(|z| z / pivot);
    let p = null_vector(&(jc.transpose() - eye * lambda.conj()))
        .ok_or_else(|| Error::Precondition("adjoint eigenvector not found".into()))?;
    let s = dot_conj(&p, &q);
    let p = p.map(|z| z / s.conj());
    let qb = q.map(|z| z.conj());

    let c_term = trilinear(c, &q, &q, &qb);
    let r1 = solve_c(jc, &bilinear(b, &q, &qb))?;
    let r2 = solve_c(eye * Complex64::new(0.0, 2.0 * om) - jc, &bilinear(b, &q, &q))?;
    let total =
        dot_conj(&p, &c_term) - 2.0 * dot_conj(&p, &bilinear(b, &q, &r1)) + dot_conj(&p, &bilinear(b, &qb, &r2));
    let l1 = total.re / (2.0 * om);
    Ok(om * l1 / 4.0)
}

/// Independent sigma at the interior equilibrium of `p`, which must lie on the Hopf locus.
pub fn lyapunov_oracle(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let e = positive_equilibrium(p).primary().ok_or(Error::NoPositiveEquilibrium)?;
    let (j, b, c) = model_tensors(p, e.to_array());
    projection_sigma(&j, &b, &c)
}
