//! Dense trivariate polynomials truncated at total degree [`MAX_DEG`].

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

pub const MAX_DEG: usize = 5;
const SIDE: usize = MAX_DEG + 1;

fn monomials() -> &'static [(usize, usize, usize)] {
    static M: OnceLock<Vec<(usize, usize, usize)>> = OnceLock::new();
    M.get_or_init(|| {
        let mut v = Vec::new();
        for deg in 0..=MAX_DEG {
            for i in (0..=deg).rev() {
                for j in (0..=deg - i).rev() {
                    v.push((i, j, deg - i - j));
                }
            }
        }
        v
    })
}

#[inline]
fn idx(i: usize, j: usize, k: usize) -> usize {
    (i * SIDE + j) * SIDE + k
}

/// Coefficient of `x^i y^j z^k` is `get(i, j, k)`.
#[derive(Clone, PartialEq)]
pub struct Poly {
    c: [f64; SIDE * SIDE * SIDE],
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for &(i, j, k) in monomials() {
            let v = self.get(i, j, k);
            if v != 0.0 {
                m.entry(&(i, j, k), &v);
            }
        }
        m.finish()
    }
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: [0.0; SIDE * SIDE * SIDE] }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Poly::zero();
        p.set(0, 0, 0, v);
        p
    }

    /// The coordinate polynomial of variable `k` (0, 1 or 2).
    pub fn var(k: usize) -> Self {
        let mut p = Poly::zero();
        match k {
            0 => p.set(1, 0, 0, 1.0),
            1 => p.set(0, 1, 0, 1.0),
            _ => p.set(0, 0, 1, 1.0),
        }
        p
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        if i + j + k > MAX_DEG {
            0.0
        } else {
            self.c[idx(i, j, k)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        assert!(i + j + k <= MAX_DEG, "monomial degree exceeds {MAX_DEG}");
        self.c[idx(i, j, k)] = v;
    }

    pub fn add_term(&mut self, i: usize, j: usize, k: usize, v: f64) {
        if i + j + k <= MAX_DEG {
            self.c[idx(i, j, k)] += v;
        }
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = self.clone();
        for &(i, j, k) in monomials() {
            out.c[idx(i, j, k)] *= s;
        }
        out
    }

    /// Keep monomials with total degree in `lo..=hi`.
    pub fn degrees(&self, lo: usize, hi: usize) -> Poly {
        let mut out = Poly::zero();
        for &(i, j, k) in monomials() {
            let n = i + j + k;
            if n >= lo && n <= hi {
                out.c[idx(i, j, k)] = self.c[idx(i, j, k)];
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        monomials().iter().map(|&(i, j, k)| self.c[idx(i, j, k)].abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        let mut pw = [[1.0; SIDE]; 3];
        for (axis, row) in pw.iter_mut().enumerate() {
            for n in 1..SIDE {
                row[n] = row[n - 1] * v[axis];
            }
        }
        monomials().iter().map(|&(i, j, k)| self.c[idx(i, j, k)] * pw[0][i] * pw[1][j] * pw[2][k]).sum()
    }

    pub fn powi(&self, n: usize) -> Poly {
        let mut out = Poly::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitute `x_r = sum_j m[r][j] * x_j`.
    pub fn linear_substitute(&self, m: &[[f64; 3]; 3]) -> Poly {
        let forms: Vec<Poly> = (0..3)
            .map(|r| {
                let mut p = Poly::zero();
                p.set(1, 0, 0, m[r][0]);
                p.set(0, 1, 0, m[r][1]);
                p.set(0, 0, 1, m[r][2]);
                p
            })
            .collect();
        self.substitute(&forms)
    }

    /// Replace the third variable by `w`, a polynomial in the first two.
    pub fn substitute_w(&self, w: &Poly) -> Poly {
        self.substitute(&[Poly::var(0), Poly::var(1), w.clone()])
    }

    fn substitute(&self, forms: &[Poly]) -> Poly {
        let pows: Vec<Vec<Poly>> = forms
            .iter()
            .map(|f| {
                let mut v = vec![Poly::constant(1.0)];
                for n in 1..SIDE {
                    let next = &v[n - 1] * f;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero();
        for &(i, j, k) in monomials() {
            let coeff = self.c[idx(i, j, k)];
            if coeff == 0.0 {
                continue;
            }
            let term = &(&pows[0][i] * &pows[1][j]) * &pows[2][k];
            out = out + term.scale(coeff);
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for &(i, j, k) in monomials() {
            self.c[idx(i, j, k)] += rhs.c[idx(i, j, k)];
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        let ms = monomials();
        let left: Vec<_> = ms.iter().filter(|&&(i, j, k)| self.c[idx(i, j, k)] != 0.0).collect();
        let right: Vec<_> = ms.iter().filter(|&&(i, j, k)| rhs.c[idx(i, j, k)] != 0.0).collect();
        for &&(i, j, k) in &left {
            let a = self.c[idx(i, j, k)];
            for &&(p, q, r) in &right {
                if i + j + k + p + q + r <= MAX_DEG {
                    out.c[idx(i + p, j + q, k + r)] += a * rhs.c[idx(p, q, r)];
                }
            }
        }
        out
    }
}
