//! Dormand–Prince 5(4) step with dense output, for three-dimensional systems.

pub type State = [f64; 3];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One attempted step: the new state, its derivative and the dense-output polynomial.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y1: State,
    /// Derivative at `y1` (first stage of the next step).
    pub k7: State,
    /// Scaled RMS error estimate; the step is acceptable when `<= 1`.
    pub err: f64,
    rcont: [State; 5],
}

impl Step {
    /// State at time `t` in `[t0, t0 + h]`.
    pub fn dense(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }
}

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

/// Take one step of size `h` from `(t, y)` with `k1 = f(y)`.
pub fn step<F: Fn(&State) -> State>(f: &F, t: f64, y: &State, k1: &State, h: f64, rtol: f64, atol: f64) -> Step {
    let k2 = f(&axpy(y, &[(A21, k1)], h));
    let k3 = f(&axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(&axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    let y1 = axpy(y, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
    let k7 = f(&y1);

    let mut sum = 0.0;
    for i in 0..3 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = atol + rtol * y[i].abs().max(y1[i].abs());
        sum += (e / sk).powi(2);
    }
    let err = (sum / 3.0).sqrt();

    let mut rcont = [[0.0; 3]; 5];
    for i in 0..3 {
        let dy = y1[i] - y[i];
        let bspl = h * k1[i] - dy;
        rcont[0][i] = y[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - h * k7[i] - bspl;
        rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step { t0: t, h, y1, k7, err, rcont }
}

/// Step-size factor after an error estimate `err`.
pub fn next_factor(err: f64, after_reject: bool) -> f64 {
    let fac = if err == 0.0 { 10.0 } else { 0.9 * err.powf(-0.2) };
    let max = if after_reject { 1.0 } else { 10.0 };
    fac.clamp(0.2, max)
}

/// Starting step size estimate.
pub fn initial_step<F: Fn(&State) -> State>(f: &F, y: &State, k1: &State, rtol: f64, atol: f64, max_step: f64) -> f64 {
    let sk: State = std::array::from_fn(|i| atol + rtol * y[i].abs());
    let rms = |v: &State| (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / 3.0).sqrt();
    let (dnf, dny) = (rms(k1), rms(y));
    let h0 = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * dny / dnf };
    let h0 = h0.min(max_step);
    let y1 = axpy(y, &[(1.0, k1)], h0);
    let k2 = f(&y1);
    let diff: State = std::array::from_fn(|i| k2[i] - k1[i]);
    let der2 = rms(&diff) / h0;
    let der12 = dnf.max(der2);
    let h1 = if der12 <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    (100.0 * h0).min(h1).min(max_step)
}

/// Fixed-step integration, used to check the order of the scheme.
pub fn solve_fixed<F: Fn(&State) -> State>(f: &F, y0: State, t_end: f64, n: usize) -> State {
    let h = t_end / n as f64;
    let mut y = y0;
    let mut k1 = f(&y);
    for i in 0..n {
        let s = step(f, i as f64 * h, &y, &k1, h, 1.0, 1.0);
        y = s.y1;
        k1 = s.k7;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(y: &State) -> State {
        [-y[1], y[0], -0.5 * y[2]]
    }

    #[test]
    fn fifth_order_convergence() {
        let exact = [1f64.cos(), 1f64.sin(), (-0.5f64).exp()];
        let err = |n| {
            let y = solve_fixed(&rot, [1.0, 0.0, 1.0], 1.0, n);
            (0..3).map(|i| (y[i] - exact[i]).abs()).fold(0.0, f64::max)
        };
        let ratio = err(10) / err(20);
        assert!(ratio > 25.0, "ratio {ratio}");
    }

    #[test]
    fn dense_output_interpolates() {
        let y0 = [1.0, 0.0, 1.0];
        let s = step(&rot, 0.0, &y0, &rot(&y0), 0.05, 1e-8, 1e-10);
        let y = s.dense(0.03);
        assert!((y[0] - 0.03f64.cos()).abs() < 1e-10 && (y[1] - 0.03f64.sin()).abs() < 1e-10);
        let end = s.dense(0.05);
        assert!((0..3).all(|i| (end[i] - s.y1[i]).abs() < 1e-15));
    }
}
