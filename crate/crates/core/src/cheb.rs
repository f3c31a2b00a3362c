//! Piecewise Chebyshev interpolants with analytic derivatives.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ChebTable {
    a: f64,
    b: f64,
    width: f64,
    coeffs: Vec<Vec<f64>>,
    dcoeffs: Vec<Vec<f64>>,
}

impl ChebTable {
    /// Interpolate `f` on `[a, b]` split into `panels` equal pieces, each of
    /// the given polynomial degree.
    pub fn build<F: Fn(f64) -> f64 + Sync>(f: F, a: f64, b: f64, panels: usize, degree: usize) -> Self {
        use rayon::prelude::*;
        let width = (b - a) / panels as f64;
        let n = degree + 1;
        let coeffs: Vec<Vec<f64>> = (0..panels)
            .into_par_iter()
            .map(|p| {
                let lo = a + p as f64 * width;
                let vals: Vec<f64> = (0..n)
                    .map(|k| {
                        let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                        f(lo + 0.5 * width * (t + 1.0))
                    })
                    .collect();
                (0..n)
                    .map(|j| {
                        let s: f64 = (0..n)
                            .map(|k| vals[k] * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                            .sum();
                        let c = 2.0 * s / n as f64;
                        if j == 0 {
                            0.5 * c
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        let dcoeffs = coeffs.iter().map(|c| derivative_coeffs(c, width)).collect();
        ChebTable { a, b, width, coeffs, dcoeffs }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let p = (((x - self.a) / self.width).floor().max(0.0) as usize).min(self.coeffs.len() - 1);
        let lo = self.a + p as f64 * self.width;
        (p, 2.0 * (x - lo) / self.width - 1.0)
    }

    /// Value at `x`; outside the domain the table is treated as zero.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let (p, t) = self.locate(x);
        clenshaw(&self.coeffs[p], t)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let (p, t) = self.locate(x);
        clenshaw(&self.dcoeffs[p], t)
    }

    /// Size of the trailing coefficients, a proxy for interpolation error.
    pub fn tail_magnitude(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.iter().rev().take(3).map(|v| v.abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

fn derivative_coeffs(c: &[f64], width: f64) -> Vec<f64> {
    let n = c.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[n - 2] = 2.0 * (n - 1) as f64 * c[n - 1];
    for k in (0..n.saturating_sub(2)).rev() {
        d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * c[k + 1];
    }
    d[0] *= 0.5;
    let scale = 2.0 / width;
    d.iter().map(|v| v * scale).collect()
}
