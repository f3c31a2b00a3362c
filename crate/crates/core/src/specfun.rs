//! Special functions: complex log-Gamma and digamma, Riemann zeta with its
//! derivative, and the modified Bessel function K of imaginary order.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Accuracy contract attached to each public evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyContract {
    pub domain: &'static str,
    pub rel_error: f64,
    pub method: &'static str,
}

pub const LOG_GAMMA_CONTRACT: AccuracyContract = AccuracyContract {
    domain: "|s| <= 100, s not a nonpositive integer",
    rel_error: 1e-12,
    method: "upward recurrence to Re s >= 15, Stirling series",
};

pub const DIGAMMA_CONTRACT: AccuracyContract = AccuracyContract {
    domain: "|s| <= 100, s not a nonpositive integer",
    rel_error: 1e-12,
    method: "upward recurrence to Re s >= 15, asymptotic series",
};

pub const ZETA_CONTRACT: AccuracyContract = AccuracyContract {
    domain: "Re s in [-2, 3], |Im s| <= 100, s != 1",
    rel_error: 1e-10,
    method: "Euler-Maclaurin summation",
};

pub const BESSEL_K_CONTRACT: AccuracyContract = AccuracyContract {
    domain: "r in [0, 30], x in [0.1, 200]",
    rel_error: 1e-9,
    method: "trapezoid rule on a shifted contour of the cosh integral",
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_pole(s: Complex64) -> Result<()> {
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        return Err(Error::Pole(format!("{s}")));
    }
    Ok(())
}

// B_{2k} / (2k (2k-1)), k = 1..10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

// B_{2k}, k = 1..10.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const SHIFT: f64 = 15.0;

/// Log-Gamma, continuous on C minus the nonpositive real axis.
pub fn ln_gamma(s: Complex64) -> Result<Complex64> {
    check_pole(s)?;
    let mut z = s;
    let mut acc = c(0.0, 0.0);
    while z.re < SHIFT {
        acc += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = c(0.0, 0.0);
    let mut p = inv;
    for coef in STIRLING {
        series += p * coef;
        p *= inv2;
    }
    Ok((z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - acc)
}

pub fn gamma(s: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(s)?.exp())
}

/// Digamma ψ = Γ'/Γ.
pub fn digamma(s: Complex64) -> Result<Complex64> {
    check_pole(s)?;
    let mut z = s;
    let mut acc = c(0.0, 0.0);
    while z.re < SHIFT {
        acc += 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = c(0.0, 0.0);
    let mut p = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        series += p * (b / (2.0 * (k + 1) as f64));
        p *= inv2;
    }
    Ok(z.ln() - 0.5 / z - series - acc)
}

/// ζ(2k) for k ≥ 1.
fn zeta_even(k: usize) -> f64 {
    match k {
        1 => PI * PI / 6.0,
        2 => PI.powi(4) / 90.0,
        3 => PI.powi(6) / 945.0,
        _ => (1..=60).rev().map(|n| (n as f64).powi(-(2 * k as i32))).sum(),
    }
}

/// Riemann zeta and its derivative, by Euler–Maclaurin summation.
pub fn zeta_with_deriv(s: Complex64) -> Result<(Complex64, Complex64)> {
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::Pole("zeta at s = 1".into()));
    }
    const K: usize = 30;
    let n = ((s.norm() + 2.0 * K as f64) / PI).ceil() as usize + 5;
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut z = c(0.0, 0.0);
    let mut dz = c(0.0, 0.0);
    for j in (1..n).rev() {
        let l = (j as f64).ln();
        let t = (-s * l).exp();
        z += t;
        dz -= t * l;
    }
    let n_s = (-s * ln_n).exp();
    let sm1 = s - 1.0;
    let head = n_s * nf / sm1;
    z += head + 0.5 * n_s;
    dz += -head * ln_n - head / sm1 - 0.5 * n_s * ln_n;

    // Tail terms B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1}.
    let mut poch = s;
    let mut dpoch = c(1.0, 0.0);
    let mut npow = n_s / nf;
    let two_pi_sq = (2.0 * PI).powi(2);
    let mut scale = 1.0;
    for k in 1..=K {
        scale /= two_pi_sq;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let coef = sign * 2.0 * zeta_even(k) * scale;
        let term = poch * npow * coef;
        z += term;
        dz += (dpoch - poch * ln_n) * npow * coef;
        if term.norm() < 1e-18 * z.norm() {
            break;
        }
        for j in [2 * k - 1, 2 * k] {
            let f = s + j as f64;
            dpoch = dpoch * f + poch;
            poch *= f;
        }
        npow /= nf * nf;
    }
    Ok((z, dz))
}

pub fn zeta(s: Complex64) -> Result<Complex64> {
    Ok(zeta_with_deriv(s)?.0)
}

/// ζ'/ζ, with an error if |ζ(s)| is too small to divide by safely.
pub fn zeta_log_deriv(s: Complex64) -> Result<Complex64> {
    let (z, dz) = zeta_with_deriv(s)?;
    if z.norm() < 1e-12 {
        return Err(Error::Degenerate(format!("|zeta({s})| = {:e} near a zero", z.norm())));
    }
    Ok(dz / z)
}

/// K_{ir}(x) with an underflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselValue {
    pub value: f64,
    pub underflow: bool,
}

/// Modified Bessel function K_{ir}(x) for real r and x > 0.
///
/// Uses K_{ir}(x) = ½∫ exp(−x cosh t + irt) dt over the line Im t = θ, with
/// θ chosen near the saddle so the integrand does not oscillate.
pub fn bessel_k_ir(r: f64, x: f64) -> Result<BesselValue> {
    if !(x > 0.0) || !x.is_finite() || !r.is_finite() {
        return Err(Error::InvalidInput(format!("bessel K requires x > 0, got x = {x}, r = {r}")));
    }
    let r = r.abs();
    let cap = PI / 2.0 - (3.0 / r.max(1e-300)).min(1.0);
    let theta = if r < x { (r / x).asin().min(cap) } else { cap };
    let (st, ct) = theta.sin_cos();
    let peak = -x * ct - r * theta;
    if peak < -740.0 {
        return Ok(BesselValue { value: 0.0, underflow: true });
    }
    // Relative to the peak, the integrand decays like exp(−x cosθ (cosh t − 1)).
    let decay = x * ct;
    let t_max = (1.0 + 45.0 / decay).acosh();
    let f = |t: f64| -> f64 {
        let (sh, ch) = (t.sinh(), t.cosh());
        let re = -x * ch * ct - r * theta - peak;
        let im = -x * sh * st + r * t;
        re.exp() * im.cos()
    };
    // Over the symmetric line the imaginary parts cancel pairwise; the real
    // part is even in t.
    let mut h = t_max / 16.0;
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += f(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..14 {
        let mut add = 0.0;
        let mut j = 1;
        while (j as f64) * h - 0.5 * h <= t_max {
            add += f((j as f64 - 0.5) * h);
            j += 1;
        }
        sum += add;
        h *= 0.5;
        let cur = sum * h;
        if (cur - prev).abs() <= 1e-15 * t_max.max(1.0) && h < 0.25 {
            prev = cur;
            break;
        }
        prev = cur;
    }
    let value = prev * peak.exp();
    Ok(BesselValue { value, underflow: value == 0.0 })
}

/// Error function for real arguments.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Riemann–Siegel-type completion χ(s) with ζ(s) = χ(s) ζ(1 − s).
pub fn zeta_functional_factor(s: Complex64) -> Result<Complex64> {
    let two = c(2.0, 0.0);
    Ok(two.powc(s) * c(PI, 0.0).powc(s - 1.0) * (s * (PI / 2.0)).sin() * gamma(1.0 - s)?)
}
