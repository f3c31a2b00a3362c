//! Selberg/Harish-Chandra transforms between radial kernels k(ρ), Fourier
//! partners g(u) and spectral multipliers h(r), plus the concrete families
//! used downstream: heat, ball-indicator kernels and smoothed spectral windows.

use crate::cheb::ChebTable;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, Estimate, Tolerance};
use crate::specfun::erf;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Eigenvalue window [a, b] ⊂ (1/4, ∞) and its spectral-parameter image
/// [α, β] with a = 1/4 + α², b = 1/4 + β².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SpectralInterval {
    pub fn from_eigenvalues(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(Error::InvalidInput(format!("invalid eigenvalue interval [{a}, {b}]")));
        }
        if a <= 0.25 {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] must lie strictly above 1/4")));
        }
        Ok(SpectralInterval { a, b, alpha: (a - 0.25).sqrt(), beta: (b - 0.25).sqrt() })
    }

    pub fn from_spectral(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= alpha && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid spectral interval [{alpha}, {beta}]")));
        }
        Ok(SpectralInterval { a: 0.25 + alpha * alpha, b: 0.25 + beta * beta, alpha, beta })
    }

    pub fn contains_eigenvalue(&self, lambda: f64) -> bool {
        lambda >= self.a && lambda <= self.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Numeric,
}

/// (h, g, k) with h even in r and g(u) = (1/2π)∫ e^{iru} h(r) dr.
#[derive(Clone)]
pub struct TestFunctionTriple {
    pub name: String,
    pub h: RealFn,
    /// Continuation of h off the real axis, when known.
    pub h_complex: Option<ComplexFn>,
    pub g: RealFn,
    pub g_prime: Option<RealFn>,
    /// Closed-form kernel; otherwise computed from g′.
    pub k_closed: Option<RealFn>,
    /// g is negligible beyond this |u|.
    pub g_support: f64,
    pub provenance: Provenance,
}

impl std::fmt::Debug for TestFunctionTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunctionTriple")
            .field("name", &self.name)
            .field("g_support", &self.g_support)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl TestFunctionTriple {
    pub fn h(&self, r: f64) -> f64 {
        (self.h)(r)
    }

    pub fn g(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    /// h at complex r; only for triples with a known continuation.
    pub fn h_at(&self, r: Complex64) -> Result<Complex64> {
        match &self.h_complex {
            Some(f) => Ok(f(r)),
            None => Err(Error::Unsupported(format!("{} has no continuation off the real axis", self.name))),
        }
    }

    pub fn kernel(&self, rho: f64, tol: Tolerance) -> Result<Estimate> {
        if let Some(k) = &self.k_closed {
            return Ok(Estimate::exact(k(rho)));
        }
        let gp = self
            .g_prime
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{} has neither k nor g'", self.name)))?;
        kernel_from_g(|u| gp(u), rho, self.g_support, tol)
    }

    /// The zero triple.
    pub fn zero() -> Self {
        let z: RealFn = Arc::new(|_| 0.0);
        TestFunctionTriple {
            name: "zero".into(),
            h: z.clone(),
            h_complex: Some(Arc::new(|_| Complex64::new(0.0, 0.0))),
            g: z.clone(),
            g_prime: Some(z.clone()),
            k_closed: Some(z),
            g_support: 1.0,
            provenance: Provenance::ClosedForm,
        }
    }

    /// c·(h, g, k).
    pub fn scaled(&self, c: f64) -> Self {
        let (h, g) = (self.h.clone(), self.g.clone());
        TestFunctionTriple {
            name: format!("{c}*{}", self.name),
            h: Arc::new(move |r| c * h(r)),
            h_complex: self.h_complex.clone().map(|f| -> ComplexFn { Arc::new(move |r| c * f(r)) }),
            g: Arc::new(move |u| c * g(u)),
            g_prime: self.g_prime.clone().map(|f| -> RealFn { Arc::new(move |u| c * f(u)) }),
            k_closed: self.k_closed.clone().map(|f| -> RealFn { Arc::new(move |u| c * f(u)) }),
            g_support: self.g_support,
            provenance: self.provenance,
        }
    }
}

// ---- transforms -------------------------------------------------------------

/// Smallest s (power of two ≥ 4) beyond which |h| is negligible.
pub fn decay_cutoff<F: Fn(f64) -> f64>(h: F) -> Result<f64> {
    let scale = (0..=100).map(|i| h(0.1 * i as f64).abs()).fold(f64::MIN_POSITIVE, f64::max);
    let mut s = 4.0;
    while s <= 4096.0 {
        let quiet = (0..=64).all(|i| {
            let x = s * (1.0 + i as f64 / 64.0);
            h(x).abs() * (1.0 + x) <= 1e-17 * scale
        });
        if quiet {
            return Ok(s);
        }
        s *= 2.0;
    }
    Err(Error::InvalidInput("h does not decay fast enough for a truncated Fourier integral".into()))
}

/// g(u) = (1/2π)∫ e^{isu} h(s) ds for even h.
pub fn fourier_to_g<F: Fn(f64) -> f64>(h: F, u: f64, tol: Tolerance) -> Result<Estimate> {
    let cutoff = decay_cutoff(&h)?;
    fourier_to_g_with_cutoff(h, u, cutoff, tol)
}

pub fn fourier_to_g_with_cutoff<F: Fn(f64) -> f64>(h: F, u: f64, cutoff: f64, tol: Tolerance) -> Result<Estimate> {
    let breaks = oscillation_breaks(u, cutoff);
    Ok(integrate_with_breaks(|s| (s * u).cos() * h(s), 0.0, cutoff, &breaks, tol)?.scale(FRAC_1_PI))
}

/// h(r) = ∫ e^{iru} g(u) du = 2∫₀^U cos(ru) g(u) du for even g.
pub fn h_from_g<F: Fn(f64) -> f64>(g: F, r: f64, u_max: f64, tol: Tolerance) -> Result<Estimate> {
    let breaks = oscillation_breaks(r, u_max);
    Ok(integrate_with_breaks(|u| (r * u).cos() * g(u), 0.0, u_max, &breaks, tol)?.scale(2.0))
}

fn oscillation_breaks(freq: f64, len: f64) -> Vec<f64> {
    let n = ((freq.abs() * len / PI).ceil() as usize).clamp(1, 4000);
    (1..n).map(|i| len * i as f64 / n as f64).collect()
}

/// ∫_a^{upper} f(x)/√(cosh x − cosh a) dx with the endpoint singularity
/// removed by cosh x = cosh a + v² on [a, a + 1].
fn abel_integral<F: Fn(f64) -> f64>(f: F, a: f64, upper: f64, tol: Tolerance) -> Result<Estimate> {
    if upper <= a {
        return Ok(Estimate::exact(0.0));
    }
    let split = (a + 1.0).min(upper);
    let (sa, ca) = (a.sinh(), a.cosh());
    let vmax = (split.cosh() - ca).max(0.0).sqrt();
    let near = integrate(
        |v| {
            let sh = (sa * sa + 2.0 * v * v * ca + v.powi(4)).sqrt();
            if sh == 0.0 {
                return 0.0;
            }
            2.0 * f(sh.asinh()) / sh
        },
        0.0,
        vmax,
        tol,
    )?;
    if split >= upper {
        return Ok(near);
    }
    let far = integrate(|x| f(x) / (x.cosh() - ca).sqrt(), split, upper, tol)?;
    Ok(near + far)
}

/// k(ρ) = −(1/(√2 π))∫_ρ^∞ g′(u)/√(cosh u − cosh ρ) du.
pub fn kernel_from_g<F: Fn(f64) -> f64>(g_prime: F, rho: f64, u_max: f64, tol: Tolerance) -> Result<Estimate> {
    let rho = rho.abs();
    Ok(abel_integral(g_prime, rho, u_max, tol)?.scale(-1.0 / (SQRT_2 * PI)))
}

/// g(u) = √2 ∫_{|u|}^∞ k(ρ) sinh ρ / √(cosh ρ − cosh u) dρ.
pub fn g_from_kernel<F: Fn(f64) -> f64>(k: F, u: f64, rho_max: f64, tol: Tolerance) -> Result<Estimate> {
    let u = u.abs();
    Ok(abel_integral(|x| k(x) * x.sinh(), u, rho_max, tol)?.scale(SQRT_2))
}

/// h = S(k) by nested quadrature (g from k, then the cosine transform).
pub fn selberg_forward<F: Fn(f64) -> f64 + Sync>(k: F, r: f64, rho_max: f64, tol: Tolerance) -> Result<Estimate> {
    let inner = Tolerance { abs: tol.abs * 1e-2, ..tol };
    let fail = std::cell::RefCell::new(None);
    let est = h_from_g(
        |u| match g_from_kernel(&k, u, rho_max, inner) {
            Ok(e) => e.value,
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        r,
        rho_max,
        tol,
    );
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    est
}

// ---- tabulated round trip -----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTripConfig {
    pub u_max: f64,
    pub panels: usize,
    pub degree: usize,
    pub tol: Tolerance,
}

impl Default for RoundTripConfig {
    fn default() -> Self {
        RoundTripConfig { u_max: 16.0, panels: 32, degree: 24, tol: Tolerance::new(1e-12, 1e-12).with_budget(4000) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub r_grid: Vec<f64>,
    pub h: Vec<f64>,
    pub h_round_trip: Vec<f64>,
    pub max_error: f64,
    pub kernel_samples: Vec<(f64, f64)>,
}

/// h → g → k → g′ → h′ with Chebyshev tables of g, k and g′ on [0, u_max].
pub fn round_trip<F: Fn(f64) -> f64 + Sync>(h: F, r_grid: &[f64], cfg: RoundTripConfig) -> Result<RoundTripReport> {
    let cutoff = decay_cutoff(&h)?;
    let tol = cfg.tol;
    let tabulate = |f: &(dyn Fn(f64) -> Result<Estimate> + Sync)| -> Result<ChebTable> {
        let err = std::sync::Mutex::new(None);
        let t = ChebTable::build(
            |x| match f(x) {
                Ok(e) => e.value,
                Err(e) => {
                    err.lock().unwrap().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            cfg.u_max,
            cfg.panels,
            cfg.degree,
        );
        match err.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(t),
        }
    };
    let g_tab = tabulate(&|u| fourier_to_g_with_cutoff(&h, u, cutoff, tol))?;
    let k_tab = tabulate(&|rho| kernel_from_g(|u| g_tab.deriv(u), rho, cfg.u_max, tol))?;
    let g2_tab = tabulate(&|u| g_from_kernel(|x| k_tab.eval(x), u, cfg.u_max, tol))?;
    let mut h2 = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        h2.push(h_from_g(|u| g2_tab.eval(u), r, cfg.u_max, tol)?.value);
    }
    let hv: Vec<f64> = r_grid.iter().map(|&r| h(r)).collect();
    let max_error = hv.iter().zip(&h2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let kernel_samples = (0..=16).map(|i| (i as f64 * 0.5, k_tab.eval(i as f64 * 0.5))).collect();
    Ok(RoundTripReport { r_grid: r_grid.to_vec(), h: hv, h_round_trip: h2, max_error, kernel_samples })
}

// ---- families -------------------------------------------------------------------

/// h(r) = e^{−r²}, g(u) = e^{−u²/4}/(2√π).
pub fn gaussian_triple() -> TestFunctionTriple {
    let c = 0.5 / PI.sqrt();
    TestFunctionTriple {
        name: "gaussian".into(),
        h: Arc::new(|r| (-r * r).exp()),
        h_complex: Some(Arc::new(|r: Complex64| (-r * r).exp())),
        g: Arc::new(move |u| c * (-u * u / 4.0).exp()),
        g_prime: Some(Arc::new(move |u| -c * 0.5 * u * (-u * u / 4.0).exp())),
        k_closed: None,
        g_support: 16.0,
        provenance: Provenance::ClosedForm,
    }
}

/// Heat multiplier h(r) = e^{−t(1/4 + r²)}.
pub fn heat_triple(t: f64) -> Result<TestFunctionTriple> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("heat time must be positive, got {t}")));
    }
    let c = (-t / 4.0).exp() / (4.0 * PI * t).sqrt();
    Ok(TestFunctionTriple {
        name: format!("heat(t={t})"),
        h: Arc::new(move |r| (-t * (0.25 + r * r)).exp()),
        h_complex: Some(Arc::new(move |r: Complex64| (-t * (0.25 + r * r)).exp())),
        g: Arc::new(move |u| c * (-u * u / (4.0 * t)).exp()),
        g_prime: Some(Arc::new(move |u| -c * u / (2.0 * t) * (-u * u / (4.0 * t)).exp())),
        k_closed: None,
        g_support: (4.0 * t * 40.0).sqrt().max(8.0),
        provenance: Provenance::ClosedForm,
    })
}

/// e^{−t/2}√(cosh t − cosh u), stable for large t.
fn ball_g_factor(t: f64, u: f64) -> f64 {
    let s = 2.0 * (0.5 * (t + u)).sinh() * (0.5 * (t - u)).sinh();
    (-0.5 * t).exp() * s.max(0.0).sqrt()
}

/// S(k_t)(r) for the ball kernel k_t(ρ) = e^{−t/2}·1{ρ ≤ t}:
/// 4√2 e^{−t/2} ∫₀ᵗ cos(ru)√(cosh t − cosh u) du.
pub fn ball_kernel_transform(t: f64, r: f64, tol: Tolerance) -> Result<Estimate> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    // u = t − w² removes the square-root endpoint.
    let w_max = t.sqrt();
    let breaks = oscillation_breaks(r, w_max * w_max).into_iter().map(|u| (t - u).sqrt()).collect::<Vec<_>>();
    let est = integrate_with_breaks(
        |w| {
            let u = t - w * w;
            2.0 * w * (r * u).cos() * ball_g_factor(t, u)
        },
        0.0,
        w_max,
        &breaks,
        tol,
    )?;
    Ok(est.scale(4.0 * SQRT_2))
}

/// Ball-kernel transform at complex spectral parameter.
pub fn ball_kernel_transform_complex(t: f64, r: Complex64, tol: Tolerance) -> Result<Complex64> {
    let w_max = t.max(0.0).sqrt();
    let (v, _) = crate::quad::integrate_complex(
        |w| {
            let u = t - w * w;
            (r * u).cos() * (2.0 * w * ball_g_factor(t, u))
        },
        0.0,
        w_max,
        &[],
        tol,
    )?;
    Ok(v * (4.0 * SQRT_2))
}

pub fn ball_kernel_triple(t: f64) -> Result<TestFunctionTriple> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be positive, got {t}")));
    }
    let tol = Tolerance::default();
    Ok(TestFunctionTriple {
        name: format!("ball(t={t})"),
        h: Arc::new(move |r| ball_kernel_transform(t, r, tol).map(|e| e.value).unwrap_or(f64::NAN)),
        h_complex: Some(Arc::new(move |r| ball_kernel_transform_complex(t, r, tol).unwrap_or(Complex64::new(f64::NAN, 0.0)))),
        g: Arc::new(move |u: f64| if u.abs() <= t { 2.0 * SQRT_2 * ball_g_factor(t, u.abs()) } else { 0.0 }),
        g_prime: None,
        k_closed: Some(Arc::new(move |rho: f64| if rho.abs() <= t { (-0.5 * t).exp() } else { 0.0 })),
        g_support: t,
        provenance: Provenance::Numeric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAction {
    pub horizon: f64,
    pub r: f64,
    pub value: f64,
    pub error: f64,
}

/// (1/T)∫₀ᵀ |S(k_t)(r)|² dt.
pub fn spectral_action_average(horizon: f64, r: f64, tol: Tolerance) -> Result<SpectralAction> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    let inner = Tolerance { abs: tol.abs * 1e-2, ..tol };
    let fail = std::cell::RefCell::new(None);
    let breaks: Vec<f64> = (1..(horizon.ceil() as usize)).map(|i| i as f64).collect();
    let est = integrate_with_breaks(
        |t| match ball_kernel_transform(t, r, inner) {
            Ok(e) => e.value * e.value,
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        horizon,
        &breaks,
        tol,
    )?;
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    Ok(SpectralAction { horizon, r, value: est.value / horizon, error: est.error / horizon })
}

// ---- smoothed windows -------------------------------------------------------------

/// One-sided window h(r) = (1_{[α,β]} ∗ v_t)(r), v_t(x) = (t/√π)e^{−t²x²}.
pub fn window_one_sided(alpha: f64, beta: f64, t: f64, r: f64) -> f64 {
    0.5 * (erf(t * (beta - r)) - erf(t * (alpha - r)))
}

/// The same window at complex r: (t/√π)∫_α^β e^{−t²(r−ρ)²} dρ.
pub fn window_one_sided_complex(alpha: f64, beta: f64, t: f64, r: Complex64) -> Complex64 {
    if beta <= alpha {
        return Complex64::new(0.0, 0.0);
    }
    let f = |rho: f64| {
        let d = r - rho;
        (-(t * t) * d * d).exp() * (t / PI.sqrt())
    };
    let breaks: Vec<f64> = {
        let n = ((beta - alpha) * t).ceil().clamp(1.0, 200.0) as usize;
        (1..n).map(|i| alpha + (beta - alpha) * i as f64 / n as f64).collect()
    };
    crate::quad::integrate_generic(f, alpha, beta, &breaks, Tolerance::new(1e-13, 1e-12)).value
}

/// (sin βu − sin αu)/u and its derivative, with a series near 0.
fn sinc_difference(alpha: f64, beta: f64, u: f64) -> (f64, f64) {
    if u.abs() < 1e-3 {
        let d1 = beta - alpha;
        let d3 = beta.powi(3) - alpha.powi(3);
        let d5 = beta.powi(5) - alpha.powi(5);
        let d7 = beta.powi(7) - alpha.powi(7);
        let u2 = u * u;
        let val = d1 - d3 * u2 / 6.0 + d5 * u2 * u2 / 120.0 - d7 * u2 * u2 * u2 / 5040.0;
        let der = -d3 * u / 3.0 + d5 * u * u2 / 30.0 - d7 * u * u2 * u2 / 840.0;
        (val, der)
    } else {
        let s = (beta * u).sin() - (alpha * u).sin();
        let c = beta * (beta * u).cos() - alpha * (alpha * u).cos();
        (s / u, c / u - s / (u * u))
    }
}

/// Symmetrized window H_t(r) = h_t(r) + h_t(−r) with partner
/// G_t(u) = (1/π)(sin βu − sin αu)/u · e^{−u²/4t²}.
pub fn window_triple(interval: SpectralInterval, t: f64) -> Result<TestFunctionTriple> {
    if !(t >= 0.1) {
        return Err(Error::InvalidInput(format!("window sharpness must be >= 0.1, got {t}")));
    }
    if interval.is_degenerate() {
        let mut z = TestFunctionTriple::zero();
        z.name = "window(degenerate)".into();
        return Ok(z);
    }
    let (a, b) = (interval.alpha, interval.beta);
    let g = move |u: f64| FRAC_1_PI * sinc_difference(a, b, u).0 * (-u * u / (4.0 * t * t)).exp();
    let gp = move |u: f64| {
        let (s, ds) = sinc_difference(a, b, u);
        let e = (-u * u / (4.0 * t * t)).exp();
        FRAC_1_PI * e * (ds - s * u / (2.0 * t * t))
    };
    Ok(TestFunctionTriple {
        name: format!("window([{a},{b}], t={t})"),
        h: Arc::new(move |r| window_one_sided(a, b, t, r) + window_one_sided(a, b, t, -r)),
        h_complex: Some(Arc::new(move |r| window_one_sided_complex(a, b, t, r) + window_one_sided_complex(a, b, t, -r))),
        g: Arc::new(g),
        g_prime: Some(Arc::new(gp)),
        k_closed: None,
        g_support: (4.0 * t * t * 40.0).sqrt(),
        provenance: Provenance::ClosedForm,
    })
}

/// ∫₀^∞ (H_t(r) − 1_{[α,β]}(r)) r tanh(πr) dr.
pub fn window_error(interval: SpectralInterval, t: f64, tol: Tolerance) -> Result<Estimate> {
    let w = window_triple(interval, t)?;
    let (a, b) = (interval.alpha, interval.beta);
    let upper = b + 40.0 / t + 1.0;
    let f = |r: f64| {
        let ind = if r >= a && r <= b { 1.0 } else { 0.0 };
        (w.h(r) - ind) * r * (PI * r).tanh()
    };
    let mut breaks = vec![a, b];
    let n = (upper * t).ceil().min(2000.0) as usize;
    breaks.extend((1..n).map(|i| upper * i as f64 / n as f64));
    integrate_with_breaks(f, 0.0, upper, &breaks, tol)
}

// ---- admissibility ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub inconclusive: bool,
    pub even: bool,
    pub decays: bool,
    pub strip_finite: bool,
    /// max over the far grid of |h(r)|(1 + r²)^{1.01} relative to the near grid.
    pub decay_ratio: f64,
}

/// Evenness, decay like (1 + r²)^{−1−ε} and finiteness at Im r = 1/2 + ε.
pub fn admissibility_check(triple: &TestFunctionTriple) -> AdmissibilityReport {
    let weight = |r: f64| (1.0 + r * r).powf(1.01);
    let even = (0..200).all(|i| {
        let r = 0.137 * i as f64;
        let (p, m) = (triple.h(r), triple.h(-r));
        (p - m).abs() <= 1e-12 * (1.0 + p.abs())
    });
    let near = (0..=500).map(|i| triple.h(0.1 * i as f64).abs() * weight(0.1 * i as f64)).fold(0.0, f64::max);
    let far = (0..=200)
        .map(|i| {
            let r = 50.0 * (1000.0f64 / 50.0).powf(i as f64 / 200.0);
            triple.h(r).abs() * weight(r)
        })
        .fold(0.0, f64::max);
    let decay_ratio = if near > 0.0 { far / near } else { 0.0 };
    let decays = far.is_finite() && far <= near;
    let (strip_finite, inconclusive) = match &triple.h_complex {
        Some(f) => {
            let vals: Vec<f64> = (0..=120)
                .map(|i| {
                    let x = i as f64 * 0.5;
                    f(Complex64::new(x, 0.51)).norm() * weight(x)
                })
                .collect();
            let finite = vals.iter().all(|v| v.is_finite());
            let head = vals[..=60].iter().copied().fold(0.0, f64::max);
            let tail = vals[60..].iter().copied().fold(0.0, f64::max);
            (finite && tail <= head, false)
        }
        None => (false, true),
    };
    AdmissibilityReport {
        admissible: even && decays && strip_finite && !inconclusive,
        inconclusive,
        even,
        decays,
        strip_finite,
        decay_ratio,
    }
}

/// A triple with only h known (g computed by quadrature on demand).
pub fn numeric_triple(name: &str, h: RealFn) -> Result<TestFunctionTriple> {
    let cutoff = decay_cutoff(|r| h(r)).unwrap_or(64.0);
    let hg = h.clone();
    let tol = Tolerance::default();
    Ok(TestFunctionTriple {
        name: name.into(),
        h,
        h_complex: None,
        g: Arc::new(move |u| fourier_to_g_with_cutoff(|s| hg(s), u, cutoff, tol).map(|e| e.value).unwrap_or(f64::NAN)),
        g_prime: None,
        k_closed: None,
        g_support: 16.0,
        provenance: Provenance::Numeric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgeom::ball_volume;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn gaussian_self_transform() {
        for u in [0.0, 0.5, 2.0, 5.0] {
            let g = fourier_to_g(|r| (-r * r).exp(), u, tol()).unwrap();
            assert!((g.value - (-u * u / 4.0).exp() / (2.0 * PI.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_partner_matches_closed_form() {
        let h = heat_triple(1.0).unwrap();
        for u in [0.0, 1.0, 3.0, 7.5] {
            let g = fourier_to_g(|r| h.h(r), u, tol()).unwrap();
            assert!((g.value - h.g(u)).abs() < 1e-12, "u = {u}");
        }
        assert!((h.h(0.0) - (-0.25f64).exp()).abs() < 1e-15);
        let h2 = heat_triple(2.0).unwrap();
        let h3 = heat_triple(3.0).unwrap();
        for r in [0.0, 0.7, 2.0] {
            assert!((h.h(r) * h2.h(r) - h3.h(r)).abs() < 1e-15);
        }
        assert!(heat_triple(0.0).is_err());
    }

    #[test]
    fn window_partner_matches_closed_form() {
        let w = window_triple(SpectralInterval::from_spectral(1.0, 3.0).unwrap(), 2.0).unwrap();
        for i in 0..=40 {
            let u = 0.5 * i as f64;
            let g = fourier_to_g(|r| w.h(r), u, tol()).unwrap();
            assert!((g.value - w.g(u)).abs() < 1e-8, "u = {u}");
        }
        // G_t(0) = (β − α)/π
        assert!((w.g(0.0) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn window_values() {
        assert!((window_one_sided(0.0, 1.0, 2.0, 0.5) - 0.842700792949715).abs() < 1e-12);
        assert!((window_one_sided(0.0, 1.0, 1e6, 0.5) - 1.0).abs() < 1e-12);
        let w = window_triple(SpectralInterval::from_spectral(0.5, 2.0).unwrap(), 3.0).unwrap();
        for i in 0..100 {
            let v = w.h(0.05 * i as f64);
            assert!((0.0..=2.0).contains(&v));
        }
        let c = w.h_at(Complex64::new(1.3, 0.0)).unwrap();
        assert!((c.re - w.h(1.3)).abs() < 1e-12 && c.im.abs() < 1e-14);
        let z = window_triple(SpectralInterval::from_spectral(1.0, 1.0).unwrap(), 3.0).unwrap();
        assert_eq!(z.h(1.0), 0.0);
        assert!(window_triple(SpectralInterval::from_spectral(0.5, 2.0).unwrap(), 0.05).is_err());
    }

    #[test]
    fn window_derivative_matches_finite_difference() {
        let w = window_triple(SpectralInterval::from_spectral(0.5, 2.5).unwrap(), 4.0).unwrap();
        let gp = w.g_prime.as_ref().unwrap();
        for u in [0.0005, 0.3, 1.7, 6.0] {
            let h = 1e-5;
            let fd = (w.g(u + h) - w.g(u - h)) / (2.0 * h);
            assert!((gp(u) - fd).abs() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn kernel_linearity_and_zero() {
        let z = kernel_from_g(|_| 0.0, 1.0, 16.0, tol()).unwrap();
        assert_eq!(z.value, 0.0);
        let h = heat_triple(1.0).unwrap();
        let k1 = h.kernel(1.0, tol()).unwrap().value;
        let k2 = h.scaled(2.0).kernel(1.0, tol()).unwrap().value;
        assert!((k2 - 2.0 * k1).abs() < 1e-14);
        // Heat kernel decay, much faster than e^{−ρ/8t}.
        for rho in [1.0, 5.0, 10.0, 20.0] {
            let k = h.kernel(rho, tol()).unwrap().value;
            assert!(k.abs() <= 10.0 * (-rho / 8.0).exp());
        }
    }

    #[test]
    fn forward_of_kernel_recovers_heat_multiplier() {
        let h = heat_triple(1.0).unwrap();
        let kt = |rho: f64| h.kernel(rho, Tolerance::new(1e-13, 1e-12)).unwrap().value;
        for r in [0.0, 1.0, 2.5] {
            let back = selberg_forward(kt, r, 16.0, Tolerance::new(1e-9, 1e-10)).unwrap();
            assert!((back.value - h.h(r)).abs() < 1e-6, "r = {r}: {} vs {}", back.value, h.h(r));
        }
        assert_eq!(selberg_forward(|_| 0.0, 1.0, 5.0, tol()).unwrap().value, 0.0);
    }

    #[test]
    fn round_trip_gaussian() {
        let grid: Vec<f64> = (0..=40).map(|i| 0.5 * i as f64).collect();
        let rep = round_trip(|r| (-r * r).exp(), &grid, RoundTripConfig::default()).unwrap();
        assert!(rep.max_error < 1e-6, "{}", rep.max_error);
    }

    #[test]
    fn ball_kernel_identities() {
        let t = 3.0;
        let at_half = ball_kernel_transform_complex(t, Complex64::new(0.0, 0.5), tol()).unwrap();
        let expect = (-0.5 * t).exp() * ball_volume(t).unwrap();
        assert!((at_half.re - expect).abs() < 1e-9 && at_half.im.abs() < 1e-12);
        let a = ball_kernel_transform(t, 1.3, tol()).unwrap().value;
        let b = ball_kernel_transform(t, -1.3, tol()).unwrap().value;
        assert!((a - b).abs() < 1e-14);
        assert!(ball_kernel_transform(1e-6, 1.0, tol()).unwrap().value.abs() < 1e-8);
        let c = ball_kernel_transform_complex(t, Complex64::new(1.3, 0.0), tol()).unwrap();
        assert!((c.re - a).abs() < 1e-10);
    }

    #[test]
    fn ball_kernel_against_plane_wave_integral() {
        // ∫ k_t(d(i, w)) y_w^{1/2 + ir} dμ(w) in polar coordinates about i.
        let (t, r) = (5.0, 1.0);
        let s = Complex64::new(0.5, r);
        let inner = |rho: f64| {
            let (c, sh) = (rho.cosh(), rho.sinh());
            crate::quad::integrate(
                |th| {
                    let y = 1.0 / (c - sh * th.cos());
                    (s * y.ln()).exp().re
                },
                0.0,
                2.0 * PI,
                Tolerance::new(1e-12, 1e-12),
            )
            .unwrap()
            .value
                * sh
        };
        let direct = crate::quad::integrate(inner, 0.0, t, Tolerance::new(1e-9, 1e-10)).unwrap().value;
        let direct = direct * (-0.5 * t).exp();
        let closed = ball_kernel_transform(t, r, tol()).unwrap().value;
        assert!((direct - closed).abs() < 1e-4, "{direct} vs {closed}");
    }

    #[test]
    fn spectral_action_positive() {
        let a = spectral_action_average(5.0, 0.7, Tolerance::new(1e-8, 1e-8)).unwrap();
        assert!(a.value > 0.0);
        assert!(spectral_action_average(0.0, 0.7, tol()).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(admissibility_check(&heat_triple(1.0).unwrap()).admissible);
        let w = window_triple(SpectralInterval::from_spectral(0.5, 1.5).unwrap(), 5.0).unwrap();
        assert!(admissibility_check(&w).admissible);
        let slow = TestFunctionTriple {
            h: Arc::new(|r| (1.0 + r * r).powf(-0.4)),
            h_complex: Some(Arc::new(|r: Complex64| (1.0 + r * r).powf(-0.4))),
            ..TestFunctionTriple::zero()
        };
        let rep = admissibility_check(&slow);
        assert!(!rep.admissible && !rep.decays);
        assert!(fourier_to_g(|r| (1.0 + r * r).powf(-0.4), 1.0, tol()).is_err());
        let numeric = numeric_triple("num", Arc::new(|r| (-r * r).exp())).unwrap();
        assert!(admissibility_check(&numeric).inconclusive);
    }

    #[test]
    fn intervals() {
        let i = SpectralInterval::from_eigenvalues(0.5, 1.0).unwrap();
        assert!((i.alpha - 0.5).abs() < 1e-15 && (i.beta - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(SpectralInterval::from_eigenvalues(0.25, 1.0).is_err());
        assert!(SpectralInterval::from_eigenvalues(2.0, 1.0).is_err());
    }

    #[test]
    fn window_error_decays() {
        let i = SpectralInterval::from_eigenvalues(0.5, 2.0).unwrap();
        let e5 = window_error(i, 5.0, tol()).unwrap().value.abs();
        let e20 = window_error(i, 20.0, tol()).unwrap().value.abs();
        assert!(e20 < e5);
    }
}
