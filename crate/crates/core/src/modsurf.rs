//! The modular surface PSL(2,Z)\H: scattering determinant, Eisenstein series
//! by Fourier expansion, truncation, Maass–Selberg, and the discrete and
//! continuous spectral counts N and M.

use crate::error::{Error, Result};
use crate::hgeom::UHPoint;
use crate::quad::{integrate, integrate_with_breaks, Estimate, Tolerance};
use crate::specfun::{bessel_k_ir, digamma, ln_gamma, zeta, zeta_log_deriv};
use crate::transforms::SpectralInterval;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::path::Path;

const EIGENVALUES_TXT: &str = include_str!("../data/modular_eigenvalues.txt");

/// Default exclusion radius around the Γ(ir) pole at r = 0.
pub const R_MIN: f64 = 0.05;

pub const VOLUME: f64 = PI / 3.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---- eigenvalue table ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueTable {
    pub r: Vec<f64>,
    pub source: String,
}

impl EigenvalueTable {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut r = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("not a number: {line:?}") })?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Parse { line: i + 1, msg: format!("spectral parameter must be positive, got {v}") });
            }
            if let Some(&last) = r.last() {
                if v < last {
                    return Err(Error::Parse { line: i + 1, msg: format!("entries not sorted: {v} after {last}") });
                }
            }
            r.push(v);
        }
        if r.is_empty() {
            return Err(Error::Parse { line: 0, msg: "eigenvalue table is empty".into() });
        }
        Ok(EigenvalueTable { r, source: source.into() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn modular() -> Self {
        Self::parse(EIGENVALUES_TXT, "modular_eigenvalues.txt").expect("shipped table is valid")
    }

    pub fn truncated(&self, n: usize) -> Self {
        EigenvalueTable { r: self.r[..n.min(self.r.len())].to_vec(), source: format!("{} (first {n})", self.source) }
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.r.iter().map(|r| 0.25 + r * r)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// N(X, I): tabulated eigenvalues 1/4 + r² in [a, b].
pub fn count_discrete(interval: &SpectralInterval, table: &EigenvalueTable) -> usize {
    table.eigenvalues().filter(|&l| interval.contains_eigenvalue(l)).count()
}

// ---- scattering ------------------------------------------------------------------

/// φ(1/2 + ir) = √π Γ(ir) ζ(2ir) / (Γ(1/2 + ir) ζ(1 + 2ir)).
pub fn scattering_det(r: f64) -> Result<Complex64> {
    if r == 0.0 {
        return Err(Error::Pole("scattering determinant has Gamma(ir) pole at r = 0".into()));
    }
    scattering_det_at(c(0.5, r))
}

/// φ(s) for general s (Re s ≠ 1/2 allowed, away from poles).
pub fn scattering_det_at(s: Complex64) -> Result<Complex64> {
    let lg = ln_gamma(s - 0.5)? - ln_gamma(s)?;
    Ok(PI.sqrt() * lg.exp() * zeta(2.0 * s - 1.0)? / zeta(2.0 * s)?)
}

/// −φ′/φ(1/2 + ir), real on the critical line.
pub fn scattering_log_deriv(r: f64, r_min: f64) -> Result<f64> {
    if r.abs() < r_min {
        return Err(Error::Pole(format!("|r| = {} inside the exclusion radius {r_min} around r = 0", r.abs())));
    }
    let v = digamma(c(0.0, r))? - digamma(c(0.5, r))? + 2.0 * zeta_log_deriv(c(0.0, 2.0 * r))?
        - 2.0 * zeta_log_deriv(c(1.0, 2.0 * r))?;
    if v.im.abs() > 1e-8 * v.re.abs().max(1.0) {
        return Err(Error::Degenerate(format!("log-derivative not real at r = {r}: imaginary part {:e}", v.im)));
    }
    Ok(-v.re)
}

/// Continuous arg φ(1/2 + ir) on [r0, r1] sampled with unwrapping.
pub fn scattering_phase_change(r0: f64, r1: f64, steps: usize) -> Result<f64> {
    let mut prev = scattering_det(r0)?.arg();
    let mut total = 0.0;
    for i in 1..=steps {
        let r = r0 + (r1 - r0) * i as f64 / steps as f64;
        let a = scattering_det(r)?.arg();
        let mut d = a - prev;
        while d > PI {
            d -= TAU;
        }
        while d < -PI {
            d += TAU;
        }
        total += d;
        prev = a;
    }
    Ok(total)
}

/// M(X, I) = (1/4π)∫_{τ⁻¹(I)} −φ′/φ = (1/2π)∫_α^β −φ′/φ(1/2 + ir) dr.
pub fn continuous_mass(interval: &SpectralInterval, tol: Tolerance) -> Result<Estimate> {
    continuous_mass_with(interval, R_MIN, tol)
}

pub fn continuous_mass_with(interval: &SpectralInterval, r_min: f64, tol: Tolerance) -> Result<Estimate> {
    if interval.is_degenerate() {
        return Ok(Estimate::exact(0.0));
    }
    if interval.alpha < r_min {
        return Err(Error::InvalidInput(format!(
            "interval reaches r = {} < {r_min}; keep it away from lambda = 1/4",
            interval.alpha
        )));
    }
    let fail = std::cell::RefCell::new(None);
    let n = ((interval.beta - interval.alpha) * 2.0).ceil().clamp(1.0, 1000.0) as usize;
    let breaks: Vec<f64> =
        (1..n).map(|i| interval.alpha + (interval.beta - interval.alpha) * i as f64 / n as f64).collect();
    let est = integrate_with_breaks(
        |r| match scattering_log_deriv(r, r_min) {
            Ok(v) => v,
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        interval.alpha,
        interval.beta,
        &breaks,
        tol,
    )?;
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    Ok(est.scale(1.0 / TAU))
}

// ---- Eisenstein series ------------------------------------------------------------

/// Σ_{ab = n} (a/b)^{ir}, real.
pub fn divisor_phase_sum(n: u64, r: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let mut s = 0.0;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let e = d;
            let f = n / d;
            s += (r * (2.0 * (e as f64).ln() - ln_n)).cos();
            if e != f {
                s += (r * (2.0 * (f as f64).ln() - ln_n)).cos();
            }
        }
        d += 1;
    }
    s
}

/// E(z, 1/2 + ir) = y^s + φ y^{1−s} + C √y Σ τ(n) K_{ir}(2πny) cos(2πnx).
#[derive(Debug, Clone)]
pub struct EisensteinEvaluator {
    pub r: f64,
    pub modes: usize,
    phi: Complex64,
    coef: Complex64,
    tau: Vec<f64>,
}

/// Fourier data of E at one height: E(x + iy) = a0 + Σ bₙ cos(2πnx).
#[derive(Debug, Clone)]
pub struct FourierRow {
    pub y: f64,
    pub constant: Complex64,
    pub modes: Vec<Complex64>,
    pub truncation_bound: f64,
    pub underflow: bool,
}

impl FourierRow {
    pub fn eval(&self, x: f64) -> Complex64 {
        self.constant + self.eval_nonconstant(x)
    }

    pub fn eval_nonconstant(&self, x: f64) -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for (i, b) in self.modes.iter().enumerate() {
            v += b * (TAU * (i + 1) as f64 * x).cos();
        }
        v
    }

    /// ∫₀¹ |E(x + iy)|² dx by Parseval.
    pub fn mean_square(&self) -> f64 {
        self.constant.norm_sqr() + 0.5 * self.modes.iter().map(|b| b.norm_sqr()).sum::<f64>()
    }

    /// ∫₀¹ |E − constant term|² dx.
    pub fn nonconstant_mean_square(&self) -> f64 {
        0.5 * self.modes.iter().map(|b| b.norm_sqr()).sum::<f64>()
    }
}

impl EisensteinEvaluator {
    pub fn new(r: f64, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidInput("at least one Fourier mode required".into()));
        }
        let s = c(0.5, r);
        let phi = scattering_det(r)?;
        let coef = 4.0 * (s * PI.ln()).exp() / ((ln_gamma(s)?).exp() * zeta(2.0 * s)?);
        let tau = (1..=modes as u64).map(|n| divisor_phase_sum(n, r)).collect();
        Ok(EisensteinEvaluator { r, modes, phi, coef, tau })
    }

    /// Enough modes that the truncation bound at height ≥ y_min is below tol.
    pub fn with_tolerance(r: f64, y_min: f64, tol: f64) -> Result<Self> {
        let probe = Self::new(r, 1)?;
        let mut n = 1;
        while probe.tail_bound(y_min, n) > tol && n < 100_000 {
            n += 1;
        }
        Self::new(r, n)
    }

    pub fn phi(&self) -> Complex64 {
        self.phi
    }

    /// Bound on Σ_{n>N} |coef √y τ(n) K_{ir}(2πny)| using |K_{ir}| ≤ K₀,
    /// K₀(x) ≤ √(π/2x)e^{−x} and τ(n) ≤ 2√n.
    pub fn tail_bound(&self, y: f64, modes: usize) -> f64 {
        let q = (-TAU * y).exp();
        self.coef.norm() * q.powi(modes as i32 + 1) / (1.0 - q)
    }

    pub fn constant_term(&self, y: f64) -> Complex64 {
        let s = c(0.5, self.r);
        let ly = y.ln();
        (s * ly).exp() + self.phi * ((1.0 - s) * ly).exp()
    }

    pub fn row(&self, y: f64) -> Result<FourierRow> {
        if !(y > 0.0) {
            return Err(Error::InvalidInput(format!("height must be positive, got {y}")));
        }
        let sy = y.sqrt();
        let mut modes = Vec::with_capacity(self.modes);
        let mut underflow = false;
        for (i, &t) in self.tau.iter().enumerate() {
            let k = bessel_k_ir(self.r, TAU * (i + 1) as f64 * y)?;
            underflow |= k.underflow;
            modes.push(self.coef * (sy * t * k.value));
        }
        Ok(FourierRow {
            y,
            constant: self.constant_term(y),
            modes,
            truncation_bound: self.tail_bound(y, self.modes),
            underflow,
        })
    }

    pub fn eval(&self, z: UHPoint) -> Result<Complex64> {
        Ok(self.row(z.y)?.eval(z.x))
    }

    /// E with the constant term removed above height `cut`.
    pub fn truncated(&self, z: UHPoint, cut: f64) -> Result<Complex64> {
        let row = self.row(z.y)?;
        Ok(if z.y > cut { row.eval_nonconstant(z.x) } else { row.eval(z.x) })
    }
}

/// Convenience: E(z, 1/2 + ir) with a truncation-error estimate.
pub fn eisenstein(z: UHPoint, r: f64, modes: usize) -> Result<(Complex64, f64)> {
    let e = EisensteinEvaluator::new(r, modes)?;
    let row = e.row(z.y)?;
    Ok((row.eval(z.x), row.truncation_bound))
}

pub fn truncated_eisenstein(z: UHPoint, r: f64, cut: f64, modes: usize) -> Result<Complex64> {
    EisensteinEvaluator::new(r, modes)?.truncated(z, cut)
}

// ---- Maass–Selberg -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaassSelbergReport {
    pub r: f64,
    pub cut: f64,
    pub modes: usize,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
    pub tail: f64,
    pub residual: f64,
}

/// Closed-form part: 2 log Y − φ′/φ + (φ̄ Y^{2ir} − φ Y^{−2ir})/(2ir).
pub fn maass_selberg_closed_form(r: f64, cut: f64) -> Result<f64> {
    let phi = scattering_det(r)?;
    let y2 = c(0.0, 2.0 * r * cut.ln()).exp();
    let osc = (phi.conj() * y2 - phi * y2.conj()) / c(0.0, 2.0 * r);
    Ok(2.0 * cut.ln() + scattering_log_deriv(r, 0.0)? + osc.re)
}

/// ∫ over the truncated fundamental domain y ≤ Y of a(z)|E|², for
/// observables depending only on y (`weight`), split as a 2-D region below
/// y = 1 and Parseval rows above.
pub fn weighted_eisenstein_mass<W: Fn(f64) -> f64>(
    e: &EisensteinEvaluator,
    cut: f64,
    weight: W,
    tol: Tolerance,
) -> Result<Estimate> {
    let fail = std::cell::RefCell::new(None);
    let record = |res: Result<f64>| match res {
        Ok(v) => v,
        Err(err) => {
            fail.borrow_mut().get_or_insert(err);
            0.0
        }
    };
    let y0 = 3f64.sqrt() / 2.0;
    let low = integrate(
        |y| {
            record((|| {
                let row = e.row(y)?;
                let x0 = (1.0 - y * y).max(0.0).sqrt();
                let inner = integrate(|x| row.eval(x).norm_sqr(), x0, 0.5, Tolerance { abs: tol.abs * 1e-2, ..tol })?;
                Ok(2.0 * inner.value * weight(y) / (y * y))
            })())
        },
        y0,
        1.0_f64.min(cut),
        tol,
    )?;
    let mut total = low;
    if cut > 1.0 {
        let breaks: Vec<f64> = (2..(cut.ceil() as usize)).map(|k| k as f64).collect();
        let high = integrate_with_breaks(
            |y| record(e.row(y).map(|row| row.mean_square() * weight(y) / (y * y))),
            1.0,
            cut,
            &breaks,
            tol,
        )?;
        total = total + high;
    }
    if let Some(err) = fail.into_inner() {
        return Err(err);
    }
    Ok(total)
}

/// ∫_{y > Y} |E − constant term|² dμ.
pub fn truncated_tail_mass(e: &EisensteinEvaluator, cut: f64, tol: Tolerance) -> Result<Estimate> {
    let fail = std::cell::RefCell::new(None);
    let est = integrate(
        |y| match e.row(y) {
            Ok(row) => row.nonconstant_mean_square() / (y * y),
            Err(err) => {
                fail.borrow_mut().get_or_insert(err);
                0.0
            }
        },
        cut,
        cut + 10.0,
        tol,
    )?;
    if let Some(err) = fail.into_inner() {
        return Err(err);
    }
    Ok(est)
}

/// Compare ∫_{X(Y)} |E|² dμ with the Maass–Selberg closed form.
pub fn maass_selberg_check(r: f64, cut: f64, modes: usize, tol: Tolerance) -> Result<MaassSelbergReport> {
    if r == 0.0 {
        return Err(Error::Pole("Maass-Selberg check requires r != 0".into()));
    }
    if !(cut >= 1.0) {
        return Err(Error::InvalidInput(format!("truncation height must be >= 1, got {cut}")));
    }
    let e = EisensteinEvaluator::new(r, modes)?;
    let lhs = weighted_eisenstein_mass(&e, cut, |_| 1.0, tol)?;
    let tail = truncated_tail_mass(&e, cut, tol)?.value;
    let rhs = maass_selberg_closed_form(r, cut)? - tail;
    Ok(MaassSelbergReport {
        r,
        cut,
        modes,
        lhs: lhs.value,
        lhs_error: lhs.error,
        rhs,
        tail,
        residual: lhs.value - rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> UHPoint {
        UHPoint::new(x, y).unwrap()
    }

    #[test]
    fn table_parsing() {
        assert!(EigenvalueTable::parse("", "t").is_err());
        assert!(EigenvalueTable::parse("# only a comment\n", "t").is_err());
        let t = EigenvalueTable::parse("# hdr\n1.0\n2.0 # c\n\n3.5\n", "t").unwrap();
        assert_eq!(t.len(), 3);
        match EigenvalueTable::parse("1.0\n0.5\n", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(EigenvalueTable::parse("-1.0\n", "t"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(EigenvalueTable::modular().len(), 25);
    }

    #[test]
    fn discrete_counts() {
        let t = EigenvalueTable::modular();
        let low = SpectralInterval::from_eigenvalues(1.0, 50.0).unwrap();
        assert_eq!(count_discrete(&low, &t), 0);
        let first = SpectralInterval::from_eigenvalues(81.25, 100.25).unwrap();
        assert_eq!(count_discrete(&first, &t), 1);
        let a = SpectralInterval::from_spectral(9.0, 15.0).unwrap();
        let b = SpectralInterval::from_spectral(15.0001, 20.0).unwrap();
        let ab = SpectralInterval::from_spectral(9.0, 20.0).unwrap();
        assert_eq!(count_discrete(&a, &t) + count_discrete(&b, &t), count_discrete(&ab, &t));
    }

    #[test]
    fn scattering_unitarity_and_functional_equation() {
        for i in 0..=100 {
            let r = 0.1 + 0.499 * i as f64;
            let p = scattering_det(r).unwrap();
            assert!((p.norm() - 1.0).abs() < 1e-9, "r = {r}");
            let q = scattering_det(-r).unwrap();
            assert!((p * q - 1.0).norm() < 1e-9);
        }
        assert!(scattering_det(0.0).is_err());
        let s = c(0.8, 2.0);
        let prod = scattering_det_at(s).unwrap() * scattering_det_at(1.0 - s).unwrap();
        assert!((prod - 1.0).norm() < 1e-9);
    }

    #[test]
    fn scattering_limit_at_zero() {
        for k in 3..7 {
            let p = scattering_det(10f64.powi(-k)).unwrap();
            assert!((p + 1.0).norm() < 10f64.powi(-k + 2));
        }
    }

    #[test]
    fn log_derivative_properties() {
        let v = scattering_log_deriv(2.0, R_MIN).unwrap();
        assert!((v - scattering_log_deriv(-2.0, R_MIN).unwrap()).abs() < 1e-8);
        let h = 1e-5;
        let fd = (scattering_det(10.0 + h).unwrap().arg() - scattering_det(10.0 - h).unwrap().arg()) / (2.0 * h);
        assert!((scattering_log_deriv(10.0, R_MIN).unwrap() + fd).abs() < 1e-5);
        assert!(scattering_log_deriv(0.01, R_MIN).is_err());
    }

    #[test]
    fn continuous_mass_matches_phase() {
        let i = SpectralInterval::from_eigenvalues(0.5, 1.0).unwrap();
        let m = continuous_mass(&i, Tolerance::default()).unwrap().value;
        let phase = scattering_phase_change(i.alpha, i.beta, 2000).unwrap();
        assert!((m + phase / TAU).abs() < 1e-6);
        let fine = continuous_mass(&i, Tolerance::new(1e-13, 1e-13)).unwrap().value;
        assert!((m - fine).abs() < 1e-6);
        let deg = SpectralInterval::from_eigenvalues(0.7, 0.7).unwrap();
        assert_eq!(continuous_mass(&deg, Tolerance::default()).unwrap().value, 0.0);
        let a = SpectralInterval::from_spectral(0.5, 2.0).unwrap();
        let b = SpectralInterval::from_spectral(2.0, 5.0).unwrap();
        let ab = SpectralInterval::from_spectral(0.5, 5.0).unwrap();
        let t = Tolerance::default();
        let sum = continuous_mass(&a, t).unwrap().value + continuous_mass(&b, t).unwrap().value;
        assert!((sum - continuous_mass(&ab, t).unwrap().value).abs() < 1e-8);
        let near = SpectralInterval::from_spectral(0.01, 1.0).unwrap();
        assert!(continuous_mass(&near, t).is_err());
    }

    #[test]
    fn eisenstein_periodic_and_modular() {
        let e = EisensteinEvaluator::new(2.0, 30).unwrap();
        let z = pt(0.3, 1.2);
        let a = e.eval(z).unwrap();
        assert_eq!(a, e.eval(pt(1.3, 1.2)).unwrap());
        // S z = −1/z
        let w = crate::hgeom::Moebius::inversion().apply(z);
        let big = EisensteinEvaluator::with_tolerance(2.0, w.y, 1e-12).unwrap();
        let b = big.eval(w).unwrap();
        let a = big.eval(z).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn eisenstein_is_an_eigenfunction() {
        let (r, x, y) = (3.0, 0.1, 1.5);
        let e = EisensteinEvaluator::new(r, 30).unwrap();
        let f = |x: f64, y: f64| e.eval(pt(x, y)).unwrap();
        let h = 1e-3;
        let lap = -(y * y)
            * (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y))
            / (h * h);
        let expect = (0.25 + r * r) * f(x, y);
        assert!((lap - expect).norm() < 1e-4 * expect.norm().max(1.0), "{lap} vs {expect}");
    }

    #[test]
    fn truncation_behaviour() {
        let e = EisensteinEvaluator::new(2.0, 20).unwrap();
        let z = pt(0.2, 2.0);
        assert_eq!(e.truncated(z, 5.0).unwrap(), e.eval(z).unwrap());
        let high = pt(0.2, 10.0);
        let t = e.truncated(high, 5.0).unwrap();
        let row = e.row(10.0).unwrap();
        let first = row.modes[0] * (TAU * 0.2).cos();
        let ratio = t.norm() / first.norm();
        assert!(ratio > 0.5 && ratio < 2.0);
        let zeroth = integrate(|x| e.truncated(pt(x, 8.0), 5.0).unwrap().re, 0.0, 1.0, Tolerance::default())
            .unwrap()
            .value;
        assert!(zeroth.abs() < 1e-10);
    }

    #[test]
    fn maass_selberg_small_case() {
        let rep = maass_selberg_check(1.0, 3.0, 12, Tolerance::new(1e-9, 1e-10)).unwrap();
        assert!(rep.residual.abs() < 1e-3, "{rep:?}");
        let rep2 = maass_selberg_check(1.0, 3.0, 24, Tolerance::new(1e-9, 1e-10)).unwrap();
        assert!((rep2.residual - rep.residual).abs() <= 0.1 * rep.residual.abs().max(1e-9));
    }

    #[test]
    fn maass_selberg_log_derivative_in_y() {
        // The oscillatory part is bounded by 1/|r|; its log Y derivative by 2.
        let r = 2.0;
        let flat = scattering_log_deriv(r, R_MIN).unwrap();
        for i in 0..=30 {
            let y = 3.0 + 0.1 * i as f64;
            let osc = maass_selberg_closed_form(r, y).unwrap() - 2.0 * y.ln() - flat;
            assert!(osc.abs() <= 1.0 / r + 1e-12);
            let h: f64 = 1e-4;
            let d = (maass_selberg_closed_form(r, y * h.exp()).unwrap()
                - maass_selberg_closed_form(r, y * (-h).exp()).unwrap())
                / (2.0 * h);
            assert!((d - 2.0).abs() <= 2.0 + 1e-6, "Y = {y}: {d}");
        }
    }

    #[test]
    fn divisor_sums() {
        assert_eq!(divisor_phase_sum(1, 3.0), 1.0);
        assert!((divisor_phase_sum(6, 0.0) - 4.0).abs() < 1e-15);
        assert!((divisor_phase_sum(4, 0.0) - 3.0).abs() < 1e-15);
    }
}
