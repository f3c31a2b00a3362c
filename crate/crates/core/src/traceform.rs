//! Selberg trace formula on the modular surface (spectral side against
//! identity, hyperbolic, elliptic and parabolic terms), Weyl counting and the
//! signed/absolute spectral measures.

use crate::error::{Error, Result};
use crate::fuchsian::LengthSpectrum;
use crate::modsurf::{continuous_mass, count_discrete, scattering_log_deriv, EigenvalueTable, VOLUME};
use crate::quad::{integrate, integrate_with_breaks, Estimate, Tolerance};
use crate::specfun::{digamma, ln_gamma};
use crate::transforms::{decay_cutoff, SpectralInterval, TestFunctionTriple};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI, TAU};

fn unit_breaks(len: f64) -> Vec<f64> {
    (1..(len.ceil() as usize)).map(|i| i as f64).collect()
}

/// ∫₀^∞ f(r) dr with f negligible beyond the decay cutoff of h.
fn half_line<F: Fn(f64) -> f64>(cutoff: f64, f: F, tol: Tolerance) -> Result<Estimate> {
    integrate_with_breaks(f, 0.0, cutoff, &unit_breaks(cutoff), tol)
}

fn cutoff_of(h: &TestFunctionTriple) -> Result<f64> {
    decay_cutoff(|r| h.h(r)).map_err(|_| Error::InvalidInput(format!("{} does not decay; not admissible", h.name)))
}

/// (vol/4π)∫_ℝ h(r) r tanh(πr) dr.
pub fn identity_term(h: &TestFunctionTriple, volume: f64, tol: Tolerance) -> Result<Estimate> {
    let cutoff = cutoff_of(h)?;
    Ok(half_line(cutoff, |r| h.h(r) * r * (PI * r).tanh(), tol)?.scale(volume / TAU))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicTerm {
    pub value: f64,
    pub tail_bound: f64,
    pub classes_used: usize,
    pub lmax: f64,
}

/// Σ over primitive classes and powers n with nℓ ≤ Lmax of
/// ℓ g(nℓ) / (2 sinh(nℓ/2)), plus a tail bound from the growth e^L/L of
/// the number of closed geodesics: 2∫_{Lmax}^∞ e^{u/2}|g(u)| du.
pub fn hyperbolic_term(g: &dyn Fn(f64) -> f64, spectrum: &LengthSpectrum, lmax: f64, tol: Tolerance) -> Result<HyperbolicTerm> {
    if !spectrum.complete && !spectrum.entries.is_empty() {
        return Err(Error::Unsupported(format!("length spectrum is incomplete ({}); refusing to sum", spectrum.method)));
    }
    if lmax > spectrum.lmax + 1e-12 {
        return Err(Error::InvalidInput(format!("spectrum only covers lengths <= {}, asked for {lmax}", spectrum.lmax)));
    }
    let mut value = 0.0;
    let mut used = 0;
    for e in &spectrum.entries {
        let l = e.length;
        let mut n = 1;
        while n as f64 * l <= lmax {
            let nl = n as f64 * l;
            value += e.multiplicity as f64 * l * g(nl) / (2.0 * (0.5 * nl).sinh());
            n += 1;
        }
        if l <= lmax {
            used += e.multiplicity;
        }
    }
    let tail = integrate(|u| (0.5 * u).exp() * g(u).abs(), lmax, lmax + 60.0, tol)?.value * 2.0;
    Ok(HyperbolicTerm { value, tail_bound: tail, classes_used: used, lmax })
}

/// Elliptic contribution of the points of order 2 and 3:
/// (1/8)∫ h/cosh πr + (1/(3√3))∫ h cosh(πr/3)/cosh πr over ℝ.
pub fn elliptic_term(h: &TestFunctionTriple, tol: Tolerance) -> Result<Estimate> {
    let cutoff = cutoff_of(h)?;
    let c3 = 1.0 / (3.0 * 3f64.sqrt());
    let est = half_line(
        cutoff,
        |r| {
            let ch = (PI * r).cosh();
            h.h(r) * (0.125 + c3 * (PI * r / 3.0).cosh()) / ch
        },
        tol,
    )?;
    Ok(est.scale(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicTerms {
    /// (h(0)/4)·k·(1 − φ(1/2)) for scalar φ.
    pub scattering_at_half: f64,
    /// −k g(0) log 2.
    pub log2: f64,
    /// −(k/2π)∫ h(r) ψ(1 + ir) dr.
    pub digamma: f64,
    pub error: f64,
}

impl ParabolicTerms {
    pub fn total(&self) -> f64 {
        self.scattering_at_half + self.log2 + self.digamma
    }
}

pub fn parabolic_terms(h: &TestFunctionTriple, cusps: u32, phi_half: f64, tol: Tolerance) -> Result<ParabolicTerms> {
    if cusps == 0 {
        return Ok(ParabolicTerms { scattering_at_half: 0.0, log2: 0.0, digamma: 0.0, error: 0.0 });
    }
    let k = cusps as f64;
    let cutoff = cutoff_of(h)?;
    let psi = digamma_integral(|r| h.h(r), cutoff, tol)?;
    Ok(ParabolicTerms {
        scattering_at_half: 0.25 * h.h(0.0) * k * (1.0 - phi_half),
        log2: -k * h.g(0.0) * LN_2,
        digamma: -k / TAU * psi.value,
        error: k / TAU * psi.error,
    })
}

/// ∫_ℝ h(r) ψ(1 + ir) dr for even h (the odd imaginary part cancels).
pub fn digamma_integral<F: Fn(f64) -> f64>(h: F, cutoff: f64, tol: Tolerance) -> Result<Estimate> {
    let fail = std::cell::RefCell::new(None);
    let est = half_line(
        cutoff,
        |r| match digamma(Complex64::new(1.0, r)) {
            Ok(p) => h(r) * p.re,
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        tol,
    )?;
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    Ok(est.scale(2.0))
}

/// ∫_{τ⁻¹(I)} ψ(1 + ir) dr = 2 Im[log Γ(1 + iβ) − log Γ(1 + iα)].
pub fn digamma_window_closed_form(interval: &SpectralInterval) -> Result<f64> {
    let lb = ln_gamma(Complex64::new(1.0, interval.beta))?;
    let la = ln_gamma(Complex64::new(1.0, interval.alpha))?;
    Ok(2.0 * (lb - la).im)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSide {
    pub bottom: f64,
    pub discrete: f64,
    pub continuous: f64,
    pub continuous_error: f64,
    pub table_tail: f64,
}

impl SpectralSide {
    pub fn total(&self) -> f64 {
        self.bottom + self.discrete + self.continuous
    }
}

/// −φ′/φ(1/2 + ir) near r = 0 is a cancellation of two poles; below this
/// radius the density is taken as constant.
const DENSITY_FLOOR: f64 = 1e-3;

fn scattering_density(r: f64) -> Result<f64> {
    scattering_log_deriv(r.abs().max(DENSITY_FLOOR), 0.0)
}

/// h(i/2) + Σ h(r_j) + (1/4π)∫_ℝ h(r)(−φ′/φ)(1/2 + ir) dr.
pub fn spectral_side(h: &TestFunctionTriple, table: &EigenvalueTable, include_bottom: bool, tol: Tolerance) -> Result<SpectralSide> {
    let bottom = if include_bottom {
        let v = h.h_at(Complex64::new(0.0, 0.5)).map_err(|_| {
            Error::Unsupported(format!("{} cannot be evaluated at r = i/2 for the constant eigenfunction", h.name))
        })?;
        v.re
    } else {
        0.0
    };
    let discrete: f64 = table.r.iter().map(|&r| h.h(r)).sum();
    let cutoff = cutoff_of(h)?;
    let fail = std::cell::RefCell::new(None);
    let cont = half_line(
        cutoff,
        |r| match scattering_density(r) {
            Ok(d) => h.h(r) * d,
            Err(e) => {
                fail.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        tol,
    )?;
    if let Some(e) = fail.into_inner() {
        return Err(e);
    }
    // Eigenvalues beyond the table, estimated with the Weyl density (vol/2π) r.
    let last = *table.r.last().unwrap_or(&0.0);
    let table_tail = if last < cutoff {
        integrate(|r| h.h(r).abs() * r * VOLUME / TAU, last, cutoff, tol)?.value
    } else {
        0.0
    };
    Ok(SpectralSide { bottom, discrete, continuous: cont.value / TAU, continuous_error: cont.error / TAU, table_tail })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBudget {
    pub quadrature: f64,
    pub geodesic_tail: f64,
    pub table_tail: f64,
    pub special_functions: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub test_function: String,
    pub spectral_side: f64,
    pub bottom_term: f64,
    pub discrete_term: f64,
    pub continuous_term: f64,
    pub identity_term: f64,
    pub hyperbolic_term: f64,
    pub elliptic_term: f64,
    pub parabolic_terms: [f64; 3],
    pub geometric_side: f64,
    pub residual: f64,
    pub budget: TraceBudget,
    pub within_budget: bool,
    pub eigenvalues_used: usize,
    pub lmax: f64,
    pub classes_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub lmax: f64,
    pub include_bottom: bool,
    pub include_elliptic: bool,
    pub tol: Tolerance,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { lmax: 10.0, include_bottom: true, include_elliptic: true, tol: Tolerance::new(1e-12, 1e-12) }
    }
}

/// Spectral side minus geometric side on the modular surface.
pub fn trace_residual(
    h: &TestFunctionTriple,
    table: &EigenvalueTable,
    spectrum: &LengthSpectrum,
    opts: TraceOptions,
) -> Result<TraceReport> {
    let tol = opts.tol;
    let spec = spectral_side(h, table, opts.include_bottom, tol)?;
    let id = identity_term(h, VOLUME, tol)?;
    let g = |u: f64| h.g(u);
    let hyp = hyperbolic_term(&g, spectrum, opts.lmax, tol)?;
    let ell = if opts.include_elliptic { elliptic_term(h, tol)? } else { Estimate::exact(0.0) };
    let par = parabolic_terms(h, 1, -1.0, tol)?;
    let geometric = id.value + hyp.value + ell.value + par.total();
    let spectral = spec.total();
    let residual = spectral - geometric;
    let quadrature = spec.continuous_error + id.error + ell.error + par.error;
    let magnitude = spec.bottom.abs()
        + spec.discrete.abs()
        + spec.continuous.abs()
        + id.value.abs()
        + hyp.value.abs()
        + ell.value.abs()
        + par.scattering_at_half.abs()
        + par.log2.abs()
        + par.digamma.abs();
    let special_functions = 1e-9 * magnitude;
    let total = quadrature + hyp.tail_bound + spec.table_tail + special_functions;
    Ok(TraceReport {
        test_function: h.name.clone(),
        spectral_side: spectral,
        bottom_term: spec.bottom,
        discrete_term: spec.discrete,
        continuous_term: spec.continuous,
        identity_term: id.value,
        hyperbolic_term: hyp.value,
        elliptic_term: ell.value,
        parabolic_terms: [par.scattering_at_half, par.log2, par.digamma],
        geometric_side: geometric,
        residual,
        budget: TraceBudget { quadrature, geodesic_tail: hyp.tail_bound, table_tail: spec.table_tail, special_functions, total },
        within_budget: residual.abs() <= total,
        eigenvalues_used: table.len(),
        lmax: opts.lmax,
        classes_used: hyp.classes_used,
    })
}

// ---- Weyl counting -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub a: f64,
    pub b: f64,
    pub discrete: usize,
    pub continuous: f64,
    pub continuous_error: f64,
    pub n_plus_m: f64,
    pub main_term: f64,
    pub remainder: f64,
}

/// (1/4π)∫_a^b tanh(π√(λ − 1/4)) dλ.
pub fn weyl_density_integral(interval: &SpectralInterval, tol: Tolerance) -> Result<Estimate> {
    if interval.is_degenerate() {
        return Ok(Estimate::exact(0.0));
    }
    // λ = 1/4 + r², dλ = 2r dr.
    let est = integrate(|r| 2.0 * r * (PI * r).tanh(), interval.alpha, interval.beta, tol)?;
    Ok(est.scale(1.0 / (4.0 * PI)))
}

pub fn weyl_count(interval: &SpectralInterval, table: &EigenvalueTable, tol: Tolerance) -> Result<WeylReport> {
    let n = count_discrete(interval, table);
    let m = continuous_mass(interval, tol)?;
    let density = weyl_density_integral(interval, tol)?;
    let n_plus_m = n as f64 + m.value;
    Ok(WeylReport {
        a: interval.a,
        b: interval.b,
        discrete: n,
        continuous: m.value,
        continuous_error: m.error,
        n_plus_m,
        main_term: VOLUME * density.value,
        remainder: n_plus_m / VOLUME - density.value,
    })
}

// ---- spectral measures -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    Signed,
    Absolute,
}

/// Discrete eigenvalues plus the density r ↦ −φ′/φ(1/2 + ir)/2π on r ≥ 0.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    pub table: EigenvalueTable,
    pub mode: MeasureMode,
}

impl SpectralMeasure {
    /// ∫ f dν (or dν̃) for f given as a function of r ≥ 0 supported on [lo, hi].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Estimate> {
        let disc: f64 = self.table.r.iter().filter(|&&r| r >= lo && r <= hi).map(|&r| f(r)).sum();
        let fail = std::cell::RefCell::new(None);
        let mode = self.mode;
        let n = ((hi - lo) * 2.0).ceil().clamp(1.0, 1000.0) as usize;
        let breaks: Vec<f64> = (1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let cont = integrate_with_breaks(
            |r| match scattering_density(r) {
                Ok(d) => f(r) * if mode == MeasureMode::Absolute { d.abs() } else { d },
                Err(e) => {
                    fail.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            &breaks,
            tol,
        )?;
        if let Some(e) = fail.into_inner() {
            return Err(e);
        }
        Ok(Estimate::new(disc + cont.value / TAU, cont.error / TAU))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub abs_integral: f64,
    pub signed_abs: f64,
    pub slack: f64,
    /// (abs_integral − signed_abs)/slack; the implied constant needed.
    pub ratio: f64,
}

/// ∫ f dν̃ against |∫ f dν| + (k log Vol + Vol)‖f‖₁ for the indicator of
/// [α, β] in the spectral parameter.
pub fn measure_compare(alpha: f64, beta: f64, table: &EigenvalueTable, tol: Tolerance) -> Result<MeasureComparison> {
    if !(beta >= alpha && alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("invalid window [{alpha}, {beta}]")));
    }
    if beta == alpha {
        return Ok(MeasureComparison { abs_integral: 0.0, signed_abs: 0.0, slack: 0.0, ratio: 0.0 });
    }
    let one = |_: f64| 1.0;
    let abs = SpectralMeasure { table: table.clone(), mode: MeasureMode::Absolute }.integrate(one, alpha, beta, tol)?;
    let signed = SpectralMeasure { table: table.clone(), mode: MeasureMode::Signed }.integrate(one, alpha, beta, tol)?;
    let slack = (VOLUME.ln() + VOLUME) * (beta - alpha);
    let diff = abs.value - signed.value.abs();
    Ok(MeasureComparison { abs_integral: abs.value, signed_abs: signed.value.abs(), slack, ratio: diff / slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::FuchsianGroup;
    use crate::transforms::{heat_triple, window_triple};
    use std::sync::OnceLock;

    fn spectrum() -> &'static LengthSpectrum {
        static S: OnceLock<LengthSpectrum> = OnceLock::new();
        S.get_or_init(|| FuchsianGroup::modular().length_spectrum(10.0, 0).unwrap())
    }

    fn tol() -> Tolerance {
        Tolerance::new(1e-12, 1e-12)
    }

    #[test]
    fn zero_test_function() {
        let z = crate::transforms::TestFunctionTriple::zero();
        assert_eq!(identity_term(&z, VOLUME, tol()).unwrap().value, 0.0);
        assert_eq!(elliptic_term(&z, tol()).unwrap().value, 0.0);
        let p = parabolic_terms(&z, 1, -1.0, tol()).unwrap();
        assert_eq!(p.total(), 0.0);
        let s = spectral_side(&z, &EigenvalueTable::modular(), true, tol()).unwrap();
        assert_eq!(s.total(), 0.0);
    }

    #[test]
    fn compact_case_has_no_parabolic_terms() {
        let h = heat_triple(1.0).unwrap();
        let p = parabolic_terms(&h, 0, 1.0, tol()).unwrap();
        assert_eq!(p.total(), 0.0);
    }

    #[test]
    fn identity_term_is_stable_and_linear() {
        let h = heat_triple(1.0).unwrap();
        let a = identity_term(&h, VOLUME, Tolerance::new(1e-10, 1e-10)).unwrap().value;
        let b = identity_term(&h, VOLUME, Tolerance::new(1e-14, 1e-14)).unwrap().value;
        assert!((a - b).abs() < 1e-8);
        let c = identity_term(&h.scaled(3.0), VOLUME, tol()).unwrap().value;
        assert!((c - 3.0 * b).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_term_properties() {
        let h = heat_triple(0.5).unwrap();
        let g = |u: f64| h.g(u);
        let empty = LengthSpectrum { lmax: 10.0, entries: vec![], complete: true, method: String::new() };
        assert_eq!(hyperbolic_term(&g, &empty, 10.0, tol()).unwrap().value, 0.0);
        let a = hyperbolic_term(&g, spectrum(), 8.0, tol()).unwrap();
        let b = hyperbolic_term(&g, spectrum(), 10.0, tol()).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound);
        let mut doubled = spectrum().clone();
        for e in &mut doubled.entries {
            e.multiplicity *= 2;
        }
        let d = hyperbolic_term(&g, &doubled, 10.0, tol()).unwrap();
        assert!((d.value - 2.0 * b.value).abs() < 1e-14);
        let partial = FuchsianGroup::punctured_torus().length_spectrum(5.0, 5).unwrap();
        assert!(hyperbolic_term(&g, &partial, 5.0, tol()).is_err());
    }

    #[test]
    fn heat_trace_residual_within_budget() {
        let h = heat_triple(1.0).unwrap();
        let rep = trace_residual(&h, &EigenvalueTable::modular(), spectrum(), TraceOptions::default()).unwrap();
        assert!(rep.within_budget, "{rep:#?}");
        assert!(rep.residual.abs() < 0.05);
        let no_bottom = TraceOptions { include_bottom: false, ..Default::default() };
        let bad = trace_residual(&h, &EigenvalueTable::modular(), spectrum(), no_bottom).unwrap();
        assert!(bad.residual.abs() > 0.5);
        let no_ell = TraceOptions { include_elliptic: false, ..Default::default() };
        let bad = trace_residual(&h, &EigenvalueTable::modular(), spectrum(), no_ell).unwrap();
        assert!(!bad.within_budget);
    }

    #[test]
    fn short_heat_time_sees_the_eigenvalues() {
        // At t = 0.05 the cusp forms contribute visibly; a perturbed table
        // breaks the balance.
        let h = heat_triple(0.05).unwrap();
        let table = EigenvalueTable::modular();
        let opts = TraceOptions { lmax: 10.0, ..Default::default() };
        let rep = trace_residual(&h, &table, spectrum(), opts).unwrap();
        assert!(rep.residual.abs() < 1e-6, "{rep:#?}");
        assert!(rep.discrete_term > 1e-2);
        let mut off = table.clone();
        off.r[0] += 0.01;
        let bad = trace_residual(&h, &off, spectrum(), opts).unwrap();
        assert!(bad.residual.abs() > 100.0 * rep.residual.abs());
    }

    #[test]
    fn window_digamma_term_matches_log_gamma() {
        let i = SpectralInterval::from_eigenvalues(0.5, 1.0).unwrap();
        let t = 2.0;
        let w = window_triple(i, t).unwrap();
        let cutoff = decay_cutoff(|r| w.h(r)).unwrap();
        let full = digamma_integral(|r| w.h(r), cutoff, tol()).unwrap().value;
        let ind = |r: f64| if r >= i.alpha && r <= i.beta { 1.0 } else { 0.0 };
        let mut breaks = vec![i.alpha, i.beta];
        breaks.extend(unit_breaks(cutoff));
        let corr = integrate_with_breaks(
            |r| (w.h(r) - ind(r)) * digamma(Complex64::new(1.0, r)).unwrap().re,
            0.0,
            cutoff,
            &breaks,
            tol(),
        )
        .unwrap()
        .value
            * 2.0;
        let closed = digamma_window_closed_form(&i).unwrap();
        assert!((full - (closed + corr)).abs() < 1e-3);
        let p = parabolic_terms(&w, 1, -1.0, tol()).unwrap();
        assert!((p.log2 + LN_2 * (i.beta - i.alpha) / PI).abs() < 1e-14);
    }

    #[test]
    fn weyl_counts() {
        let table = EigenvalueTable::modular();
        let i = SpectralInterval::from_eigenvalues(81.25, 100.25).unwrap();
        let w = weyl_count(&i, &table, Tolerance::default()).unwrap();
        assert_eq!(w.discrete, 1);
        let w2 = weyl_count(&i, &table, Tolerance::new(1e-13, 1e-13)).unwrap();
        assert!((w.continuous - w2.continuous).abs() < 1e-6);
        let low = weyl_count(&SpectralInterval::from_eigenvalues(0.5, 1.0).unwrap(), &table, tol()).unwrap();
        assert!(low.remainder.abs() <= 0.5);
        let deg = weyl_count(&SpectralInterval::from_eigenvalues(2.0, 2.0).unwrap(), &table, tol()).unwrap();
        assert_eq!((deg.discrete, deg.continuous, deg.main_term), (0, 0.0, 0.0));
    }

    #[test]
    fn measure_comparison() {
        let table = EigenvalueTable::modular();
        let z = measure_compare(1.0, 1.0, &table, tol()).unwrap();
        assert_eq!((z.abs_integral, z.signed_abs, z.slack), (0.0, 0.0, 0.0));
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let a = 0.5 + 2.0 * k as f64;
            let m = measure_compare(a, a + 1.5, &table, Tolerance::default()).unwrap();
            assert!(m.abs_integral >= m.signed_abs - 1e-12);
            worst = worst.max(m.ratio);
        }
        assert!(worst <= 10.0);
    }
}
