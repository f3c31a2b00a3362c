//! Observables on the modular surface and the operators built from them: the
//! ball average P_t, the time-averaged kernel K_T, Monte Carlo Hilbert–Schmidt
//! estimates, the mean-zero reduction, the quantum mean absolute deviation of
//! Eisenstein series, ergodic decay of lens averages, and the midpoint-frame
//! change of variables.
//!
//! Observables are finite sums of atoms (constants, cusp cut-offs 𝟏_{X(Y)},
//! periodized bumps and discs). Every surface integral is unfolded: a ball or
//! lens upstairs meets finitely many images of each atom, enumerated once per
//! anchor point.

use crate::error::{Error, Result};
use crate::fuchsian::{chunk_ranges, stream_rng, FuchsianGroup};
use crate::hgeom::{ball_volume, dist, geodesic_flow, lens_area, midpoint_frame, to_polar, TangentPoint, UHPoint};
use crate::modsurf::{self, weighted_eisenstein_mass, EigenvalueTable, EisensteinEvaluator};
use crate::quad::{gauss_legendre, integrate, integrate_generic, integrate_with_breaks, Estimate, Tolerance};
use crate::traceform::weyl_count;
use crate::transforms::SpectralInterval;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::OnceLock;

const VOLUME: f64 = modsurf::VOLUME;
/// Lowest point of the modular fundamental domain.
const Y_FLOOR: f64 = 0.866_025_403_784_438_6;
const HOROBALL_BUDGET: usize = 2_000_000;

fn group() -> &'static FuchsianGroup {
    static G: OnceLock<FuchsianGroup> = OnceLock::new();
    G.get_or_init(FuchsianGroup::modular)
}

/// Collects the first error raised inside a quadrature closure.
struct Trap(RefCell<Option<Error>>);

impl Trap {
    fn new() -> Self {
        Trap(RefCell::new(None))
    }

    fn take(&self, r: Result<f64>) -> f64 {
        r.unwrap_or_else(|e| {
            self.0.borrow_mut().get_or_insert(e);
            0.0
        })
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

// ---- observables -------------------------------------------------------------------

/// exp(1 − 1/(1 − s²)) on |s| < 1: equals 1 at s = 0, C^∞, compactly supported.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Atom {
    Constant { value: f64 },
    /// height · 𝟏_{X(Y)}: zero in the cusp region y > cut.
    CuspIndicator { cut: f64, height: f64 },
    /// height · bump_profile(d(z, γc)/radius), summed over Γ.
    Bump { center: UHPoint, radius: f64, height: f64 },
    /// height · 𝟏_{d(z, γc) < radius}, summed over Γ.
    Disc { center: UHPoint, radius: f64, height: f64 },
}

/// A bounded function on the modular surface, as a sum of atoms. Points with
/// a nontrivial stabilizer see a periodized atom with multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observable {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Feature {
    center: UHPoint,
    radius: f64,
    height: f64,
    smooth: bool,
}

impl Feature {
    fn profile(&self, d: f64) -> f64 {
        if d >= self.radius {
            0.0
        } else if self.smooth {
            self.height * bump_profile(d / self.radius)
        } else {
            self.height
        }
    }
}

/// Image of the cusp region {y > cut} under γ⁻¹ for γ with bottom row (c, d).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Horoball {
    c: f64,
    d: f64,
    cut: f64,
    height: f64,
}

impl Horoball {
    fn image_height(&self, p: UHPoint) -> f64 {
        let re = self.c * p.x + self.d;
        let im = self.c * p.y;
        p.y / (re * re + im * im)
    }

    fn contains(&self, p: UHPoint) -> bool {
        self.image_height(p) > self.cut
    }

    /// Direction at `o` of the geodesic running into the horoball's point at infinity.
    fn direction(&self, o: UHPoint) -> f64 {
        FRAC_PI_2 + 2.0 * (self.c * o.y).atan2(self.c * o.x + self.d)
    }

    /// Euclidean circle (centre x, centre y, radius); None for the horoball at ∞.
    fn circle(&self) -> Option<(f64, f64, f64)> {
        if self.c == 0.0 {
            None
        } else {
            let r = 0.5 / (self.c * self.c * self.cut);
            Some((-self.d / self.c, r, r))
        }
    }
}

/// The observable restricted to a ball B(anchor, radius): the finitely many
/// atom images that meet it.
#[derive(Debug, Clone)]
pub struct LocalView {
    pub anchor: UHPoint,
    pub radius: f64,
    constant: f64,
    features: Vec<Feature>,
    horoballs: Vec<Horoball>,
}

impl LocalView {
    /// Value at p; exact for p in B(anchor, radius).
    pub fn eval(&self, p: UHPoint) -> f64 {
        let mut v = self.constant;
        for f in &self.features {
            v += f.profile(dist(p, f.center));
        }
        for h in &self.horoballs {
            if h.contains(p) {
                v -= h.height;
            }
        }
        v
    }

    pub fn image_count(&self) -> usize {
        self.features.len() + self.horoballs.len()
    }

    fn is_noncompact(&self) -> bool {
        self.constant != 0.0 || !self.horoballs.is_empty()
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Coprime (c, d), c > 0 or (0, 1), with Im(γz) = y/|cz + d|² > min_height.
fn horoball_pairs(z: UHPoint, min_height: f64) -> Result<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    if z.y > min_height {
        out.push((0, 1));
    }
    let cmax = (1.0 / (min_height * z.y)).sqrt().floor() as i64;
    for c in 1..=cmax {
        let cf = c as f64;
        let rem = z.y / min_height - cf * cf * z.y * z.y;
        if rem <= 0.0 {
            continue;
        }
        let w = rem.sqrt();
        let lo = (-cf * z.x - w).ceil() as i64;
        let hi = (-cf * z.x + w).floor() as i64;
        for d in lo..=hi {
            if gcd(c, d) != 1 {
                continue;
            }
            let re = cf * z.x + d as f64;
            if z.y / (re * re + cf * cf * z.y * z.y) > min_height {
                out.push((c, d));
            }
        }
        if out.len() > HOROBALL_BUDGET {
            return Err(Error::Budget { depth: c as usize, reason: "too many cusp images meet the ball".into() });
        }
    }
    Ok(out)
}

impl Observable {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            match *a {
                Atom::Constant { value } if !value.is_finite() => {
                    return Err(Error::InvalidInput(format!("constant must be finite, got {value}")))
                }
                Atom::CuspIndicator { cut, height } => {
                    if !(cut >= 1.0) || !cut.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "cusp cut must be a finite height >= 1 (so the cusp region is embedded), got {cut}"
                        )));
                    }
                    if !height.is_finite() {
                        return Err(Error::InvalidInput(format!("height must be finite, got {height}")));
                    }
                }
                Atom::Bump { center, radius, height } | Atom::Disc { center, radius, height } => {
                    UHPoint::new(center.x, center.y)?;
                    if !(radius > 0.0) || !radius.is_finite() || !height.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "need a finite positive radius and finite height, got radius {radius}, height {height}"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(Observable { atoms })
    }

    pub fn zero() -> Self {
        Observable { atoms: Vec::new() }
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![Atom::Constant { value }])
    }

    /// 𝟏_{X(Y)}.
    pub fn cusp_indicator(cut: f64) -> Result<Self> {
        Self::new(vec![Atom::CuspIndicator { cut, height: 1.0 }])
    }

    pub fn bump(center: UHPoint, radius: f64, height: f64) -> Result<Self> {
        Self::new(vec![Atom::Bump { center, radius, height }])
    }

    pub fn disc(center: UHPoint, radius: f64, height: f64) -> Result<Self> {
        Self::new(vec![Atom::Disc { center, radius, height }])
    }

    pub fn plus(&self, other: &Observable) -> Observable {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().copied());
        Observable { atoms }
    }

    pub fn scaled(&self, c: f64) -> Observable {
        let atoms = self
            .atoms
            .iter()
            .map(|a| match *a {
                Atom::Constant { value } => Atom::Constant { value: c * value },
                Atom::CuspIndicator { cut, height } => Atom::CuspIndicator { cut, height: c * height },
                Atom::Bump { center, radius, height } => Atom::Bump { center, radius, height: c * height },
                Atom::Disc { center, radius, height } => Atom::Disc { center, radius, height: c * height },
            })
            .collect();
        Observable { atoms }
    }

    /// Smallest Y with supp a ⊂ X(Y) (∞ when a constant is present).
    pub fn support_height(&self) -> f64 {
        let mut top: f64 = 0.0;
        for a in &self.atoms {
            let h = match *a {
                Atom::Constant { value } => {
                    if value != 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                }
                Atom::CuspIndicator { cut, height } => {
                    if height != 0.0 {
                        cut
                    } else {
                        0.0
                    }
                }
                Atom::Bump { center, radius, height } | Atom::Disc { center, radius, height } => {
                    if height == 0.0 {
                        0.0
                    } else {
                        // The reduced centre is the highest point of its orbit.
                        group().reduce(center).map(|(c0, _)| c0.y).unwrap_or(center.y) * radius.exp()
                    }
                }
            };
            top = top.max(h);
        }
        top
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.support_height().is_finite()
    }

    /// Σ |height| × (maximal overlap of periodized copies).
    pub fn sup_norm_bound(&self) -> Result<f64> {
        let mut s = 0.0;
        for a in &self.atoms {
            s += match *a {
                Atom::Constant { value } => value.abs(),
                Atom::CuspIndicator { height, .. } => height.abs(),
                Atom::Bump { center, radius, height } | Atom::Disc { center, radius, height } => {
                    height.abs() * group().lattice_count(center, center, 2.0 * radius)? as f64
                }
            };
        }
        Ok(s)
    }

    /// ∫_X a dμ, atom by atom via unfolding.
    pub fn integral(&self) -> Result<f64> {
        let mut s = 0.0;
        for a in &self.atoms {
            s += match *a {
                Atom::Constant { value } => value * VOLUME,
                Atom::CuspIndicator { cut, height } => height * (VOLUME - 1.0 / cut),
                Atom::Disc { radius, height, .. } => height * ball_volume(radius)?,
                Atom::Bump { radius, height, .. } => {
                    let radial = integrate(|r| bump_profile(r / radius) * r.sinh(), 0.0, radius, Tolerance::new(1e-15, 1e-14))?;
                    height * TAU * radial.value
                }
            };
        }
        Ok(s)
    }

    /// ā = (1/Vol) ∫_X a dμ.
    pub fn mean_value(&self) -> Result<f64> {
        Ok(self.integral()? / VOLUME)
    }

    /// Pointwise value (orbit enumeration per call; use `local` for bulk evaluation).
    pub fn eval(&self, z: UHPoint) -> Result<f64> {
        let mut v = 0.0;
        for a in &self.atoms {
            v += match *a {
                Atom::Constant { value } => value,
                Atom::CuspIndicator { cut, height } => {
                    if group().reduce(z)?.0.y <= cut {
                        height
                    } else {
                        0.0
                    }
                }
                Atom::Bump { center, radius, height } | Atom::Disc { center, radius, height } => {
                    let f = Feature { center, radius, height, smooth: matches!(a, Atom::Bump { .. }) };
                    group().orbit_within(z, center, radius)?.iter().map(|&(_, d)| f.profile(d)).sum()
                }
            };
        }
        Ok(v)
    }

    /// All atom images meeting B(anchor, radius).
    pub fn local(&self, anchor: UHPoint, radius: f64) -> Result<LocalView> {
        let mut view = LocalView { anchor, radius, constant: 0.0, features: Vec::new(), horoballs: Vec::new() };
        for a in &self.atoms {
            match *a {
                Atom::Constant { value } => view.constant += value,
                Atom::CuspIndicator { cut, height } => {
                    if height == 0.0 {
                        continue;
                    }
                    view.constant += height;
                    for (c, d) in horoball_pairs(anchor, cut * (-radius).exp())? {
                        view.horoballs.push(Horoball { c: c as f64, d: d as f64, cut, height });
                    }
                }
                Atom::Bump { center, radius: r0, height } | Atom::Disc { center, radius: r0, height } => {
                    if height == 0.0 {
                        continue;
                    }
                    let smooth = matches!(a, Atom::Bump { .. });
                    for (g, _) in group().orbit_within(anchor, center, radius + r0)? {
                        view.features.push(Feature { center: g.apply(center), radius: r0, height, smooth });
                    }
                }
            }
        }
        Ok(view)
    }

    /// Height above which the observable is constant on the fundamental domain.
    fn quadrature_top(&self) -> f64 {
        let mut top: f64 = 1.0;
        for a in &self.atoms {
            if !matches!(a, Atom::Constant { .. }) {
                top = top.max(Observable { atoms: vec![*a] }.support_height());
            }
        }
        top
    }

    fn constant_part(&self) -> f64 {
        self.atoms.iter().map(|a| if let Atom::Constant { value } = a { *value } else { 0.0 }).sum()
    }
}

// ---- polar quadrature over convex regions --------------------------------------

/// A convex set seen from a polar origin: {ρ : a₀ cosh ρ − b₀ cos(φ − ψ) sinh ρ ≤ c}
/// along the ray in direction φ, plus the angular window of rays that meet it.
#[derive(Debug, Clone, Copy)]
struct Shape {
    a0: f64,
    b0: f64,
    psi: f64,
    c: f64,
    window: Option<(f64, f64)>,
}

impl Shape {
    fn centered(radius: f64) -> Self {
        Shape { a0: 1.0, b0: 0.0, psi: 0.0, c: radius.cosh(), window: None }
    }

    fn ball(origin: UHPoint, center: UHPoint, radius: f64) -> Result<Self> {
        let d = dist(origin, center);
        if d < 1e-13 {
            return Ok(Self::centered(radius));
        }
        let psi = to_polar(origin, center)?.theta;
        let window = if d <= radius { None } else { Some((psi, (radius.sinh() / d.sinh()).min(1.0).asin())) };
        Ok(Shape { a0: d.cosh(), b0: d.sinh(), psi, c: radius.cosh(), window })
    }

    fn horo(origin: UHPoint, h: &Horoball) -> Self {
        let k = h.image_height(origin) / h.cut;
        let psi = h.direction(origin);
        let window = if k >= 1.0 { None } else { Some((psi, k.asin())) };
        Shape { a0: 1.0, b0: 1.0, psi, c: k, window }
    }

    fn coefficients(&self, phi: f64) -> (f64, f64) {
        (self.a0, self.b0 * (phi - self.psi).cos())
    }

    fn interval(&self, phi: f64) -> Option<(f64, f64)> {
        let (a, b) = self.coefficients(phi);
        let (am, ap, c) = (a - b, a + b, self.c);
        // With u = e^ρ: (a − b)u² − 2cu + (a + b) ≤ 0.
        if am <= 1e-15 * a {
            return Some(((ap / (2.0 * c)).ln().max(0.0), f64::INFINITY));
        }
        let disc = c * c - am * ap;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let u2 = (c + s) / am;
        if u2 < 1.0 {
            return None;
        }
        let u1 = ap / (c + s);
        Some((u1.max(1.0).ln(), u2.ln()))
    }
}

/// ρ where the ray crosses the bisector of the two balls' centres.
fn bisector_crossing(sa: &Shape, sb: &Shape, phi: f64) -> Option<f64> {
    let (a1, b1) = sa.coefficients(phi);
    let (a2, b2) = sb.coefficients(phi);
    if (b1 - b2).abs() < 1e-300 {
        return None;
    }
    let t = (a1 - a2) / (b1 - b2);
    if t > 0.0 && t < 1.0 {
        Some(t.atanh())
    } else {
        None
    }
}

/// ∫ over ⋂ shapes of f(p, ρ) dμ(p), in geodesic polar coordinates about `origin`.
fn polar_region<F: Fn(UHPoint, f64) -> Result<f64>>(
    origin: UHPoint,
    shapes: &[Shape],
    extra_breaks: &[f64],
    kink: Option<(Shape, Shape)>,
    f: F,
    tol: Tolerance,
) -> Result<Estimate> {
    let (lo, hi) = shapes
        .iter()
        .filter_map(|s| s.window)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, h)| (c - h, c + h))
        .unwrap_or((0.0, TAU));
    if !(hi > lo) {
        return Ok(Estimate::exact(0.0));
    }
    let wrap = |b: f64| lo + (b - lo).rem_euclid(TAU);
    let mut breaks: Vec<f64> = extra_breaks.iter().map(|&b| wrap(b)).collect();
    for s in shapes {
        if let Some((c, h)) = s.window {
            breaks.push(wrap(c - h));
            breaks.push(wrap(c + h));
        }
    }
    let inner_tol = Tolerance { abs: 0.1 * tol.abs / (hi - lo), ..tol };
    let trap = Trap::new();
    let inner_err = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);
    let outer = integrate_generic(
        |phi| {
            let (mut rlo, mut rhi) = (0.0f64, f64::INFINITY);
            for s in shapes {
                match s.interval(phi) {
                    None => return 0.0,
                    Some((a, b)) => {
                        rlo = rlo.max(a);
                        rhi = rhi.min(b);
                    }
                }
            }
            if !(rhi > rlo) || !rhi.is_finite() {
                return 0.0;
            }
            let frame = TangentPoint::new(origin, phi).frame();
            let ib: Vec<f64> = kink.iter().filter_map(|(sa, sb)| bisector_crossing(sa, sb, phi)).collect();
            let r = integrate_generic(
                |rho| {
                    let p = frame.apply(UHPoint { x: 0.0, y: rho.exp() });
                    trap.take(f(p, rho)) * rho.sinh()
                },
                rlo,
                rhi,
                &ib,
                inner_tol,
            );
            if !r.converged {
                inner_ok.set(false);
            }
            inner_err.set(inner_err.get().max(r.error));
            r.value
        },
        lo,
        hi,
        &breaks,
        tol,
    );
    trap.check()?;
    let error = outer.error + inner_err.get() * (hi - lo);
    if !outer.converged || !inner_ok.get() || !outer.value.is_finite() {
        return Err(Error::Quadrature { value: outer.value, error, requested: tol.abs });
    }
    Ok(Estimate::new(outer.value, error))
}

/// ∫_{B(a,t) ∩ B(b,t)} obs(p) weight(p) dμ(p); `view` must cover the lens.
fn lens_integral<W: Fn(UHPoint) -> f64>(
    view: &LocalView,
    a: UHPoint,
    b: UHPoint,
    t: f64,
    weight: W,
    tol: Tolerance,
) -> Result<Estimate> {
    let sep = dist(a, b);
    if sep >= 2.0 * t {
        return Ok(Estimate::exact(0.0));
    }
    let (m, axis) = if sep < 1e-13 {
        (a, 0.0)
    } else {
        let (m, th, _) = midpoint_frame(a, b)?;
        (m, th)
    };
    let mut total = Estimate::exact(0.0);
    if view.is_noncompact() {
        let sa = Shape::ball(m, a, t)?;
        let sb = Shape::ball(m, b, t)?;
        let breaks = [axis + FRAC_PI_2, axis - FRAC_PI_2];
        if view.constant != 0.0 {
            let e = polar_region(m, &[sa, sb], &breaks, None, |p, _| Ok(weight(p)), tol)?;
            total = total + e.scale(view.constant);
        }
        let reach = t.exp();
        for h in &view.horoballs {
            if h.image_height(m) * reach <= h.cut {
                continue;
            }
            let sh = Shape::horo(m, h);
            let e = polar_region(m, &[sa, sb, sh], &breaks, None, |p, _| Ok(weight(p)), tol)?;
            total = total - e.scale(h.height);
        }
    }
    for f in &view.features {
        let da = dist(f.center, a);
        let db = dist(f.center, b);
        if da >= t + f.radius || db >= t + f.radius {
            continue;
        }
        let sa = Shape::ball(f.center, a, t)?;
        let sb = Shape::ball(f.center, b, t)?;
        let mut shapes = vec![Shape::centered(f.radius)];
        if da + f.radius > t {
            shapes.push(sa);
        }
        if db + f.radius > t {
            shapes.push(sb);
        }
        let kink = if sep > 0.0 { Some((sa, sb)) } else { None };
        total = total + polar_region(f.center, &shapes, &[], kink, |p, rho| Ok(f.profile(rho) * weight(p)), tol)?;
    }
    Ok(total)
}

// ---- P_t ----------------------------------------------------------------------------

/// Angular measure of the circle S(c, ρ) inside B(z, t), where d = d(z, c).
fn arc_inside(d: f64, rho: f64, t: f64) -> f64 {
    if d < 1e-13 {
        return if rho <= t { TAU } else { 0.0 };
    }
    let x = (d.cosh() * rho.cosh() - t.cosh()) / (d.sinh() * rho.sinh());
    2.0 * x.clamp(-1.0, 1.0).acos()
}

/// Area of B(z, t) ∩ (horoball), with k = (height of z in the horoball's frame)/cut.
fn horoball_in_ball(k: f64, t: f64, tol: Tolerance) -> Result<Estimate> {
    let brk = [k.ln().abs()];
    integrate_with_breaks(
        |rho| {
            let x = (rho.cosh() - k) / rho.sinh();
            rho.sinh() * 2.0 * x.clamp(-1.0, 1.0).acos()
        },
        0.0,
        t,
        &brk,
        tol,
    )
}

/// P_t u(z) = e^{−t/2} ∫_{B(z,t)} u dμ, atom by atom: exact arc-length
/// unfolding for each image meeting the ball.
pub fn pt_apply(u: &Observable, t: f64, z: UHPoint, tol: Tolerance) -> Result<Estimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("need t > 0, got {t}")));
    }
    let view = u.local(z, t)?;
    let mut total = Estimate::exact(view.constant * ball_volume(t)?);
    for h in &view.horoballs {
        let k = h.image_height(z) / h.cut;
        total = total - horoball_in_ball(k, t, tol)?.scale(h.height);
    }
    for f in &view.features {
        let d = dist(z, f.center);
        let breaks = [(t - d).abs(), t + d];
        total = total
            + integrate_with_breaks(|rho| f.profile(rho) * rho.sinh() * arc_inside(d, rho, t), 0.0, f.radius, &breaks, tol)?;
    }
    Ok(total.scale((-0.5 * t).exp()))
}

/// P_t applied to an arbitrary Γ-invariant function, by polar quadrature.
pub fn pt_apply_fn<F: Fn(UHPoint) -> Result<f64>>(u: F, t: f64, z: UHPoint, tol: Tolerance) -> Result<Estimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("need t > 0, got {t}")));
    }
    Ok(polar_region(z, &[Shape::centered(t)], &[], None, |p, _| u(p), tol)?.scale((-0.5 * t).exp()))
}

// ---- K_T ----------------------------------------------------------------------------

fn kernel_from_view(view: &LocalView, z: UHPoint, w: UHPoint, horizon: f64, tol: Tolerance) -> Result<Estimate> {
    let cut = (-horizon).exp();
    let weight = |p: UHPoint| ((-dist(p, z).max(dist(p, w))).exp() - cut).max(0.0);
    Ok(lens_integral(view, z, w, horizon, weight, tol)?.scale(1.0 / horizon))
}

/// K_T(z, w) = (1/T)∫₀ᵀ e^{−t} ∫_{B(z,t)∩B(w,t)} a dμ dt, computed as
/// (1/T)∫_{lens_T} a(p)(e^{−max(d(p,z), d(p,w))} − e^{−T}) dμ(p).
pub fn kernel_kt(a: &Observable, z: UHPoint, w: UHPoint, horizon: f64, tol: Tolerance) -> Result<Estimate> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("need T > 0, got {horizon}")));
    }
    if dist(z, w) >= 2.0 * horizon {
        return Ok(Estimate::exact(0.0));
    }
    let view = a.local(z, horizon)?;
    kernel_from_view(&view, z, w, horizon, tol)
}

/// K_T(z, z) for a ≡ 1: (2π/T)[T/2 + (1 − e^{−2T})/4 − (1 − e^{−T})].
pub fn kernel_kt_unit_diagonal(horizon: f64) -> f64 {
    let t = horizon;
    TAU / t * (0.5 * t + 0.25 * (1.0 - (-2.0 * t).exp()) - (1.0 - (-t).exp()))
}

// ---- fundamental-domain quadrature ------------------------------------------------

/// ∫_F g(a(z)) dμ(z) by nested adaptive quadrature with breaks at every
/// atom boundary.
pub fn domain_integral<G: Fn(f64) -> f64>(a: &Observable, g: G, tol: Tolerance) -> Result<Estimate> {
    let top = a.quadrature_top();
    let radius = (1.0 + (0.25 + (top - 1.0).powi(2)) / (2.0 * top)).acosh().max((2.0 / 3f64.sqrt()).acosh()) + 1e-6;
    let view = a.local(UHPoint::i(), radius)?;
    let mut circles: Vec<(f64, f64, f64)> = view
        .features
        .iter()
        .map(|f| (f.center.x, f.center.y * f.radius.cosh(), f.center.y * f.radius.sinh()))
        .collect();
    let mut ybreaks = vec![1.0];
    for h in &view.horoballs {
        match h.circle() {
            Some(c) => circles.push(c),
            None => ybreaks.push(h.cut),
        }
    }
    for &(_, yc, r) in &circles {
        ybreaks.push(yc - r);
        ybreaks.push(yc + r);
    }
    let span = top - Y_FLOOR;
    let inner_tol = Tolerance { abs: 0.1 * tol.abs / span, ..tol };
    let inner_err = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);
    let outer = integrate_with_breaks(
        |y| {
            let xb: Vec<f64> = circles
                .iter()
                .filter(|(_, yc, r)| (y - yc).abs() < *r)
                .flat_map(|&(xc, yc, r)| {
                    let h = (r * r - (y - yc) * (y - yc)).sqrt();
                    [xc - h, xc + h]
                })
                .collect();
            let f = |x: f64| g(view.eval(UHPoint { x, y })) / (y * y);
            let pieces: Vec<(f64, f64)> =
                if y >= 1.0 { vec![(-0.5, 0.5)] } else {
                    let x0 = (1.0 - y * y).sqrt();
                    vec![(-0.5, -x0), (x0, 0.5)]
                };
            let mut s = 0.0;
            for (lo, hi) in pieces {
                if hi <= lo {
                    continue;
                }
                let r = integrate_generic(f, lo, hi, &xb, inner_tol);
                if !r.converged {
                    inner_ok.set(false);
                }
                inner_err.set(inner_err.get().max(r.error));
                s += r.value;
            }
            s
        },
        Y_FLOOR,
        top,
        &ybreaks,
        tol,
    )?;
    if !inner_ok.get() {
        return Err(Error::Quadrature { value: outer.value, error: inner_err.get(), requested: inner_tol.abs });
    }
    let above = g(a.constant_part()) / top;
    Ok(Estimate::new(outer.value + above, outer.error + inner_err.get() * span))
}

/// max |a| over an n × n grid of the fundamental domain below the support top.
pub fn grid_sup(a: &Observable, n: usize) -> Result<f64> {
    let top = a.quadrature_top();
    let radius = (1.0 + (0.25 + (top - 1.0).powi(2)) / (2.0 * top)).acosh().max((2.0 / 3f64.sqrt()).acosh()) + 1e-6;
    let view = a.local(UHPoint::i(), radius)?;
    let mut m: f64 = a.constant_part().abs();
    for i in 0..n {
        for j in 0..n {
            let x = -0.5 + (i as f64 + 0.5) / n as f64;
            let y = Y_FLOOR + (top - Y_FLOOR) * (j as f64 + 0.5) / n as f64;
            if x * x + y * y >= 1.0 {
                m = m.max(view.eval(UHPoint { x, y }).abs());
            }
        }
    }
    Ok(m)
}

// ---- mean-zero reduction ------------------------------------------------------------

/// b = a − ā·χ with χ = Vol(X)/Vol(X(Y)) on X(Y), so ∫ b = 0.
pub fn mean_zero_reduce(a: &Observable, cut: f64) -> Result<Observable> {
    if !(cut >= 1.0) || !cut.is_finite() {
        return Err(Error::InvalidInput(format!("cut height must be finite and >= 1, got {cut}")));
    }
    let top = a.support_height();
    if cut < top {
        return Err(Error::InvalidInput(format!("cut height {cut} is below the support height {top} of the observable")));
    }
    let abar = a.mean_value()?;
    let mut b = a.clone();
    if abar != 0.0 {
        b.atoms.push(Atom::CuspIndicator { cut, height: -abar * VOLUME / (VOLUME - 1.0 / cut) });
    }
    Ok(b)
}

// ---- Hilbert–Schmidt estimate -------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsSpec {
    pub samples: usize,
    pub seed: u64,
    /// Stand-in for ρ(λ₁) in the L² term of the bound.
    pub decay_rate: f64,
    pub tol: Tolerance,
}

impl Default for HsSpec {
    fn default() -> Self {
        HsSpec { samples: 256, seed: 1, decay_rate: 0.5, tol: Tolerance::new(1e-9, 1e-7) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsReport {
    pub horizon: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub quadrature_error: f64,
    pub samples: usize,
    pub mean_terms: f64,
    pub l2_norm_sq: f64,
    pub sup_norm: f64,
    pub injectivity: f64,
    pub thin_volume: f64,
    pub l2_term: f64,
    pub sup_term: f64,
    pub bound: f64,
    pub fitted_constant: f64,
}

/// Lower bound on the injectivity radius over X(Y) away from the elliptic
/// points: min(parabolic displacement at height Y, systole)/2.
pub fn injectivity_lower_bound(cut: f64) -> Result<f64> {
    let sys = group().systole(6)?.length;
    Ok((1.0 / (2.0 * cut)).asinh().min(0.5 * sys))
}

/// Monte Carlo ∫_F∫_F |Σ_γ K_T(z, γw)|² dμ dμ with uniform pairs from the
/// fundamental domain, against ‖a‖₂²/(Tρ) + e^{4T} Vol(X_{<2T}) ‖a‖∞² / min(1, inj²).
pub fn hs_norm_estimate(a: &Observable, horizon: f64, spec: &HsSpec) -> Result<HsReport> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("need T > 0, got {horizon}")));
    }
    if spec.samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    if !a.is_compactly_supported() {
        return Err(Error::InvalidInput("observable must be compactly supported".into()));
    }
    let chunks = chunk_ranges(spec.samples);
    let results: Vec<Result<Vec<(f64, f64, usize)>>> = chunks
        .par_iter()
        .map(|&(idx, len)| {
            let mut rng = stream_rng(spec.seed, idx as u64);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let z = group().sample_point(&mut rng)?;
                let w = group().sample_point(&mut rng)?;
                let view = a.local(z, horizon)?;
                let all = view.is_noncompact();
                let mut s = 0.0;
                let mut err = 0.0;
                let mut terms = 0;
                for (g, _) in group().orbit_within(z, w, 2.0 * horizon)? {
                    let gw = g.apply(w);
                    if !all && !view.features.iter().any(|f| dist(f.center, gw) < horizon + f.radius) {
                        continue;
                    }
                    let k = kernel_from_view(&view, z, gw, horizon, spec.tol)?;
                    s += k.value;
                    err += k.error;
                    terms += 1;
                }
                out.push((s, err, terms));
            }
            Ok(out)
        })
        .collect();
    let mut vals = Vec::with_capacity(spec.samples);
    let mut qerr = 0.0;
    let mut terms = 0usize;
    for r in results {
        for (s, e, n) in r? {
            vals.push(s * s);
            qerr += 2.0 * s.abs() * e + e * e;
            terms += n;
        }
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let v2 = VOLUME * VOLUME;

    let l2 = domain_integral(a, |v| v * v, Tolerance::new(1e-10, 1e-8))?.value;
    let sup = a.sup_norm_bound()?;
    let inj = injectivity_lower_bound(a.support_height().max(1.0))?;
    // Every point of the modular surface has injectivity radius ≤ asinh(1/√3).
    let thin = if 2.0 * horizon > (1.0 / 3f64.sqrt()).asinh() {
        VOLUME
    } else {
        VOLUME * group().thin_part_fraction(2.0 * horizon, 4096, spec.seed)?.mean
    };
    let l2_term = l2 / (horizon * spec.decay_rate);
    let sup_term = (4.0 * horizon).exp() * thin * sup * sup / inj.min(1.0).powi(2);
    let bound = l2_term + sup_term;
    let estimate = v2 * mean;
    Ok(HsReport {
        horizon,
        estimate,
        std_error: v2 * (var / n).sqrt(),
        quadrature_error: v2 * qerr / n,
        samples: spec.samples,
        mean_terms: terms as f64 / n,
        l2_norm_sq: l2,
        sup_norm: sup,
        injectivity: inj,
        thin_volume: thin,
        l2_term,
        sup_term,
        bound,
        fitted_constant: if bound > 0.0 { estimate / bound } else { 0.0 },
    })
}

// ---- quantum mean absolute deviation ------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarMode {
    EisensteinOnly,
    Full,
}

/// An L²-normalized eigenfunction sampled on a quadrature grid of the
/// fundamental domain (weights sum to the area).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenfunctionGrid {
    pub r: f64,
    pub points: Vec<UHPoint>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTerm {
    pub r: f64,
    pub diagonal: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSample {
    pub r: f64,
    pub eisenstein_mass: f64,
    pub compensated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarReport {
    pub mode: VarMode,
    pub a: f64,
    pub b: f64,
    pub mean_value: f64,
    pub discrete: Vec<DiscreteTerm>,
    pub discrete_sum: f64,
    pub continuous: f64,
    pub continuous_error: f64,
    pub n: usize,
    pub m: f64,
    pub n_plus_m: f64,
    pub normalizer_positive: bool,
    pub numerator: f64,
    pub total: f64,
    pub error_budget: f64,
    pub samples: Vec<IntegrandSample>,
}

/// ⟨E(·, 1/2 + ir), a E(·, 1/2 + ir)⟩ = ∫_X a |E|² dμ for compactly supported a.
pub fn eisenstein_mass(a: &Observable, r: f64, tol: Tolerance) -> Result<Estimate> {
    if !a.is_compactly_supported() {
        return Err(Error::InvalidInput("observable must be compactly supported".into()));
    }
    let e = EisensteinEvaluator::with_tolerance(r, Y_FLOOR, 1e-13)?;
    let mut total = Estimate::exact(0.0);
    for atom in &a.atoms {
        match *atom {
            Atom::Constant { .. } => {}
            Atom::CuspIndicator { cut, height } => {
                total = total + weighted_eisenstein_mass(&e, cut, |_| 1.0, tol)?.scale(height);
            }
            Atom::Bump { center, radius, height } | Atom::Disc { center, radius, height } => {
                let f = Feature { center, radius, height, smooth: matches!(atom, Atom::Bump { .. }) };
                // Unfold: ∫_F Σ_γ f(d(z, γc))|E|² = ∫_{B(c, radius)} f |E|².
                let est = polar_region(
                    center,
                    &[Shape::centered(radius)],
                    &[],
                    None,
                    |p, rho| {
                        let (p0, _) = group().reduce(p)?;
                        Ok(f.profile(rho) * e.eval(p0)?.norm_sqr())
                    },
                    tol,
                )?;
                total = total + est;
            }
        }
    }
    Ok(total)
}

/// ⟨E, aE⟩ + (φ′/φ)(1/2 + ir) ā, the compensated continuous integrand.
pub fn compensated_integrand(a: &Observable, abar: f64, r: f64, tol: Tolerance) -> Result<(f64, Estimate)> {
    let mass = eisenstein_mass(a, r, tol)?;
    // scattering_log_deriv returns −φ′/φ.
    let ld = modsurf::scattering_log_deriv(r, modsurf::R_MIN)?;
    Ok((mass.value - ld * abar, mass))
}

/// Var_{X,I}(a) on the modular surface. Eisenstein-only mode uses the
/// continuous spectrum alone; full mode adds |⟨ψ_j, aψ_j⟩ − ā| from
/// user-supplied eigenfunction grids for every tabulated eigenvalue in I.
pub fn quantum_mean_abs_dev(
    a: &Observable,
    interval: &SpectralInterval,
    mode: VarMode,
    table: &EigenvalueTable,
    eigenfunctions: &[EigenfunctionGrid],
    tol: Tolerance,
) -> Result<VarReport> {
    if !a.is_compactly_supported() {
        return Err(Error::InvalidInput("observable must be compactly supported (no constant atoms)".into()));
    }
    if interval.alpha < modsurf::R_MIN && !interval.is_degenerate() {
        return Err(Error::InvalidInput(format!(
            "interval reaches r = {} < {}; keep it away from lambda = 1/4",
            interval.alpha,
            modsurf::R_MIN
        )));
    }
    let abar = a.mean_value()?;
    let weyl = weyl_count(interval, table, tol)?;

    let mut discrete = Vec::new();
    if mode == VarMode::Full {
        if eigenfunctions.is_empty() {
            return Err(Error::Unsupported(
                "full mode needs eigenfunction grids (r, points, values, weights) for every eigenvalue in the interval; \
                 use eisenstein_only mode otherwise"
                    .into(),
            ));
        }
        for r in table.r.iter().copied().filter(|r| interval.contains_eigenvalue(0.25 + r * r)) {
            let grid = eigenfunctions.iter().find(|g| (g.r - r).abs() < 1e-6).ok_or_else(|| {
                Error::Unsupported(format!("full mode: no eigenfunction grid supplied for r = {r}"))
            })?;
            if grid.points.len() != grid.values.len() || grid.points.len() != grid.weights.len() {
                return Err(Error::InvalidInput(format!("eigenfunction grid for r = {r} has mismatched lengths")));
            }
            let norm: f64 = grid.values.iter().zip(&grid.weights).map(|(v, w)| w * v * v).sum();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!("eigenfunction grid for r = {r} has L2 norm^2 {norm}, expected 1")));
            }
            let mut diag = 0.0;
            for ((p, v), w) in grid.points.iter().zip(&grid.values).zip(&grid.weights) {
                diag += w * a.eval(*p)? * v * v;
            }
            discrete.push(DiscreteTerm { r, diagonal: diag, deviation: (diag - abar).abs() });
        }
    }
    let discrete_sum: f64 = discrete.iter().map(|d| d.deviation).sum();

    let (continuous, continuous_error, samples) = if interval.is_degenerate() {
        (0.0, 0.0, Vec::new())
    } else {
        let trap = Trap::new();
        let samples = RefCell::new(Vec::new());
        let inner_err = Cell::new(0.0f64);
        let inner_tol = Tolerance { abs: tol.abs * 0.1, ..tol };
        let outer = integrate(
            |r| {
                trap.take(compensated_integrand(a, abar, r, inner_tol).map(|(v, mass)| {
                    inner_err.set(inner_err.get().max(mass.error));
                    samples.borrow_mut().push(IntegrandSample { r, eisenstein_mass: mass.value, compensated: v });
                    v.abs()
                }))
            },
            interval.alpha,
            interval.beta,
            tol,
        )?;
        trap.check()?;
        let mut s = samples.into_inner();
        s.sort_by(|x, y| x.r.total_cmp(&y.r));
        let len = interval.beta - interval.alpha;
        (outer.value / TAU, (outer.error + inner_err.get() * len) / TAU, s)
    };
    let numerator = discrete_sum + continuous;
    let n_plus_m = weyl.n_plus_m;
    // N + M can be negative on short windows: −φ′/φ < 0 at small r on the
    // modular surface. The ratio is reported as is, with a flag.
    if n_plus_m == 0.0 && numerator != 0.0 {
        return Err(Error::Degenerate("N + M vanishes on this interval".into()));
    }
    let total = if n_plus_m != 0.0 { numerator / n_plus_m } else { 0.0 };
    let error_budget = if n_plus_m != 0.0 {
        (continuous_error + total.abs() * weyl.continuous_error) / n_plus_m.abs()
    } else {
        0.0
    };
    Ok(VarReport {
        mode,
        a: interval.a,
        b: interval.b,
        mean_value: abar,
        discrete,
        discrete_sum,
        continuous,
        continuous_error,
        n: weyl.discrete,
        m: weyl.continuous,
        n_plus_m,
        normalizer_positive: n_plus_m > 0.0,
        numerator,
        total,
        error_budget,
        samples,
    })
}

// ---- ergodic decay ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicSpec {
    pub times: Vec<f64>,
    /// Distance r between the two ball centres.
    pub separation: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerance,
}

impl Default for ErgodicSpec {
    fn default() -> Self {
        ErgodicSpec { times: vec![2.0, 4.0, 6.0], separation: 1.0, samples: 64, seed: 1, tol: Tolerance::new(1e-8, 1e-6) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    /// |A_t(r)|: lens area times 2π (the circle of directions).
    pub set_measure: f64,
    pub deviation: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicDecayReport {
    pub separation: f64,
    pub samples: usize,
    pub l2_norm: f64,
    pub points: Vec<DecayPoint>,
    /// −slope of log deviation against log |A_t|.
    pub exponent: Option<f64>,
    pub exponent_std_error: Option<f64>,
    pub fit_r_squared: Option<f64>,
}

/// Least squares y = α + βx: (β, se(β), r²).
fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let beta = sxy / sxx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - beta * (x - mx)).powi(2)).sum();
    let se = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Some((beta, se, r2))
}

/// L²(unit tangent bundle) size of lens averages π(A_t(r))a over sampled
/// (z, θ): the lens B(z₁,t) ∩ B(z₂,t) with z₁, z₂ the flow of (z, θ) by ∓r/2.
pub fn ergodic_decay(a: &Observable, spec: &ErgodicSpec) -> Result<ErgodicDecayReport> {
    let s = spec.separation;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("separation must be positive, got {s}")));
    }
    if spec.times.is_empty() || spec.times.iter().any(|&t| !(t > 0.5 * s) || !t.is_finite()) {
        return Err(Error::InvalidInput("every time t must exceed half the separation".into()));
    }
    if spec.samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let scale = a.sup_norm_bound()?.max(1.0);
    let abar = a.mean_value()?;
    if abar.abs() > 1e-10 * scale {
        return Err(Error::InvalidInput(format!("observable has mean {abar}; apply mean_zero_reduce first")));
    }
    let tmax = spec.times.iter().copied().fold(0.0, f64::max);
    let areas: Vec<f64> =
        spec.times.iter().map(|&t| lens_area(t, s, Tolerance::new(1e-12, 1e-12)).map(|e| e.value)).collect::<Result<_>>()?;
    let chunks = chunk_ranges(spec.samples);
    let results: Vec<Result<Vec<Vec<f64>>>> = chunks
        .par_iter()
        .map(|&(idx, len)| {
            let mut rng = stream_rng(spec.seed, idx as u64);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let z = group().sample_point(&mut rng)?;
                let theta = TAU * rng.gen::<f64>();
                let tp = TangentPoint::new(z, theta);
                let z1 = geodesic_flow(tp, -0.5 * s).base;
                let z2 = geodesic_flow(tp, 0.5 * s).base;
                let view = a.local(z, tmax)?;
                let mut row = Vec::with_capacity(spec.times.len());
                for (&t, &area) in spec.times.iter().zip(&areas) {
                    row.push(lens_integral(&view, z1, z2, t, |_| 1.0, spec.tol)?.value / area);
                }
                out.push(row);
            }
            Ok(out)
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.samples);
    for r in results {
        rows.extend(r?);
    }
    let n = rows.len() as f64;
    let mut points = Vec::new();
    for (k, (&t, &area)) in spec.times.iter().zip(&areas).enumerate() {
        let sq: Vec<f64> = rows.iter().map(|row| row[k] * row[k]).collect();
        let m2 = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|v| (v - m2).powi(2)).sum::<f64>() / (n - 1.0);
        let dev = m2.sqrt();
        let se = if dev > 0.0 { (var / n).sqrt() / (2.0 * dev) } else { 0.0 };
        points.push(DecayPoint { t, set_measure: TAU * area, deviation: dev, std_error: se });
    }
    let l2 = (domain_integral(a, |v| v * v, Tolerance::new(1e-10, 1e-8))?.value / VOLUME).max(0.0).sqrt();
    let usable: Vec<&DecayPoint> = points.iter().filter(|p| p.deviation > 0.0).collect();
    let fit = if usable.len() == points.len() {
        let xs: Vec<f64> = usable.iter().map(|p| p.set_measure.ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.deviation.ln()).collect();
        fit_line(&xs, &ys)
    } else {
        None
    };
    Ok(ErgodicDecayReport {
        separation: s,
        samples: spec.samples,
        l2_norm: l2,
        points,
        exponent: fit.map(|f| -f.0),
        exponent_std_error: fit.map(|f| f.1),
        fit_r_squared: fit.map(|f| f.2),
    })
}

// ---- change of variables -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovSpec {
    /// The fundamental domain is truncated at this height.
    pub y_cap: f64,
    pub nodes_x: usize,
    pub nodes_y: usize,
    pub nodes_r: usize,
    pub nodes_angle: usize,
}

impl Default for CovSpec {
    fn default() -> Self {
        CovSpec { y_cap: 8.0, nodes_x: 20, nodes_y: 24, nodes_r: 40, nodes_angle: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovReport {
    pub horizon: f64,
    /// ∫_F dμ(z₁) ∫_{d(z₁,z₂)<2T} f(Φ(z₁, z₂)) dμ(z₂).
    pub pair_integral: f64,
    /// ∫₀^{2T} sinh r ∫_F ∫_{S¹} f(z, θ, r) dθ dμ dr.
    pub frame_integral: f64,
    pub residual: f64,
    pub relative: f64,
}

/// Gauss–Legendre product nodes (point, weight) on the fundamental domain
/// below `y_cap`, in the variables (x, 1/y) so that dμ = dx d(1/y).
fn domain_nodes(spec: &CovSpec) -> Vec<(UHPoint, f64)> {
    let (gx, wx) = gauss_legendre(spec.nodes_x);
    let (gv, wv) = gauss_legendre(spec.nodes_y);
    let mut out = Vec::with_capacity(spec.nodes_x * spec.nodes_y);
    for (xi, wxi) in gx.iter().zip(&wx) {
        let x = 0.5 * xi;
        let v_hi = 1.0 / (1.0 - x * x).sqrt();
        let v_lo = 1.0 / spec.y_cap;
        let hv = 0.5 * (v_hi - v_lo);
        for (vi, wvi) in gv.iter().zip(&wv) {
            let v = v_lo + hv * (1.0 + vi);
            out.push((UHPoint { x, y: 1.0 / v }, 0.5 * wxi * hv * wvi));
        }
    }
    out
}

/// Compare both sides of dμ(z₁)dμ(z₂) = sinh r dr dθ dμ(m) for a Γ-invariant
/// f(tangent vector at the midpoint, distance). The pair side parametrizes
/// z₂ in polar coordinates about z₁ and flows to the midpoint.
pub fn change_of_variable_check<F>(f: F, horizon: f64, spec: &CovSpec) -> Result<CovReport>
where
    F: Fn(TangentPoint, f64) -> Result<f64> + Sync,
{
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("need T > 0, got {horizon}")));
    }
    if spec.nodes_x == 0 || spec.nodes_y == 0 || spec.nodes_r == 0 || spec.nodes_angle == 0 || !(spec.y_cap > 1.0) {
        return Err(Error::InvalidInput("change-of-variable spec needs positive node counts and y_cap > 1".into()));
    }
    let nodes = domain_nodes(spec);
    let (gr, wr) = gauss_legendre(spec.nodes_r);
    let hr = horizon; // half-length of [0, 2T]
    let radial: Vec<(f64, f64)> = gr.iter().zip(&wr).map(|(x, w)| (hr * (1.0 + x), hr * w * (hr * (1.0 + x)).sinh())).collect();
    let na = spec.nodes_angle;
    let dphi = TAU / na as f64;
    let sides: Vec<Result<(f64, f64)>> = nodes
        .par_iter()
        .map(|&(z, wz)| {
            let mut pair = 0.0;
            let mut frame = 0.0;
            for &(r, w) in &radial {
                let mut sp = 0.0;
                let mut sf = 0.0;
                for k in 0..na {
                    let phi = dphi * k as f64;
                    let tp = TangentPoint::new(z, phi);
                    sp += f(geodesic_flow(tp, 0.5 * r), r)?;
                    sf += f(tp, r)?;
                }
                pair += w * sp * dphi;
                frame += w * sf * dphi;
            }
            Ok((wz * pair, wz * frame))
        })
        .collect();
    let (mut pair, mut frame) = (0.0, 0.0);
    for s in sides {
        let (p, q) = s?;
        pair += p;
        frame += q;
    }
    let residual = (pair - frame).abs();
    Ok(CovReport {
        horizon,
        pair_integral: pair,
        frame_integral: frame,
        residual,
        relative: residual / frame.abs().max(f64::MIN_POSITIVE),
    })
}

/// Coefficients τ(1..=n) of Δ = q ∏(1 − qⁿ)²⁴.
fn ramanujan_tau() -> &'static [f64] {
    static TAU_COEF: OnceLock<Vec<f64>> = OnceLock::new();
    TAU_COEF.get_or_init(|| {
        let n = 24;
        // ∏_{k=1}^{n} (1 − q^k)^{24} mod q^n.
        let mut p = vec![0.0f64; n];
        p[0] = 1.0;
        for k in 1..n {
            for _ in 0..24 {
                for j in (k..n).rev() {
                    p[j] -= p[j - k];
                }
            }
        }
        p
    })
}

/// Δ(z) y⁶ e^{6iθ}: the weight-12 cusp form as a Γ-invariant function on the
/// unit tangent bundle (θ is the Euclidean argument of the tangent vector).
pub fn cusp_form_lift(p: TangentPoint) -> Result<Complex64> {
    let (z0, delta) = group().reduce(p.base)?;
    let theta = p.theta + delta.derivative(p.base).arg();
    let q = Complex64::new(0.0, TAU * z0.x).exp() * (-TAU * z0.y).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qn = q;
    for &t in ramanujan_tau() {
        sum += qn * t;
        qn *= q;
    }
    Ok(sum * z0.y.powi(6) * Complex64::new(0.0, 6.0 * theta).exp())
}
