//! Upper half-plane geometry: points, isometries, distance, balls, polar
//! coordinates, the geodesic flow, and ball-intersection (lens) geometry.

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

/// Point x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UHPoint {
    pub x: f64,
    pub y: f64,
}

impl UHPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!("point ({x}, {y}) is not in the upper half-plane")));
        }
        Ok(UHPoint { x, y })
    }

    pub fn i() -> Self {
        UHPoint { x: 0.0, y: 1.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Self {
        // Isometries preserve the half-plane; clamp roundoff at the boundary.
        UHPoint { x: z.re, y: z.im.max(f64::MIN_POSITIVE) }
    }
}

/// cosh of the hyperbolic distance.
pub fn cosh_dist(z: UHPoint, w: UHPoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    1.0 + (dx * dx + dy * dy) / (2.0 * z.y * w.y)
}

/// Hyperbolic distance, computed as 2 asinh(|z − w| / (2√(y_z y_w))) for
/// accuracy at short range.
pub fn dist(z: UHPoint, w: UHPoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// Orientation-preserving isometry, a determinant-one matrix up to sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moebius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Moebius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > 1e-12 * (1.0 + a.abs().max(b.abs()).max(c.abs()).max(d.abs())) {
            return Err(Error::InvalidInput(format!("matrix ({a} {b}; {c} {d}) has determinant {det}")));
        }
        Ok(Moebius { a, b, c, d }.normalized())
    }

    pub const IDENTITY: Moebius = Moebius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn translation(t: f64) -> Self {
        Moebius { a: 1.0, b: t, c: 0.0, d: 1.0 }
    }

    pub fn inversion() -> Self {
        Moebius { a: 0.0, b: -1.0, c: 1.0, d: 0.0 }
    }

    /// Rescale to determinant exactly one (to rounding).
    pub fn normalized(self) -> Self {
        let det = self.a * self.d - self.b * self.c;
        if det == 1.0 || !(det > 0.0) {
            return self;
        }
        let s = det.sqrt().recip();
        Moebius { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn inverse(self) -> Self {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Sign-canonical representative (first nonzero of c, d, a positive).
    pub fn canonical(self) -> Self {
        let flip = if self.c != 0.0 {
            self.c < 0.0
        } else if self.d != 0.0 {
            self.d < 0.0
        } else {
            self.a < 0.0
        };
        if flip {
            Moebius { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    pub fn apply(self, z: UHPoint) -> UHPoint {
        let num_re = self.a * z.x + self.b;
        let den_re = self.c * z.x + self.d;
        let den_im = self.c * z.y;
        let den = den_re * den_re + den_im * den_im;
        // Im((az+b)/(cz+d)) = y / |cz+d|² for det = 1.
        let x = (num_re * den_re + self.a * z.y * den_im) / den;
        let y = z.y / den;
        UHPoint { x, y: y.max(f64::MIN_POSITIVE) }
    }

    /// Derivative (cz + d)^{-2} at z.
    pub fn derivative(self, z: UHPoint) -> Complex64 {
        let w = Complex64::new(self.c * z.x + self.d, self.c * z.y);
        1.0 / (w * w)
    }

    pub fn conjugate_by(self, g: Moebius) -> Moebius {
        g * self * g.inverse()
    }

    pub fn approx_eq(self, o: Moebius, tol: f64) -> bool {
        let same = (self.a - o.a).abs() < tol
            && (self.b - o.b).abs() < tol
            && (self.c - o.c).abs() < tol
            && (self.d - o.d).abs() < tol;
        let opp = (self.a + o.a).abs() < tol
            && (self.b + o.b).abs() < tol
            && (self.c + o.c).abs() < tol
            && (self.d + o.d).abs() < tol;
        same || opp
    }
}

impl Mul for Moebius {
    type Output = Moebius;
    fn mul(self, o: Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .normalized()
    }
}

/// Area 4π sinh²(r/2) of a hyperbolic ball.
pub fn ball_volume(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be nonnegative, got {r}")));
    }
    let s = (0.5 * r).sinh();
    Ok(4.0 * PI * s * s)
}

/// Radius of the ball (centred at the midpoint) enclosing B(z₁,t) ∩ B(z₂,t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Intersection {
    Radius(f64),
    Empty,
}

/// cosh ρ = cosh t / cosh(r/2) for centre separation r ≤ 2t.
pub fn ball_intersection_radius(t: f64, r: f64) -> Result<Intersection> {
    if !(t >= 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("need t, r >= 0, got t = {t}, r = {r}")));
    }
    if r > 2.0 * t {
        return Ok(Intersection::Empty);
    }
    let c = t.cosh() / (0.5 * r).cosh();
    Ok(Intersection::Radius(c.max(1.0).acosh()))
}

/// Area of the lens B(z₁,t) ∩ B(z₂,t) for centres at distance r.
pub fn lens_area(t: f64, r: f64, tol: Tolerance) -> Result<Estimate> {
    if r > 2.0 * t {
        return Ok(Estimate::exact(0.0));
    }
    let (ct, cr, sr) = (t.cosh(), r.cosh(), r.sinh());
    // Polar coordinates around z₁: a ray at angle φ meets B(z₂,t) where
    // cosh r cosh s − sinh r sinh s cos φ ≤ cosh t.
    let f = |phi: f64| -> f64 {
        let a = cr;
        let b = sr * phi.cos();
        let disc = ct * ct - (a * a - b * b);
        if disc < 0.0 {
            return 0.0;
        }
        let lo = ((ct - disc.sqrt()) / (a - b)).ln().max(0.0);
        let hi = ((ct + disc.sqrt()) / (a - b)).ln().min(t);
        if hi > lo {
            hi.cosh() - lo.cosh()
        } else {
            0.0
        }
    };
    let half = quad::integrate(f, 0.0, PI, tol)?;
    Ok(half.scale(2.0))
}

/// Normalize an angle to [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Unit tangent vector: base point and direction angle (argument of the
/// Euclidean tangent vector).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub base: UHPoint,
    pub theta: f64,
}

impl TangentPoint {
    pub fn new(base: UHPoint, theta: f64) -> Self {
        TangentPoint { base, theta: normalize_angle(theta) }
    }

    /// The isometry g with g·i = base sending the upward vector at i to this
    /// tangent vector.
    pub fn frame(self) -> Moebius {
        let sy = self.base.y.sqrt();
        let n = Moebius { a: sy, b: self.base.x / sy, c: 0.0, d: 1.0 / sy };
        let phi = 0.5 * (FRAC_PI_2 - self.theta);
        let (s, c) = phi.sin_cos();
        n * Moebius { a: c, b: -s, c: s, d: c }
    }

    pub fn from_frame(g: Moebius) -> Self {
        let base = g.apply(UHPoint::i());
        let v = g.derivative(UHPoint::i()) * Complex64::new(0.0, 1.0);
        TangentPoint::new(base, v.arg())
    }
}

/// Geodesic flow: right multiplication of the frame by diag(e^{t/2}, e^{−t/2}).
pub fn geodesic_flow(p: TangentPoint, t: f64) -> TangentPoint {
    if t == 0.0 {
        return p;
    }
    let e = (0.5 * t).exp();
    TangentPoint::from_frame(p.frame() * Moebius { a: e, b: 0.0, c: 0.0, d: 1.0 / e })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoords {
    pub r: f64,
    pub theta: f64,
    pub origin: UHPoint,
}

/// Geodesic polar coordinates of z around `origin`.
pub fn to_polar(origin: UHPoint, z: UHPoint) -> Result<PolarCoords> {
    let r = dist(origin, z);
    if r == 0.0 {
        return Err(Error::Degenerate("polar angle undefined at the origin".into()));
    }
    // Move the origin to i by an affine map; the direction is read off in the
    // Cayley disc, where geodesics through the centre are rays.
    let w = Complex64::new((z.x - origin.x) / origin.y, z.y / origin.y);
    let i = Complex64::new(0.0, 1.0);
    let disc = (w - i) / (w + i);
    Ok(PolarCoords { r, theta: normalize_angle(disc.arg() + FRAC_PI_2), origin })
}

pub fn from_polar(p: PolarCoords) -> UHPoint {
    geodesic_flow(TangentPoint::new(p.origin, p.theta), p.r).base
}

/// Midpoint of the geodesic segment [z₁, z₂], its direction there, and the length.
pub fn midpoint_frame(z1: UHPoint, z2: UHPoint) -> Result<(UHPoint, f64, f64)> {
    let p = to_polar(z1, z2).map_err(|_| Error::Degenerate("coincident points have no midpoint frame".into()))?;
    let m = geodesic_flow(TangentPoint::new(z1, p.theta), 0.5 * p.r);
    Ok((m.base, m.theta, p.r))
}

pub fn uhp_from_complex(z: Complex64) -> UHPoint {
    UHPoint::from_complex(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> UHPoint {
        UHPoint::new(x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist(UHPoint::i(), UHPoint::i()), 0.0);
        assert!((dist(pt(0.0, 1.0), pt(0.0, 2.0)) - 2f64.ln()).abs() < 1e-15);
        // arccosh(3/2) from high-precision evaluation.
        assert!((dist(pt(0.0, 1.0), pt(1.0, 1.0)) - 0.9624236501192069).abs() < 1e-15);
    }

    #[test]
    fn moebius_examples() {
        let z = pt(0.3, 0.7);
        assert_eq!(Moebius::IDENTITY.apply(z), z);
        let t = Moebius::translation(1.0).apply(UHPoint::i());
        assert!((t.x - 1.0).abs() < 1e-15 && (t.y - 1.0).abs() < 1e-15);
        let s = Moebius::inversion().apply(pt(0.0, 2.0));
        assert!(s.x.abs() < 1e-15 && (s.y - 0.5).abs() < 1e-15);
        assert!(Moebius::new(2.0, 0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(ball_volume(0.0).unwrap(), 0.0);
        assert!((ball_volume(1.0).unwrap() - 3.4122762652849023).abs() < 1e-12);
        assert!((ball_volume(2.0).unwrap() - 17.355387381771437).abs() < 1e-11);
        assert!(ball_volume(-1.0).is_err());
    }

    #[test]
    fn intersection_radius_examples() {
        assert_eq!(ball_intersection_radius(2.0, 0.0).unwrap(), Intersection::Radius(2.0));
        match ball_intersection_radius(1.5, 3.0).unwrap() {
            Intersection::Radius(r) => assert!(r.abs() < 1e-7),
            Intersection::Empty => panic!(),
        }
        match ball_intersection_radius(2.0, 2.0).unwrap() {
            Intersection::Radius(r) => assert!((r - 1.5393801825068164).abs() < 1e-12),
            Intersection::Empty => panic!(),
        }
        assert_eq!(ball_intersection_radius(1.0, 2.5).unwrap(), Intersection::Empty);
    }

    #[test]
    fn lens_area_limits() {
        let tol = Tolerance::new(1e-11, 1e-11);
        let full = lens_area(2.0, 0.0, tol).unwrap().value;
        assert!((full - ball_volume(2.0).unwrap()).abs() < 1e-9);
        assert!(lens_area(2.0, 4.0, tol).unwrap().value.abs() < 1e-12);
        let a = lens_area(3.0, 1.0, tol).unwrap().value;
        let b = lens_area(3.0, 2.0, tol).unwrap().value;
        assert!(a > b && b > 0.0);
    }

    #[test]
    fn lens_fits_enclosing_ball_by_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (t, r) = (2.0, 2.0);
        let z1 = UHPoint::i();
        let z2 = from_polar(PolarCoords { r, theta: 0.4, origin: z1 });
        let (m, _, _) = midpoint_frame(z1, z2).unwrap();
        let rho = match ball_intersection_radius(t, r).unwrap() {
            Intersection::Radius(x) => x,
            Intersection::Empty => unreachable!(),
        };
        let ct = t.cosh();
        for _ in 0..5000 {
            let s = (1.0 + rng.gen::<f64>() * (ct - 1.0)).acosh();
            let w = from_polar(PolarCoords { r: s, theta: rng.gen::<f64>() * TAU, origin: z1 });
            if dist(w, z2) <= t {
                assert!(dist(w, m) <= rho + 1e-9);
            }
        }
    }

    #[test]
    fn polar_examples() {
        let p = to_polar(UHPoint::i(), pt(0.0, 2.0)).unwrap();
        assert!((p.r - 2f64.ln()).abs() < 1e-15);
        assert!((p.theta - FRAC_PI_2).abs() < 1e-15);
        let q = to_polar(UHPoint::i(), pt(1.0, 1.0)).unwrap();
        let back = from_polar(PolarCoords { r: 0.96242, theta: q.theta, origin: UHPoint::i() });
        assert!((back.x - 1.0).abs() < 1e-5 && (back.y - 1.0).abs() < 1e-5);
        assert!(to_polar(UHPoint::i(), UHPoint::i()).is_err());
    }

    #[test]
    fn polar_area_element_by_monte_carlo() {
        // Uniform (r, θ) with weight sinh r on [0, 1] × [0, 2π) should
        // integrate the indicator of the unit ball to its area.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20000;
        let origin = pt(0.2, 1.3);
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let r = rng.gen::<f64>() * 1.5;
            let th = rng.gen::<f64>() * TAU;
            let z = from_polar(PolarCoords { r, theta: th, origin });
            let v = if dist(z, origin) <= 1.0 { r.sinh() * 1.5 * TAU } else { 0.0 };
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / n as f64;
        let se = ((acc2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - ball_volume(1.0).unwrap()).abs() < 3.0 * se);
    }

    #[test]
    fn midpoint_examples() {
        let (m, th, d) = midpoint_frame(pt(0.0, 1.0), pt(0.0, 4.0)).unwrap();
        assert!((m.x).abs() < 1e-14 && (m.y - 2.0).abs() < 1e-14);
        assert!((d - 4f64.ln()).abs() < 1e-15);
        assert!((th - FRAC_PI_2).abs() < 1e-12);
        let (m2, th2, d2) = midpoint_frame(pt(0.0, 4.0), pt(0.0, 1.0)).unwrap();
        assert!((m2.y - 2.0).abs() < 1e-14 && (d2 - d).abs() < 1e-15);
        assert!((normalize_angle(th2 - th) - PI).abs() < 1e-12);
        assert!(midpoint_frame(UHPoint::i(), UHPoint::i()).is_err());
    }

    #[test]
    fn flow_examples() {
        let p = TangentPoint::new(UHPoint::i(), FRAC_PI_2);
        assert_eq!(geodesic_flow(p, 0.0), p);
        let q = geodesic_flow(p, 2f64.ln());
        assert!(q.base.x.abs() < 1e-15 && (q.base.y - 2.0).abs() < 1e-14);
    }

    fn arb_point() -> impl Strategy<Value = UHPoint> {
        (-3.0..3.0f64, 0.05..5.0f64).prop_map(|(x, y)| UHPoint { x, y })
    }

    fn arb_moebius() -> impl Strategy<Value = Moebius> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| {
            let a = if a.abs() < 0.1 { 0.1 } else { a };
            Moebius { a, b, c, d: (1.0 + b * c) / a }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn distance_is_invariant(g in arb_moebius(), z in arb_point(), w in arb_point()) {
            let d0 = dist(z, w);
            let d1 = dist(g.apply(z), g.apply(w));
            prop_assert!((d0 - d1).abs() < 1e-10 * (1.0 + d0));
        }

        #[test]
        fn composition_law(g in arb_moebius(), h in arb_moebius(), z in arb_point()) {
            let a = (g * h).apply(z);
            let b = g.apply(h.apply(z));
            prop_assert!(dist(a, b) < 1e-9);
        }

        #[test]
        fn polar_round_trip(o in arb_point(), z in arb_point()) {
            prop_assume!(dist(o, z) > 1e-6);
            let back = from_polar(to_polar(o, z).unwrap());
            prop_assert!(dist(back, z) < 1e-10);
        }

        #[test]
        fn flow_is_additive(z in arb_point(), th in 0.0..TAU, s in -3.0..3.0f64, t in -3.0..3.0f64) {
            let p = TangentPoint::new(z, th);
            let a = geodesic_flow(geodesic_flow(p, s), t);
            let b = geodesic_flow(p, s + t);
            prop_assert!(dist(a.base, b.base) < 1e-9);
            let dth = normalize_angle(a.theta - b.theta);
            prop_assert!(dth.min(TAU - dth) < 1e-9);
            prop_assert!((dist(z, geodesic_flow(p, s).base) - s.abs()).abs() < 1e-9);
        }

        #[test]
        fn midpoint_frame_recovers_endpoints(z1 in arb_point(), z2 in arb_point()) {
            prop_assume!(dist(z1, z2) > 1e-6);
            let (m, th, d) = midpoint_frame(z1, z2).unwrap();
            let fwd = geodesic_flow(TangentPoint::new(m, th), 0.5 * d).base;
            let back = geodesic_flow(TangentPoint::new(m, th), -0.5 * d).base;
            prop_assert!(dist(fwd, z2) < 1e-8);
            prop_assert!(dist(back, z1) < 1e-8);
        }
    }
}
