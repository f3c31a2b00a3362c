//! Fuchsian groups given as free products of cyclic groups: word enumeration,
//! exact conjugacy classes, orbit enumeration by tiling, lattice counting,
//! injectivity radius, systole, length spectrum and thin-part sampling.

use crate::error::{Error, Result};
use crate::hgeom::{dist, Moebius, UHPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

const MODULAR_JSON: &str = include_str!("../data/models/modular.json");
const PUNCTURED_TORUS_JSON: &str = include_str!("../data/models/punctured_torus.json");

/// Extra radius explored beyond R when pruning tiles.
pub const PRUNE_MARGIN: f64 = 0.5;
pub const DEFAULT_TILE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub matrix: Moebius,
    /// Order in PSL(2,R); `None` for infinite order.
    pub order: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspData {
    pub scaling: Moebius,
    pub width: f64,
}

/// Boundary geodesic of a half-plane region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HalfPlane {
    /// Keep x ≤ x0 (`left`) or x ≥ x0.
    Vertical { x0: f64, left: bool },
    /// Keep |z − c| ≥ ρ (`outside`) or ≤ ρ.
    Circle { center: f64, radius: f64, outside: bool },
}

impl HalfPlane {
    pub fn contains(&self, z: UHPoint, slack: f64) -> bool {
        match *self {
            HalfPlane::Vertical { x0, left } => {
                if left {
                    z.x <= x0 + slack
                } else {
                    z.x >= x0 - slack
                }
            }
            HalfPlane::Circle { center, radius, outside } => {
                let d2 = (z.x - center).powi(2) + z.y * z.y;
                if outside {
                    d2 >= radius * radius - slack
                } else {
                    d2 <= radius * radius + slack
                }
            }
        }
    }

    /// Hyperbolic distance from z to the half-plane (0 inside).
    pub fn distance(&self, z: UHPoint) -> f64 {
        if self.contains(z, 0.0) {
            return 0.0;
        }
        match *self {
            HalfPlane::Vertical { x0, .. } => ((z.x - x0).abs() / z.y).asinh(),
            HalfPlane::Circle { center, radius, .. } => {
                let d2 = (z.x - center).powi(2) + z.y * z.y;
                ((d2 - radius * radius).abs() / (2.0 * radius * z.y)).asinh()
            }
        }
    }
}

/// Fundamental-domain side: the region's boundary and the group element whose
/// tile lies across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub boundary: HalfPlane,
    pub neighbor: Moebius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub sides: Vec<Side>,
}

impl Domain {
    pub fn contains(&self, z: UHPoint) -> bool {
        self.sides.iter().all(|s| s.boundary.contains(z, 1e-12))
    }

    /// Lower bound for the distance from z to the domain.
    pub fn distance_lower_bound(&self, z: UHPoint) -> f64 {
        self.sides.iter().map(|s| s.boundary.distance(z)).fold(0.0, f64::max)
    }
}

/// Rejection sampler: points of a half-plane region with density ∝ y⁻², then
/// moved by a uniformly chosen coset representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub region: Vec<HalfPlane>,
    pub reps: Vec<Moebius>,
}

impl SamplerSpec {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> UHPoint {
        loop {
            let x = self.x_min + (self.x_max - self.x_min) * rng.gen::<f64>();
            let u: f64 = 1.0 - rng.gen::<f64>();
            let z = UHPoint { x, y: self.y_min / u };
            if self.region.iter().all(|h| h.contains(z, 0.0)) {
                let k = if self.reps.len() > 1 { rng.gen_range(0..self.reps.len()) } else { 0 };
                return self.reps[k].apply(z);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassEnumeration {
    /// Cyclic words in the generators up to a depth (never certified complete).
    FreeProductWords,
    /// Necklaces in L = SU, R = SU⁻¹ for PSL(2,Z), complete up to a trace bound.
    ModularNecklaces,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuchsianGroup {
    pub name: String,
    pub generators: Vec<Generator>,
    pub genus: u32,
    pub cusp_count: u32,
    pub volume: f64,
    pub integral: bool,
    pub class_enumeration: ClassEnumeration,
    pub cusps: Vec<CuspData>,
    pub domain: Option<Domain>,
    pub sampler: Option<SamplerSpec>,
}

// ---- model file -----------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    generators: Vec<GeneratorFile>,
    genus: u32,
    cusp_count: u32,
    volume: f64,
    #[serde(default)]
    integral: bool,
    #[serde(default = "default_enum")]
    class_enumeration: ClassEnumeration,
    #[serde(default)]
    cusps: Vec<CuspFile>,
    domain: Option<DomainFile>,
    sampler: Option<SamplerFile>,
}

fn default_enum() -> ClassEnumeration {
    ClassEnumeration::FreeProductWords
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    name: String,
    matrix: [f64; 4],
    order: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CuspFile {
    scaling: [f64; 4],
    width: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    sides: Vec<SideFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SideFile {
    vertical: Option<f64>,
    circle: Option<[f64; 2]>,
    keep: String,
    neighbor: Option<[f64; 4]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerFile {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    region: Vec<SideFile>,
    reps: Vec<[f64; 4]>,
}

fn matrix(m: [f64; 4], what: &str) -> Result<Moebius> {
    Moebius::new(m[0], m[1], m[2], m[3]).map_err(|e| Error::Parse { line: 0, msg: format!("{what}: {e}") })
}

fn half_plane(s: &SideFile) -> Result<HalfPlane> {
    match (s.vertical, s.circle, s.keep.as_str()) {
        (Some(x0), None, "left") => Ok(HalfPlane::Vertical { x0, left: true }),
        (Some(x0), None, "right") => Ok(HalfPlane::Vertical { x0, left: false }),
        (None, Some([c, r]), "outside") if r > 0.0 => Ok(HalfPlane::Circle { center: c, radius: r, outside: true }),
        (None, Some([c, r]), "inside") if r > 0.0 => Ok(HalfPlane::Circle { center: c, radius: r, outside: false }),
        _ => Err(Error::Parse { line: 0, msg: format!("invalid side specification (keep = {})", s.keep) }),
    }
}

impl FuchsianGroup {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        if !(f.volume > 0.0) {
            return Err(Error::Parse { line: 0, msg: "volume must be positive".into() });
        }
        if f.generators.is_empty() {
            return Err(Error::Parse { line: 0, msg: "no generators".into() });
        }
        let generators = f
            .generators
            .iter()
            .map(|g| {
                if g.order == Some(0) || g.order == Some(1) {
                    return Err(Error::Parse { line: 0, msg: format!("generator {} has order < 2", g.name) });
                }
                Ok(Generator { name: g.name.clone(), matrix: matrix(g.matrix, &g.name)?, order: g.order })
            })
            .collect::<Result<Vec<_>>>()?;
        let cusps = f
            .cusps
            .iter()
            .map(|c| Ok(CuspData { scaling: matrix(c.scaling, "cusp scaling")?, width: c.width }))
            .collect::<Result<Vec<_>>>()?;
        let domain = match &f.domain {
            Some(d) => Some(Domain {
                sides: d
                    .sides
                    .iter()
                    .map(|s| {
                        let n = s.neighbor.ok_or(Error::Parse { line: 0, msg: "side without neighbor".into() })?;
                        Ok(Side { boundary: half_plane(s)?, neighbor: matrix(n, "side pairing")? })
                    })
                    .collect::<Result<Vec<_>>>()?,
            }),
            None => None,
        };
        let sampler = match &f.sampler {
            Some(s) => Some(SamplerSpec {
                x_min: s.x_min,
                x_max: s.x_max,
                y_min: s.y_min,
                region: s.region.iter().map(half_plane).collect::<Result<Vec<_>>>()?,
                reps: s.reps.iter().map(|m| matrix(*m, "coset rep")).collect::<Result<Vec<_>>>()?,
            }),
            None => None,
        };
        let g = FuchsianGroup {
            name: f.name,
            generators,
            genus: f.genus,
            cusp_count: f.cusp_count,
            volume: f.volume,
            integral: f.integral,
            class_enumeration: f.class_enumeration,
            cusps,
            domain,
            sampler,
        };
        if g.class_enumeration == ClassEnumeration::ModularNecklaces && !g.is_modular_presentation() {
            return Err(Error::Parse { line: 0, msg: "necklace enumeration requires generators S, U of PSL(2,Z)".into() });
        }
        Ok(g)
    }

    pub fn modular() -> Self {
        Self::from_json(MODULAR_JSON).expect("shipped modular model is valid")
    }

    pub fn punctured_torus() -> Self {
        Self::from_json(PUNCTURED_TORUS_JSON).expect("shipped punctured-torus model is valid")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "modular" => Ok(Self::modular()),
            "punctured_torus" => Ok(Self::punctured_torus()),
            _ => Err(Error::Unsupported(format!("unknown model {name}"))),
        }
    }

    fn is_modular_presentation(&self) -> bool {
        self.generators.len() == 2
            && self.generators[0].order == Some(2)
            && self.generators[1].order == Some(3)
            && self.generators[0].matrix.approx_eq(Moebius::inversion(), 1e-12)
            && self.generators[1].matrix.approx_eq(Moebius { a: 0.0, b: -1.0, c: 1.0, d: 1.0 }, 1e-12)
    }

    /// Orders of the finite-order generators; each is one elliptic point.
    pub fn elliptic_orders(&self) -> Vec<u32> {
        self.generators.iter().filter_map(|g| g.order).collect()
    }

    /// 2π(2g − 2 + k) + Σ 2π(1 − 1/m) over elliptic points.
    pub fn gauss_bonnet_volume(&self) -> f64 {
        let tau = std::f64::consts::TAU;
        let mut v = tau * (2.0 * self.genus as f64 - 2.0 + self.cusp_count as f64);
        for m in self.elliptic_orders() {
            v += tau * (1.0 - 1.0 / m as f64);
        }
        v
    }

    /// Conjugate every generator (and domain data) by g.
    pub fn conjugated(&self, g: Moebius) -> Self {
        let mut out = self.clone();
        for gen in &mut out.generators {
            gen.matrix = gen.matrix.conjugate_by(g);
        }
        out.domain = None;
        out.sampler = None;
        out.integral = false;
        out.class_enumeration = ClassEnumeration::FreeProductWords;
        out.name = format!("{} (conjugated)", self.name);
        out
    }

    // ---- words ------------------------------------------------------------

    pub fn evaluate(&self, w: &Word) -> Moebius {
        let mut m = Moebius::IDENTITY;
        for &(g, e) in &w.0 {
            let base = self.generators[g].matrix;
            let (b, n) = if e < 0 { (base.inverse(), -e) } else { (base, e) };
            for _ in 0..n {
                m = m * b;
            }
        }
        if self.integral {
            round_matrix(m)
        } else {
            m
        }
    }

    fn exponent_choices(&self, g: usize, remaining: usize) -> Vec<(i32, usize)> {
        match self.generators[g].order {
            Some(n) => (1..n as i32)
                .map(|e| (e, (e.min(n as i32 - e)) as usize))
                .filter(|&(_, l)| l <= remaining)
                .collect(),
            None => (1..=remaining as i32).flat_map(|e| [(e, e as usize), (-e, e as usize)]).collect(),
        }
    }

    /// All reduced words of letter length 1..=depth.
    pub fn reduced_words(&self, depth: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack: Vec<(Word, usize)> = vec![(Word(vec![]), 0)];
        while let Some((w, len)) = stack.pop() {
            if len > 0 {
                out.push(w.clone());
            }
            let last = w.0.last().map(|s| s.0);
            for g in 0..self.generators.len() {
                if Some(g) == last {
                    continue;
                }
                for (e, l) in self.exponent_choices(g, depth - len) {
                    let mut nw = w.clone();
                    nw.0.push((g, e));
                    stack.push((nw, len + l));
                }
            }
        }
        out.sort();
        out
    }

    /// Conjugacy classes represented by cyclically reduced words of letter
    /// length ≤ depth, one canonical (minimal-rotation) word per class.
    pub fn conjugacy_classes(&self, depth: usize) -> Vec<ClassWord> {
        self.reduced_words(depth)
            .into_iter()
            .filter(|w| w.is_cyclically_reduced())
            .filter_map(|w| {
                let (canon, period) = w.minimal_rotation();
                if canon != w {
                    return None;
                }
                let m = self.evaluate(&w);
                Some(ClassWord { primitive: period == w.0.len(), trace: m.trace().abs(), word: w })
            })
            .collect()
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.0.iter()
            .map(|&(g, e)| {
                let name = &self.generators[g].name;
                let e = match self.generators[g].order {
                    Some(n) if e > n as i32 / 2 => e - n as i32,
                    _ => e,
                };
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    // ---- orbits -----------------------------------------------------------

    fn require_domain(&self) -> Result<&Domain> {
        self.domain
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("model {} has no fundamental domain", self.name)))
    }

    fn key(&self, m: Moebius) -> [i64; 4] {
        let m = m.canonical();
        let s = if self.integral { 1.0 } else { 1e6 };
        [(m.a * s).round() as i64, (m.b * s).round() as i64, (m.c * s).round() as i64, (m.d * s).round() as i64]
    }

    /// Move z into the fundamental domain: returns (z₀, δ) with z₀ = δ z.
    pub fn reduce(&self, z: UHPoint) -> Result<(UHPoint, Moebius)> {
        let dom = self.require_domain()?;
        let mut cur = z;
        let mut delta = Moebius::IDENTITY;
        for _ in 0..100_000 {
            let bad = dom.sides.iter().find(|s| !s.boundary.contains(cur, 1e-13));
            let side = match bad {
                None => return Ok((cur, if self.integral { round_matrix(delta) } else { delta })),
                Some(s) => s,
            };
            let step = side.neighbor.inverse();
            let mut m = step;
            if side.neighbor.c == 0.0 && side.neighbor.b != 0.0 {
                // Translation pairing: jump the whole way at once.
                if let HalfPlane::Vertical { x0, .. } = side.boundary {
                    let width = side.neighbor.b.abs();
                    let n = ((cur.x - x0).abs() / width).ceil().max(1.0);
                    m = Moebius::translation(-side.neighbor.b * n / side.neighbor.d.powi(2));
                    let _ = width;
                }
            }
            cur = m.apply(cur);
            delta = m * delta;
        }
        Err(Error::Budget { depth: 100_000, reason: "reduction into the fundamental domain did not terminate".into() })
    }

    /// All γ with d(z₀, γ w₀) ≤ R for z₀, w₀ in the fundamental domain, by a
    /// breadth-first walk over tiles γF pruned by a distance lower bound.
    fn orbit_in_domain(&self, z0: UHPoint, w0: UHPoint, r: f64, budget: usize) -> Result<Vec<(Moebius, f64)>> {
        let dom = self.require_domain()?;
        let mut seen: HashSet<[i64; 4]> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.key(Moebius::IDENTITY));
        queue.push_back((Moebius::IDENTITY, 0usize));
        let mut out = Vec::new();
        let limit = r + PRUNE_MARGIN;
        while let Some((g, depth)) = queue.pop_front() {
            let d = dist(z0, g.apply(w0));
            if d <= r {
                out.push((g, d));
            }
            for side in &dom.sides {
                let mut h = g * side.neighbor;
                if self.integral {
                    h = round_matrix(h);
                }
                let k = self.key(h);
                if seen.contains(&k) {
                    continue;
                }
                seen.insert(k);
                if dom.distance_lower_bound(h.inverse().apply(z0)) <= limit {
                    queue.push_back((h, depth + 1));
                }
            }
            if seen.len() > budget {
                return Err(Error::Budget { depth, reason: format!("tile budget {budget} exceeded at radius {r}") });
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| self.key(a.0).cmp(&self.key(b.0))));
        Ok(out)
    }

    /// All γ (up to sign) with d(z, γ w) ≤ R, sorted by distance.
    pub fn orbit_within(&self, z: UHPoint, w: UHPoint, r: f64) -> Result<Vec<(Moebius, f64)>> {
        self.orbit_within_budget(z, w, r, DEFAULT_TILE_BUDGET)
    }

    pub fn orbit_within_budget(&self, z: UHPoint, w: UHPoint, r: f64, budget: usize) -> Result<Vec<(Moebius, f64)>> {
        if !(r >= 0.0) {
            return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
        }
        let (z0, dz) = self.reduce(z)?;
        let (w0, dw) = self.reduce(w)?;
        let list = self.orbit_in_domain(z0, w0, r, budget)?;
        let dz_inv = dz.inverse();
        Ok(list
            .into_iter()
            .map(|(g, d)| {
                let mut m = dz_inv * g * dw;
                if self.integral {
                    m = round_matrix(m);
                }
                (m.canonical(), d)
            })
            .collect())
    }

    /// Nontrivial γ with d(z, γz) ≤ R, each once up to sign, by displacement.
    pub fn enumerate_displacers(&self, z: UHPoint, r: f64) -> Result<Vec<(Moebius, f64)>> {
        let id = self.key(Moebius::IDENTITY);
        Ok(self.orbit_within(z, z, r)?.into_iter().filter(|(g, _)| self.key(*g) != id).collect())
    }

    /// N_Γ(R; z, w): number of γ up to sign with d(z, γw) ≤ R.
    pub fn lattice_count(&self, z: UHPoint, w: UHPoint, r: f64) -> Result<usize> {
        Ok(self.orbit_within(z, w, r)?.len())
    }

    /// Half the minimal nonzero displacement at z.
    pub fn injectivity_radius_at(&self, z: UHPoint) -> Result<InjectivityRadius> {
        let mut r = 1.0;
        loop {
            match self.enumerate_displacers(z, r) {
                Ok(list) if !list.is_empty() => {
                    return Ok(InjectivityRadius { value: 0.5 * list[0].1, lower_bound_only: false })
                }
                Ok(_) => r *= 2.0,
                Err(Error::Budget { .. }) => return Ok(InjectivityRadius { value: 0.5 * r, lower_bound_only: true }),
                Err(e) => return Err(e),
            }
            if r > 64.0 {
                return Ok(InjectivityRadius { value: 0.5 * r, lower_bound_only: true });
            }
        }
    }

    /// Shortest closed geodesic among hyperbolic classes of word length ≤ depth.
    pub fn systole(&self, depth: usize) -> Result<SystoleResult> {
        if depth == 0 {
            return Err(Error::InvalidInput("systole search depth must be >= 1".into()));
        }
        let best = self
            .conjugacy_classes(depth)
            .into_iter()
            .filter(|c| c.trace > 2.0 + 1e-9)
            .min_by(|a, b| a.trace.total_cmp(&b.trace).then_with(|| a.word.cmp(&b.word)))
            .ok_or_else(|| Error::Budget { depth, reason: "no hyperbolic element within the search depth".into() })?;
        // For integral groups, |trace| = 3 is the smallest hyperbolic value.
        let certified = self.integral && (best.trace - 3.0).abs() < 1e-9;
        Ok(SystoleResult {
            length: trace_to_length(best.trace),
            trace: best.trace,
            word: self.format_word(&best.word),
            upper_bound_only: !certified,
        })
    }

    /// Primitive hyperbolic classes with length ≤ lmax, grouped by length.
    pub fn length_spectrum(&self, lmax: f64, depth: usize) -> Result<LengthSpectrum> {
        if !(lmax > 0.0) {
            return Err(Error::InvalidInput(format!("Lmax must be positive, got {lmax}")));
        }
        let tmax = 2.0 * (0.5 * lmax).cosh();
        let (classes, complete, method) = match self.class_enumeration {
            ClassEnumeration::ModularNecklaces => {
                let list = modular_necklaces(tmax.floor() as i64);
                let classes: Vec<(f64, String)> = list
                    .into_iter()
                    .map(|(w, t)| (t as f64, necklace_to_word(&w)))
                    .collect();
                (classes, true, "lyndon words in L = S U, R = S U^-1, complete to the trace bound".to_string())
            }
            ClassEnumeration::FreeProductWords => {
                let classes: Vec<(f64, String)> = self
                    .conjugacy_classes(depth)
                    .into_iter()
                    .filter(|c| c.primitive && c.trace > 2.0 + 1e-9 && c.trace <= tmax)
                    .map(|c| (c.trace, self.format_word(&c.word)))
                    .collect();
                (classes, false, format!("cyclic words of length <= {depth}"))
            }
        };
        let mut buckets: Vec<(f64, usize, String)> = Vec::new();
        let mut sorted = classes;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        for (t, w) in sorted {
            match buckets.last_mut() {
                Some(last) if (last.0 - t).abs() <= 1e-9 * t => last.1 += 1,
                _ => buckets.push((t, 1, w)),
            }
        }
        let entries = buckets
            .into_iter()
            .map(|(t, m, w)| ConjClassEntry {
                length: trace_to_length(t),
                trace: t,
                primitive: true,
                multiplicity: m,
                representative_word: w,
            })
            .collect();
        Ok(LengthSpectrum { lmax, entries, complete, method })
    }

    // ---- thin part ----------------------------------------------------------

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Result<UHPoint> {
        let s = self
            .sampler
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("model {} has no fundamental-domain sampler", self.name)))?;
        Ok(s.sample(rng))
    }

    /// Whether some γ ≠ id moves z by at most `d`.
    pub fn has_displacement_within(&self, z: UHPoint, d: f64) -> Result<bool> {
        Ok(!self.enumerate_displacers(z, d)?.is_empty())
    }

    /// Monte Carlo fraction of the surface with injectivity radius ≤ R.
    pub fn thin_part_fraction(&self, r: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
        if self.sampler.is_none() {
            return Err(Error::Unsupported(format!("model {} has no fundamental-domain sampler", self.name)));
        }
        if r <= 0.0 {
            return Ok(McEstimate { mean: 0.0, std_error: 0.0, samples: n_samples });
        }
        let chunks = chunk_ranges(n_samples);
        let hits: Vec<Result<usize>> = chunks
            .par_iter()
            .map(|&(idx, len)| {
                let mut rng = stream_rng(seed, idx as u64);
                let mut h = 0;
                for _ in 0..len {
                    let z = self.sample_point(&mut rng)?;
                    if self.has_displacement_within(z, 2.0 * r)? {
                        h += 1;
                    }
                }
                Ok(h)
            })
            .collect();
        let mut total = 0usize;
        for h in hits {
            total += h?;
        }
        let p = total as f64 / n_samples.max(1) as f64;
        Ok(McEstimate { mean: p, std_error: (p * (1.0 - p) / n_samples.max(1) as f64).sqrt(), samples: n_samples })
    }
}

/// Per-chunk deterministic random stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub const MC_CHUNK: usize = 256;

/// Split n samples into fixed-size chunks (index, length).
pub fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(MC_CHUNK)).map(|i| (i, MC_CHUNK.min(n - i * MC_CHUNK))).collect()
}

fn round_matrix(m: Moebius) -> Moebius {
    Moebius { a: m.a.round(), b: m.b.round(), c: m.c.round(), d: m.d.round() }
}

pub fn trace_to_length(trace: f64) -> f64 {
    2.0 * (0.5 * trace.abs()).acosh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectivityRadius {
    pub value: f64,
    pub lower_bound_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystoleResult {
    pub length: f64,
    pub trace: f64,
    pub word: String,
    pub upper_bound_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjClassEntry {
    pub length: f64,
    pub trace: f64,
    pub primitive: bool,
    pub multiplicity: usize,
    pub representative_word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    pub lmax: f64,
    pub entries: Vec<ConjClassEntry>,
    pub complete: bool,
    pub method: String,
}

impl LengthSpectrum {
    pub fn class_count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn truncated(&self, lmax: f64) -> LengthSpectrum {
        LengthSpectrum {
            lmax,
            entries: self.entries.iter().filter(|e| e.length <= lmax).cloned().collect(),
            complete: self.complete && lmax <= self.lmax,
            method: self.method.clone(),
        }
    }
}

/// Reduced word as syllables (generator index, exponent).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<(usize, i32)>);

impl Word {
    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() <= 1 || self.0[0].0 != self.0[self.0.len() - 1].0
    }

    /// Lexicographically least syllable rotation and the smallest period.
    pub fn minimal_rotation(&self) -> (Word, usize) {
        let n = self.0.len();
        if n == 0 {
            return (self.clone(), 0);
        }
        let mut best = self.0.clone();
        let mut period = n;
        for k in 1..n {
            let rot: Vec<_> = self.0[k..].iter().chain(&self.0[..k]).copied().collect();
            if rot == self.0 && k < period {
                period = k;
            }
            if rot < best {
                best = rot;
            }
        }
        (Word(best), period)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(g, e)| format!("g{g}^{e}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassWord {
    pub word: Word,
    pub trace: f64,
    pub primitive: bool,
}

type M2 = [i64; 4];

fn mul2(a: M2, b: M2) -> M2 {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

const L_MAT: M2 = [1, 1, 0, 1];
const R_MAT: M2 = [1, 0, 1, 1];

/// Lyndon words in {L < R} containing both letters with trace ≤ tmax, with
/// their traces. These index the primitive hyperbolic classes of PSL(2,Z).
pub fn modular_necklaces(tmax: i64) -> Vec<(Vec<u8>, i64)> {
    let mut out = Vec::new();
    // Duval-style prenecklace extension: p is the length of the longest
    // Lyndon prefix.
    fn rec(word: &mut Vec<u8>, m: M2, p: usize, has_r: bool, tmax: i64, out: &mut Vec<(Vec<u8>, i64)>) {
        let n = word.len();
        if has_r && p == n {
            out.push((word.clone(), m[0] + m[3]));
        }
        for next in [0u8, 1u8] {
            let ref_letter = word[n - p];
            if next < ref_letter {
                continue;
            }
            let np = if next > ref_letter { n + 1 } else { p };
            let nm = mul2(m, if next == 0 { L_MAT } else { R_MAT });
            let nr = has_r || next == 1;
            let bound = if nr { nm[0] + nm[3] } else { let t = mul2(nm, R_MAT); t[0] + t[3] };
            if bound > tmax {
                continue;
            }
            word.push(next);
            rec(word, nm, np, nr, tmax, out);
            word.pop();
        }
    }
    let mut w = vec![0u8];
    if 3 <= tmax {
        rec(&mut w, L_MAT, 1, false, tmax, &mut out);
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn necklace_to_word(w: &[u8]) -> String {
    w.iter().map(|&c| if c == 0 { "S U" } else { "S U^-1" }).collect::<Vec<_>>().join(" ")
}

/// Group the hyperbolic classes of PSL(2,Z) with |trace| ≤ tmax by trace,
/// including non-primitive classes (powers), for cross-checks.
pub fn modular_class_counts_by_trace(tmax: i64) -> HashMap<i64, usize> {
    let mut counts: HashMap<i64, usize> = HashMap::new();
    for (w, t) in modular_necklaces(tmax) {
        let mut m: M2 = [1, 0, 0, 1];
        for &c in &w {
            m = mul2(m, if c == 0 { L_MAT } else { R_MAT });
        }
        let mut p = m;
        loop {
            let tr = p[0] + p[3];
            if tr > tmax {
                break;
            }
            *counts.entry(tr).or_default() += 1;
            p = mul2(p, m);
        }
        let _ = t;
    }
    counts
}
