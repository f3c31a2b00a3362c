//! Weil–Petersson volume bookkeeping and the small-systole probability bound.
//!
//! Volumes come from a plain-text table (see `data/wp_volumes.txt`); nothing
//! here recurses on (g, n). The bound is
//! ∫₀^ε t e^{2t} dt · [V_{g−1,k+2} + Σ_{i,j} V_{i,j+1} V_{g−i,k−j+1}] / V_{g,k},
//! i.e. Mirzakhani's integral formula with V(L) ≤ e^{ΣL} V majorizing the
//! boundary-length dependence.

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

const SHIPPED_TABLE: &str = include_str!("../data/wp_volumes.txt");

/// One monomial Π L_i^{e_i} with its coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VolumeTable {
    pub convention: String,
    scalars: BTreeMap<(u32, u32), f64>,
    polys: BTreeMap<(u32, u32), Vec<Monomial>>,
}

fn parse_value(tok: &str) -> std::result::Result<f64, String> {
    let mut v = 1.0;
    for factor in tok.split('*') {
        let f = factor.trim();
        if let Some(rest) = f.strip_prefix("pi") {
            let k = match rest.strip_prefix('^') {
                Some(k) => k.parse::<i32>().map_err(|_| format!("bad pi power in {tok:?}"))?,
                None if rest.is_empty() => 1,
                None => return Err(format!("bad factor {f:?}")),
            };
            v *= PI.powi(k);
        } else if let Some((p, q)) = f.split_once('/') {
            let p: f64 = p.parse().map_err(|_| format!("bad numerator in {tok:?}"))?;
            let q: f64 = q.parse().map_err(|_| format!("bad denominator in {tok:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {tok:?}"));
            }
            v *= p / q;
        } else {
            v *= f.parse::<f64>().map_err(|_| format!("not a number: {f:?}"))?;
        }
    }
    Ok(v)
}

/// Number of boundary components a stable (g, n) needs: 2g − 2 + n > 0.
pub fn is_stable(g: u32, n: u32) -> bool {
    2 * g + n > 2
}

impl VolumeTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = VolumeTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.trim();
            if let Some(c) = line.strip_prefix('#') {
                if let Some(conv) = c.trim().strip_prefix("convention:") {
                    t.convention = conv.trim().to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 3 {
                return Err(perr(format!("expected `g n value` or `g n poly ...`, got {line:?}")));
            }
            let g: u32 = toks[0].parse().map_err(|_| perr(format!("bad genus {:?}", toks[0])))?;
            let n: u32 = toks[1].parse().map_err(|_| perr(format!("bad cusp count {:?}", toks[1])))?;
            if !is_stable(g, n) {
                return Err(perr(format!("(g, n) = ({g}, {n}) is not stable")));
            }
            if t.scalars.contains_key(&(g, n)) {
                return Err(perr(format!("duplicate entry for ({g}, {n})")));
            }
            let value = if toks[2] == "poly" {
                let mut mons = Vec::new();
                for tok in &toks[3..] {
                    let (e, c) = tok.split_once(':').ok_or_else(|| perr(format!("monomial {tok:?} lacks ':'")))?;
                    let exponents: Vec<u32> = e
                        .split(',')
                        .map(|x| x.parse::<u32>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| perr(format!("bad exponents {e:?}")))?;
                    if exponents.len() != n as usize {
                        return Err(perr(format!("monomial {tok:?} needs {n} exponents")));
                    }
                    let coef = parse_value(c).map_err(perr)?;
                    mons.push(Monomial { exponents, coef });
                }
                let constant: f64 =
                    mons.iter().filter(|m| m.exponents.iter().all(|&e| e == 0)).map(|m| m.coef).sum();
                if mons.iter().any(|m| m.coef < 0.0) {
                    return Err(perr("volume polynomial coefficients must be nonnegative".into()));
                }
                t.polys.insert((g, n), mons);
                constant
            } else {
                if toks.len() != 3 {
                    return Err(perr(format!("trailing tokens in {line:?}")));
                }
                parse_value(toks[2]).map_err(perr)?
            };
            if !(value > 0.0) || !value.is_finite() {
                return Err(perr(format!("volume must be positive, got {value}")));
            }
            t.scalars.insert((g, n), value);
        }
        if t.scalars.is_empty() {
            return Err(Error::Parse { line: 0, msg: "volume table is empty".into() });
        }
        Ok(t)
    }

    /// The table bundled with the crate.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_TABLE).expect("bundled volume table parses")
    }

    pub fn volume(&self, g: u32, n: u32) -> Option<f64> {
        self.scalars.get(&(g, n)).copied()
    }

    pub fn polynomial(&self, g: u32, n: u32) -> Option<&[Monomial]> {
        self.polys.get(&(g, n)).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.scalars.iter().map(|(&k, &v)| (k, v))
    }

    /// V_{g,n}(L).
    pub fn eval_polynomial(&self, g: u32, n: u32, lengths: &[f64]) -> Result<f64> {
        let p = self
            .polynomial(g, n)
            .ok_or_else(|| Error::Unsupported(format!("no volume polynomial for (g, n) = ({g}, {n})")))?;
        if lengths.len() != n as usize {
            return Err(Error::InvalidInput(format!("need {n} boundary lengths, got {}", lengths.len())));
        }
        Ok(p.iter()
            .map(|m| m.coef * m.exponents.iter().zip(lengths).map(|(&e, &l)| l.powi(e as i32)).product::<f64>())
            .sum())
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        for v in t.scalars.values_mut() {
            *v *= c;
        }
        for p in t.polys.values_mut() {
            for m in p.iter_mut() {
                m.coef *= c;
            }
        }
        t
    }
}

// ---- V(L) ≤ e^{ΣL} V ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpBoundPoint {
    pub lengths: Vec<f64>,
    pub volume: f64,
    pub majorant: f64,
    /// V(L) / (e^{ΣL} V); ≤ 1 when the inequality holds.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpBoundVerdict {
    pub g: u32,
    pub n: u32,
    pub holds: bool,
    pub worst_ratio: f64,
    /// min over L ≠ 0 of 1 − ratio.
    pub worst_margin: f64,
    pub points: Vec<ExpBoundPoint>,
}

/// Evaluate V_{g,n}(L) ≤ e^{ΣL} V_{g,n} on the product grid `grid`ⁿ.
pub fn volume_exp_bound_check(table: &VolumeTable, g: u32, n: u32, grid: &[f64]) -> Result<ExpBoundVerdict> {
    let v0 = table
        .volume(g, n)
        .ok_or_else(|| Error::MissingEntries(vec![(g, n)]))?;
    if table.polynomial(g, n).is_none() {
        return Err(Error::Unsupported(format!("no volume polynomial for (g, n) = ({g}, {n})")));
    }
    if grid.is_empty() || grid.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput("length grid must be nonempty, finite and nonnegative".into()));
    }
    let dims = n as usize;
    let total = grid.len().checked_pow(n).filter(|&t| t <= 1_000_000).ok_or_else(|| Error::Budget {
        depth: dims,
        reason: "length grid too large".into(),
    })?;
    let mut points = Vec::with_capacity(total);
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_margin = f64::INFINITY;
    for idx in 0..total {
        let mut k = idx;
        let lengths: Vec<f64> = (0..dims)
            .map(|_| {
                let l = grid[k % grid.len()];
                k /= grid.len();
                l
            })
            .collect();
        let volume = table.eval_polynomial(g, n, &lengths)?;
        let majorant = lengths.iter().sum::<f64>().exp() * v0;
        let ratio = volume / majorant;
        worst_ratio = worst_ratio.max(ratio);
        if lengths.iter().any(|&l| l > 0.0) {
            worst_margin = worst_margin.min(1.0 - ratio);
        }
        points.push(ExpBoundPoint { lengths, volume, majorant, ratio });
    }
    Ok(ExpBoundVerdict {
        g,
        n,
        holds: worst_ratio <= 1.0 + 1e-12,
        worst_ratio,
        worst_margin: if worst_margin.is_finite() { worst_margin } else { 0.0 },
        points,
    })
}

// ---- V_{g−1,k+2}/V_{g,k} ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub g: u32,
    pub k: u32,
    pub ratio: f64,
    /// Smallest C₂ consistent with ratio ≤ 1 − C₂(k − 2)/(2g − 4 + k); None when k = 2.
    pub implied_c2: Option<f64>,
}

/// The ratio V_{g−1,k+2}/V_{g,k} from the table, against the form
/// 1 − C₂(k − 2)/(2g − 4 + k) of the large-genus estimate.
pub fn ratio_check(table: &VolumeTable, g: u32, k: u32) -> Result<RatioCheck> {
    if g == 0 {
        return Err(Error::InvalidInput("need g >= 1".into()));
    }
    let missing: Vec<(u32, u32)> =
        [(g - 1, k + 2), (g, k)].into_iter().filter(|&(a, b)| table.volume(a, b).is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingEntries(missing));
    }
    let ratio = table.volume(g - 1, k + 2).unwrap() / table.volume(g, k).unwrap();
    let denom = 2.0 * g as f64 - 4.0 + k as f64;
    let implied_c2 = if k == 2 || denom == 0.0 { None } else { Some((1.0 - ratio) * denom / (k as f64 - 2.0)) };
    Ok(RatioCheck { g, k, ratio, implied_c2 })
}

// ---- systole bound -----------------------------------------------------------------

/// Collar-lemma threshold 2 asinh 1.
pub fn collar_threshold() -> f64 {
    2.0 * 1f64.asinh()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeTerm {
    /// "nonseparating" or "split".
    pub kind: String,
    pub pieces: Vec<(u32, u32)>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystoleBoundReport {
    pub eps: f64,
    pub g: u32,
    pub k: u32,
    pub terms: Vec<VolumeTerm>,
    pub volume_sum: f64,
    pub base_volume: f64,
    /// ∫₀^ε t e^{2t} dt by quadrature.
    pub weight_integral: f64,
    pub weight_closed_form: f64,
    pub integrand: Vec<(f64, f64)>,
    pub bound: f64,
}

/// ∫₀^ε t e^{2t} dt = (e^{2ε}(2ε − 1) + 1)/4.
pub fn weight_closed_form(eps: f64) -> f64 {
    // expm1 keeps precision for small ε: (2ε e^{2ε} − (e^{2ε} − 1))/4.
    let e = (2.0 * eps).exp_m1();
    (2.0 * eps * (e + 1.0) - e) / 4.0
}

fn volume_terms(table: &VolumeTable, g: u32, k: u32) -> Result<(Vec<VolumeTerm>, f64)> {
    let mut wanted: Vec<(&str, Vec<(u32, u32)>)> = Vec::new();
    if is_stable(g - 1, k + 2) {
        wanted.push(("nonseparating", vec![(g - 1, k + 2)]));
    }
    for i in 1..=g.div_ceil(2) {
        for j in 0..=k.div_ceil(2) {
            if i > g || j > k {
                continue;
            }
            let a = (i, j + 1);
            let b = (g - i, k - j + 1);
            if is_stable(a.0, a.1) && is_stable(b.0, b.1) {
                wanted.push(("split", vec![a, b]));
            }
        }
    }
    let mut missing: Vec<(u32, u32)> = wanted
        .iter()
        .flat_map(|(_, p)| p.iter().copied())
        .chain(std::iter::once((g, k)))
        .filter(|&(a, b)| table.volume(a, b).is_none())
        .collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::MissingEntries(missing));
    }
    let terms: Vec<VolumeTerm> = wanted
        .into_iter()
        .map(|(kind, pieces)| {
            let value = pieces.iter().map(|&(a, b)| table.volume(a, b).unwrap()).product();
            VolumeTerm { kind: kind.into(), pieces, value }
        })
        .collect();
    let base = table.volume(g, k).unwrap();
    Ok((terms, base))
}

/// Upper bound for P_{g,k}(sys ≤ ε).
pub fn systole_prob_bound(g: u32, k: u32, eps: f64, table: &VolumeTable) -> Result<SystoleBoundReport> {
    if g < 1 || !is_stable(g, k) {
        return Err(Error::InvalidInput(format!("need g >= 1 and 2g - 2 + k > 0, got ({g}, {k})")));
    }
    if !(eps >= 0.0) || eps >= collar_threshold() {
        return Err(Error::InvalidInput(format!(
            "eps must lie in [0, 2 asinh 1) = [0, {:.6}), got {eps}",
            collar_threshold()
        )));
    }
    let (terms, base) = volume_terms(table, g, k)?;
    let volume_sum: f64 = terms.iter().map(|t| t.value).sum();
    let weight = |t: f64| t * (2.0 * t).exp();
    let integral = if eps == 0.0 {
        0.0
    } else {
        integrate(weight, 0.0, eps, Tolerance::new(1e-300, 1e-13))?.value
    };
    let integrand = (0..=16).map(|i| eps * i as f64 / 16.0).map(|t| (t, weight(t))).collect();
    Ok(SystoleBoundReport {
        eps,
        g,
        k,
        terms,
        volume_sum,
        base_volume: base,
        weight_integral: integral,
        weight_closed_form: weight_closed_form(eps),
        integrand,
        bound: integral * volume_sum / base,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub g: u32,
    pub k: u32,
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of log bound against log ε.
    pub exponent: Option<f64>,
    pub prefactor: Option<f64>,
}

pub fn epsilon_scaling_curve(g: u32, k: u32, eps_list: &[f64], table: &VolumeTable) -> Result<ScalingCurve> {
    let points: Vec<(f64, f64)> = eps_list
        .iter()
        .map(|&e| systole_prob_bound(g, k, e, table).map(|r| (e, r.bound)))
        .collect::<Result<_>>()?;
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(e, b)| e > 0.0 && b > 0.0).collect();
    let (exponent, prefactor) = if usable.len() >= 2 && usable.len() == points.len() {
        let n = usable.len() as f64;
        let xs: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx > 0.0 {
            let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
            (Some(slope), Some((my - slope * mx).exp()))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    Ok(ScalingCurve { g, k, points, exponent, prefactor })
}
