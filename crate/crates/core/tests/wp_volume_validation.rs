//! Independent check of the bundled Weil–Petersson table: ψ-class intersection
//! numbers from the DVV (Virasoro) recursion, converted to volume
//! coefficients through the κ₁ ↔ ψ pushforward relation
//! V_{g,n}(L) = Σ_α Π L_i^{2α_i}/(2^{α_i} α_i!) Σ_m 1/m! Σ_{b ∈ ℕ₊^m} Π p_{b_j} ⟨Π τ_{α_i} Π τ_{b_j+1}⟩,
//! p_b = (−1)^{b+1}(2π²)^b / b!.

use qelab::wpbound::VolumeTable;
use std::collections::HashMap;
use std::f64::consts::PI;

fn double_factorial(n: i64) -> f64 {
    let mut v = 1.0;
    let mut k = n;
    while k > 1 {
        v *= k as f64;
        k -= 2;
    }
    v
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Default)]
struct Intersections {
    memo: HashMap<(u32, Vec<u32>), f64>,
}

impl Intersections {
    /// ⟨τ_{d_1} ⋯ τ_{d_n}⟩_g.
    fn get(&mut self, g: u32, d: &[u32]) -> f64 {
        let n = d.len() as i64;
        if 2 * g as i64 - 2 + n <= 0 {
            return 0.0;
        }
        let sum: i64 = d.iter().map(|&x| x as i64).sum();
        if sum != 3 * g as i64 - 3 + n {
            return 0.0;
        }
        let mut key = d.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if let Some(&v) = self.memo.get(&(g, key.clone())) {
            return v;
        }
        let v = self.compute(g, &key);
        self.memo.insert((g, key), v);
        v
    }

    fn compute(&mut self, g: u32, d: &[u32]) -> f64 {
        // d sorted descending
        if g == 0 && d == [0, 0, 0] {
            return 1.0;
        }
        if g == 1 && d == [1] {
            return 1.0 / 24.0;
        }
        let top = d[0];
        let rest = &d[1..];
        if top == 0 {
            return 0.0;
        }
        let k = top as i64 - 1;
        let mut s = 0.0;
        for j in 0..rest.len() {
            let dj = rest[j] as i64;
            let mut other: Vec<u32> = rest.to_vec();
            other[j] = (dj + k) as u32;
            s += double_factorial(2 * k + 2 * dj + 1) / double_factorial(2 * dj - 1) * self.get(g, &other);
        }
        let mut quad = 0.0;
        for r in 0..k {
            let sidx = k - 1 - r;
            let w = double_factorial(2 * r + 1) * double_factorial(2 * sidx + 1);
            if g >= 1 {
                let mut v = vec![r as u32, sidx as u32];
                v.extend_from_slice(rest);
                quad += w * self.get(g - 1, &v);
            }
            let m = rest.len();
            for mask in 0..(1u32 << m) {
                let mut a = vec![r as u32];
                let mut b = vec![sidx as u32];
                for (i, &x) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        a.push(x)
                    } else {
                        b.push(x)
                    }
                }
                for g1 in 0..=g {
                    quad += w * self.get(g1, &a) * self.get(g - g1, &b);
                }
            }
        }
        (s + 0.5 * quad) / double_factorial(2 * k + 3)
    }
}

fn compositions(total: u32, parts: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if parts == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for b in 1..=total {
        cur.push(b);
        compositions(total - b, parts - 1, out, cur);
        cur.pop();
    }
}

/// Coefficient of Π L_i^{2α_i} in V_{g,n}(L).
fn volume_coefficient(ix: &mut Intersections, g: u32, alpha: &[u32]) -> f64 {
    let n = alpha.len() as u32;
    let dim = 3 * g + n - 3;
    let a: u32 = alpha.iter().sum();
    if a > dim {
        return 0.0;
    }
    let p = |b: u32| (if b % 2 == 1 { 1.0 } else { -1.0 }) * (2.0 * PI * PI).powi(b as i32) / factorial(b);
    let rem = dim - a;
    let mut total = 0.0;
    for m in 0..=rem as usize {
        // Σ (b_j + 1) = rem + m over m extra points, each b_j ≥ 1: Σ b_j = rem.
        let mut comps = Vec::new();
        compositions(rem, m, &mut comps, &mut Vec::new());
        for b in comps {
            let mut d: Vec<u32> = alpha.to_vec();
            d.extend(b.iter().map(|x| x + 1));
            let w: f64 = b.iter().map(|&x| p(x)).product();
            total += w * ix.get(g, &d) / factorial(m as u32);
        }
    }
    let norm: f64 = alpha.iter().map(|&x| 2f64.powi(x as i32) * factorial(x)).product();
    total / norm
}

#[test]
fn intersection_numbers_known_values() {
    let mut ix = Intersections::default();
    assert!((ix.get(1, &[1]) - 1.0 / 24.0).abs() < 1e-15);
    assert!((ix.get(2, &[4]) - 1.0 / 1152.0).abs() < 1e-15);
    assert!((ix.get(0, &[2, 2, 0, 0, 0, 0, 0]) - 6.0).abs() < 1e-12);
    assert!((ix.get(1, &[1, 1]) - 1.0 / 24.0).abs() < 1e-15);
    assert!((ix.get(2, &[2, 3]) - 29.0 / 5760.0).abs() < 1e-15);
}

#[test]
fn shipped_scalars_match_recursion() {
    let table = VolumeTable::shipped();
    let mut ix = Intersections::default();
    let mut checked = 0;
    for ((g, n), v) in table.entries() {
        let want = volume_coefficient(&mut ix, g, &vec![0; n as usize]);
        assert!((v - want).abs() < 1e-12 * want, "V_{{{g},{n}}}: table {v}, recursion {want}");
        checked += 1;
    }
    assert!(checked >= 8);
}

#[test]
fn shipped_polynomials_match_recursion() {
    let table = VolumeTable::shipped();
    let mut ix = Intersections::default();
    for ((g, n), _) in table.entries() {
        let Some(poly) = table.polynomial(g, n) else { continue };
        let dim = 3 * g + n - 3;
        // every monomial in the table must match, and none may be missing
        let mut seen = 0;
        for m in poly {
            assert!(m.exponents.iter().all(|e| e % 2 == 0));
            let alpha: Vec<u32> = m.exponents.iter().map(|e| e / 2).collect();
            let want = volume_coefficient(&mut ix, g, &alpha);
            assert!((m.coef - want).abs() < 1e-12 * want.abs().max(1e-300), "({g},{n}) {alpha:?}: {} vs {want}", m.coef);
            seen += 1;
        }
        let mut expected = 0;
        let mut idx = vec![0u32; n as usize];
        loop {
            if idx.iter().sum::<u32>() <= dim && volume_coefficient(&mut ix, g, &idx) != 0.0 {
                expected += 1;
            }
            let mut i = 0;
            while i < idx.len() {
                idx[i] += 1;
                if idx[i] <= dim {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
        assert_eq!(seen, expected, "({g},{n}) polynomial has missing monomials");
    }
}
