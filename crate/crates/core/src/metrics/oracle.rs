//! Brute-force reference for `d_w` on small supports, independent of the
//! production solvers.
//!
//! At a vertex of the LP every `f_i` is `±s` plus a signed sum of
//! consecutive `l h_j`, and `l` is 0, 1 or `2 / (2 + |H|)` for a signed sum
//! `H` of consecutive gaps. The oracle enumerates those `l`, and for each
//! one runs a dynamic program over the candidate values of `f_i`.

use super::DiscreteMeasure;
use crate::error::{param, Result};

/// Supports above this size make the enumeration too expensive.
pub const ORACLE_MAX_POINTS: usize = 8;

fn signed_sums(h: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    for &x in h {
        out = out.iter().flat_map(|&s| [s + x, s - x]).collect();
    }
    out
}

fn inner(w: &[f64], h: &[f64], l: f64) -> f64 {
    let m = w.len();
    let s = 1.0 - l;
    let tol = 1e-12;
    let mut cands: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (i, c) in cands.iter_mut().enumerate() {
        for p in 0..m {
            let (lo, hi) = if p <= i { (p, i) } else { (i, p) };
            for sum in signed_sums(&h[lo..hi]) {
                for sign in [1.0, -1.0] {
                    let v = sign * s + l * sum;
                    if v.abs() <= s + tol {
                        c.push(v);
                    }
                }
            }
        }
        c.sort_by(f64::total_cmp);
        c.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    }
    let mut best: Vec<f64> = cands[0].iter().map(|&v| w[0] * v).collect();
    for i in 1..m {
        let c = l * h[i - 1];
        best = cands[i]
            .iter()
            .map(|&v| {
                let prev = cands[i - 1]
                    .iter()
                    .zip(&best)
                    .filter(|(u, _)| (v - **u).abs() <= c + tol)
                    .map(|(_, b)| *b)
                    .fold(f64::NEG_INFINITY, f64::max);
                prev + w[i] * v
            })
            .collect();
    }
    best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Reference value of `d_w` for merged supports of at most
/// [`ORACLE_MAX_POINTS`] points.
pub fn d_w_oracle(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<f64> {
    let mut z: Vec<f64> = m1.atoms().iter().chain(m2.atoms()).copied().collect();
    z.sort_by(f64::total_cmp);
    z.dedup();
    let m = z.len();
    if m > ORACLE_MAX_POINTS {
        return Err(param(format!("oracle supports at most {ORACLE_MAX_POINTS} points, got {m}")));
    }
    let mass = |mu: &DiscreteMeasure, x: f64| -> f64 {
        mu.atoms().iter().zip(mu.weights()).filter(|(a, _)| **a == x).map(|(_, w)| *w).sum()
    };
    let w: Vec<f64> = z.iter().map(|&x| mass(m1, x) - mass(m2, x)).collect();
    let h: Vec<f64> = z.windows(2).map(|p| p[1] - p[0]).collect();
    let mut ls = vec![0.0, 1.0];
    for a in 0..h.len() {
        for b in a + 1..=h.len() {
            for sum in signed_sums(&h[a..b]) {
                ls.push(2.0 / (2.0 + sum.abs()));
            }
        }
    }
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    Ok(ls.iter().map(|&l| inner(&w, &h, l)).fold(0.0, f64::max))
}
