//! Fortet-Mourier distance
//! `d_w(mu, nu) = sup { ∫ f d(mu - nu) : ||f||_inf + Lip(f) <= 1 }`.
//!
//! Only the values of `f` on the merged support matter, so with `z_1 < ... < z_m`,
//! `w_i = mu{z_i} - nu{z_i}` and `h_i = z_{i+1} - z_i` the distance is the LP
//! `max sum w_i f_i` over `|f_i| <= s`, `|f_{i+1} - f_i| <= l h_i`, `s + l <= 1`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{simplex, DiscreteMeasure, MetricResult};
use crate::error::{Error, Result};

/// Merged supports up to this size go to the simplex solver.
pub const SIMPLEX_MAX_POINTS: usize = 40;

/// Optimal test function on the merged support with its bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub sup_bound: f64,
    pub lipschitz: f64,
}

impl Certificate {
    /// Largest violation of `|f_i| <= s`, `|f_{i+1} - f_i| <= l h_i`, `s + l <= 1`.
    pub fn violation(&self) -> f64 {
        let mut v = (self.sup_bound + self.lipschitz - 1.0).max(0.0);
        v = v.max(-self.sup_bound).max(-self.lipschitz);
        for f in &self.values {
            v = v.max(f.abs() - self.sup_bound);
        }
        for i in 0..self.values.len().saturating_sub(1) {
            let h = self.points[i + 1] - self.points[i];
            v = v.max((self.values[i + 1] - self.values[i]).abs() - self.lipschitz * h);
        }
        v
    }

    /// `∫ f d(m1 - m2)` with `f` the certificate values.
    pub fn objective(&self, m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> f64 {
        let (_, w) = merged(m1, m2);
        w.iter().zip(&self.values).map(|(a, b)| a * b).sum()
    }
}

fn merged(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let mut z = Vec::with_capacity(m1.len() + m2.len());
    let mut w = Vec::with_capacity(m1.len() + m2.len());
    let (mut i, mut j) = (0, 0);
    while i < m1.len() || j < m2.len() {
        let a = m1.atoms().get(i).copied().unwrap_or(f64::INFINITY);
        let b = m2.atoms().get(j).copied().unwrap_or(f64::INFINITY);
        if a < b {
            z.push(a);
            w.push(m1.weights()[i]);
            i += 1;
        } else if b < a {
            z.push(b);
            w.push(-m2.weights()[j]);
            j += 1;
        } else {
            z.push(a);
            w.push(m1.weights()[i] - m2.weights()[j]);
            i += 1;
            j += 1;
        }
    }
    (z, w)
}

fn finish(z: Vec<f64>, w: &[f64], f: Vec<f64>, s: f64, l: f64, method: &str) -> MetricResult {
    let value: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
    MetricResult {
        value: value.max(0.0),
        method: method.into(),
        cross_check: None,
        certificate: Some(Certificate { points: z, values: f, sup_bound: s, lipschitz: l }),
    }
}

/// Exact `d_w`, by simplex on small supports and the parametric route otherwise.
pub fn d_w(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<MetricResult> {
    let m = merged(m1, m2).0.len();
    if m <= SIMPLEX_MAX_POINTS {
        if let Ok(r) = d_w_simplex(m1, m2) {
            if r.certificate.as_ref().is_some_and(|c| c.violation() <= 1e-9) {
                return Ok(r);
            }
        }
    }
    d_w_parametric(m1, m2)
}

/// Simplex on the substituted LP in `g = f + s >= 0`, `s`, `l`.
pub fn d_w_simplex(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<MetricResult> {
    let (z, w) = merged(m1, m2);
    let m = z.len();
    if m == 1 {
        return Ok(finish(z, &w, vec![0.0], 0.0, 1.0, "simplex"));
    }
    let nv = m + 2;
    let (is, il) = (m, m + 1);
    let mut c = vec![0.0; nv];
    c[..m].copy_from_slice(&w);
    c[is] = -w.iter().sum::<f64>();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let mut r = vec![0.0; nv];
        r[i] = 1.0;
        r[is] = -2.0;
        a.push(r);
        b.push(0.0);
    }
    for i in 0..m - 1 {
        let h = z[i + 1] - z[i];
        for sign in [1.0, -1.0] {
            let mut r = vec![0.0; nv];
            r[i + 1] = sign;
            r[i] = -sign;
            r[il] = -h;
            a.push(r);
            b.push(0.0);
        }
    }
    let mut r = vec![0.0; nv];
    r[is] = 1.0;
    r[il] = 1.0;
    a.push(r);
    b.push(1.0);
    let sol = simplex::maximize(&c, &a, &b, 100_000)?;
    let s = sol.x[is];
    let l = sol.x[il];
    let f = sol.x[..m].iter().map(|g| (g - s).clamp(-s, s)).collect();
    Ok(finish(z, &w, f, s, l, "simplex"))
}

/// Concave piecewise linear function on `[-s, s]` stored as the slope `mid`
/// right after the last breakpoint of `left` and two deques of
/// `(position, slope drop)` with lazy shifts. Every breakpoint in `left`
/// is followed by a positive slope; the first one in `right` by a
/// nonpositive slope.
struct SlopeFn {
    left: VecDeque<(f64, f64)>,
    right: VecDeque<(f64, f64)>,
    off_l: f64,
    off_r: f64,
    mid: f64,
    s: f64,
}

impl SlopeFn {
    fn linear(w: f64, s: f64) -> Self {
        SlopeFn { left: VecDeque::new(), right: VecDeque::new(), off_l: 0.0, off_r: 0.0, mid: w, s }
    }

    fn rebalance(&mut self) {
        loop {
            if self.mid > 0.0 {
                match self.right.front() {
                    Some(&(p, d)) if self.mid - d > 0.0 => {
                        self.right.pop_front();
                        self.left.push_back((p + self.off_r - self.off_l, d));
                        self.mid -= d;
                    }
                    _ => break,
                }
            } else {
                match self.left.pop_back() {
                    Some((p, d)) => {
                        self.right.push_front((p + self.off_l - self.off_r, d));
                        self.mid += d;
                    }
                    None => break,
                }
            }
        }
    }

    fn argmax(&self) -> f64 {
        if self.mid <= 0.0 {
            -self.s
        } else if let Some(&(p, _)) = self.right.front() {
            p + self.off_r
        } else {
            self.s
        }
    }

    /// `G(x) -> max_{|y - x| <= c} G(y)`, then restriction to `[-s, s]`.
    fn window(&mut self, c: f64) {
        let s = self.s;
        if self.mid <= 0.0 {
            self.off_r += c;
            if self.mid < 0.0 {
                self.right.push_front((-s + c - self.off_r, -self.mid));
            }
        } else if let Some((p, d)) = self.right.pop_front() {
            let p = p + self.off_r;
            self.off_l -= c;
            self.off_r += c;
            self.left.push_back((p - c - self.off_l, self.mid));
            if d > self.mid {
                self.right.push_front((p + c - self.off_r, d - self.mid));
            }
        } else {
            self.off_l -= c;
            self.left.push_back((s - c - self.off_l, self.mid));
        }
        self.mid = 0.0;
        self.rebalance();
        // clip to [-s, s]
        loop {
            if let Some(&(p, _)) = self.left.front() {
                if p + self.off_l <= -s {
                    self.left.pop_front();
                    continue;
                }
            } else if let Some(&(p, d)) = self.right.front() {
                if p + self.off_r <= -s {
                    self.right.pop_front();
                    self.mid -= d;
                    continue;
                }
            }
            break;
        }
        loop {
            if let Some(&(p, _)) = self.right.back() {
                if p + self.off_r >= s {
                    self.right.pop_back();
                    continue;
                }
            } else if let Some(&(p, d)) = self.left.back() {
                if p + self.off_l >= s {
                    self.left.pop_back();
                    self.mid += d;
                    continue;
                }
            }
            break;
        }
        self.rebalance();
    }

    fn add_slope(&mut self, w: f64) {
        self.mid += w;
        self.rebalance();
    }
}

/// Exact maximiser of `sum w_i f_i` over `|f_i| <= s`, `|f_{i+1} - f_i| <= c_i`.
fn chain_lp(w: &[f64], gaps: &[f64], s: f64) -> Vec<f64> {
    let m = w.len();
    let mut g = SlopeFn::linear(w[0], s);
    let mut best = Vec::with_capacity(m);
    best.push(g.argmax());
    for i in 1..m {
        g.window(gaps[i - 1]);
        g.add_slope(w[i]);
        best.push(g.argmax());
    }
    let mut f = vec![0.0; m];
    f[m - 1] = best[m - 1].clamp(-s, s);
    for i in (0..m - 1).rev() {
        let c = gaps[i];
        f[i] = best[i].clamp(f[i + 1] - c, f[i + 1] + c).clamp(-s, s);
    }
    f
}

/// Golden-section search over `l` (with `s = 1 - l`) of the exact chain LP.
/// The LP value is concave and piecewise linear in `l`.
pub fn d_w_parametric(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<MetricResult> {
    let (z, w) = merged(m1, m2);
    let m = z.len();
    if m == 1 {
        return Ok(finish(z, &w, vec![0.0], 0.0, 1.0, "parametric"));
    }
    let h: Vec<f64> = z.windows(2).map(|p| p[1] - p[0]).collect();
    let mut gaps = vec![0.0; m - 1];
    let mut eval = |l: f64| -> (f64, Vec<f64>) {
        for (g, hi) in gaps.iter_mut().zip(&h) {
            *g = l * hi;
        }
        let f = chain_lp(&w, &gaps, 1.0 - l);
        (w.iter().zip(&f).map(|(a, b)| a * b).sum(), f)
    };
    let mut best = (f64::NEG_INFINITY, Vec::new(), 0.0);
    let consider = |l: f64, best: &mut (f64, Vec<f64>, f64), eval: &mut dyn FnMut(f64) -> (f64, Vec<f64>)| -> f64 {
        let (v, f) = eval(l);
        if v > best.0 {
            *best = (v, f, l);
        }
        v
    };
    consider(0.0, &mut best, &mut eval);
    consider(1.0, &mut best, &mut eval);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = consider(x1, &mut best, &mut eval);
    let mut f2 = consider(x2, &mut best, &mut eval);
    for _ in 0..90 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = consider(x2, &mut best, &mut eval);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = consider(x1, &mut best, &mut eval);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let (_, f, l) = best;
    if f.is_empty() {
        return Err(Error::Lp("parametric search produced no candidate".into()));
    }
    Ok(finish(z, &w, f, 1.0 - l, l, "parametric"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_point_masses() {
        let a = DiscreteMeasure::point_mass(0.0);
        let b = DiscreteMeasure::point_mass(1.0);
        for r in [d_w_simplex(&a, &b).unwrap(), d_w_parametric(&a, &b).unwrap()] {
            assert!((r.value - 2.0 / 3.0).abs() < 1e-10, "{}", r.value);
            assert!(r.certificate.unwrap().violation() < 1e-12);
        }
    }

    #[test]
    fn identical_measures() {
        let a = DiscreteMeasure::uniform(&[0.0, 1.0, 3.0]).unwrap();
        assert!(d_w(&a, &a).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn chain_lp_matches_hand_solution() {
        let f = chain_lp(&[1.0, -1.0], &[0.5], 1.0);
        assert!((f[0] - f[1] - 0.5).abs() < 1e-15);
        let f = chain_lp(&[1.0, 1.0, -3.0], &[10.0, 0.1], 1.0);
        let v = f[0] + f[1] - 3.0 * f[2];
        // optimum at f = (1, -0.9, -1)
        assert!((v - 3.1).abs() < 1e-12, "{f:?}");
    }

    #[test]
    fn chain_lp_matches_simplex_for_fixed_bounds() {
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..300 {
            let m = 2 + (trial % 7) * 9;
            let w: Vec<f64> = (0..m).map(|_| rnd() - 0.5).collect();
            let gaps: Vec<f64> = (0..m - 1).map(|_| rnd() * 0.6).collect();
            let s = 0.2 + rnd();
            let f = chain_lp(&w, &gaps, s);
            let v: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
            // same LP in g = f + s
            let mut a = Vec::new();
            let mut b = Vec::new();
            for i in 0..m {
                let mut r = vec![0.0; m];
                r[i] = 1.0;
                a.push(r);
                b.push(2.0 * s);
            }
            for i in 0..m - 1 {
                for sg in [1.0, -1.0] {
                    let mut r = vec![0.0; m];
                    r[i + 1] = sg;
                    r[i] = -sg;
                    a.push(r);
                    b.push(gaps[i]);
                }
            }
            let sol = simplex::maximize(&w, &a, &b, 100_000).unwrap();
            let lp = sol.objective - s * w.iter().sum::<f64>();
            assert!((lp - v).abs() < 1e-10, "trial {trial}: {v} vs {lp}");
        }
    }
}
