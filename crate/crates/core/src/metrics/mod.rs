//! Discrete probability measures on the line and distances between them.

mod fortet_mourier;
pub mod oracle;
pub mod simplex;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::approx::{LipschitzTestFunction, SpectralFunction};
use crate::error::{param, Error, Result};
pub use fortet_mourier::{d_w, d_w_parametric, d_w_simplex, Certificate, SIMPLEX_MAX_POINTS};

const MASS_TOL: f64 = 1e-9;

/// Finitely supported probability measure; atoms strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Sorts, merges repeated atoms and drops zero weights. The total mass must
    /// be 1 up to `1e-9`; it is then renormalised.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total} != 1")));
        }
        Self::from_unnormalized(atoms, weights)
    }

    /// Like [`DiscreteMeasure::new`] for any positive total mass.
    pub fn from_unnormalized(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure("need equally many atoms and weights".into()));
        }
        if atoms.iter().chain(&weights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite entry".into()));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidMeasure("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("zero total mass".into()));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).filter(|p| p.1 > 0.0).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if atoms.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                atoms.push(x);
                weights.push(w);
            }
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn point_mass(c: f64) -> Self {
        DiscreteMeasure { atoms: vec![c], weights: vec![1.0] }
    }

    /// Equal weights on the given points (repeats add up).
    pub fn uniform(points: &[f64]) -> Result<Self> {
        Self::from_unnormalized(points.to_vec(), vec![1.0; points.len()])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support_hull(&self) -> (f64, f64) {
        (self.atoms[0], self.atoms[self.atoms.len() - 1])
    }

    /// Cumulative weights, the last forced to 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut c: Vec<f64> = self.weights.iter().map(|w| {
            acc += w;
            acc
        }).collect();
        *c.last_mut().unwrap() = 1.0;
        c
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let i = self.atoms.partition_point(|&x| x <= t);
        if i == 0 {
            0.0
        } else if i == self.atoms.len() {
            1.0
        } else {
            self.weights[..i].iter().sum()
        }
    }

    /// `inf { x : F(x) >= u }` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile level {u} outside [0, 1]")));
        }
        let c = self.cumulative();
        let i = c.partition_point(|&x| x < u).min(self.atoms.len() - 1);
        Ok(self.atoms[i])
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(x, w)| x * w).sum()
    }

    pub fn integrate(&self, f: &dyn SpectralFunction) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(&x, w)| w * f.eval(x)).sum()
    }

    /// Same measure with atoms moved by `c`.
    pub fn translate(&self, c: f64) -> Self {
        DiscreteMeasure { atoms: self.atoms.iter().map(|x| x + c).collect(), weights: self.weights.clone() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["atom", "weight"])?;
        for (x, p) in self.atoms.iter().zip(&self.weights) {
            out.write_record([x.to_string(), p.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub method: String,
    /// Value of the same quantity by an independent formula, when available.
    pub cross_check: Option<f64>,
    pub certificate: Option<Certificate>,
}

/// Walks the merged quantile breakpoints, calling `f(length, q1, q2)` on each
/// interval of `(0, 1]` where both quantile functions are constant.
fn quantile_walk(m1: &DiscreteMeasure, m2: &DiscreteMeasure, mut f: impl FnMut(f64, f64, f64)) {
    let c1 = m1.cumulative();
    let c2 = m2.cumulative();
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    while i < c1.len() && j < c2.len() {
        let next = c1[i].min(c2[j]);
        f(next - u, m1.atoms[i], m2.atoms[j]);
        u = next;
        if c1[i] <= next {
            i += 1;
        }
        if c2[j] <= next {
            j += 1;
        }
    }
}

/// Kantorovich-Rubinstein-Wasserstein distance `∫_0^1 |q1 - q2| du`, with the
/// CDF formula `∫ |F1 - F2| dx` as cross check.
pub fn d_krw(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> MetricResult {
    let mut q = 0.0;
    quantile_walk(m1, m2, |len, a, b| q += len * (a - b).abs());
    let mut z: Vec<f64> = m1.atoms.iter().chain(&m2.atoms).copied().collect();
    z.sort_by(f64::total_cmp);
    z.dedup();
    let mut f = 0.0;
    let (mut f1, mut f2) = (0.0, 0.0);
    let (mut i, mut j) = (0usize, 0usize);
    for k in 0..z.len().saturating_sub(1) {
        while i < m1.len() && m1.atoms[i] <= z[k] {
            f1 += m1.weights[i];
            i += 1;
        }
        while j < m2.len() && m2.atoms[j] <= z[k] {
            f2 += m2.weights[j];
            j += 1;
        }
        f += (z[k + 1] - z[k]) * (f1 - f2).abs();
    }
    MetricResult { value: q, method: "quantile-merge".into(), cross_check: Some(f), certificate: None }
}

/// `sup_u |q1(u) - q2(u)|`, ignoring quantile intervals shorter than `1e-12`.
pub fn d_inf(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> MetricResult {
    let mut m: f64 = 0.0;
    quantile_walk(m1, m2, |len, a, b| {
        if len > 1e-12 {
            m = m.max((a - b).abs());
        }
    });
    MetricResult { value: m, method: "quantile-merge".into(), cross_check: None, certificate: None }
}

fn sorted(a: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(param("Hausdorff distance of an empty set"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite point".into()));
    }
    let mut v = a.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn nearest(sorted: &[f64], x: f64) -> f64 {
    let i = sorted.partition_point(|&y| y < x);
    let mut d = f64::INFINITY;
    if i < sorted.len() {
        d = d.min(sorted[i] - x);
    }
    if i > 0 {
        d = d.min(x - sorted[i - 1]);
    }
    d
}

/// Hausdorff distance between finite point sets.
pub fn hausdorff(a: &[f64], b: &[f64]) -> Result<f64> {
    let sa = sorted(a)?;
    let sb = sorted(b)?;
    let ab = sa.iter().map(|&x| nearest(&sb, x)).fold(0.0, f64::max);
    let ba = sb.iter().map(|&x| nearest(&sa, x)).fold(0.0, f64::max);
    Ok(ab.max(ba))
}

/// `inf { |x - y| : x in a, y in b }`.
pub fn gap_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let sb = sorted(b)?;
    Ok(sorted(a)?.iter().map(|&x| nearest(&sb, x)).fold(f64::INFINITY, f64::min))
}

/// Hausdorff distance between a finite point set and a finite union of closed
/// intervals.
pub fn hausdorff_to_intervals(points: &[f64], intervals: &[(f64, f64)]) -> Result<f64> {
    if intervals.is_empty() {
        return Err(param("empty interval union"));
    }
    let pts = sorted(points)?;
    let to_union = |x: f64| -> f64 {
        intervals
            .iter()
            .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    };
    let one = pts.iter().map(|&x| to_union(x)).fold(0.0, f64::max);
    // farthest point of an interval from the set: endpoints or midpoints between neighbours
    let mut other: f64 = 0.0;
    for &(a, b) in intervals {
        let mut cands = vec![a, b];
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if mid > a && mid < b {
                cands.push(mid);
            }
        }
        for c in cands {
            other = other.max(nearest(&pts, c));
        }
    }
    Ok(one.max(other))
}

/// Lattice operations for the stochastic order: `meet` has CDF `max(F1, F2)`
/// (quantile `min(q1, q2)`), `join` has CDF `min(F1, F2)`.
pub fn meet_join(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let mut lo_a = Vec::new();
    let mut lo_w = Vec::new();
    let mut hi_a = Vec::new();
    let mut hi_w = Vec::new();
    quantile_walk(m1, m2, |len, a, b| {
        if len > 0.0 {
            lo_a.push(a.min(b));
            lo_w.push(len);
            hi_a.push(a.max(b));
            hi_w.push(len);
        }
    });
    Ok((DiscreteMeasure::new(lo_a, lo_w)?, DiscreteMeasure::new(hi_a, hi_w)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub d_w: f64,
    pub d_krw: f64,
    pub c: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `d_w <= d_KRW <= (1 + C) d_w` for measures supported in `[-C, C]`.
pub fn sandwich_check(m1: &DiscreteMeasure, m2: &DiscreteMeasure, c: f64) -> Result<SandwichReport> {
    for m in [m1, m2] {
        let (a, b) = m.support_hull();
        if a < -c - 1e-12 || b > c + 1e-12 {
            return Err(Error::Domain(format!("support [{a}, {b}] not inside [-{c}, {c}]")));
        }
    }
    let w = d_w(m1, m2)?.value;
    let k = d_krw(m1, m2).value;
    let tol = 1e-9 * (1.0 + k);
    let upper = (1.0 + c) * w;
    Ok(SandwichReport { d_w: w, d_krw: k, c, upper, holds: w <= k + tol && k <= upper + tol })
}

/// Test functions with `||f||_inf + Lip(f) = 1`: tents of several widths and
/// ramps, centred at the midpoints of `centers` equal cells of `[a, b]`. Pairing measures against them bounds
/// `d_w` from below.
pub fn lower_bound_family(interval: (f64, f64), centers: usize) -> Result<Vec<LipschitzTestFunction>> {
    let (a, b) = interval;
    if !(a < b) || centers == 0 {
        return Err(param("bad test function family"));
    }
    let widths = [0.25, 0.5, 1.0, 2.0, 4.0, 1e3];
    let mut out = Vec::new();
    for i in 0..centers {
        let c = a + (b - a) * (i as f64 + 0.5) / centers as f64;
        for &w in &widths {
            let h = w / (1.0 + w);
            out.push(LipschitzTestFunction::hat(c, w, h)?);
            let r = 2.0 * w / (w + 2.0);
            out.push(LipschitzTestFunction::new(vec![c - w / 2.0, c + w / 2.0], vec![-r / 2.0, r / 2.0])?);
        }
    }
    Ok(out)
}

/// Cheap lower bound for [`d_w`]: the best pairing over about `family_size`
/// tents and ramps (and their negatives) centred on an odd grid spanning the
/// joint support hull, endpoints included.
pub fn d_w_lower(m1: &DiscreteMeasure, m2: &DiscreteMeasure, family_size: usize) -> f64 {
    let (a1, b1) = m1.support_hull();
    let (a2, b2) = m2.support_hull();
    let (a, b) = (a1.min(a2), b1.max(b2));
    let mut n = (family_size / 12).max(1);
    if n.is_multiple_of(2) {
        n += 1;
    }
    let (a, b) = if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    // the grid [a - step/2, b + step/2] with n cells has centres a, a + step, ..., b
    let fam = if n > 1 {
        lower_bound_family((a - step / 2.0, b + step / 2.0), n)
    } else {
        lower_bound_family((a, b), 1)
    };
    fam.map(|fs| {
        fs.iter()
            .map(|f| (m1.integrate(f) - m2.integrate(f)).abs())
            .fold(0.0, f64::max)
    })
    .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        let a = DiscreteMeasure::point_mass(0.0);
        let b = DiscreteMeasure::point_mass(1.0);
        assert_eq!(d_krw(&a, &b).value, 1.0);
        assert_eq!(d_inf(&a, &b).value, 1.0);
        let (meet, join) = meet_join(&a, &b).unwrap();
        assert_eq!(meet, a);
        assert_eq!(join, b);
    }

    #[test]
    fn quantile_conventions() {
        let m = DiscreteMeasure::new(vec![0.0, 100.0], vec![0.75, 0.25]).unwrap();
        assert_eq!(m.quantile(0.75).unwrap(), 0.0);
        assert_eq!(m.quantile(0.76).unwrap(), 100.0);
        assert_eq!(m.quantile(0.0).unwrap(), 0.0);
        assert!(m.quantile(1.5).is_err());
        assert_eq!(d_krw(&m, &DiscreteMeasure::point_mass(0.0)).value, 25.0);
    }

    #[test]
    fn hausdorff_basics() {
        assert_eq!(hausdorff(&[0.0, 1.0], &[0.0]).unwrap(), 1.0);
        assert!(hausdorff(&[], &[0.0]).is_err());
        assert_eq!(gap_distance(&[5.0, 9.0], &[0.0, 1.0]).unwrap(), 4.0);
        let h = hausdorff_to_intervals(&[-2.0, 2.0], &[(-2.0, 2.0)]).unwrap();
        assert_eq!(h, 2.0);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(DiscreteMeasure::new(vec![0.0], vec![0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
    }
}
