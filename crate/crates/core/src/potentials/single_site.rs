//! Single-site distributions for i.i.d. potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compactly supported probability measure on the real line, given either by
/// atoms or by a piecewise linear CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub enum SingleSiteMeasure {
    Atoms { positions: Vec<f64>, weights: Vec<f64> },
    /// Nodes `(x, F(x))` with nondecreasing `x` and `F`, ending at `F = 1`.
    /// Repeated `x` encodes a jump; `F(x_0) > 0` is an atom at `x_0`.
    PiecewiseLinearCdf { nodes: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawMeasure {
    Atoms(Vec<(f64, f64)>),
    Cdf(Vec<(f64, f64)>),
}

impl TryFrom<RawMeasure> for SingleSiteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        match raw {
            RawMeasure::Atoms(pw) => {
                let (p, w) = pw.into_iter().unzip();
                SingleSiteMeasure::atoms(p, w)
            }
            RawMeasure::Cdf(nodes) => SingleSiteMeasure::piecewise_linear(nodes),
        }
    }
}

impl From<SingleSiteMeasure> for RawMeasure {
    fn from(m: SingleSiteMeasure) -> Self {
        match m {
            SingleSiteMeasure::Atoms { positions, weights } => {
                RawMeasure::Atoms(positions.into_iter().zip(weights).collect())
            }
            SingleSiteMeasure::PiecewiseLinearCdf { nodes } => RawMeasure::Cdf(nodes),
        }
    }
}

const MASS_TOL: f64 = 1e-12;

impl SingleSiteMeasure {
    /// Atoms are sorted by position; weights must be positive and sum to 1.
    pub fn atoms(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || positions.len() != weights.len() {
            return Err(Error::InvalidMeasure("need equally many positions and weights".into()));
        }
        if positions.iter().chain(&weights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite entry".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidMeasure("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total} != 1")));
        }
        let mut pairs: Vec<(f64, f64)> = positions.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (positions, weights) = pairs.into_iter().unzip();
        Ok(SingleSiteMeasure::Atoms { positions, weights })
    }

    pub fn point_mass(c: f64) -> Self {
        SingleSiteMeasure::Atoms { positions: vec![c], weights: vec![1.0] }
    }

    /// Uniform distribution on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidMeasure(format!("empty interval [{a}, {b}]")));
        }
        Self::piecewise_linear(vec![(a, 0.0), (b, 1.0)])
    }

    pub fn piecewise_linear(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidMeasure("empty CDF".into()));
        }
        if nodes.iter().any(|(x, f)| !x.is_finite() || !f.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite CDF node".into()));
        }
        for w in nodes.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidMeasure("CDF nodes must be nondecreasing".into()));
            }
        }
        if nodes[0].1 < 0.0 || (nodes[nodes.len() - 1].1 - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure("CDF must run from >= 0 to 1".into()));
        }
        Ok(SingleSiteMeasure::PiecewiseLinearCdf { nodes })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            SingleSiteMeasure::Atoms { positions, weights } => positions
                .iter()
                .zip(weights)
                .take_while(|(x, _)| **x <= t)
                .map(|(_, w)| w)
                .sum::<f64>()
                .min(1.0),
            SingleSiteMeasure::PiecewiseLinearCdf { nodes } => {
                let i = nodes.partition_point(|(x, _)| *x <= t);
                if i == 0 {
                    return 0.0;
                }
                if i == nodes.len() {
                    return 1.0;
                }
                let (x0, f0) = nodes[i - 1];
                let (x1, f1) = nodes[i];
                f0 + (f1 - f0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// Generalised inverse `inf { x : F(x) >= u }`, `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            SingleSiteMeasure::Atoms { positions, weights } => {
                let mut cum = 0.0;
                for (x, w) in positions.iter().zip(weights) {
                    cum += w;
                    if cum >= u {
                        return *x;
                    }
                }
                positions[positions.len() - 1]
            }
            SingleSiteMeasure::PiecewiseLinearCdf { nodes } => {
                if u <= nodes[0].1 {
                    return nodes[0].0;
                }
                for w in nodes.windows(2) {
                    let (x0, f0) = w[0];
                    let (x1, f1) = w[1];
                    if f1 >= u {
                        if x1 == x0 || f1 == f0 {
                            return x1;
                        }
                        return x0 + (u - f0) / (f1 - f0) * (x1 - x0);
                    }
                }
                nodes[nodes.len() - 1].0
            }
        }
    }

    /// Smallest `C` with `supp ⊂ [-C, C]`.
    pub fn support_bound(&self) -> f64 {
        let (lo, hi) = self.support_hull();
        lo.abs().max(hi.abs())
    }

    pub fn support_hull(&self) -> (f64, f64) {
        let iv = self.support_intervals();
        (iv[0].0, iv[iv.len() - 1].1)
    }

    /// Closed intervals (possibly degenerate) whose union is the support.
    pub fn support_intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        match self {
            SingleSiteMeasure::Atoms { positions, .. } => {
                out.extend(positions.iter().map(|&x| (x, x)));
            }
            SingleSiteMeasure::PiecewiseLinearCdf { nodes } => {
                if nodes[0].1 > 0.0 {
                    out.push((nodes[0].0, nodes[0].0));
                }
                for w in nodes.windows(2) {
                    if w[1].1 > w[0].1 {
                        out.push((w[0].0, w[1].0));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for iv in out {
            match merged.last_mut() {
                Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                _ => merged.push(iv),
            }
        }
        merged
    }
}
