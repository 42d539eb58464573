//! Diagonal moments `<delta_y, T_n(H~) delta_y>` and `<delta_y, H^j delta_y>`,
//! computed on the patch of radius `ceil(n/2) + 1` around each site.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Hamiltonian;
use crate::error::{param, Error, Result};
use crate::graph::Patch;
use crate::potentials::modify_potential;

pub const POWER_MOMENT_CAP: usize = 30;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub sites: Vec<usize>,
    pub n_max: usize,
    pub interval: (f64, f64),
    /// `moments[i * (n_max + 1) + n]` for site `sites[i]`.
    pub moments: Vec<f64>,
}

impl MomentTable {
    pub fn site(&self, i: usize) -> &[f64] {
        let w = self.n_max + 1;
        &self.moments[i * w..(i + 1) * w]
    }

    /// Site average of each moment.
    pub fn average(&self) -> Vec<f64> {
        let w = self.n_max + 1;
        let mut avg = vec![0.0; w];
        for i in 0..self.sites.len() {
            for (a, m) in avg.iter_mut().zip(self.site(i)) {
                *a += m;
            }
        }
        let s = self.sites.len().max(1) as f64;
        avg.iter_mut().for_each(|a| *a /= s);
        avg
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["site", "n", "moment"])?;
        for (i, &y) in self.sites.iter().enumerate() {
            for (n, m) in self.site(i).iter().enumerate() {
                out.write_record([y.to_string(), n.to_string(), m.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

struct LocalOp {
    patch: Patch,
    potential: Vec<f64>,
    scale: f64,
    shift: f64,
}

impl LocalOp {
    fn new(h: &Hamiltonian, site: usize, radius: u32, scale: f64, shift: f64) -> Self {
        let patch = h.graph().local_patch(site, radius);
        let potential = patch.vertices.iter().map(|&v| h.potential()[v]).collect();
        LocalOp { patch, potential, scale, shift }
    }

    fn len(&self) -> usize {
        self.patch.vertices.len()
    }

    /// `y = scale * (A + V) x + shift * x`
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.patch;
        for (v, yv) in y.iter_mut().enumerate() {
            let s: f64 = p.adjacency[p.offsets[v]..p.offsets[v + 1]].iter().map(|&u| x[u as usize]).sum();
            *yv = self.scale * (s + self.potential[v] * x[v]) + self.shift * x[v];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn site_chebyshev(h: &Hamiltonian, site: usize, n_max: usize, (a, b): (f64, f64)) -> Vec<f64> {
    let half = n_max.div_ceil(2);
    let scale = 2.0 / (b - a);
    let shift = -(a + b) / (b - a);
    let op = LocalOp::new(h, site, half as u32 + 1, scale, shift);
    let m = op.len();
    let mut mu = vec![0.0; n_max + 1];
    mu[0] = 1.0;
    if n_max == 0 {
        return mu;
    }
    let mut prev = vec![0.0; m];
    prev[0] = 1.0;
    let mut cur = vec![0.0; m];
    op.apply(&prev, &mut cur);
    mu[1] = cur[0];
    // w_j for j = 1..=half, using mu_{2j} = 2<w_j,w_j> - mu_0, mu_{2j+1} = 2<w_{j+1},w_j> - mu_1
    let mut next = vec![0.0; m];
    for j in 1..=half {
        if 2 * j <= n_max {
            mu[2 * j] = 2.0 * dot(&cur, &cur) - mu[0];
        }
        if 2 * j + 1 <= n_max {
            op.apply(&cur, &mut next);
            for (nx, pv) in next.iter_mut().zip(&prev) {
                *nx = 2.0 * *nx - pv;
            }
            mu[2 * j + 1] = 2.0 * dot(&next, &cur) - mu[1];
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    mu
}

/// Chebyshev moments of `H~ = (2H - (a+b)) / (b-a)` at each site, orders `0..=n_max`.
pub fn chebyshev_moments(h: &Hamiltonian, sites: &[usize], n_max: usize, interval: (f64, f64)) -> Result<MomentTable> {
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(param(format!("bad interval [{a}, {b}]")));
    }
    let (lo, hi) = h.gershgorin();
    if a > lo || b < hi {
        return Err(Error::IntervalTooNarrow { a, b, lo, hi });
    }
    for &y in sites {
        h.graph().check_vertex(y)?;
    }
    let per_site: Vec<Vec<f64>> = sites.par_iter().map(|&y| site_chebyshev(h, y, n_max, interval)).collect();
    Ok(MomentTable { sites: sites.to_vec(), n_max, interval, moments: per_site.concat() })
}

fn site_power(h: &Hamiltonian, site: usize, j_max: usize) -> Vec<f64> {
    let half = j_max.div_ceil(2);
    let op = LocalOp::new(h, site, half as u32 + 1, 1.0, 0.0);
    let m = op.len();
    let mut out = vec![0.0; j_max + 1];
    out[0] = 1.0;
    let mut cur = vec![0.0; m];
    cur[0] = 1.0;
    let mut next = vec![0.0; m];
    // m_{2j} = <H^j d, H^j d>, m_{2j+1} = <H^{j+1} d, H^j d>
    for j in 0..=half {
        if 2 * j <= j_max {
            out[2 * j] = dot(&cur, &cur);
        }
        if 2 * j + 1 <= j_max {
            op.apply(&cur, &mut next);
            out[2 * j + 1] = dot(&next, &cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    out
}

/// `<delta_y, H^j delta_y>` for `j = 0..=j_max` at each site.
pub fn power_moments(h: &Hamiltonian, sites: &[usize], j_max: usize) -> Result<Vec<Vec<f64>>> {
    if j_max > POWER_MOMENT_CAP {
        return Err(param(format!("power moments are capped at order {POWER_MOMENT_CAP}")));
    }
    for &y in sites {
        h.graph().check_vertex(y)?;
    }
    Ok(sites.par_iter().map(|&y| site_power(h, y, j_max)).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteRangeReport {
    pub l: u32,
    pub j: usize,
    pub modified_radius: u32,
    pub original: f64,
    pub modified: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares `sum_{y in Λ_L} <delta_y, H^j delta_y>` for `H = A + V` and for the
/// potential that equals `V` on `Λ_{L + floor(j/2)}` and `W` outside.
pub fn finite_range_check(h: &Hamiltonian, w: &[f64], l: u32, j: usize) -> Result<FiniteRangeReport> {
    let g = h.graph();
    let sites: Vec<usize> = (0..g.ball_size(l)?).collect();
    let r = l + (j / 2) as u32;
    let modified = h.with_potential(modify_potential(h.potential(), w, g, r)?)?;
    let a: Vec<f64> = power_moments(h, &sites, j)?.iter().map(|m| m[j]).collect();
    let b: Vec<f64> = power_moments(&modified, &sites, j)?.iter().map(|m| m[j]).collect();
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let scale: f64 = a.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let tolerance = 1e-10 * scale;
    Ok(FiniteRangeReport {
        l,
        j,
        modified_radius: r,
        original: sa,
        modified: sb,
        tolerance,
        pass: (sa - sb).abs() <= tolerance,
    })
}
