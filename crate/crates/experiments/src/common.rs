use std::sync::Arc;
use std::time::Instant;

use dosom::graph::{build_ball, GraphFamily, RootedBallGraph};
use dosom::metrics::DiscreteMeasure;
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::{CounterRng, STREAM_PERTURBATION};
use dosom::potentials::{evaluate_potential, PotentialSpec};
use rayon::prelude::*;

use crate::output::ResultRow;
use crate::{ExperimentError, Result};

pub(crate) struct Outcome {
    pub rows: Vec<ResultRow>,
    pub seeds: Vec<u64>,
}

pub(crate) fn config_error(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

pub(crate) fn lattice(d: u32) -> Result<GraphFamily> {
    let f = GraphFamily::LatticeZd { d };
    f.validate()?;
    Ok(f)
}

pub(crate) fn ball(family: GraphFamily, radius: u32) -> Result<Arc<RootedBallGraph>> {
    Ok(Arc::new(build_ball(family, radius)?))
}

/// i.i.d. uniform on `[-c, c]`.
pub(crate) fn iid_potential(g: &RootedBallGraph, c: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(evaluate_potential(&PotentialSpec::uniform_iid(c, seed)?, g)?)
}

/// `v + eps u / max|u|` with `u` i.i.d. uniform on `[-1, 1]`, so that the sup
/// distance to `v` is `eps`.
pub(crate) fn perturb(v: &[f64], eps: f64, seed: u64) -> Vec<f64> {
    let rng = CounterRng::new(seed, STREAM_PERTURBATION);
    let u: Vec<f64> = (0..v.len() as u64).map(|i| rng.uniform_in(i, -1.0, 1.0)).collect();
    let m = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter().zip(&u).map(|(a, b)| a + eps * b / m).collect()
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Normalised eigenvalue counting measure of the finite matrix.
pub(crate) fn spectral_measure(h: &Hamiltonian) -> Result<(Vec<f64>, DiscreteMeasure)> {
    let ev = h.eigenvalues()?;
    let m = DiscreteMeasure::uniform(&ev)?;
    Ok((ev, m))
}

pub(crate) fn energy_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluates the cells in parallel and concatenates their rows in cell order.
/// Each row carries the wall-clock time of its cell.
pub(crate) fn par_cells<C: Sync>(cells: &[C], f: impl Fn(&C) -> Result<Vec<ResultRow>> + Sync) -> Result<Vec<ResultRow>> {
    let parts: Vec<Result<Vec<ResultRow>>> = cells
        .par_iter()
        .map(|c| {
            let t = Instant::now();
            let mut rows = f(c)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            for r in &mut rows {
                r.runtime_ms = ms;
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Like [`par_cells`] for cells returning arbitrary values.
pub(crate) fn par_map<C: Sync, T: Send>(cells: &[C], f: impl Fn(&C) -> Result<T> + Sync) -> Result<Vec<T>> {
    cells.par_iter().map(|c| f(c)).collect()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
