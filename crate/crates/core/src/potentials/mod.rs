//! Bounded potentials on graph balls.

pub mod bethe;
pub mod rng;
pub mod single_site;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{GraphFamily, RootedBallGraph};
use bethe::BetheAddress;
use rng::{CounterRng, STREAM_BETHE, STREAM_IID};
pub use single_site::SingleSiteMeasure;

const BOUND_TOL: f64 = 1e-12;

/// Profile `g : [0, 1) -> R` sampled by quasi-periodic and ergodic potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingFunction {
    /// `amplitude * cos(2 pi t)`
    Cosine { amplitude: f64 },
    /// Periodic linear interpolation of values at `t = j / n`.
    Table { values: Vec<f64> },
}

impl SamplingFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.rem_euclid(1.0);
        match self {
            SamplingFunction::Cosine { amplitude } => amplitude * (2.0 * std::f64::consts::PI * t).cos(),
            SamplingFunction::Table { values } => {
                let n = values.len();
                let s = t * n as f64;
                let j = (s.floor() as usize).min(n - 1);
                let frac = s - j as f64;
                values[j] * (1.0 - frac) + values[(j + 1) % n] * frac
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            SamplingFunction::Cosine { amplitude } => amplitude.abs(),
            SamplingFunction::Table { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SamplingFunction::Cosine { amplitude } if !amplitude.is_finite() => {
                Err(param("non-finite amplitude"))
            }
            SamplingFunction::Table { values } if values.is_empty() || values.iter().any(|v| !v.is_finite()) => {
                Err(param("sampling table must be non-empty and finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    /// One value per vertex of the ball, in vertex order.
    Explicit { values: Vec<f64>, bound: f64 },
    /// `V(n) = (1/d) sum_i g(n_i alpha_i + theta_i mod 1)` on lattice coordinates.
    QuasiPeriodic { frequencies: Vec<f64>, phases: Vec<f64>, sampling: SamplingFunction, bound: f64 },
    /// `V(x) = (1-w) g(omega_x) + w mean_{y~x} g(omega_y)` with i.i.d. uniform `omega`.
    BetheErgodic { seed: u64, sampling: SamplingFunction, neighbor_weight: f64, bound: f64 },
    RandomIid { measure: SingleSiteMeasure, seed: u64 },
    Scaled { inner: Box<PotentialSpec>, lambda: f64 },
}

impl PotentialSpec {
    /// A priori bound `C` with `|V| <= C`.
    pub fn bound(&self) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant { value } => value.abs(),
            PotentialSpec::Explicit { bound, .. }
            | PotentialSpec::QuasiPeriodic { bound, .. }
            | PotentialSpec::BetheErgodic { bound, .. } => *bound,
            PotentialSpec::RandomIid { measure, .. } => measure.support_bound(),
            PotentialSpec::Scaled { inner, lambda } => lambda.abs() * inner.bound(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            PotentialSpec::RandomIid { .. } | PotentialSpec::BetheErgodic { .. } => false,
            PotentialSpec::Scaled { inner, .. } => inner.is_deterministic(),
            _ => true,
        }
    }

    pub fn uniform_iid(c: f64, seed: u64) -> Result<Self> {
        Ok(PotentialSpec::RandomIid { measure: SingleSiteMeasure::uniform(-c, c)?, seed })
    }
}

/// Values of the potential on the vertices of `g`, in vertex order.
pub fn evaluate_potential(spec: &PotentialSpec, g: &RootedBallGraph) -> Result<Vec<f64>> {
    let n = g.len();
    let values = match spec {
        PotentialSpec::Zero => vec![0.0; n],
        PotentialSpec::Constant { value } => vec![*value; n],
        PotentialSpec::Explicit { values, .. } => {
            if values.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: values.len() });
            }
            values.clone()
        }
        PotentialSpec::QuasiPeriodic { frequencies, phases, sampling, .. } => {
            let dim = g.coords(0).map(|c| c.len()).ok_or_else(|| {
                Error::Unsupported("quasi-periodic potentials need lattice coordinates".into())
            })?;
            if frequencies.len() != dim || phases.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, got: frequencies.len().min(phases.len()) });
            }
            sampling.validate()?;
            (0..n)
                .map(|v| {
                    let x = g.coords(v).unwrap();
                    x.iter()
                        .zip(frequencies.iter().zip(phases))
                        .map(|(&xi, (a, t))| sampling.eval(xi as f64 * a + t))
                        .sum::<f64>()
                        / dim as f64
                })
                .collect()
        }
        PotentialSpec::BetheErgodic { seed, sampling, neighbor_weight, .. } => {
            let k = match g.family() {
                GraphFamily::Bethe { k } => k,
                other => return Err(Error::Unsupported(format!("Bethe ergodic potential on {other}"))),
            };
            if !(0.0..=1.0).contains(neighbor_weight) {
                return Err(param("neighbour weight must lie in [0, 1]"));
            }
            sampling.validate()?;
            let omega = CounterRng::new(*seed, STREAM_BETHE);
            let field = |a: &BetheAddress| -> Result<f64> { Ok(sampling.eval(omega.uniform(a.rank(k)?))) };
            let mut out = Vec::with_capacity(n);
            for v in 0..n {
                let x = g.address(v).unwrap();
                let nbrs = x.neighbors(k);
                let mut mean = 0.0;
                for y in &nbrs {
                    mean += field(y)?;
                }
                mean /= nbrs.len() as f64;
                out.push((1.0 - neighbor_weight) * field(&x)? + neighbor_weight * mean);
            }
            out
        }
        PotentialSpec::RandomIid { measure, seed } => {
            let r = CounterRng::new(*seed, STREAM_IID);
            (0..n).map(|v| measure.quantile(r.uniform(v as u64))).collect()
        }
        PotentialSpec::Scaled { inner, lambda } => {
            evaluate_potential(inner, g)?.into_iter().map(|x| lambda * x).collect()
        }
    };
    let c = spec.bound();
    if let Some(bad) = values.iter().find(|x| !x.is_finite() || x.abs() > c * (1.0 + BOUND_TOL) + BOUND_TOL) {
        return Err(Error::Domain(format!("potential value {bad} outside [-{c}, {c}]")));
    }
    Ok(values)
}

/// `V` on `Λ_r(0)` and `W` elsewhere.
pub fn modify_potential(v: &[f64], w: &[f64], g: &RootedBallGraph, r: u32) -> Result<Vec<f64>> {
    if v.len() != g.len() {
        return Err(Error::LengthMismatch { expected: g.len(), got: v.len() });
    }
    if w.len() != g.len() {
        return Err(Error::LengthMismatch { expected: g.len(), got: w.len() });
    }
    Ok((0..g.len()).map(|i| if g.dist_to_root(i) <= r { v[i] } else { w[i] }).collect())
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// CSV with columns `vertex,dist,label,value`.
pub fn write_potential_csv<W: Write>(g: &RootedBallGraph, values: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", "dist", "label", "value"])?;
    for (v, x) in values.iter().enumerate() {
        let label = match (g.coords(v), g.address(v)) {
            (Some(c), _) => c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            (None, Some(a)) => a.digits().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            _ => String::new(),
        };
        out.write_record([v.to_string(), g.dist_to_root(v).to_string(), label, x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
