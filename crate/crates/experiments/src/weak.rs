//! Continuity in the coupling constant: `lambda V` against the free operator.

use dosom::dos::{default_interval, iods_bracket_from_measure, IodsBracket};
use dosom::metrics::{d_w, DiscreteMeasure};
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::derive_seed;
use dosom::potentials::sup_norm;

use crate::common::{ball, config_error, energy_grid, iid_potential, lattice, par_map, slope, spectral_measure, Outcome};
use crate::config::{ExperimentId, LatticeCase, WeakConfig};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::Weak;

/// Hölder exponent of the free integrated density of states.
fn free_ids_exponent(d: u32) -> f64 {
    if d == 1 {
        0.5
    } else {
        1.0
    }
}

fn brackets(m: &DiscreteMeasure, energies: &[f64], eps: f64, zeta: f64, domain: (f64, f64)) -> Result<Vec<IodsBracket>> {
    energies.iter().map(|&e| Ok(iods_bracket_from_measure(m, e, eps, zeta, domain)?)).collect()
}

fn sup_bracket_diff(a: &[IodsBracket], b: &[IodsBracket]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x.lower - y.lower).abs()).max((x.upper - y.upper).abs()))
}

pub(crate) fn run(cfg: &WeakConfig, base: u64) -> Result<Outcome> {
    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(config_error("lambdas must be a non-empty list of positive numbers"));
    }
    if lambdas[0] * cfg.potential_bound > 1.0 || !(cfg.potential_bound > 0.0) {
        return Err(config_error("need 0 < lambda * potential_bound <= 1"));
    }
    if cfg.cases.iter().any(|c| !(1..=2).contains(&c.d)) {
        return Err(config_error("weak coupling cases need d in {1, 2}"));
    }
    let seed = |c: &LatticeCase, s: usize| derive_seed(base, &[4, c.d as u64, c.l as u64, s as u64]);
    let mut rows = Vec::new();
    let mut seeds = Vec::new();
    for case in &cfg.cases {
        let family = lattice(case.d)?;
        let g = ball(family, case.l)?;
        let delta = free_ids_exponent(case.d);
        let zeta = 1.0 / (1.0 + delta);
        let domain = default_interval(family, cfg.potential_bound);
        let energies = energy_grid(domain.0 + 0.1, domain.1 - 0.1, cfg.energies);
        let (_, free) = spectral_measure(&Hamiltonian::free(g.clone()))?;
        let name = format!("Z{}-L{}", case.d, case.l);
        let runs: Vec<usize> = (0..cfg.n_seeds).collect();
        seeds.extend(runs.iter().map(|&s| seed(case, s)));
        let per_seed = par_map(&runs, |&s| {
            let t = std::time::Instant::now();
            let v = iid_potential(&g, cfg.potential_bound, seed(case, s))?;
            let vmax = sup_norm(&v);
            let mut out = Vec::new();
            let mut ms = Vec::new();
            for &lambda in &lambdas {
                let scaled: Vec<f64> = v.iter().map(|x| lambda * x).collect();
                let (_, m) = spectral_measure(&Hamiltonian::new(g.clone(), scaled)?)?;
                let eps = lambda * vmax;
                let row = |q: &str| ResultRow::new(ID, &name, q).param("lambda", lambda).param("seed", s);
                out.push(row("d_w_vs_free").measured(d_w(&m, &free)?.value).le(eps, 1e-9));
                let diff = sup_bracket_diff(
                    &brackets(&m, &energies, eps, zeta, domain)?,
                    &brackets(&free, &energies, eps, zeta, domain)?,
                );
                out.push(row("iods_sup_diff").param("zeta", zeta).measured(diff).report());
                ms.push(diff);
            }
            let ms_elapsed = t.elapsed().as_secs_f64() * 1e3;
            for r in &mut out {
                r.runtime_ms = ms_elapsed;
            }
            Ok((out, ms))
        })?;
        let mut avg = vec![0.0; lambdas.len()];
        for (out, ms) in per_seed {
            rows.extend(out);
            for (a, m) in avg.iter_mut().zip(ms) {
                *a += m / cfg.n_seeds as f64;
            }
        }
        for (i, &lambda) in lambdas.iter().enumerate() {
            rows.push(
                ResultRow::new(ID, &name, "iods_sup_diff_mean")
                    .param("lambda", lambda)
                    .param("predicted_exponent", delta / (1.0 + delta))
                    .measured(avg[i])
                    .report(),
            );
        }
        for i in 1..lambdas.len() {
            let ratio = lambdas[i] / lambdas[i - 1];
            let target = ratio.powf(delta / (1.0 + delta)) * cfg.decay_slack;
            rows.push(
                ResultRow::new(ID, &name, "iods_decay_factor")
                    .param("lambda", lambdas[i])
                    .param("previous", lambdas[i - 1])
                    .measured(avg[i] / avg[i - 1])
                    .le(target, 0.0),
            );
        }
        let logs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
        let logm: Vec<f64> = avg.iter().map(|m| m.ln()).collect();
        if lambdas.len() >= 2 {
            rows.push(ResultRow::new(ID, &name, "iods_fitted_exponent").measured(slope(&logs, &logm)).report());
        }
    }
    Ok(Outcome { rows, seeds })
}
