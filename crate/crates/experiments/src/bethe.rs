//! Log-Hölder continuity on the Bethe lattice through exact moments.

use dosom::approx::{chebyshev_coeffs, ChebyshevSeries, TheoremConstant};
use dosom::dos::{averaged_moments, default_interval, Backend};
use dosom::graph::GraphFamily;
use dosom::metrics::lower_bound_family;
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::{cell_rng, derive_seed, unit};

use crate::common::{ball, config_error, iid_potential, par_map, perturb, sup_dist, Outcome};
use crate::config::{BetheConfig, ExperimentId};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::Bethe;
const RANK_ONE_MAX: f64 = 0.5;

fn pair_all(series: &[ChebyshevSeries], a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    series.iter().map(|p| Ok((p.pair(a)? - p.pair(b)?).abs())).collect()
}

pub(crate) fn run(cfg: &BetheConfig, base: u64) -> Result<Outcome> {
    if cfg.eps.is_empty() || cfg.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(config_error("eps must be a non-empty list in (0, 1)"));
    }
    if !(cfg.c >= 0.0) || cfg.family_centers == 0 {
        return Err(config_error("need c >= 0 and family_centers >= 1"));
    }
    let family = GraphFamily::Bethe { k: cfg.k };
    family.validate()?;
    let gamma = TheoremConstant::GammaBethe { k: cfg.k, c: cfg.c }.value()?;
    let eps_max = cfg.eps.iter().copied().fold(0.0, f64::max);
    let interval = default_interval(family, cfg.c + eps_max.max(RANK_ONE_MAX));
    let hull = cfg.k as f64 + cfg.c;
    let tests = lower_bound_family((-hull, hull), cfg.family_centers)?;
    let series: Vec<ChebyshevSeries> =
        tests.iter().map(|f| chebyshev_coeffs(f, cfg.n_max, interval)).collect::<dosom::Result<_>>()?;
    let g = ball(family, Backend::MomentExact { n_max: cfg.n_max }.required_radius(cfg.l))?;
    let volume = g.ball_size(cfg.l)?;
    let name = format!("bethe{}-L{}-n{}", cfg.k, cfg.l, cfg.n_max);
    let seed = |s: usize| derive_seed(base, &[2, cfg.k as u64, s as u64]);
    let runs: Vec<usize> = (0..cfg.n_seeds).collect();
    let per_seed = par_map(&runs, |&s| {
        let t = std::time::Instant::now();
        let v = iid_potential(&g, cfg.c, seed(s))?;
        let hv = Hamiltonian::new(g.clone(), v.clone())?;
        let mv = averaged_moments(&hv, cfg.l, cfg.n_max, interval)?;
        let mut out = Vec::new();
        for &e in &cfg.eps {
            let w = perturb(&v, e, derive_seed(seed(s), &[e.to_bits()]));
            let dist = sup_dist(&v, &w);
            let mw = averaged_moments(&hv.with_potential(w)?, cfg.l, cfg.n_max, interval)?;
            let diffs = pair_all(&series, &mv, &mw)?;
            let lower = diffs.iter().copied().fold(0.0, f64::max);
            let upper = diffs.iter().zip(&series).map(|(d, p)| d + 2.0 * p.reconstruction_error).fold(0.0, f64::max);
            let bound = gamma / (1.0 / dist).ln().sqrt();
            let row = |q: &str| ResultRow::new(ID, &name, q).param("eps", e).param("seed", s);
            out.push(row("d_w_family_estimate").measured(lower).report());
            out.push(row("d_w_family_upper").param("gamma", gamma).measured(upper).le(bound, 0.0));
            out.push(row("d_w_upper_over_bound").measured(upper / bound).report());
        }
        let mut rng = cell_rng(derive_seed(seed(s), &[u64::MAX]));
        for trial in 0..cfg.rank_one_trials {
            let z = ((unit(&mut rng) * volume as f64) as usize).min(volume - 1);
            let y = ((unit(&mut rng) * volume as f64) as usize).min(volume - 1);
            let delta = RANK_ONE_MAX * (2.0 * unit(&mut rng) - 1.0);
            let j = ((unit(&mut rng) * series.len() as f64) as usize).min(series.len() - 1);
            let p = &series[j];
            let lip = p.lipschitz_bound();
            let single = averaged_moments(&hv.add_site(z, delta)?, cfg.l, cfg.n_max, interval)?;
            let d1 = (p.pair(&mv)? - p.pair(&single)?).abs();
            let row = |q: &str| ResultRow::new(ID, &name, q).param("seed", s).param("trial", trial).param("delta", delta);
            out.push(row("rank_one_diff").param("site", z).measured(d1).le(lip * delta.abs() / volume as f64, 1e-9));
            if y != z {
                let signed = averaged_moments(&hv.add_site(z, delta)?.add_site(y, -delta)?, cfg.l, cfg.n_max, interval)?;
                let d2 = (p.pair(&mv)? - p.pair(&signed)?).abs();
                let unit_bound = 2.0 * delta.abs() * lip / volume as f64;
                out.push(row("signed_pair_diff").measured(d2).le(3.0 * unit_bound, 1e-9));
                out.push(row("signed_pair_over_unit_factor").measured(d2 / unit_bound).report());
            }
        }
        let ms = t.elapsed().as_secs_f64() * 1e3;
        for r in &mut out {
            r.runtime_ms = ms;
        }
        Ok(out)
    })?;
    let rows = per_seed.into_iter().flatten().collect();
    Ok(Outcome { rows, seeds: runs.iter().map(|&s| seed(s)).collect() })
}
