//! Lipschitz continuity in the potential on `Z^d` at finite volume.

use dosom::approx::{chebyshev_coeffs, LipschitzTestFunction};
use dosom::dos::{averaged_moments, default_interval, Backend};
use dosom::graph::ball_cardinality;
use dosom::metrics::d_w;
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::derive_seed;

use crate::common::{ball, config_error, iid_potential, lattice, par_cells, perturb, spectral_measure, sup_dist, Outcome};
use crate::config::{ExperimentId, LatticeCase, LatticeLipConfig, MomentCase};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::LatticeLip;

fn validate(cfg: &LatticeLipConfig) -> Result<()> {
    if cfg.eps.iter().any(|&e| !(e > 0.0)) || cfg.eps.is_empty() {
        return Err(config_error("eps must be a non-empty list of positive numbers"));
    }
    if cfg.cases.iter().map(|c| c.d).chain(cfg.moment_cases.iter().map(|c| c.d)).any(|d| !(1..=2).contains(&d)) {
        return Err(config_error("lattice cases need d in {1, 2}"));
    }
    if !(cfg.potential_bound >= 0.0) {
        return Err(config_error("potential_bound must be non-negative"));
    }
    Ok(())
}

fn v_seed(base: u64, d: u32, l: u32, s: usize) -> u64 {
    derive_seed(base, &[1, d as u64, l as u64, s as u64])
}

pub(crate) fn run(cfg: &LatticeLipConfig, base: u64) -> Result<Outcome> {
    validate(cfg)?;
    let cells: Vec<(LatticeCase, usize)> =
        cfg.cases.iter().flat_map(|&c| (0..cfg.n_seeds).map(move |s| (c, s))).collect();
    let mut rows = par_cells(&cells, |&(case, s)| measure_cell(cfg, case, s, base))?;
    let mcells: Vec<(MomentCase, usize, usize)> = cfg
        .moment_cases
        .iter()
        .flat_map(|&c| (0..cfg.eps.len()).flat_map(move |e| (0..cfg.moment_seeds).map(move |s| (c, e, s))))
        .collect();
    rows.extend(par_cells(&mcells, |&(case, e, s)| moment_cell(cfg, case, cfg.eps[e], s, base))?);
    let mut seeds: Vec<u64> = cells.iter().map(|&(c, s)| v_seed(base, c.d, c.l, s)).collect();
    seeds.extend(mcells.iter().map(|&(c, _, s)| v_seed(base, c.d, c.l, s)));
    seeds.sort_unstable();
    seeds.dedup();
    Ok(Outcome { rows, seeds })
}

fn measure_cell(cfg: &LatticeLipConfig, case: LatticeCase, s: usize, base: u64) -> Result<Vec<ResultRow>> {
    let g = ball(lattice(case.d)?, case.l)?;
    let seed = v_seed(base, case.d, case.l, s);
    let v = iid_potential(&g, cfg.potential_bound, seed)?;
    let hv = Hamiltonian::new(g.clone(), v.clone())?;
    let (ev, mv) = spectral_measure(&hv)?;
    let name = format!("Z{}-L{}", case.d, case.l);
    let mut rows = Vec::new();
    if s == 0 {
        let same = d_w(&mv, &mv)?.value;
        rows.push(ResultRow::new(ID, &name, "d_w_same_potential").param("seed", s).measured(same).le(0.0, 1e-12));
    }
    for &eps in &cfg.eps {
        let w = perturb(&v, eps, derive_seed(seed, &[eps.to_bits()]));
        let dist = sup_dist(&v, &w);
        let (_, mw) = spectral_measure(&hv.with_potential(w)?)?;
        let r = d_w(&mv, &mw)?;
        rows.push(
            ResultRow::new(ID, &name, "d_w")
                .param("eps", eps)
                .param("seed", s)
                .param("method", &r.method)
                .measured(r.value)
                .le(dist, 1e-9),
        );
        if cfg.shift_control && s == 0 {
            let shifted: Vec<f64> = v.iter().map(|x| x + eps).collect();
            let (es, ms) = spectral_measure(&hv.with_potential(shifted)?)?;
            let err = ev.iter().zip(&es).fold(0.0f64, |m, (a, b)| m.max((b - a - eps).abs()));
            let shift = d_w(&mv, &ms)?.value;
            let base_row = |q: &str| ResultRow::new(ID, &name, q).param("eps", eps).param("seed", s);
            rows.push(base_row("shift_translation_error").measured(err).le(0.0, 1e-9));
            rows.push(base_row("shift_d_w").measured(shift).le(eps, 1e-9));
            rows.push(base_row("shift_d_w_over_eps").measured(shift / eps).report());
        }
    }
    Ok(rows)
}

fn moment_cell(cfg: &LatticeLipConfig, case: MomentCase, eps: f64, s: usize, base: u64) -> Result<Vec<ResultRow>> {
    let family = lattice(case.d)?;
    let g = ball(family, Backend::MomentExact { n_max: case.n_max }.required_radius(case.l))?;
    let seed = v_seed(base, case.d, case.l, s);
    let v = iid_potential(&g, cfg.potential_bound, seed)?;
    let w = perturb(&v, eps, derive_seed(seed, &[eps.to_bits(), 1]));
    let dist = sup_dist(&v, &w);
    let interval = default_interval(family, cfg.potential_bound + eps);
    let f = LipschitzTestFunction::hat(0.0, 1.0, 0.5)?;
    let p = chebyshev_coeffs(&f, case.n_max, interval)?;
    let hv = Hamiltonian::new(g.clone(), v)?;
    let hw = hv.with_potential(w)?;
    let a = p.pair(&averaged_moments(&hv, case.l, case.n_max, interval)?)?;
    let b = p.pair(&averaged_moments(&hw, case.l, case.n_max, interval)?)?;
    let m = case.l + (case.n_max / 2) as u32;
    let ratio = ball_cardinality(family, m)? as f64 / ball_cardinality(family, case.l)? as f64;
    let bound = p.lipschitz_bound() * ratio * dist;
    let name = format!("Z{}-L{}-n{}", case.d, case.l, case.n_max);
    Ok(vec![ResultRow::new(ID, name, "moment_functional_diff")
        .param("eps", eps)
        .param("seed", s)
        .param("lip_p", p.lipschitz_bound())
        .param("volume_ratio", ratio)
        .measured((a - b).abs())
        .le(bound, 1e-9)])
}
