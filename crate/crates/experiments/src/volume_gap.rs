//! Finite-volume against ambient local functionals of the resolvent at `i`:
//! the boundary gap decays like `1/L` on `Z^1` and does not decay on the Bethe
//! lattice, where a fixed fraction of `Λ_L` lies on the boundary.

use dosom::approx::{chebyshev_coeffs, LipschitzTestFunction};
use dosom::dos::{averaged_moments, default_interval, local_dos_eig, Backend, EigMode};
use dosom::graph::GraphFamily;
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::derive_seed;

use crate::common::{ball, config_error, iid_potential, lattice, par_map, slope, Outcome};
use crate::config::{VolumeGapConfig, ExperimentId};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::VolumeGap;

/// Piecewise linear interpolants of the real and imaginary parts of
/// `t -> (t - i)^{-1}` on `[-r, r]`.
fn resolvent_surrogate(r: f64) -> Result<[LipschitzTestFunction; 2]> {
    Ok([
        LipschitzTestFunction::from_fn(|t| t / (t * t + 1.0), -r, r, 800)?,
        LipschitzTestFunction::from_fn(|t| 1.0 / (t * t + 1.0), -r, r, 800)?,
    ])
}

pub(crate) fn run(cfg: &VolumeGapConfig, base: u64) -> Result<Outcome> {
    if cfg.lattice_l.len() < 2 || cfg.lattice_l.contains(&0) {
        return Err(config_error("lattice_l needs at least two positive radii"));
    }
    if cfg.n_seeds == 0 {
        return Err(config_error("n_seeds must be positive"));
    }
    let seed = |s: usize| derive_seed(base, &[7, s as u64]);
    let mut rows = Vec::new();

    let z1 = lattice(1)?;
    let c = cfg.potential_bound;
    let f = resolvent_surrogate(default_interval(z1, c).1)?;
    let cells: Vec<(u32, usize)> =
        cfg.lattice_l.iter().flat_map(|&l| (0..cfg.n_seeds).map(move |s| (l, s))).collect();
    let gaps = par_map(&cells, |&(l, s)| {
        let g = ball(z1, Backend::Eig { mode: EigMode::Ambient }.required_radius(l))?;
        let h = Hamiltonian::new(g.clone(), iid_potential(&g, c, seed(s))?)?;
        let fv = local_dos_eig(&h, l, EigMode::FiniteVolume)?;
        let amb = local_dos_eig(&h, l, EigMode::Ambient)?;
        let d: Vec<f64> = f.iter().map(|f| fv.integrate(f) - amb.integrate(f)).collect();
        let one = |_: f64| 1.0;
        Ok((d[0].hypot(d[1]), (fv.integrate(&one) - amb.integrate(&one)).abs()))
    })?;
    let mut g_values = Vec::new();
    for (i, &l) in cfg.lattice_l.iter().enumerate() {
        let part = &gaps[i * cfg.n_seeds..(i + 1) * cfg.n_seeds];
        let gap = part.iter().map(|p| p.0).sum::<f64>() / cfg.n_seeds as f64;
        let constant = part.iter().map(|p| p.1).fold(0.0, f64::max);
        let row = |q: &str| ResultRow::new(ID, "Z1", q).param("l", l).param("seeds", cfg.n_seeds);
        rows.push(row("gap").measured(gap).report());
        rows.push(row("gap_constant_function").measured(constant).le(0.0, 1e-12));
        g_values.push(gap);
    }
    let logl: Vec<f64> = cfg.lattice_l.iter().map(|&l| (l as f64).ln()).collect();
    let logg: Vec<f64> = g_values.iter().map(|g| g.ln()).collect();
    rows.push(ResultRow::new(ID, "Z1", "gap_loglog_slope").measured(slope(&logl, &logg)).le(cfg.slope_max, 0.0));
    for i in 1..g_values.len() {
        rows.push(
            ResultRow::new(ID, "Z1", "gap_ratio")
                .param("l", cfg.lattice_l[i])
                .param("previous", cfg.lattice_l[i - 1])
                .measured(g_values[i] / g_values[i - 1])
                .against(cfg.lattice_l[i - 1] as f64 / cfg.lattice_l[i] as f64),
        );
    }

    if !cfg.bethe_l.is_empty() {
        let family = GraphFamily::Bethe { k: cfg.bethe_k };
        family.validate()?;
        let interval = default_interval(family, c);
        let p = resolvent_surrogate(interval.1)?
            .iter()
            .map(|f| chebyshev_coeffs(f, cfg.bethe_n_max, interval))
            .collect::<dosom::Result<Vec<_>>>()?;
        let name = format!("bethe{}-n{}", cfg.bethe_k, cfg.bethe_n_max);
        let cells: Vec<(u32, usize)> =
            cfg.bethe_l.iter().flat_map(|&l| (0..cfg.n_seeds).map(move |s| (l, s))).collect();
        let parts = par_map(&cells, |&(l, s)| {
            let g = ball(family, Backend::MomentExact { n_max: cfg.bethe_n_max }.required_radius(l))?;
            let h = Hamiltonian::new(g.clone(), iid_potential(&g, c, seed(s))?)?;
            let amb = averaged_moments(&h, l, cfg.bethe_n_max, interval)?;
            let fv = averaged_moments(&h.restrict(l)?, l, cfg.bethe_n_max, interval)?;
            Ok((p[0].pair(&fv)? - p[0].pair(&amb)?).hypot(p[1].pair(&fv)? - p[1].pair(&amb)?))
        })?;
        let gaps: Vec<f64> = parts.chunks(cfg.n_seeds).map(|c| c.iter().sum::<f64>() / cfg.n_seeds as f64).collect();
        for (&l, &gap) in cfg.bethe_l.iter().zip(&gaps) {
            rows.push(ResultRow::new(ID, &name, "gap").param("l", l).measured(gap).report());
        }
        let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(ResultRow::new(ID, &name, "gap_max_over_min").measured(max / min).report());
        if gaps.len() >= 2 {
            let logl: Vec<f64> = cfg.bethe_l.iter().map(|&l| (l as f64).ln()).collect();
            let logg: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
            rows.push(ResultRow::new(ID, &name, "gap_loglog_slope").measured(slope(&logl, &logg)).report());
        }
    }
    Ok(Outcome { rows, seeds: (0..cfg.n_seeds).map(seed).collect() })
}
