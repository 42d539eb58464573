//! Spectra in the Hausdorff metric: perturbation bound, the almost sure
//! spectrum of i.i.d. potentials and the two-atom example.

use dosom::metrics::{d_inf, d_krw, gap_distance, hausdorff, hausdorff_to_intervals, DiscreteMeasure};
use dosom::operators::Hamiltonian;
use dosom::potentials::rng::derive_seed;
use dosom::potentials::{evaluate_potential, PotentialSpec, SingleSiteMeasure};

use crate::common::{ball, config_error, iid_potential, lattice, par_cells, par_map, perturb, sup_dist, Outcome};
use crate::config::{ExperimentId, HausdorffConfig};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::Hausdorff;

fn merged(spectra: Vec<Vec<f64>>) -> Vec<f64> {
    let mut all: Vec<f64> = spectra.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    all
}

pub(crate) fn run(cfg: &HausdorffConfig, base: u64) -> Result<Outcome> {
    if cfg.perturb_eps.is_empty() || cfg.perturb_eps.iter().any(|&e| !(e > 0.0)) {
        return Err(config_error("perturb_eps must be a non-empty list of positive numbers"));
    }
    if cfg.example_n.iter().any(|&n| n < 2) || !(cfg.example_height > 0.0) {
        return Err(config_error("example_n entries must be >= 2 and example_height positive"));
    }
    let z1 = lattice(1)?;
    let mut seeds = Vec::new();

    let g = ball(z1, cfg.perturb_l)?;
    let trials: Vec<usize> = (0..cfg.perturb_trials).collect();
    let tseed = |t: usize| derive_seed(base, &[6, 0, t as u64]);
    seeds.extend(trials.iter().map(|&t| tseed(t)));
    let mut rows = par_cells(&trials, |&t| {
        let eps = cfg.perturb_eps[t % cfg.perturb_eps.len()];
        let v = iid_potential(&g, cfg.potential_bound, tseed(t))?;
        let w = perturb(&v, eps, derive_seed(tseed(t), &[1]));
        let hv = Hamiltonian::new(g.clone(), v.clone())?;
        let sv = hv.eigenvalues()?;
        let sw = hv.with_potential(w.clone())?.eigenvalues()?;
        let row = |q: &str| ResultRow::new(ID, "perturbation", q).param("trial", t).param("eps", eps);
        let mut out = vec![row("dist_h").measured(hausdorff(&sv, &sw)?).le(sup_dist(&v, &w), 1e-9)];
        if t == 0 {
            out.push(row("dist_h_same_potential").measured(hausdorff(&sv, &sv)?).le(0.0, 0.0));
        }
        Ok(out)
    })?;

    let gks = ball(z1, cfg.ks_l)?;
    let samples: Vec<usize> = (0..cfg.ks_samples).collect();
    let kseed = |s: usize| derive_seed(base, &[6, 1, s as u64]);
    seeds.extend(samples.iter().map(|&s| kseed(s)));
    let union = merged(par_map(&samples, |&s| {
        Ok(Hamiltonian::new(gks.clone(), iid_potential(&gks, cfg.ks_bound, kseed(s))?)?.eigenvalues()?)
    })?);
    let c = cfg.ks_bound;
    rows.push(
        ResultRow::new(ID, "kunz_souillard", "dist_h_union_vs_free_plus_support")
            .param("l", cfg.ks_l)
            .param("samples", cfg.ks_samples)
            .measured(hausdorff_to_intervals(&union, &[(-2.0 - c, 2.0 + c)])?)
            .report(),
    );

    let gex = ball(z1, cfg.example_l)?;
    let free = Hamiltonian::free(gex.clone()).eigenvalues()?;
    let height = cfg.example_height;
    for &n in &cfg.example_n {
        let p = 1.0 / n as f64;
        let measure = SingleSiteMeasure::atoms(vec![0.0, height], vec![1.0 - p, p])?;
        let eseed = |s: usize| derive_seed(base, &[6, 2, n as u64, s as u64]);
        let runs: Vec<usize> = (0..cfg.example_seeds).collect();
        seeds.extend(runs.iter().map(|&s| eseed(s)));
        let spectra = par_map(&runs, |&s| {
            let spec = PotentialSpec::RandomIid { measure: measure.clone(), seed: eseed(s) };
            Ok(Hamiltonian::new(gex.clone(), evaluate_potential(&spec, &gex)?)?.eigenvalues()?)
        })?;
        let union = merged(spectra);
        let upper: Vec<f64> = union.iter().copied().filter(|&x| x > height / 2.0).collect();
        let row = |q: &str| {
            ResultRow::new(ID, "two_atom_example", q)
                .param("n", n)
                .param("l", cfg.example_l)
                .param("seeds", cfg.example_seeds)
        };
        rows.push(row("dist_h").measured(hausdorff(&union, &free)?).near(cfg.example_target, cfg.example_tolerance));
        if !upper.is_empty() {
            rows.push(row("gap_distance_upper_band").measured(gap_distance(&upper, &free)?).against(height - 4.0));
        }
        let limit = [(-2.0, 2.0), (height - 2.0, height + 2.0)];
        rows.push(row("dist_h_union_vs_limit_set").measured(hausdorff_to_intervals(&union, &limit)?).report());
        let mu = DiscreteMeasure::new(vec![0.0, height], vec![1.0 - p, p])?;
        let delta = DiscreteMeasure::point_mass(0.0);
        rows.push(row("d_krw_single_site").measured(d_krw(&mu, &delta).value).near(height * p, 1e-12 * height));
        rows.push(row("d_inf_single_site").measured(d_inf(&mu, &delta).value).near(height, 0.0));
        rows.push(row("dist_h_single_site_support").measured(hausdorff(&[0.0, height], &[0.0])?).report());
    }
    Ok(Outcome { rows, seeds })
}
