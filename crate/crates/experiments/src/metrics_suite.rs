//! Fuzz suite for the distances between discrete measures.

use dosom::metrics::oracle::d_w_oracle;
use dosom::metrics::{
    d_inf, d_krw, d_w, d_w_lower, d_w_parametric, d_w_simplex, meet_join, sandwich_check, DiscreteMeasure,
};
use dosom::potentials::rng::{cell_rng, derive_seed, unit};

use crate::common::{config_error, par_cells, Outcome};
use crate::config::{ExperimentId, MetricsConfig};
use crate::output::ResultRow;
use crate::Result;

const ID: ExperimentId = ExperimentId::Metrics;
const LOWER_FAMILY: usize = 64;

/// Between `lo` and `hi` atoms uniform on `[-c, c]` with random weights.
fn random_measure(seed: u64, lo: usize, hi: usize, c: f64) -> DiscreteMeasure {
    let mut rng = cell_rng(seed);
    let n = (lo + (unit(&mut rng) * (hi - lo + 1) as f64) as usize).min(hi);
    let atoms: Vec<f64> = (0..n).map(|_| -c + 2.0 * c * unit(&mut rng)).collect();
    let weights: Vec<f64> = (0..n).map(|_| 0.05 + unit(&mut rng)).collect();
    DiscreteMeasure::from_unnormalized(atoms, weights).expect("positive weights")
}

pub(crate) fn run(cfg: &MetricsConfig, base: u64) -> Result<Outcome> {
    if cfg.max_atoms == 0 || !(cfg.c > 0.0) {
        return Err(config_error("metrics suite needs max_atoms >= 1 and c > 0"));
    }
    let mut rows = point_mass_rows()?;
    let seed = |kind: u64, i: usize, j: u64| derive_seed(base, &[5, kind, i as u64, j]);
    let pairs: Vec<usize> = (0..cfg.pairs).collect();
    rows.extend(par_cells(&pairs, |&i| {
        let a = random_measure(seed(0, i, 0), 1, cfg.max_atoms, cfg.c);
        let b = random_measure(seed(0, i, 1), 1, cfg.max_atoms, cfg.c);
        pair_rows(&a, &b, i, cfg.c)
    })?);
    let oracle: Vec<usize> = (0..cfg.oracle_pairs).collect();
    rows.extend(par_cells(&oracle, |&i| {
        let a = random_measure(seed(1, i, 0), 3, 3, cfg.c);
        let b = random_measure(seed(1, i, 1), 3, 3, cfg.c);
        let exact = d_w_oracle(&a, &b)?;
        let s = d_w_simplex(&a, &b)?.value;
        let p = d_w_parametric(&a, &b)?.value;
        let row = |q: &str| ResultRow::new(ID, "oracle", q).param("pair", i);
        Ok(vec![
            row("lp_vs_oracle").measured((d_w(&a, &b)?.value - exact).abs()).le(0.0, 1e-4),
            row("simplex_vs_parametric").measured((s - p).abs()).le(0.0, 1e-9),
        ])
    })?);
    let triples: Vec<usize> = (0..cfg.triples).collect();
    rows.extend(par_cells(&triples, |&i| {
        let m: Vec<DiscreteMeasure> = (0..3).map(|j| random_measure(seed(2, i, j), 1, cfg.max_atoms, cfg.c)).collect();
        let row = |q: &str| ResultRow::new(ID, "triple", q).param("triple", i);
        let w = |x: usize, y: usize| d_w(&m[x], &m[y]).map(|r| r.value);
        let k = |x: usize, y: usize| d_krw(&m[x], &m[y]).value;
        let inf = |x: usize, y: usize| d_inf(&m[x], &m[y]).value;
        Ok(vec![
            row("triangle_d_w").measured(w(0, 2)? - w(0, 1)? - w(1, 2)?).le(0.0, 1e-9),
            row("triangle_d_krw").measured(k(0, 2) - k(0, 1) - k(1, 2)).le(0.0, 1e-12),
            row("triangle_d_inf").measured(inf(0, 2) - inf(0, 1) - inf(1, 2)).le(0.0, 1e-12),
        ])
    })?);
    Ok(Outcome { rows, seeds: vec![base] })
}

fn point_mass_rows() -> Result<Vec<ResultRow>> {
    let a = DiscreteMeasure::point_mass(0.0);
    let b = DiscreteMeasure::point_mass(1.0);
    let row = |q: &str| ResultRow::new(ID, "point_masses", q);
    let s = sandwich_check(&a, &b, 1.0)?;
    Ok(vec![
        row("d_w").measured(d_w(&a, &b)?.value).near(2.0 / 3.0, 1e-9),
        row("d_w_same").measured(d_w(&a, &a)?.value).le(0.0, 1e-12),
        row("d_krw").measured(d_krw(&a, &b).value).near(1.0, 0.0),
        row("d_inf").measured(d_inf(&a, &b).value).near(1.0, 0.0),
        row("d_w_lower").param("family", LOWER_FAMILY).measured(d_w_lower(&a, &b, LOWER_FAMILY)).ge(0.6, 0.0),
        row("sandwich_upper").measured(s.d_krw).le(s.upper, 1e-8),
    ])
}

fn pair_rows(a: &DiscreteMeasure, b: &DiscreteMeasure, i: usize, c: f64) -> Result<Vec<ResultRow>> {
    let row = |q: &str| ResultRow::new(ID, "pair", q).param("pair", i);
    let w = d_w(a, b)?;
    let w_rev = d_w(b, a)?.value;
    let k = d_krw(a, b);
    let inf = d_inf(a, b).value;
    let s = sandwich_check(a, b, c)?;
    let (meet, join) = meet_join(a, b)?;
    let mut cdf_gap = 0.0f64;
    for &t in a.atoms().iter().chain(b.atoms()) {
        let lhs = (a.cdf(t) - b.cdf(t)).abs();
        cdf_gap = cdf_gap.max((lhs - (meet.cdf(t) - join.cdf(t))).abs());
    }
    let violation = w.certificate.as_ref().map(|c| c.violation()).unwrap_or(f64::INFINITY);
    Ok(vec![
        row("sandwich_lower").measured(s.d_w).le(s.d_krw, 1e-8),
        row("sandwich_upper").measured(s.d_krw).le(s.upper, 1e-8),
        row("krw_formula_gap").measured((k.value - k.cross_check.unwrap_or(f64::NAN)).abs()).le(0.0, 1e-12),
        row("meet_join_krw_gap").measured((d_krw(&meet, &join).value - k.value).abs()).le(0.0, 1e-10),
        row("meet_join_cdf_gap").measured(cdf_gap).le(0.0, 1e-12),
        row("chain_krw_le_inf").measured(k.value).le(inf, 1e-12),
        row("d_w_symmetry").measured((w.value - w_rev).abs()).le(0.0, 1e-9),
        row("certificate_violation").measured(violation).le(0.0, 1e-9),
        row("lower_family_le_d_w").measured(d_w_lower(a, b, LOWER_FAMILY)).le(w.value, 1e-10),
    ])
}
