//! Local density of states functionals `(1/|Λ_L|) Tr(P_L f(H) P_L)` and the
//! outer measure estimates built from them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::approx::{chebyshev_coeffs, iods_cutoffs, ChebyshevSeries, SpectralFunction};
use crate::error::{Error, Result};
use crate::graph::{build_ball, GraphFamily};
use crate::metrics::DiscreteMeasure;
use crate::operators::{assemble_hamiltonian, chebyshev_moments, EigenOptions, Hamiltonian, VectorRows};
use crate::potentials::rng::derive_seed;
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigMode {
    /// Spectrum of the restriction `P_L H P_L`.
    FiniteVolume,
    /// Eigenpairs of the ambient operator weighted by `||P_L psi||^2 / |Λ_L|`.
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    /// Chebyshev approximant of degree `n_max`, exact by locality.
    MomentExact { n_max: usize },
    Eig { mode: EigMode },
}

impl Backend {
    pub fn tag(&self) -> String {
        match self {
            Backend::MomentExact { n_max } => format!("moment(n={n_max})"),
            Backend::Eig { mode: EigMode::FiniteVolume } => "eig-finite-volume".into(),
            Backend::Eig { mode: EigMode::Ambient } => "eig-ambient".into(),
        }
    }

    /// Ambient radius needed for a functional on `Λ_L`.
    pub fn required_radius(&self, l: u32) -> u32 {
        match self {
            Backend::MomentExact { n_max } => l + n_max.div_ceil(2) as u32 + 1,
            Backend::Eig { mode: EigMode::FiniteVolume } => l,
            Backend::Eig { mode: EigMode::Ambient } => 2 * l.max(1),
        }
    }
}

/// `[-(D + C + 0.1), D + C + 0.1]` with `D` the vertex degree; contains the
/// Gershgorin disc of every finite ball with `|V| <= C`.
pub fn default_interval(family: GraphFamily, c: f64) -> (f64, f64) {
    let r = family.degree() as f64 + c.abs() + 0.1;
    (-r, r)
}

pub fn local_dos_eig(h: &Hamiltonian, l: u32, mode: EigMode) -> Result<DiscreteMeasure> {
    let n = h.graph().ball_size(l)?;
    match mode {
        EigMode::FiniteVolume => DiscreteMeasure::uniform(&h.restrict(l)?.eigenvalues()?),
        EigMode::Ambient => {
            let rows: Vec<usize> = (0..n).collect();
            let dec = h.eig(&EigenOptions::with_vectors(VectorRows::Rows(rows)))?;
            let w: Vec<f64> = dec.row_weights().iter().map(|x| x / n as f64).collect();
            DiscreteMeasure::new(dec.values, w)
        }
    }
}

/// Site-averaged Chebyshev moments over `Λ_L` (orders `0..=n_max`).
pub fn averaged_moments(h: &Hamiltonian, l: u32, n_max: usize, interval: (f64, f64)) -> Result<Vec<f64>> {
    let sites: Vec<usize> = (0..h.graph().ball_size(l)?).collect();
    Ok(chebyshev_moments(h, &sites, n_max, interval)?.average())
}

fn check_radius(h: &Hamiltonian, l: u32, n_max: usize) -> Result<()> {
    let required = Backend::MomentExact { n_max }.required_radius(l);
    if h.graph().radius() < required {
        return Err(Error::InsufficientRadius { required, available: h.graph().radius() });
    }
    Ok(())
}

/// `(1/|Λ_L|) sum_{y in Λ_L} <delta_y, p(H) delta_y>` for the Chebyshev
/// approximant `p` of `f`; equals the infinite-volume value when the ball
/// radius is at least `L + ceil(n/2) + 1`.
pub fn local_dos_moment(
    h: &Hamiltonian,
    l: u32,
    f: &dyn SpectralFunction,
    n_max: usize,
    interval: Option<(f64, f64)>,
) -> Result<(f64, ChebyshevSeries)> {
    check_radius(h, l, n_max)?;
    let interval = interval.unwrap_or_else(|| default_interval(h.graph().family(), h.potential_sup()));
    let series = chebyshev_coeffs(f, n_max, interval)?;
    let mu = averaged_moments(h, l, n_max, interval)?;
    Ok((series.pair(&mu)?, series))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DosEstimate {
    pub value: f64,
    pub family: GraphFamily,
    pub l: u32,
    pub ambient_radius: u32,
    pub backend: Backend,
    pub function: String,
    /// Sup error of the polynomial approximant (moment backend only).
    pub approximation_error: Option<f64>,
}

pub fn local_dos_functional(
    h: &Hamiltonian,
    l: u32,
    f: &dyn SpectralFunction,
    backend: Backend,
    interval: Option<(f64, f64)>,
) -> Result<DosEstimate> {
    let (value, approximation_error) = match backend {
        Backend::MomentExact { n_max } => {
            let (v, s) = local_dos_moment(h, l, f, n_max, interval)?;
            (v, Some(s.reconstruction_error))
        }
        Backend::Eig { mode } => (local_dos_eig(h, l, mode)?.integrate(f), None),
    };
    Ok(DosEstimate {
        value,
        family: h.graph().family(),
        l,
        ambient_radius: h.graph().radius(),
        backend,
        function: f.describe(),
        approximation_error,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IodsBracket {
    pub energy: f64,
    pub lower: f64,
    pub upper: f64,
    pub eps: f64,
    pub zeta: f64,
}

/// `[n(f-), n(f+)]` from a spectral measure, clipped to `[0, 1]`.
pub fn iods_bracket_from_measure(m: &DiscreteMeasure, e: f64, eps: f64, zeta: f64, domain: (f64, f64)) -> Result<IodsBracket> {
    let (fm, fp) = iods_cutoffs(e, eps, zeta, domain)?;
    Ok(IodsBracket {
        energy: e,
        lower: m.integrate(&fm).clamp(0.0, 1.0),
        upper: m.integrate(&fp).clamp(0.0, 1.0),
        eps,
        zeta,
    })
}

/// Bracket for the integrated density of states at `E`. With the eigen
/// backends it encloses the counting function of the same measure.
pub fn iods_bracket(h: &Hamiltonian, l: u32, e: f64, eps: f64, zeta: f64, backend: Backend) -> Result<IodsBracket> {
    let domain = default_interval(h.graph().family(), h.potential_sup());
    match backend {
        Backend::Eig { mode } => iods_bracket_from_measure(&local_dos_eig(h, l, mode)?, e, eps, zeta, domain),
        Backend::MomentExact { n_max } => {
            let (fm, fp) = iods_cutoffs(e, eps, zeta, domain)?;
            let lower = local_dos_moment(h, l, &fm, n_max, Some(domain))?.0;
            let upper = local_dos_moment(h, l, &fp, n_max, Some(domain))?.0;
            Ok(IodsBracket { energy: e, lower: lower.clamp(0.0, 1.0), upper: upper.clamp(0.0, 1.0), eps, zeta })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootStrategy {
    Origin,
    /// Balls centred at lattice translates of the origin.
    LatticeOffsets { offsets: Vec<Vec<i64>> },
}

/// Potential seen from a ball centred at `offset`.
fn recentred(spec: &PotentialSpec, offset: &[i64]) -> Result<PotentialSpec> {
    if offset.iter().all(|&o| o == 0) {
        return Ok(spec.clone());
    }
    Ok(match spec {
        PotentialSpec::Zero | PotentialSpec::Constant { .. } => spec.clone(),
        PotentialSpec::QuasiPeriodic { frequencies, phases, sampling, bound } => {
            if offset.len() != frequencies.len() {
                return Err(Error::LengthMismatch { expected: frequencies.len(), got: offset.len() });
            }
            PotentialSpec::QuasiPeriodic {
                frequencies: frequencies.clone(),
                phases: phases.iter().zip(frequencies).zip(offset).map(|((t, a), &o)| t + a * o as f64).collect(),
                sampling: sampling.clone(),
                bound: *bound,
            }
        }
        // stationary in distribution: a fresh realisation stands in for the translate
        PotentialSpec::RandomIid { measure, seed } => PotentialSpec::RandomIid {
            measure: measure.clone(),
            seed: derive_seed(*seed, &offset.iter().map(|&o| o as u64).collect::<Vec<_>>()),
        },
        PotentialSpec::Scaled { inner, lambda } => {
            PotentialSpec::Scaled { inner: Box::new(recentred(inner, offset)?), lambda: *lambda }
        }
        PotentialSpec::Explicit { .. } | PotentialSpec::BetheErgodic { .. } => {
            return Err(Error::Unsupported("re-centring this potential".into()))
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DosomReport {
    /// `(L, sup over roots)` for each requested radius.
    pub per_radius: Vec<(u32, f64)>,
    /// Maximum over the upper half of the radius sequence.
    pub limsup_estimate: f64,
    pub label: String,
    pub backend: Backend,
}

/// `limsup_L sup_x` of the local functional, with the supremum over the given
/// roots. Deterministic potentials with finitely many roots only give a
/// lower estimate.
pub fn dosom_estimate(
    family: GraphFamily,
    spec: &PotentialSpec,
    f: &dyn SpectralFunction,
    radii: &[u32],
    roots: &RootStrategy,
    backend: Backend,
) -> Result<DosomReport> {
    if radii.is_empty() {
        return Err(crate::error::param("need at least one radius"));
    }
    let offsets: Vec<Vec<i64>> = match roots {
        RootStrategy::Origin => vec![Vec::new()],
        RootStrategy::LatticeOffsets { offsets } => {
            if !family.is_lattice() {
                return Err(Error::Unsupported("lattice offsets on the Bethe lattice".into()));
            }
            offsets.clone()
        }
    };
    let interval = default_interval(family, spec.bound());
    let mut per_radius = Vec::with_capacity(radii.len());
    for &l in radii {
        let g = Arc::new(build_ball(family, backend.required_radius(l))?);
        let mut best = f64::NEG_INFINITY;
        for o in &offsets {
            let h = assemble_hamiltonian(g.clone(), &recentred(spec, o)?)?;
            best = best.max(local_dos_functional(&h, l, f, backend, Some(interval))?.value);
        }
        per_radius.push((l, best));
    }
    let mut sorted = per_radius.clone();
    sorted.sort_by_key(|p| p.0);
    let tail = &sorted[sorted.len() / 2..];
    let limsup_estimate = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let label = if spec.is_deterministic() { "lower estimate of DOSoM" } else { "DOSoM estimate" };
    Ok(DosomReport { per_radius, limsup_estimate, label: label.into(), backend })
}
