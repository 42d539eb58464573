//! Experiment configurations. Every field has a default, so `{"experiment":
//! "E-WEAK"}` is a complete configuration file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{ExperimentError, Result};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "E-LATTICE-LIP")]
    LatticeLip,
    #[serde(rename = "E-BETHE")]
    Bethe,
    #[serde(rename = "E-IODS")]
    Iods,
    #[serde(rename = "E-WEAK")]
    Weak,
    #[serde(rename = "E-METRICS")]
    Metrics,
    #[serde(rename = "E-HAUSDORFF")]
    Hausdorff,
    #[serde(rename = "E-APPA")]
    VolumeGap,
    #[serde(rename = "E-APB")]
    OperatorLipschitz,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::LatticeLip,
        ExperimentId::Bethe,
        ExperimentId::Iods,
        ExperimentId::Weak,
        ExperimentId::Metrics,
        ExperimentId::Hausdorff,
        ExperimentId::VolumeGap,
        ExperimentId::OperatorLipschitz,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::LatticeLip => "E-LATTICE-LIP",
            ExperimentId::Bethe => "E-BETHE",
            ExperimentId::Iods => "E-IODS",
            ExperimentId::Weak => "E-WEAK",
            ExperimentId::Metrics => "E-METRICS",
            ExperimentId::Hausdorff => "E-HAUSDORFF",
            ExperimentId::VolumeGap => "E-APPA",
            ExperimentId::OperatorLipschitz => "E-APB",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ExperimentError;

    /// Case-insensitive, with or without the `E-` prefix.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("E-").unwrap_or(&t);
        ExperimentId::ALL
            .into_iter()
            .find(|id| &id.as_str()[2..] == t)
            .ok_or_else(|| ExperimentError::Config(format!("unknown experiment {s:?}")))
    }
}

/// `Z^d` ball of radius `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeCase {
    pub d: u32,
    pub l: u32,
}

/// `Z^d` ball of radius `l` with Chebyshev degree `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCase {
    pub d: u32,
    pub l: u32,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeLipConfig {
    pub cases: Vec<LatticeCase>,
    pub eps: Vec<f64>,
    pub n_seeds: usize,
    /// `V` is i.i.d. uniform on `[-c, c]`.
    pub potential_bound: f64,
    pub shift_control: bool,
    pub moment_cases: Vec<MomentCase>,
    pub moment_seeds: usize,
}

impl Default for LatticeLipConfig {
    fn default() -> Self {
        LatticeLipConfig {
            cases: vec![LatticeCase { d: 1, l: 500 }, LatticeCase { d: 2, l: 20 }],
            eps: vec![0.5, 0.1, 0.02],
            n_seeds: 20,
            potential_bound: 1.0,
            shift_control: true,
            moment_cases: vec![MomentCase { d: 1, l: 30, n_max: 40 }, MomentCase { d: 2, l: 6, n_max: 16 }],
            moment_seeds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetheConfig {
    pub k: u32,
    /// `V` is i.i.d. uniform on `[-c, c]`.
    pub c: f64,
    pub l: u32,
    pub n_max: usize,
    pub eps: Vec<f64>,
    pub n_seeds: usize,
    /// Centres of the tent and ramp test functions.
    pub family_centers: usize,
    pub rank_one_trials: usize,
}

impl Default for BetheConfig {
    fn default() -> Self {
        BetheConfig {
            k: 3,
            c: 1.0,
            l: 3,
            n_max: 20,
            eps: vec![0.5, 0.1, 0.02],
            n_seeds: 2,
            family_centers: 9,
            rank_one_trials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IodsConfig {
    pub cases: Vec<LatticeCase>,
    pub eps: Vec<f64>,
    pub energies: usize,
    pub n_seeds: usize,
    pub potential_bound: f64,
    /// Configured value of the log-Hölder constant `K_{d;C}`.
    pub k_dc: f64,
}

impl Default for IodsConfig {
    fn default() -> Self {
        IodsConfig {
            cases: vec![LatticeCase { d: 1, l: 200 }, LatticeCase { d: 2, l: 15 }],
            eps: vec![0.2, 0.1, 0.05, 0.02, 0.01],
            energies: 201,
            n_seeds: 4,
            potential_bound: 1.0,
            k_dc: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakConfig {
    pub cases: Vec<LatticeCase>,
    pub lambdas: Vec<f64>,
    pub n_seeds: usize,
    pub potential_bound: f64,
    pub energies: usize,
    /// Multiplier allowed on the predicted decay factor.
    pub decay_slack: f64,
}

impl Default for WeakConfig {
    fn default() -> Self {
        WeakConfig {
            cases: vec![LatticeCase { d: 1, l: 500 }, LatticeCase { d: 2, l: 20 }],
            lambdas: vec![0.5, 0.25, 0.125],
            n_seeds: 4,
            potential_bound: 1.0,
            energies: 201,
            decay_slack: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub pairs: usize,
    pub oracle_pairs: usize,
    pub triples: usize,
    pub max_atoms: usize,
    /// Atoms are drawn from `[-c, c]`.
    pub c: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { pairs: 100, oracle_pairs: 100, triples: 100, max_atoms: 8, c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffConfig {
    pub perturb_trials: usize,
    pub perturb_l: u32,
    pub perturb_eps: Vec<f64>,
    pub potential_bound: f64,
    /// Kunz-Souillard comparison with single-site law uniform on `[-c, c]`.
    pub ks_l: u32,
    pub ks_samples: usize,
    pub ks_bound: f64,
    /// `mu_n = (1 - 1/n) delta_0 + (1/n) delta_height`.
    pub example_n: Vec<u32>,
    pub example_l: u32,
    pub example_seeds: usize,
    pub example_height: f64,
    pub example_target: f64,
    pub example_tolerance: f64,
}

impl Default for HausdorffConfig {
    fn default() -> Self {
        HausdorffConfig {
            perturb_trials: 100,
            perturb_l: 100,
            perturb_eps: vec![0.5, 0.1, 0.02],
            potential_bound: 1.0,
            ks_l: 100,
            ks_samples: 20,
            ks_bound: 1.0,
            example_n: vec![4],
            example_l: 5000,
            example_seeds: 20,
            example_height: 100.0,
            example_target: 96.0,
            example_tolerance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeGapConfig {
    pub lattice_l: Vec<u32>,
    pub n_seeds: usize,
    pub potential_bound: f64,
    /// Largest admissible log-log slope of the `Z^1` gap.
    pub slope_max: f64,
    pub bethe_k: u32,
    pub bethe_l: Vec<u32>,
    pub bethe_n_max: usize,
}

impl Default for VolumeGapConfig {
    fn default() -> Self {
        VolumeGapConfig {
            lattice_l: vec![50, 100, 200, 400],
            n_seeds: 4,
            potential_bound: 1.0,
            slope_max: -0.8,
            bethe_k: 3,
            bethe_l: (4..=10).collect(),
            bethe_n_max: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorLipschitzConfig {
    /// Constant of the operator-Lipschitz type bound; fitted, not derived.
    pub c0: f64,
    pub eps: Vec<f64>,
    pub lattice_l: u32,
    pub n_seeds: usize,
    pub potential_bound: f64,
    pub bethe_k: u32,
    pub bethe_l: u32,
    pub bethe_n_max: usize,
}

impl Default for OperatorLipschitzConfig {
    fn default() -> Self {
        OperatorLipschitzConfig {
            c0: 1.0,
            eps: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001],
            lattice_l: 100,
            n_seeds: 4,
            potential_bound: 1.0,
            bethe_k: 3,
            bethe_l: 2,
            bethe_n_max: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment")]
pub enum ExperimentParams {
    #[serde(rename = "E-LATTICE-LIP")]
    LatticeLip(LatticeLipConfig),
    #[serde(rename = "E-BETHE")]
    Bethe(BetheConfig),
    #[serde(rename = "E-IODS")]
    Iods(IodsConfig),
    #[serde(rename = "E-WEAK")]
    Weak(WeakConfig),
    #[serde(rename = "E-METRICS")]
    Metrics(MetricsConfig),
    #[serde(rename = "E-HAUSDORFF")]
    Hausdorff(HausdorffConfig),
    #[serde(rename = "E-APPA")]
    VolumeGap(VolumeGapConfig),
    #[serde(rename = "E-APB")]
    OperatorLipschitz(OperatorLipschitzConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(flatten)]
    pub params: ExperimentParams,
    /// Not part of the configuration hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Not part of the configuration hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn default_for(id: ExperimentId) -> Self {
        let params = match id {
            ExperimentId::LatticeLip => ExperimentParams::LatticeLip(Default::default()),
            ExperimentId::Bethe => ExperimentParams::Bethe(Default::default()),
            ExperimentId::Iods => ExperimentParams::Iods(Default::default()),
            ExperimentId::Weak => ExperimentParams::Weak(Default::default()),
            ExperimentId::Metrics => ExperimentParams::Metrics(Default::default()),
            ExperimentId::Hausdorff => ExperimentParams::Hausdorff(Default::default()),
            ExperimentId::VolumeGap => ExperimentParams::VolumeGap(Default::default()),
            ExperimentId::OperatorLipschitz => ExperimentParams::OperatorLipschitz(Default::default()),
        };
        ExperimentConfig { seed: DEFAULT_SEED, params, out_dir: None, threads: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn id(&self) -> ExperimentId {
        match self.params {
            ExperimentParams::LatticeLip(_) => ExperimentId::LatticeLip,
            ExperimentParams::Bethe(_) => ExperimentId::Bethe,
            ExperimentParams::Iods(_) => ExperimentId::Iods,
            ExperimentParams::Weak(_) => ExperimentId::Weak,
            ExperimentParams::Metrics(_) => ExperimentId::Metrics,
            ExperimentParams::Hausdorff(_) => ExperimentId::Hausdorff,
            ExperimentParams::VolumeGap(_) => ExperimentId::VolumeGap,
            ExperimentParams::OperatorLipschitz(_) => ExperimentId::OperatorLipschitz,
        }
    }

    /// The reproducible part of the configuration as JSON with sorted keys.
    pub fn canonical(&self) -> serde_json::Value {
        let stripped = ExperimentConfig { out_dir: None, threads: None, ..self.clone() };
        // `Value` maps are ordered by key, which makes the text canonical
        serde_json::to_value(&stripped).expect("configuration is serialisable")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let text = self.canonical().to_string();
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
