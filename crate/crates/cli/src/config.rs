//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use mera_qec::mera::{io, MeraNetwork};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Decoupling,
    LocalCorrectability,
    Union,
    Distance,
    Lightcone,
    Identities,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Decoupling => "decoupling",
            Experiment::LocalCorrectability => "local-correctability",
            Experiment::Union => "union",
            Experiment::Distance => "distance",
            Experiment::Lightcone => "lightcone",
            Experiment::Identities => "identities",
        }
    }

    /// Whether rows are produced per network seed.
    pub fn uses_seeds(self) -> bool {
        self != Experiment::Distance
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn two() -> usize {
    2
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkSpec {
    /// Seeded Haar-random tensors; one network per seed.
    Haar {
        #[serde(default = "two")]
        site_dim: usize,
        layers: usize,
        #[serde(default = "one")]
        base_sites: usize,
    },
    /// `U = I`, `V|i> = |i>|0>`.
    Trivial {
        #[serde(default = "two")]
        site_dim: usize,
        layers: usize,
        #[serde(default = "one")]
        base_sites: usize,
    },
    /// A network document; seeds then only drive the codeword sampler.
    File { path: PathBuf },
}

impl NetworkSpec {
    pub fn build(&self, seed: u64) -> Result<MeraNetwork, CliError> {
        Ok(match self {
            NetworkSpec::Haar { site_dim, layers, base_sites } => MeraNetwork::haar(*site_dim, *layers, *base_sites, seed)?,
            NetworkSpec::Trivial { site_dim, layers, base_sites } => MeraNetwork::trivial(*site_dim, *layers, *base_sites)?,
            NetworkSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
                io::from_json(&text)?
            }
        })
    }

    fn layers(&self) -> Option<usize> {
        match self {
            NetworkSpec::Haar { layers, .. } | NetworkSpec::Trivial { layers, .. } => Some(*layers),
            NetworkSpec::File { .. } => None,
        }
    }
}

fn default_t_grid() -> Vec<f64> {
    (0..=8).map(|k| 0.25 * k as f64).collect()
}

fn default_radii() -> Vec<usize> {
    vec![2, 4, 8]
}

fn default_z() -> Vec<f64> {
    vec![3.0]
}

fn default_levels() -> usize {
    3
}

fn default_ab() -> usize {
    216
}

fn default_codewords() -> usize {
    32
}

fn default_samples() -> usize {
    64
}

fn default_sizes() -> Vec<usize> {
    vec![1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Code scales; empty means the top of the network.
    #[serde(default)]
    pub scales: Vec<usize>,
    #[serde(default = "default_sizes")]
    pub region_sizes: Vec<usize>,
    #[serde(default = "default_radii")]
    pub shield_radii: Vec<usize>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_z")]
    pub z: Vec<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_ab")]
    pub ab_size: usize,
    /// Random pure codewords besides the maximally entangled one.
    #[serde(default = "default_codewords")]
    pub codewords: usize,
    /// Product operators sampled for the decoupling defect.
    #[serde(default = "default_samples")]
    pub defect_samples: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { path: PathBuf::from("out"), format: Format::Csv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub network: NetworkSpec,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config { field: "config".into(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_json(&text)
    }

    /// Default configuration of an experiment at desk scale.
    pub fn preset(experiment: Experiment) -> Self {
        let layers = match experiment {
            Experiment::Lightcone => 3,
            Experiment::Identities | Experiment::Union => 4,
            _ => 5,
        };
        let mut sweep = Sweep::default();
        if experiment == Experiment::Decoupling {
            sweep.scales = vec![2, 3, 4, 5];
            sweep.region_sizes = vec![1, 2, 4];
        }
        if experiment == Experiment::Union {
            sweep.shield_radii = vec![2];
        }
        Self {
            experiment,
            network: NetworkSpec::Haar { site_dim: 2, layers, base_sites: 1 },
            seeds: if experiment.uses_seeds() { vec![0] } else { Vec::new() },
            sweep,
            output: OutputSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| Err(CliError::Config { field: field.into(), message });
        if self.experiment.uses_seeds() && self.seeds.is_empty() {
            return bad("seeds", "at least one seed is required".into());
        }
        if let Some(layers) = self.network.layers() {
            if layers == 0 {
                return bad("network.layers", "must be positive".into());
            }
            if let Some(s) = self.sweep.scales.iter().find(|&&s| s > layers) {
                return bad("sweep.scales", format!("scale {s} exceeds {layers} layers"));
            }
        }
        if self.sweep.region_sizes.contains(&0) {
            return bad("sweep.region_sizes", "sizes must be positive".into());
        }
        if self.sweep.shield_radii.contains(&0) {
            return bad("sweep.shield_radii", "radii must be positive".into());
        }
        if self.sweep.t_grid.iter().any(|t| !t.is_finite()) {
            return bad("sweep.t_grid", "times must be finite".into());
        }
        if let Some(z) = self.sweep.z.iter().find(|&&z| !(z > 1.0 && z.is_finite())) {
            return bad("sweep.z", format!("z must exceed 1, got {z}"));
        }
        if self.sweep.ab_size == 0 {
            return bad("sweep.ab_size", "must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
