//! Experiment configuration: JSON schema and conversion into library types.
//!
//! One config file drives one experiment; command-line flags override
//! individual fields. All numeric ranges are validated before any
//! computation starts, so an invalid config produces no partial output.

use num_complex::Complex64 as C64;
use serde::Deserialize;

use qembound::bounds::LayeredSpec;
use qembound::channels::{KrausChannel, LiouvillianSpec, NoiseEnsemble};
use qembound::divergences::ObservableSet;
use qembound::mitigation::{FitModel, Protocol, ZneSpec};
use qembound::numkit::{DensityMatrix, Matrix, Observable};

use crate::CliError;

/// Top-level experiment configuration.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<OutputConfig>,
    pub verify: Option<VerifyConfig>,
    pub bound: Option<BoundConfig>,
    pub contraction: Option<ContractionConfig>,
    pub layered_scan: Option<LayeredScanConfig>,
    pub mitigate: Option<MitigateConfig>,
    pub thermal: Option<ThermalConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "json+csv".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_contraction_samples")]
    pub contraction_samples: u64,
    #[serde(default = "default_min_eig_samples")]
    pub min_eig_samples: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            contraction_samples: default_contraction_samples(),
            min_eig_samples: default_min_eig_samples(),
        }
    }
}

fn default_samples() -> u64 {
    200
}

fn default_contraction_samples() -> u64 {
    300
}

fn default_min_eig_samples() -> u64 {
    100
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub formula: Option<String>,
    pub qubits: Option<usize>,
    pub layers: Option<usize>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub xi: Option<f64>,
    pub sigma_max: Option<f64>,
    pub b_max: Option<f64>,
    pub d_o: Option<f64>,
    pub fidelity: Option<f64>,
    pub rel_entropy: Option<f64>,
    pub t: Option<f64>,
    /// Explicit states for the searched bounds.
    pub states: Option<Vec<MatrixSpec>>,
    pub channels: Option<Vec<ChannelSpec>>,
    pub observables: Option<ObservableSetSpec>,
    /// Sampling budget when `states` is the string "all_pure".
    pub pure_pair_samples: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    pub channels: Vec<ChannelSpec>,
    pub observables: ObservableSetSpec,
    #[serde(default = "default_restarts")]
    pub restarts: u64,
    #[serde(default = "default_refine")]
    pub refine_steps: u64,
}

fn default_restarts() -> u64 {
    100
}

fn default_refine() -> u64 {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredScanConfig {
    pub qubits: usize,
    pub gamma: f64,
    pub layers_min: usize,
    pub layers_max: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub protocol: ProtocolSpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default)]
    pub unitaries: UnitaryChoice,
}

fn default_trials() -> u64 {
    400
}

fn default_n_max() -> u64 {
    1 << 20
}

#[derive(Debug, Clone, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryChoice {
    #[default]
    Random,
    Identity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigateConfig {
    pub qubits: usize,
    pub layers: usize,
    pub gamma: f64,
    pub protocol: ProtocolSpec,
    pub delta: f64,
    /// Fixed-n statistics (optional).
    pub n: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Also search for the minimal certified sample count.
    pub epsilon: Option<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default)]
    pub unitaries: UnitaryChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub liouvillian: LiouvillianSpecConfig,
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
    #[serde(default = "default_alpha_samples")]
    pub alpha_samples: u64,
    #[serde(default)]
    pub initial: ThermalInitial,
}

fn default_alpha_samples() -> u64 {
    400
}

#[derive(Debug, Clone, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ThermalInitial {
    /// Start from the witness of the decay-rate estimate.
    #[default]
    Witness,
    /// Start from the highest-energy computational state.
    Excited,
}

/// Protocol selector shared by the scan and mitigate commands.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSpec {
    None,
    Pec {
        assumed_gamma: Option<f64>,
    },
    Zne {
        scale_factors: Vec<f64>,
        fit: String,
    },
}

impl ProtocolSpec {
    pub fn build(&self) -> Result<Protocol, CliError> {
        match self {
            Self::None => Ok(Protocol::None),
            Self::Pec { assumed_gamma } => Ok(Protocol::Pec { assumed_gamma: *assumed_gamma }),
            Self::Zne { scale_factors, fit } => {
                let fit = match fit.as_str() {
                    "richardson" => FitModel::Richardson,
                    "linear" => FitModel::Linear,
                    "exponential" => FitModel::Exponential,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown ZNE fit '{other}' (expected richardson|linear|exponential)"
                        )))
                    }
                };
                ZneSpec::new(scale_factors.clone(), fit)
                    .map(Protocol::Zne)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::None => "none".into(),
            Self::Pec { .. } => "pec".into(),
            Self::Zne { fit, .. } => format!("zne_{fit}"),
        }
    }
}

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

pub fn parse_matrix(spec: &MatrixSpec) -> Result<Matrix, CliError> {
    let rows: Vec<Vec<C64>> = spec
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    Matrix::from_rows(&rows).map_err(|e| CliError::Config(e.to_string()))
}

/// Channel serialization format.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Depolarizing {
        p: f64,
    },
    Pauli {
        q: [f64; 3],
    },
    GlobalDepolarizing {
        gamma: f64,
        fixed: FixedPointSpec,
        beta: Option<f64>,
        hamiltonian: Option<MatrixSpec>,
    },
    Unitary {
        matrix: MatrixSpec,
    },
    Thermal {
        liouvillian: LiouvillianSpecConfig,
        t: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FixedPointSpec {
    Gibbs(String),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LiouvillianSpecConfig {
    ThermalQubit {
        beta: f64,
        rate_down: f64,
        #[serde(default)]
        rate_dephase: f64,
    },
    Gkls {
        hamiltonian: MatrixSpec,
        jumps: Vec<MatrixSpec>,
        beta: f64,
    },
}

impl LiouvillianSpecConfig {
    pub fn build(&self) -> Result<LiouvillianSpec, CliError> {
        match self {
            Self::ThermalQubit { beta, rate_down, rate_dephase } => {
                LiouvillianSpec::thermal_qubit(*beta, *rate_down, *rate_dephase)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            Self::Gkls { hamiltonian, jumps, beta } => {
                let h = Observable::new(parse_matrix(hamiltonian)?)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let jumps = jumps
                    .iter()
                    .map(|j| parse_matrix(j))
                    .collect::<Result<Vec<_>, _>>()?;
                LiouvillianSpec::from_gkls(&h, &jumps, *beta)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel, CliError> {
        let cfg_err = |e: qembound::Error| CliError::Config(e.to_string());
        match self {
            Self::Depolarizing { p } => KrausChannel::depolarizing(*p).map_err(cfg_err),
            Self::Pauli { q } => KrausChannel::stochastic_pauli(q[0], q[1], q[2]).map_err(cfg_err),
            Self::GlobalDepolarizing { gamma, fixed, beta, hamiltonian } => {
                let fixed_state = match fixed {
                    FixedPointSpec::Matrix(m) => {
                        DensityMatrix::new(parse_matrix(m)?).map_err(cfg_err)?
                    }
                    FixedPointSpec::Gibbs(tag) => {
                        if tag != "gibbs" {
                            return Err(CliError::Config(format!(
                                "unknown fixed-point tag '{tag}' (expected \"gibbs\" or a matrix)"
                            )));
                        }
                        let beta = beta.ok_or_else(|| {
                            CliError::Config("gibbs fixed point needs 'beta'".into())
                        })?;
                        let h_spec = hamiltonian.as_ref().ok_or_else(|| {
                            CliError::Config("gibbs fixed point needs 'hamiltonian'".into())
                        })?;
                        let h = Observable::new(parse_matrix(h_spec)?).map_err(cfg_err)?;
                        qembound::channels::gibbs_state(&h, beta).map_err(cfg_err)?
                    }
                };
                KrausChannel::global_depolarizing(*gamma, &fixed_state).map_err(cfg_err)
            }
            Self::Unitary { matrix } => {
                KrausChannel::unitary(&parse_matrix(matrix)?).map_err(cfg_err)
            }
            Self::Thermal { liouvillian, t } => {
                liouvillian.build()?.semigroup_step(*t).map_err(cfg_err)
            }
        }
    }
}

/// Observable-set serialization: the string "all_effects" with a dimension,
/// or an explicit list of Hermitian matrices.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ObservableSetSpec {
    AllEffects { all_effects: usize },
    Explicit { members: Vec<MatrixSpec> },
}

impl ObservableSetSpec {
    pub fn build(&self) -> Result<ObservableSet, CliError> {
        match self {
            Self::AllEffects { all_effects } => {
                Ok(ObservableSet::AllEffects { dim: *all_effects })
            }
            Self::Explicit { members } => {
                let obs = members
                    .iter()
                    .map(|m| {
                        Observable::new(parse_matrix(m)?)
                            .map_err(|e| CliError::Config(e.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ObservableSet::explicit(obs).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

/// Build the ensemble declared in a bound/contraction config.
pub fn build_ensemble(specs: &[ChannelSpec]) -> Result<NoiseEnsemble, CliError> {
    let channels =
        specs.iter().map(|s| s.build()).collect::<Result<Vec<_>, _>>()?;
    NoiseEnsemble::new(channels).map_err(|e| CliError::Config(e.to_string()))
}

/// Resolve a layered spec with the configured unitary choice.
pub fn build_layered_spec(
    qubits: usize,
    layers: usize,
    gamma: f64,
    unitaries: &UnitaryChoice,
) -> Result<LayeredSpec, CliError> {
    let spec =
        LayeredSpec::new(qubits, layers, gamma).map_err(|e| CliError::Config(e.to_string()))?;
    match unitaries {
        UnitaryChoice::Random => Ok(spec),
        UnitaryChoice::Identity => {
            let d = spec.dim();
            spec.with_unitaries(vec![Matrix::identity(d); layers])
                .map_err(|e| CliError::Config(e.to_string()))
        }
    }
}
