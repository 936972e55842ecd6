//! The JSON run-configuration schema and its translation into library
//! types. Parsing is strict — unknown fields are rejected — and every
//! component precondition is checked here, before any evaluation runs.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hesga::baselines::TraditionalGaConfig;
use hesga::eval::Objective;
use hesga::ga::HesgaConfig;
use hesga::objectives::synthetic::{GapRule, ParamMap};
use hesga::objectives::{generate_regression_dataset, MlpRegressionObjective, SyntheticCurveObjective};
use hesga::space::{HyperparamDef, ParamKind, SearchSpace};

/// Top-level run configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub search_space: Vec<DimSpec>,
    pub objective: ObjectiveSpec,
    pub algorithm: AlgorithmSpec,
    /// Independent repetitions; each gets a seed derived from master_seed.
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

fn default_trials() -> usize {
    30
}

/// One search dimension: a bit width and a step increment, decoding gene
/// integer g to value (g + 1) × step.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimSpec {
    pub name: String,
    pub bits: u32,
    pub step: f64,
    pub kind: KindSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindSpec {
    Integer,
    Real,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    SyntheticCurve(SyntheticSpec),
    MlpRegression(MlpSpec),
}

/// Exponential learning-curve objective; the three curve parameters are
/// affine-quadratic maps over the decoded hyperparameter values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub asymptote: ParamMap,
    pub gap: GapRule,
    pub decay: ParamMap,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Small neural-network regression objective. Omitting `dataset` uses the
/// bundled deterministic dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSpec {
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub n_train: usize,
    pub n_valid: usize,
    pub input_dim: usize,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Hesga(HesgaSpec),
    TraditionalGa(TraditionalSpec),
    Random(RandomSpec),
    Grid(GridSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HesgaSpec {
    pub n_pop: usize,
    pub maxgen: usize,
    pub n_e: usize,
    #[serde(default = "default_r_e")]
    pub r_e: f64,
    #[serde(default = "default_r_c")]
    pub r_c: f64,
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_p_m")]
    pub p_m: f64,
    #[serde(default = "default_p_f")]
    pub p_f: f64,
    #[serde(default = "default_k_repeats")]
    pub k_repeats: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraditionalSpec {
    pub n_pop: usize,
    pub maxgen: usize,
    pub n_e: usize,
    #[serde(default = "default_r_e")]
    pub r_e: f64,
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_p_m")]
    pub p_m: f64,
    #[serde(default = "default_k_repeats")]
    pub k_repeats: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub n_e: usize,
    pub budget_full_evals: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_e: usize,
    pub stride_bits: Vec<u32>,
}

fn default_r_e() -> f64 {
    0.1
}
fn default_r_c() -> f64 {
    0.1
}
fn default_p_c() -> f64 {
    0.8
}
fn default_p_m() -> f64 {
    0.2
}
fn default_p_f() -> f64 {
    0.1
}
fn default_k_repeats() -> usize {
    1
}

impl HesgaSpec {
    pub fn to_config(&self, master_seed: u64) -> HesgaConfig {
        HesgaConfig {
            n_pop: self.n_pop,
            maxgen: self.maxgen,
            r_e: self.r_e,
            r_c: self.r_c,
            p_c: self.p_c,
            p_m: self.p_m,
            p_f: self.p_f,
            n_e: self.n_e,
            k_repeats: self.k_repeats,
            master_seed,
        }
    }
}

impl TraditionalSpec {
    pub fn to_config(&self, master_seed: u64) -> TraditionalGaConfig {
        TraditionalGaConfig {
            n_pop: self.n_pop,
            maxgen: self.maxgen,
            r_e: self.r_e,
            p_c: self.p_c,
            p_m: self.p_m,
            n_e: self.n_e,
            k_repeats: self.k_repeats,
            master_seed,
        }
    }
}

impl AlgorithmSpec {
    /// Label used in summary rows and report sets.
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::Hesga(_) => "hesga",
            AlgorithmSpec::TraditionalGa(_) => "traditional_ga",
            AlgorithmSpec::Random(_) => "random",
            AlgorithmSpec::Grid(_) => "grid",
        }
    }

    /// Full-evaluation epoch budget the objective trains under.
    pub fn n_e(&self) -> usize {
        match self {
            AlgorithmSpec::Hesga(s) => s.n_e,
            AlgorithmSpec::TraditionalGa(s) => s.n_e,
            AlgorithmSpec::Random(s) => s.n_e,
            AlgorithmSpec::Grid(s) => s.n_e,
        }
    }
}

/// A parsed, validated experiment ready to execute.
pub struct Experiment {
    pub config: RunConfigFile,
    pub space: SearchSpace,
    pub objective: Box<dyn Objective>,
    pub output_dir: PathBuf,
}

impl RunConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let config: RunConfigFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        Ok(config)
    }

    /// Validates every component and builds the executable experiment.
    /// `out_override` replaces output_dir; `seed_override` (the HESGA_SEED
    /// environment variable) replaces master_seed.
    pub fn build(
        mut self,
        out_override: Option<PathBuf>,
        seed_override: Option<u64>,
    ) -> Result<Experiment> {
        if let Some(seed) = seed_override {
            self.master_seed = seed;
        }
        if let Some(out) = out_override {
            self.output_dir = out;
        }
        if self.trials == 0 {
            bail!("trials: must be at least 1");
        }

        let dims: Vec<HyperparamDef> = self
            .search_space
            .iter()
            .map(|d| {
                HyperparamDef::new(
                    &d.name,
                    d.bits,
                    d.step,
                    match d.kind {
                        KindSpec::Integer => ParamKind::Integer,
                        KindSpec::Real => ParamKind::Real,
                    },
                )
            })
            .collect();
        let space = SearchSpace::new(dims).context("search_space")?;

        let objective: Box<dyn Objective> = match &self.objective {
            ObjectiveSpec::SyntheticCurve(spec) => Box::new(
                SyntheticCurveObjective::new(
                    spec.asymptote.clone(),
                    spec.gap.clone(),
                    spec.decay.clone(),
                    spec.noise_sigma,
                )
                .context("objective")?,
            ),
            ObjectiveSpec::MlpRegression(spec) => match &spec.dataset {
                None => Box::new(MlpRegressionObjective::bundled()),
                Some(d) => {
                    if d.n_train == 0 || d.n_valid == 0 || d.input_dim == 0 {
                        bail!("objective.dataset: n_train, n_valid, and input_dim must be positive");
                    }
                    if !d.noise.is_finite() || d.noise < 0.0 {
                        bail!("objective.dataset.noise: must be finite and nonnegative");
                    }
                    Box::new(
                        MlpRegressionObjective::new(generate_regression_dataset(
                            d.n_train,
                            d.n_valid,
                            d.input_dim,
                            d.noise,
                            d.seed,
                        ))
                        .context("objective.dataset")?,
                    )
                }
            },
        };

        // Validate the algorithm config against the space before running.
        match &self.algorithm {
            AlgorithmSpec::Hesga(s) => {
                s.to_config(self.master_seed)
                    .validate()
                    .context("algorithm")?;
            }
            AlgorithmSpec::TraditionalGa(s) => {
                s.to_config(self.master_seed)
                    .validate()
                    .context("algorithm")?;
            }
            AlgorithmSpec::Random(s) => {
                if s.budget_full_evals == 0 {
                    bail!("algorithm.budget_full_evals: must be at least 1");
                }
                if s.n_e == 0 {
                    bail!("algorithm.n_e: must be at least 1");
                }
            }
            AlgorithmSpec::Grid(s) => {
                if s.n_e == 0 {
                    bail!("algorithm.n_e: must be at least 1");
                }
                if s.stride_bits.len() != space.dims().len() {
                    bail!(
                        "algorithm.stride_bits: expected {} entries, got {}",
                        space.dims().len(),
                        s.stride_bits.len()
                    );
                }
                for (dim, &stride) in space.dims().iter().zip(&s.stride_bits) {
                    if stride > dim.bits {
                        bail!(
                            "algorithm.stride_bits: stride {} exceeds the {} bits of dimension {}",
                            stride,
                            dim.bits,
                            dim.name
                        );
                    }
                }
            }
        }

        let output_dir = self.output_dir.clone();
        Ok(Experiment {
            config: self,
            space,
            objective,
            output_dir,
        })
    }
}
