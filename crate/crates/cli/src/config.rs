//! Experiment configuration and trial records.

use serde::{Deserialize, Serialize};

use nae_sdp_core::error::{Error, Result};

/// How the witness target correlation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPolicy {
    /// max(ϱ* + eps, -1/3) in triangle-safe runs, ϱ* + eps otherwise.
    Auto,
    Explicit(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub c: usize,
    pub d: usize,
    /// Lift order.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub rho: RhoPolicy,
    pub triangle_safe: bool,
    pub threads: usize,
    /// Wave truncation tolerance handed to the parameter derivation.
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            c: 3,
            d: 4,
            n: 100,
            trials: 10,
            seed: 1,
            epsilon: 0.15,
            rho: RhoPolicy::Auto,
            triangle_safe: true,
            threads: default_threads(),
            tol: 1e-6,
        }
    }
}

/// Default worker count: the NAE_SDP_THREADS variable, else all cores.
pub fn default_threads() -> usize {
    std::env::var("NAE_SDP_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c < 2 || self.d < 2 {
            return Err(Error::InvalidParameter("need c, d ≥ 2".into()));
        }
        if self.n == 0 || self.trials == 0 || self.threads == 0 {
            return Err(Error::InvalidParameter(
                "n, trials, and threads must be positive".into(),
            ));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }

    /// Derived seed for one trial.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        nae_sdp_core::lift::derive_seed(self.seed, trial as u64)
    }

    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Other(format!("thread pool: {e}")))
    }
}

/// Reproducibility manifest attached to every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            schema_version: 1,
            tool: "nae-sdp".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
        }
    }
}

/// Common per-trial bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord<T> {
    pub trial: usize,
    pub seed: u64,
    pub wall_ms: u64,
    #[serde(flatten)]
    pub data: T,
}
