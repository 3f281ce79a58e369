//! Versioned JSON run configurations, one tagged variant per subcommand.
//!
//! Schema documents matching these types ship under `schemas/`. Parsing is
//! strict (`deny_unknown_fields`), and every stochastic path requires an
//! explicit seed in the file (overridable with `--seed`).

use serde::{Deserialize, Serialize};

use pblab_core::cover::{CoverDescriptor, SurfaceDescriptor};
use pblab_core::experiments::{CoverTemplate, OptimizerConfig, ReductionConfig};
use pblab_core::partition::BumpProfile;
use pblab_core::pbnorm::{PbConfig, PbMethod};
use pblab_core::surface::FdOrder;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PbSettings {
    #[serde(default)]
    pub method: PbMethod,
    #[serde(default = "default_n_exact_cap")]
    pub n_exact_cap: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub fd_order: FdOrder,
}

fn default_n_exact_cap() -> usize {
    16
}

fn default_restarts() -> usize {
    32
}

impl Default for PbSettings {
    fn default() -> Self {
        PbSettings {
            method: PbMethod::Auto,
            n_exact_cap: default_n_exact_cap(),
            restarts: default_restarts(),
            fd_order: FdOrder::Two,
        }
    }
}

impl PbSettings {
    pub fn to_config(&self, seed: u64) -> PbConfig {
        PbConfig {
            method: self.method,
            n_exact_cap: self.n_exact_cap,
            restarts: self.restarts,
            seed,
            fd_order: self.fd_order,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    #[serde(default = "default_opt_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default)]
    pub use_offsets: bool,
}

fn default_opt_restarts() -> usize {
    8
}

fn default_max_evals() -> usize {
    500
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: default_opt_restarts(),
            max_evals: default_max_evals(),
            use_offsets: false,
        }
    }
}

impl OptimizerSettings {
    pub fn to_config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_evals: self.max_evals,
            seed,
            use_offsets: self.use_offsets,
            tol: 1e-6,
        }
    }
}

/// Consistency checks runnable through the `check` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    /// Randomized two-cap covers on the sphere must all have pb below 1e-12.
    TwoSet {
        #[serde(default = "default_two_set_configs")]
        configs: usize,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Two caps of the given area (default 2.2 pi) past half area vanish.
    HalfArea {
        #[serde(default)]
        capacity: Option<f64>,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Displacement-energy consistency on a named shipped sphere cover
    /// ("sphere-tetra", "sphere-octa" or "sphere-pyramid").
    Polterovich { scenario: String },
    /// Parameter-space reduction suite on the square-parametrized torus.
    Reduction {
        #[serde(default = "default_reduction_grid")]
        grid: usize,
        #[serde(default = "default_n_weights")]
        n_weights: usize,
    },
    /// Monotonicity of a sweep table produced by the `sweep` subcommand.
    Monotonicity {
        table: String,
        #[serde(default = "default_mono_tol")]
        tol_rel: f64,
    },
}

fn default_two_set_configs() -> usize {
    20
}

fn default_grid() -> usize {
    96
}

fn default_reduction_grid() -> usize {
    128
}

fn default_n_weights() -> usize {
    32
}

fn default_mono_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunConfig {
    /// Evaluate pb of the canonical partition of a cover.
    Pbeval {
        version: u32,
        #[serde(default)]
        seed: Option<u64>,
        cover: CoverDescriptor,
        #[serde(default)]
        profile: Option<BumpProfile>,
        #[serde(default)]
        pb: PbSettings,
        #[serde(default)]
        out_dir: Option<String>,
    },
    /// Minimize pb over the bump family of a discrete cover.
    Minimize {
        version: u32,
        seed: u64,
        cover: CoverDescriptor,
        #[serde(default)]
        optimizer: OptimizerSettings,
        #[serde(default)]
        pb: PbSettings,
        #[serde(default)]
        out_dir: Option<String>,
    },
    /// Sweep pb(c) over capacities with a cover template.
    Sweep {
        version: u32,
        seed: u64,
        surface: SurfaceDescriptor,
        capacities: Vec<f64>,
        template: CoverTemplate,
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default)]
        optimizer: OptimizerSettings,
        #[serde(default)]
        pb: PbSettings,
        #[serde(default = "default_mono_tol")]
        monotonicity_tol: f64,
        #[serde(default)]
        out_dir: Option<String>,
    },
    /// Run a consistency check; exits 2 when the check fails.
    Check {
        version: u32,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(flatten)]
        spec: CheckSpec,
        #[serde(default)]
        pb: PbSettings,
        #[serde(default)]
        out_dir: Option<String>,
    },
    /// Export Hilbert curve samples and exact cell-measure reports.
    Hilbert {
        version: u32,
        dimension: u32,
        order: u32,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default)]
        report_level: Option<u32>,
        #[serde(default)]
        out_dir: Option<String>,
    },
}

fn default_eta() -> f64 {
    0.1
}

fn default_samples() -> u64 {
    1024
}

impl RunConfig {
    pub fn version(&self) -> u32 {
        match self {
            RunConfig::Pbeval { version, .. }
            | RunConfig::Minimize { version, .. }
            | RunConfig::Sweep { version, .. }
            | RunConfig::Check { version, .. }
            | RunConfig::Hilbert { version, .. } => *version,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RunConfig::Pbeval { .. } => "pbeval",
            RunConfig::Minimize { .. } => "minimize",
            RunConfig::Sweep { .. } => "sweep",
            RunConfig::Check { .. } => "check",
            RunConfig::Hilbert { .. } => "hilbert",
        }
    }

    pub fn out_dir(&self) -> Option<&str> {
        match self {
            RunConfig::Pbeval { out_dir, .. }
            | RunConfig::Minimize { out_dir, .. }
            | RunConfig::Sweep { out_dir, .. }
            | RunConfig::Check { out_dir, .. }
            | RunConfig::Hilbert { out_dir, .. } => out_dir.as_deref(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Pbeval { seed, .. } => *seed,
            RunConfig::Minimize { seed, .. } => Some(*seed),
            RunConfig::Sweep { seed, .. } => Some(*seed),
            RunConfig::Check { seed, .. } => *seed,
            RunConfig::Hilbert { .. } => Some(0),
        }
    }
}

/// Build the reduction config for the `reduction` check.
pub fn reduction_config(n_weights: usize, seed: u64) -> ReductionConfig {
    ReductionConfig {
        n_weights,
        seed,
        ..ReductionConfig::default()
    }
}
