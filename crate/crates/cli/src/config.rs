//! TOML experiment configuration: optional keys resolve against benchmark
//! and protocol defaults.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use lse_core::acquisition::{AcquisitionKind, AcquisitionPolicy};
use lse_core::benchmarks::{BenchmarkSpec, TestFunction};
use lse_core::margin::MarginPolicy;
use lse_core::runner::{ExperimentConfig, FsConfig, StopRule, StoppingConfig, VerifyConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    benchmark: BenchmarkSection,
    #[serde(default)]
    acquisition: AcquisitionSection,
    #[serde(default)]
    margin: MarginSection,
    #[serde(default)]
    stopping: StoppingSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    fs: FsSection,
    #[serde(default)]
    verify: VerifySection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkSection {
    function: TestFunction,
    #[serde(default = "default_resolution")]
    resolution: usize,
    bounds: Option<Vec<(f64, f64)>>,
    theta: Option<f64>,
    noise_std: Option<f64>,
}

fn default_resolution() -> usize {
    20
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcquisitionSection {
    kind: Option<String>,
    beta: Option<f64>,
    allow_repeats: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginSection {
    kind: Option<String>,
    l_measurements: Option<u32>,
    eps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoppingSection {
    designated: Option<StopRule>,
    monitor_fc: Option<bool>,
    monitor_fs: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    delta: Option<f64>,
    beta: Option<f64>,
    budget: Option<usize>,
    n_seeds: Option<usize>,
    base_seed: Option<u64>,
    n_initial: Option<usize>,
    refit: Option<bool>,
    priors_enabled: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FsSection {
    target_f: Option<f64>,
    percentile: Option<f64>,
    n_samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySection {
    cadence: Option<usize>,
    n_paths: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("config does not parse")
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let function = self.benchmark.function;
        let (default_theta, default_noise) = function.default_theta_noise();
        let benchmark = BenchmarkSpec {
            function,
            resolution: self.benchmark.resolution,
            bounds: self
                .benchmark
                .bounds
                .clone()
                .unwrap_or_else(|| function.default_bounds()),
            theta: self.benchmark.theta.unwrap_or(default_theta),
            noise_std: self.benchmark.noise_std.unwrap_or(default_noise),
        };

        let kind = match self.acquisition.kind.as_deref().unwrap_or("proposed") {
            "proposed" => AcquisitionKind::Proposed,
            "misclass_baseline" => AcquisitionKind::MisclassBaseline,
            "straddle" => AcquisitionKind::Straddle {
                beta: self.acquisition.beta.unwrap_or(1.96),
            },
            "uncertainty_sampling" => AcquisitionKind::UncertaintySampling,
            other => bail!(
                "acquisition.kind: unknown strategy {other:?} (expected proposed, \
                 misclass_baseline, straddle, or uncertainty_sampling)"
            ),
        };
        let acquisition = AcquisitionPolicy {
            kind,
            allow_repeats: self.acquisition.allow_repeats.unwrap_or(true),
        };

        let margin = match self.margin.kind.as_deref().unwrap_or("adaptive") {
            "adaptive" => MarginPolicy::Adaptive {
                l_measurements: self.margin.l_measurements.unwrap_or(5),
            },
            "fixed" => match self.margin.eps {
                Some(eps) => MarginPolicy::Fixed { eps },
                None => bail!("margin.eps: required when margin.kind = \"fixed\""),
            },
            other => bail!("margin.kind: unknown policy {other:?} (expected adaptive or fixed)"),
        };

        let stopping = StoppingConfig {
            designated: self.stopping.designated.unwrap_or(StopRule::Proposed),
            monitor_fc: self.stopping.monitor_fc.unwrap_or(true),
            monitor_fs: self.stopping.monitor_fs.unwrap_or(false),
        };

        let defaults = ExperimentConfig::new(benchmark.clone());
        let config = ExperimentConfig {
            benchmark,
            acquisition,
            margin,
            stopping,
            delta: self.run.delta.unwrap_or(defaults.delta),
            beta: self.run.beta.unwrap_or(defaults.beta),
            budget: self.run.budget.unwrap_or(defaults.budget),
            n_seeds: self.run.n_seeds.unwrap_or(defaults.n_seeds),
            base_seed: self.run.base_seed.unwrap_or(defaults.base_seed),
            n_initial: self.run.n_initial.unwrap_or(defaults.n_initial),
            refit: self.run.refit.unwrap_or(defaults.refit),
            priors_enabled: self.run.priors_enabled.unwrap_or(defaults.priors_enabled),
            fs: FsConfig {
                target_f: self.fs.target_f.unwrap_or(defaults.fs.target_f),
                percentile: self.fs.percentile.unwrap_or(defaults.fs.percentile),
                n_samples: self.fs.n_samples.unwrap_or(defaults.fs.n_samples),
            },
            verify: VerifyConfig {
                cadence: self.verify.cadence.unwrap_or(defaults.verify.cadence),
                n_paths: self.verify.n_paths.unwrap_or(defaults.verify.n_paths),
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// Key-by-key reference for the config file, kept next to the structs it
/// documents.
pub const CONFIG_REFERENCE: &[(&str, &str)] = &[
    ("benchmark.function", "test function: sphere | rosenbrock | branin | booth | cross_in_tray | holder_table (required)"),
    ("benchmark.resolution", "grid points per axis (default 20)"),
    ("benchmark.bounds", "domain box per axis, e.g. [[-5.0, 10.0], [0.0, 15.0]] (default: suite-standard domain)"),
    ("benchmark.theta", "level-set threshold (default: per-function experiment value)"),
    ("benchmark.noise_std", "observation noise standard deviation (default: per-function experiment value)"),
    ("acquisition.kind", "proposed | misclass_baseline | straddle | uncertainty_sampling (default proposed)"),
    ("acquisition.beta", "straddle exploration weight (default 1.96, straddle only)"),
    ("acquisition.allow_repeats", "may the same candidate be selected twice (default true)"),
    ("margin.kind", "adaptive | fixed (default adaptive)"),
    ("margin.l_measurements", "adaptive-margin measurement budget L (default 5)"),
    ("margin.eps", "fixed margin width (required when margin.kind = fixed)"),
    ("stopping.designated", "rule that terminates the run: budget | proposed | fc | fs (default proposed)"),
    ("stopping.monitor_fc", "record the fully-classified criterion each iteration (default true)"),
    ("stopping.monitor_fs", "record the F-score sampling criterion each iteration (default false)"),
    ("run.delta", "confidence level for the stopping bound and adaptive margin (default 0.99)"),
    ("run.beta", "interval-rule width for FC and baselines (default 1.96)"),
    ("run.budget", "maximum iterations per run (default 300)"),
    ("run.n_seeds", "independent runs per suite (default 5)"),
    ("run.base_seed", "seed of the first run; later runs use base+1, base+2, ... (default 0)"),
    ("run.n_initial", "random initial observations per run (default 5)"),
    ("run.refit", "refit hyperparameters every iteration (default true)"),
    ("run.priors_enabled", "apply gamma priors to rho and the length scale (default true)"),
    ("fs.target_f", "desired F-score for the FS criterion (default 0.95)"),
    ("fs.percentile", "probability level: stop when the (100-p)th percentile clears the target (default 95)"),
    ("fs.n_samples", "posterior sample paths per FS check (default 1000)"),
    ("verify.cadence", "verify the stopping bound every k iterations; 0 disables (default 0)"),
    ("verify.n_paths", "sample paths per bound verification (default 10000)"),
];
