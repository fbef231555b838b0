//! End-to-end estimation loop, multi-seed suites, parameter sweeps, and
//! trace persistence.
//!
//! One run: observe a few random initial points, then loop — refit
//! hyperparameters, compute the posterior over the grid, derive the margin,
//! classify, record metrics and every monitored stopping rule, pick the next
//! point by the acquisition score, observe it — until the designated rule
//! fires or the budget runs out. Four decoupled random substreams (initial
//! design, observation noise, F-score sampling, verification sampling) make
//! traces reproducible and let monitoring be toggled without disturbing the
//! trajectory.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{score, select_next, AcquisitionKind, AcquisitionPolicy};
use crate::benchmarks::{eval_true, make_grid, observe, BenchmarkSpec};
use crate::classification::{classify_proposed, classify_standard};
use crate::error::{LseError, Result};
use crate::gp::{
    fit_hyperparameters, joint_posterior, posterior, Dataset, HyperparamBounds, KernelHyperparams,
    MeanFunction, LAMBDA_RANGE,
};
use crate::margin::{adaptive_eps, MarginPolicy};
use crate::metrics::{evaluation_prediction, f_score, metric_lower_bounds, MetricBounds};
use crate::probabilities::class_probs;
use crate::stopping::{check_fc, check_fs, check_proposed, StoppingReport};
use crate::verify::empirical_eps_accuracy_prob;

/// Which stopping rule actually terminates the run. `Budget` runs to the
/// end while the others are merely monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    Budget,
    Proposed,
    Fc,
    Fs,
}

/// Designated stopping rule plus which extra rules to monitor. The proposed
/// bound costs nothing and is always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingConfig {
    pub designated: StopRule,
    pub monitor_fc: bool,
    pub monitor_fs: bool,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            designated: StopRule::Proposed,
            monitor_fc: true,
            monitor_fs: false,
        }
    }
}

/// F-score sampling criterion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsConfig {
    pub target_f: f64,
    pub percentile: f64,
    pub n_samples: usize,
}

impl Default for FsConfig {
    fn default() -> Self {
        Self {
            target_f: 0.95,
            percentile: 95.0,
            n_samples: 1000,
        }
    }
}

/// Monte-Carlo verification of the stopping bound along the run.
/// `cadence = 0` disables it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub cadence: usize,
    pub n_paths: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            cadence: 0,
            n_paths: 10_000,
        }
    }
}

/// Everything a run needs. Serialized verbatim into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    pub acquisition: AcquisitionPolicy,
    pub margin: MarginPolicy,
    pub stopping: StoppingConfig,
    /// Confidence level for the proposed criterion and the adaptive margin.
    pub delta: f64,
    /// β of the interval classification rule (FC and baselines).
    pub beta: f64,
    pub budget: usize,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub n_initial: usize,
    pub refit: bool,
    pub priors_enabled: bool,
    pub fs: FsConfig,
    pub verify: VerifyConfig,
}

impl ExperimentConfig {
    /// Experiment defaults around a benchmark: proposed acquisition,
    /// adaptive margin with L = 5, δ = 0.99, β = 1.96, budget 300, five
    /// random initial observations.
    pub fn new(benchmark: BenchmarkSpec) -> Self {
        Self {
            benchmark,
            acquisition: AcquisitionPolicy::proposed(),
            margin: MarginPolicy::Adaptive { l_measurements: 5 },
            stopping: StoppingConfig::default(),
            delta: 0.99,
            beta: 1.96,
            budget: 300,
            n_seeds: 5,
            base_seed: 0,
            n_initial: 5,
            refit: true,
            priors_enabled: true,
            fs: FsConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.benchmark.validate()?;
        self.acquisition.validate()?;
        self.margin.validate()?;
        let check = |ok: bool, key: &str, reason: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(LseError::InvalidConfig {
                    key: key.into(),
                    reason,
                })
            }
        };
        check(
            self.delta > 0.0 && self.delta < 1.0,
            "delta",
            format!("must be in (0,1), got {}", self.delta),
        )?;
        check(
            self.beta > 0.0 && self.beta.is_finite(),
            "beta",
            format!("must be positive, got {}", self.beta),
        )?;
        check(self.budget >= 1, "budget", "must be at least 1".into())?;
        check(self.n_seeds >= 1, "n_seeds", "must be at least 1".into())?;
        check(self.n_initial >= 1, "n_initial", "must be at least 1".into())?;
        check(
            self.fs.target_f > 0.0 && self.fs.target_f <= 1.0,
            "fs.target_f",
            format!("must be in (0,1], got {}", self.fs.target_f),
        )?;
        check(
            self.fs.percentile > 0.0 && self.fs.percentile < 100.0,
            "fs.percentile",
            format!("must be in (0,100), got {}", self.fs.percentile),
        )?;
        check(
            self.fs.n_samples >= 100,
            "fs.n_samples",
            "must be at least 100".into(),
        )?;
        check(
            self.verify.cadence == 0 || self.verify.n_paths >= 100,
            "verify.n_paths",
            "must be at least 100 when verification is on".into(),
        )?;
        Ok(())
    }

    fn needs_fs(&self) -> bool {
        self.stopping.monitor_fs || self.stopping.designated == StopRule::Fs
    }
}

/// Monte-Carlo check of the stopping bound at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyPoint {
    pub estimate: f64,
    pub stderr: f64,
}

/// Everything recorded at one iteration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iteration: usize,
    pub selected: usize,
    pub observed: f64,
    pub hyperparams: KernelHyperparams,
    pub eps: f64,
    pub f_score: f64,
    pub stopping: StoppingReport,
    pub metric_bounds: MetricBounds,
    pub verify: Option<VerifyPoint>,
}

/// Why the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    DesignatedFired,
    BudgetExhausted,
    CandidatesExhausted,
}

/// First iteration at which each monitored rule was satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FirstTriggers {
    pub proposed: Option<usize>,
    pub fc: Option<usize>,
    pub fs: Option<usize>,
}

/// Complete, replayable record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTrace {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
    pub first_triggers: FirstTriggers,
    pub stop_reason: StopReason,
}

// The four decoupled substreams of a run seed.
const STREAM_INIT: u64 = 0x1;
const STREAM_NOISE: u64 = 0x2;
const STREAM_FS: u64 = 0x3;
const STREAM_VERIFY: u64 = 0x4;

fn substream_seed(seed: u64, tag: u64) -> u64 {
    // splitmix-style mix so adjacent seeds do not share streams
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn initial_hyperparams(dataset: &Dataset, spec: &BenchmarkSpec) -> KernelHyperparams {
    let n = dataset.len();
    let var = if n >= 2 {
        let mean = dataset.outputs().iter().sum::<f64>() / n as f64;
        dataset
            .outputs()
            .iter()
            .map(|y| (y - mean) * (y - mean))
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    let rho = if var > 1e-12 { var } else { 1.0 };
    let diag: f64 = spec
        .bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt();
    let ell = 0.2 * diag;
    // noise variance guess: one percent of the signal variance
    let lambda = (100.0 / rho).clamp(LAMBDA_RANGE.0, LAMBDA_RANGE.1);
    KernelHyperparams::new(rho, ell, lambda)
}

/// Execute one seeded run.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<ExperimentTrace> {
    config.validate()?;
    let spec = &config.benchmark;
    let grid = make_grid(spec);
    let n = grid.len();
    let theta = spec.theta;
    let truth: Vec<f64> = grid
        .iter()
        .map(|x| eval_true(spec, x))
        .collect::<Result<_>>()?;
    let true_upper: Vec<usize> = (0..n).filter(|&i| truth[i] > theta).collect();
    let mean = MeanFunction::new(theta);
    let hp_bounds = HyperparamBounds::default();

    let mut init_rng = ChaCha12Rng::seed_from_u64(substream_seed(seed, STREAM_INIT));
    let mut noise_rng = ChaCha12Rng::seed_from_u64(substream_seed(seed, STREAM_NOISE));
    let fs_seed = substream_seed(seed, STREAM_FS);
    let verify_seed = substream_seed(seed, STREAM_VERIFY);

    let mut dataset = Dataset::new();
    let mut visited: HashSet<usize> = HashSet::new();
    for _ in 0..config.n_initial {
        let idx = init_rng.gen_range(0..n);
        let y = observe(spec, &grid[idx], &mut noise_rng)?;
        dataset.push(grid[idx].clone(), y);
        visited.insert(idx);
    }

    let mut hp = initial_hyperparams(&dataset, spec);
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut first = FirstTriggers::default();
    let mut stop_reason = StopReason::BudgetExhausted;

    for iteration in 1..=config.budget {
        if config.refit {
            hp = fit_hyperparameters(&dataset, &hp, &mean, &hp_bounds, config.priors_enabled).params;
        }
        let post = posterior(&dataset, &hp, &mean, &grid)?;

        let eps = match config.margin {
            MarginPolicy::Fixed { eps } => eps,
            // stationary kernel: k(x,x) = rho everywhere
            MarginPolicy::Adaptive { l_measurements } => {
                adaptive_eps(hp.rho, hp.lambda, l_measurements, config.delta, n)
            }
        };

        let tps: Vec<_> = (0..n)
            .map(|i| class_probs(post.mu[i], post.sigma[i], theta, eps))
            .collect();
        let standard_triplet = classify_standard(&post.mu, &post.sigma, theta, config.beta);
        let recorded_triplet = match config.acquisition.kind {
            AcquisitionKind::Proposed => classify_proposed(&tps),
            _ => standard_triplet.clone(),
        };

        let pred_upper = evaluation_prediction(&post.mu, theta);
        let f = f_score(&pred_upper, &true_upper, n);
        let bounds_lb = metric_lower_bounds(&recorded_triplet);

        let (proposed_stop, proposed_bound) = check_proposed(&tps, config.delta);
        let fc_stop = (config.stopping.monitor_fc || config.stopping.designated == StopRule::Fc)
            .then(|| check_fc(&standard_triplet));

        let need_jp = config.needs_fs()
            || (config.verify.cadence > 0 && iteration % config.verify.cadence == 0);
        let jp = if need_jp {
            Some(joint_posterior(&dataset, &hp, &mean, &grid)?)
        } else {
            None
        };

        let (fs_stop, fs_percentile) = match (config.needs_fs(), &jp) {
            (true, Some(jp)) => {
                let (stop, q) = check_fs(
                    jp,
                    &pred_upper,
                    theta,
                    config.fs.target_f,
                    config.fs.percentile,
                    config.fs.n_samples,
                    substream_seed(fs_seed, iteration as u64),
                )?;
                (Some(stop), Some(q))
            }
            _ => (None, None),
        };

        let verify = match (&jp, config.verify.cadence) {
            (Some(jp), cadence) if cadence > 0 && iteration % cadence == 0 => {
                // the certified bound applies to the probability-rule triplet
                let proposed_triplet = match config.acquisition.kind {
                    AcquisitionKind::Proposed => recorded_triplet.clone(),
                    _ => classify_proposed(&tps),
                };
                let (estimate, stderr) = empirical_eps_accuracy_prob(
                    jp,
                    &proposed_triplet,
                    theta,
                    eps,
                    config.verify.n_paths,
                    substream_seed(verify_seed, iteration as u64),
                )?;
                Some(VerifyPoint { estimate, stderr })
            }
            _ => None,
        };

        if proposed_stop && first.proposed.is_none() {
            first.proposed = Some(iteration);
        }
        if fc_stop == Some(true) && first.fc.is_none() {
            first.fc = Some(iteration);
        }
        if fs_stop == Some(true) && first.fs.is_none() {
            first.fs = Some(iteration);
        }

        let scores: Vec<f64> = (0..n)
            .map(|i| score(&config.acquisition, &tps[i], post.mu[i], post.sigma[i], theta))
            .collect();
        let selected = match select_next(&config.acquisition, &scores, &visited) {
            Ok(idx) => idx,
            Err(LseError::CandidatesExhausted { .. }) => {
                stop_reason = StopReason::CandidatesExhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let observed = observe(spec, &grid[selected], &mut noise_rng)?;
        dataset.push(grid[selected].clone(), observed);
        visited.insert(selected);

        records.push(IterationRecord {
            iteration,
            selected,
            observed,
            hyperparams: hp,
            eps,
            f_score: f,
            stopping: StoppingReport {
                proposed_bound,
                proposed_stop,
                fc_stop,
                fs_percentile,
                fs_stop,
            },
            metric_bounds: bounds_lb,
            verify,
        });

        let designated_fired = match config.stopping.designated {
            StopRule::Budget => false,
            StopRule::Proposed => proposed_stop,
            StopRule::Fc => fc_stop == Some(true),
            StopRule::Fs => fs_stop == Some(true),
        };
        if designated_fired {
            stop_reason = StopReason::DesignatedFired;
            break;
        }
    }

    Ok(ExperimentTrace {
        config: config.clone(),
        seed,
        records,
        first_triggers: first,
        stop_reason,
    })
}

/// A suite of independent runs with seeds base, base+1, …
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub traces: Vec<ExperimentTrace>,
    /// (seed, error message) for runs that failed; the suite keeps going.
    pub failures: Vec<(u64, String)>,
}

/// Run `n_seeds` independent runs, optionally across threads. Results are
/// ordered by seed regardless of scheduling.
pub fn run_suite(config: &ExperimentConfig, jobs: usize) -> SuiteOutcome {
    let seeds: Vec<u64> = (0..config.n_seeds as u64)
        .map(|k| config.base_seed.wrapping_add(k))
        .collect();
    let jobs = jobs.max(1).min(seeds.len().max(1));
    let mut slots: Vec<Option<std::result::Result<ExperimentTrace, String>>> =
        vec![None; seeds.len()];
    if jobs == 1 {
        for (i, &seed) in seeds.iter().enumerate() {
            slots[i] = Some(run_single(config, seed).map_err(|e| e.to_string()));
        }
    } else {
        let results: Vec<(usize, std::result::Result<ExperimentTrace, String>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..jobs)
                    .map(|w| {
                        let seeds = &seeds;
                        scope.spawn(move || {
                            let mut out = Vec::new();
                            let mut i = w;
                            while i < seeds.len() {
                                out.push((i, run_single(config, seeds[i]).map_err(|e| e.to_string())));
                                i += jobs;
                            }
                            out
                        })
                    })
                    .collect();
                handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
            });
        for (i, r) in results {
            slots[i] = Some(r);
        }
    }
    let mut outcome = SuiteOutcome {
        traces: Vec::new(),
        failures: Vec::new(),
    };
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.expect("every seed scheduled") {
            Ok(trace) => outcome.traces.push(trace),
            Err(msg) => outcome.failures.push((seeds[i], msg)),
        }
    }
    outcome
}

/// Sweepable configuration axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Adaptive-margin measurement budget L.
    L,
    Theta,
    GridResolution,
    EpsilonFixed,
    NoiseStd,
}

impl SweepAxis {
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut config = base.clone();
        match self {
            SweepAxis::L => {
                let l = value.round();
                if l < 1.0 || (l - value).abs() > 1e-9 {
                    return Err(LseError::InvalidConfig {
                        key: "sweep.values".into(),
                        reason: format!("L must be a positive integer, got {value}"),
                    });
                }
                config.margin = MarginPolicy::Adaptive {
                    l_measurements: l as u32,
                };
            }
            SweepAxis::Theta => config.benchmark.theta = value,
            SweepAxis::GridResolution => {
                let r = value.round();
                if r < 2.0 || (r - value).abs() > 1e-9 {
                    return Err(LseError::InvalidConfig {
                        key: "sweep.values".into(),
                        reason: format!("grid resolution must be an integer >= 2, got {value}"),
                    });
                }
                config.benchmark.resolution = r as usize;
            }
            SweepAxis::EpsilonFixed => config.margin = MarginPolicy::Fixed { eps: value },
            SweepAxis::NoiseStd => config.benchmark.noise_std = value,
        }
        config.validate()?;
        Ok(config)
    }
}

/// One suite per value, all sharing the base seed for paired comparison.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    jobs: usize,
) -> Result<Vec<(f64, SuiteOutcome)>> {
    if values.is_empty() {
        return Err(LseError::InvalidConfig {
            key: "sweep.values".into(),
            reason: "value list must not be empty".into(),
        });
    }
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let config = axis.apply(base, v)?;
        out.push((v, run_suite(&config, jobs)));
    }
    Ok(out)
}

/// Per-iteration aggregate across a suite's traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub iteration: usize,
    /// Number of traces still running at this iteration.
    pub n_active: usize,
    pub f_mean: f64,
    pub f_std: f64,
    pub bound_mean: f64,
    /// Runs whose rule had triggered by this iteration.
    pub stopped_proposed: usize,
    pub stopped_fc: usize,
    pub stopped_fs: usize,
}

/// Aggregate a suite into per-iteration rows (mean/std over traces that are
/// still running at each iteration).
pub fn summarize(traces: &[ExperimentTrace]) -> Vec<SummaryRow> {
    let horizon = traces.iter().map(|t| t.records.len()).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let at: Vec<&IterationRecord> = traces
            .iter()
            .filter_map(|tr| tr.records.get(t - 1))
            .collect();
        let n_active = at.len();
        if n_active == 0 {
            break;
        }
        let f_mean = at.iter().map(|r| r.f_score).sum::<f64>() / n_active as f64;
        let f_std = if n_active > 1 {
            (at.iter()
                .map(|r| (r.f_score - f_mean) * (r.f_score - f_mean))
                .sum::<f64>()
                / (n_active - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        let bound_mean = at.iter().map(|r| r.stopping.proposed_bound).sum::<f64>() / n_active as f64;
        let count = |get: fn(&FirstTriggers) -> Option<usize>| {
            traces
                .iter()
                .filter(|tr| get(&tr.first_triggers).is_some_and(|ft| ft <= t))
                .count()
        };
        rows.push(SummaryRow {
            iteration: t,
            n_active,
            f_mean,
            f_std,
            bound_mean,
            stopped_proposed: count(|f| f.proposed),
            stopped_fc: count(|f| f.fc),
            stopped_fs: count(|f| f.fs),
        });
    }
    rows
}

/// Mean and sample standard deviation of a rule's first-trigger iteration
/// across a suite, over the traces where it fired at all.
pub fn stop_time_stats(
    traces: &[ExperimentTrace],
    get: fn(&FirstTriggers) -> Option<usize>,
) -> Option<(f64, f64)> {
    let times: Vec<f64> = traces
        .iter()
        .filter_map(|t| get(&t.first_triggers).map(|v| v as f64))
        .collect();
    if times.is_empty() {
        return None;
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let std = if times.len() > 1 {
        (times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (times.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    Header {
        config: ExperimentConfig,
        seed: u64,
    },
    Iteration(IterationRecord),
    Footer {
        first_triggers: FirstTriggers,
        stop_reason: StopReason,
    },
}

/// Write a trace as self-describing JSON lines: header with the config
/// snapshot, one line per iteration, footer with the stop summary.
pub fn write_trace<W: Write>(trace: &ExperimentTrace, mut w: W) -> Result<()> {
    let mut emit = |line: &TraceLine| -> Result<()> {
        let s = serde_json::to_string(line).map_err(|e| LseError::TraceIo(e.to_string()))?;
        writeln!(w, "{s}").map_err(|e| LseError::TraceIo(e.to_string()))
    };
    emit(&TraceLine::Header {
        config: trace.config.clone(),
        seed: trace.seed,
    })?;
    for r in &trace.records {
        emit(&TraceLine::Iteration(r.clone()))?;
    }
    emit(&TraceLine::Footer {
        first_triggers: trace.first_triggers,
        stop_reason: trace.stop_reason,
    })
}

/// Read a trace back from its JSON-lines form.
pub fn read_trace<R: BufRead>(r: R) -> Result<ExperimentTrace> {
    let mut header: Option<(ExperimentConfig, u64)> = None;
    let mut records = Vec::new();
    let mut footer: Option<(FirstTriggers, StopReason)> = None;
    for line in r.lines() {
        let line = line.map_err(|e| LseError::TraceIo(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine =
            serde_json::from_str(&line).map_err(|e| LseError::TraceIo(e.to_string()))?;
        match parsed {
            TraceLine::Header { config, seed } => header = Some((config, seed)),
            TraceLine::Iteration(rec) => records.push(rec),
            TraceLine::Footer {
                first_triggers,
                stop_reason,
            } => footer = Some((first_triggers, stop_reason)),
        }
    }
    let (config, seed) = header.ok_or_else(|| LseError::TraceIo("missing header line".into()))?;
    let (first_triggers, stop_reason) =
        footer.ok_or_else(|| LseError::TraceIo("missing footer line".into()))?;
    Ok(ExperimentTrace {
        config,
        seed,
        records,
        first_triggers,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::TestFunction;

    fn tiny_config() -> ExperimentConfig {
        let mut spec = BenchmarkSpec::for_function(TestFunction::Sphere);
        spec.resolution = 5;
        spec.noise_std = 0.5;
        let mut config = ExperimentConfig::new(spec);
        config.budget = 6;
        config.n_seeds = 2;
        config.n_initial = 2;
        config
    }

    #[test]
    fn budget_one_produces_one_record() {
        let mut config = tiny_config();
        config.budget = 1;
        config.stopping.designated = StopRule::Budget;
        let trace = run_single(&config, 3).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::BudgetExhausted);
    }

    #[test]
    fn traces_replay_exactly() {
        let config = tiny_config();
        let a = run_single(&config, 11).unwrap();
        let b = run_single(&config, 11).unwrap();
        assert_eq!(a, b);
        let c = run_single(&config, 12).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn monitoring_fs_does_not_perturb_the_trajectory() {
        let mut with_fs = tiny_config();
        with_fs.stopping.monitor_fs = true;
        with_fs.stopping.designated = StopRule::Budget;
        let mut without_fs = tiny_config();
        without_fs.stopping.monitor_fs = false;
        without_fs.stopping.designated = StopRule::Budget;
        let a = run_single(&with_fs, 5).unwrap();
        let b = run_single(&without_fs, 5).unwrap();
        let sel_a: Vec<usize> = a.records.iter().map(|r| r.selected).collect();
        let sel_b: Vec<usize> = b.records.iter().map(|r| r.selected).collect();
        assert_eq!(sel_a, sel_b);
        assert!(a.records.iter().all(|r| r.stopping.fs_percentile.is_some()));
        assert!(b.records.iter().all(|r| r.stopping.fs_percentile.is_none()));
    }

    #[test]
    fn no_repeat_mode_exhausts_gracefully() {
        let mut config = tiny_config();
        config.acquisition.allow_repeats = false;
        config.budget = 100; // grid has only 25 candidates
        config.stopping.designated = StopRule::Budget;
        let trace = run_single(&config, 1).unwrap();
        assert_eq!(trace.stop_reason, StopReason::CandidatesExhausted);
        let mut seen = HashSet::new();
        for r in &trace.records {
            assert!(seen.insert(r.selected), "repeat at iteration {}", r.iteration);
        }
        assert!(trace.records.len() <= 25);
    }

    #[test]
    fn designated_rule_matches_stop_iteration() {
        let mut config = tiny_config();
        config.benchmark.noise_std = 0.0;
        config.budget = 80;
        config.stopping.designated = StopRule::Proposed;
        let trace = run_single(&config, 2).unwrap();
        if trace.stop_reason == StopReason::DesignatedFired {
            assert_eq!(trace.first_triggers.proposed, Some(trace.records.len()));
            let last = trace.records.last().unwrap();
            assert!(last.stopping.proposed_stop);
            assert!(last.stopping.proposed_bound >= config.delta);
        }
    }

    #[test]
    fn suite_runs_all_seeds() {
        let config = tiny_config();
        let outcome = run_suite(&config, 1);
        assert_eq!(outcome.traces.len(), 2);
        assert!(outcome.failures.is_empty());
        assert_eq!(outcome.traces[0].seed, config.base_seed);
        assert_eq!(outcome.traces[1].seed, config.base_seed + 1);
    }

    #[test]
    fn parallel_suite_equals_serial_suite() {
        let config = tiny_config();
        let serial = run_suite(&config, 1);
        let parallel = run_suite(&config, 2);
        assert_eq!(serial.traces, parallel.traces);
    }

    #[test]
    fn summary_aggregates_means() {
        let config = tiny_config();
        let outcome = run_suite(&config, 1);
        let rows = summarize(&outcome.traces);
        assert!(!rows.is_empty());
        let t0 = &rows[0];
        let expect = outcome.traces.iter().map(|t| t.records[0].f_score).sum::<f64>()
            / outcome.traces.len() as f64;
        assert!((t0.f_mean - expect).abs() < 1e-12);
        assert_eq!(t0.iteration, 1);
    }

    #[test]
    fn sweep_produces_one_suite_per_value() {
        let mut config = tiny_config();
        config.budget = 3;
        config.n_seeds = 1;
        let sweeps = run_sweep(&config, SweepAxis::L, &[1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(sweeps.len(), 3);
        for (value, outcome) in &sweeps {
            assert_eq!(outcome.traces.len(), 1);
            match outcome.traces[0].config.margin {
                MarginPolicy::Adaptive { l_measurements } => {
                    assert_eq!(f64::from(l_measurements), *value)
                }
                _ => panic!("sweep must set the adaptive margin"),
            }
        }
        assert!(run_sweep(&config, SweepAxis::L, &[], 1).is_err());
    }

    #[test]
    fn stop_time_statistics() {
        let config = tiny_config();
        let mut traces = run_suite(&config, 1).traces;
        traces[0].first_triggers.proposed = Some(4);
        traces[1].first_triggers.proposed = Some(4);
        let (mean, std) = stop_time_stats(&traces, |f| f.proposed).unwrap();
        assert_eq!((mean, std), (4.0, 0.0));
        traces[1].first_triggers.proposed = Some(6);
        let (mean, std) = stop_time_stats(&traces, |f| f.proposed).unwrap();
        assert_eq!(mean, 5.0);
        assert!((std - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(stop_time_stats(&traces, |f| f.fs).is_none());
    }

    #[test]
    fn trace_round_trips_through_jsonl() {
        let config = tiny_config();
        let trace = run_single(&config, 4).unwrap();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let back = read_trace(&buf[..]).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn trace_bytes_are_deterministic() {
        let config = tiny_config();
        let a = run_single(&config, 9).unwrap();
        let b = run_single(&config, 9).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_trace(&a, &mut buf_a).unwrap();
        write_trace(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }
}
