//! Test-function oracles, grid discretization, and noise injection.
//!
//! Functions and default domains follow the standard optimization benchmark
//! suite; default thresholds and noise levels are the ones the experiments
//! use. The true upper set over a grid depends only on the problem setup,
//! never on noise, and serves as evaluation ground truth.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LseError, Result};
use crate::gp::InputPoint;

/// The supported closed-form test functions (all two-dimensional here).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Sphere,
    Rosenbrock,
    Branin,
    Booth,
    CrossInTray,
    HolderTable,
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Sphere => "sphere",
            TestFunction::Rosenbrock => "rosenbrock",
            TestFunction::Branin => "branin",
            TestFunction::Booth => "booth",
            TestFunction::CrossInTray => "cross_in_tray",
            TestFunction::HolderTable => "holder_table",
        }
    }

    /// Suite-standard domain. Rosenbrock uses the restricted hypercube so a
    /// θ = 100 contour cuts a substantial region instead of a sliver.
    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        match self {
            TestFunction::Sphere => vec![(-5.12, 5.12); 2],
            TestFunction::Rosenbrock => vec![(-2.048, 2.048); 2],
            TestFunction::Branin => vec![(-5.0, 10.0), (0.0, 15.0)],
            TestFunction::Booth => vec![(-10.0, 10.0); 2],
            TestFunction::CrossInTray => vec![(-10.0, 10.0); 2],
            TestFunction::HolderTable => vec![(-10.0, 10.0); 2],
        }
    }

    /// Experiment-default threshold and noise standard deviation.
    pub fn default_theta_noise(self) -> (f64, f64) {
        match self {
            TestFunction::Sphere => (20.0, 2.0),
            TestFunction::Rosenbrock => (100.0, 30.0),
            TestFunction::Branin => (100.0, 20.0),
            TestFunction::Booth => (500.0, 30.0),
            TestFunction::CrossInTray => (-1.5, 0.01),
            TestFunction::HolderTable => (-3.0, 0.3),
        }
    }
}

/// A discretized, noise-observed benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub function: TestFunction,
    /// Grid points per axis.
    pub resolution: usize,
    /// Domain box per axis.
    pub bounds: Vec<(f64, f64)>,
    pub theta: f64,
    pub noise_std: f64,
}

impl BenchmarkSpec {
    /// Spec with the suite-standard domain and experiment-default θ/noise.
    pub fn for_function(function: TestFunction) -> Self {
        let (theta, noise_std) = function.default_theta_noise();
        Self {
            function,
            resolution: 20,
            bounds: function.default_bounds(),
            theta,
            noise_std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(LseError::InvalidConfig {
                key: "benchmark.resolution".into(),
                reason: format!("must be at least 2, got {}", self.resolution),
            });
        }
        if self.bounds.is_empty() {
            return Err(LseError::InvalidConfig {
                key: "benchmark.bounds".into(),
                reason: "at least one axis required".into(),
            });
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(LseError::InvalidConfig {
                    key: format!("benchmark.bounds[{i}]"),
                    reason: format!("need finite lo < hi, got ({lo}, {hi})"),
                });
            }
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(LseError::InvalidConfig {
                key: "benchmark.noise_std".into(),
                reason: format!("must be non-negative, got {}", self.noise_std),
            });
        }
        if !self.theta.is_finite() {
            return Err(LseError::InvalidConfig {
                key: "benchmark.theta".into(),
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    fn contains(&self, x: &InputPoint) -> bool {
        x.dim() == self.bounds.len()
            && x.coords
                .iter()
                .zip(&self.bounds)
                .all(|(&c, &(lo, hi))| c >= lo - 1e-12 && c <= hi + 1e-12)
    }
}

/// Noise-free function value at a point inside the domain.
pub fn eval_true(spec: &BenchmarkSpec, x: &InputPoint) -> Result<f64> {
    if !spec.contains(x) {
        return Err(LseError::OutOfDomain {
            function: spec.function.name().into(),
            point: x.coords.clone(),
        });
    }
    let c = &x.coords;
    Ok(match spec.function {
        TestFunction::Sphere => c.iter().map(|v| v * v).sum(),
        TestFunction::Rosenbrock => c
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                100.0 * (b - a * a).powi(2) + (a - 1.0).powi(2)
            })
            .sum(),
        TestFunction::Branin => {
            let (x1, x2) = (c[0], c[1]);
            let pi = std::f64::consts::PI;
            let b = 5.1 / (4.0 * pi * pi);
            let cc = 5.0 / pi;
            let t = 1.0 / (8.0 * pi);
            (x2 - b * x1 * x1 + cc * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
        }
        TestFunction::Booth => {
            let (x1, x2) = (c[0], c[1]);
            (x1 + 2.0 * x2 - 7.0).powi(2) + (2.0 * x1 + x2 - 5.0).powi(2)
        }
        TestFunction::CrossInTray => {
            let (x1, x2) = (c[0], c[1]);
            let pi = std::f64::consts::PI;
            let inner = (x1.sin() * x2.sin() * (100.0 - (x1 * x1 + x2 * x2).sqrt() / pi).abs().exp()).abs();
            -0.0001 * (inner + 1.0).powf(0.1)
        }
        TestFunction::HolderTable => {
            let (x1, x2) = (c[0], c[1]);
            let pi = std::f64::consts::PI;
            -(x1.sin() * x2.cos() * (1.0 - (x1 * x1 + x2 * x2).sqrt() / pi).abs().exp()).abs()
        }
    })
}

/// Row-major lattice with inclusive endpoints: resolution^d points, last
/// axis fastest.
pub fn make_grid(spec: &BenchmarkSpec) -> Vec<InputPoint> {
    let d = spec.bounds.len();
    let r = spec.resolution;
    let axes: Vec<Vec<f64>> = spec
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            (0..r)
                .map(|i| lo + (hi - lo) * i as f64 / (r - 1) as f64)
                .collect()
        })
        .collect();
    let total = r.pow(d as u32);
    let mut grid = Vec::with_capacity(total);
    for flat in 0..total {
        let mut coords = vec![0.0; d];
        let mut rem = flat;
        for axis in (0..d).rev() {
            coords[axis] = axes[axis][rem % r];
            rem /= r;
        }
        grid.push(InputPoint::new(coords));
    }
    grid
}

/// Indices of grid points whose true value exceeds θ.
pub fn true_upper_set(spec: &BenchmarkSpec, grid: &[InputPoint]) -> Result<Vec<usize>> {
    let mut upper = Vec::new();
    for (i, x) in grid.iter().enumerate() {
        if eval_true(spec, x)? > spec.theta {
            upper.push(i);
        }
    }
    Ok(upper)
}

/// One noisy observation drawn from the caller's stream.
pub fn observe<R: Rng>(spec: &BenchmarkSpec, x: &InputPoint, rng: &mut R) -> Result<f64> {
    let f = eval_true(spec, x)?;
    if spec.noise_std == 0.0 {
        return Ok(f);
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(f + spec.noise_std * z)
}
