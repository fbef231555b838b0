//! Shared fixtures for the criterion benchmarks.

use lse_core::benchmarks::{make_grid, observe, BenchmarkSpec, TestFunction};
use lse_core::gp::{Dataset, InputPoint, KernelHyperparams, MeanFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub struct Fixture {
    pub spec: BenchmarkSpec,
    pub grid: Vec<InputPoint>,
    pub dataset: Dataset,
    pub hp: KernelHyperparams,
    pub mean: MeanFunction,
}

/// A mid-run Branin state: `n_obs` noisy observations scattered over the grid.
pub fn branin_state(n_obs: usize) -> Fixture {
    let spec = BenchmarkSpec::for_function(TestFunction::Branin);
    let grid = make_grid(&spec);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut dataset = Dataset::new();
    for k in 0..n_obs {
        let idx = (k * 61) % grid.len();
        let y = observe(&spec, &grid[idx], &mut rng).unwrap();
        dataset.push(grid[idx].clone(), y);
    }
    let mean = MeanFunction::new(spec.theta);
    let hp = KernelHyperparams::new(1800.0, 2.4, 1.0 / 400.0);
    Fixture {
        spec,
        grid,
        dataset,
        hp,
        mean,
    }
}
