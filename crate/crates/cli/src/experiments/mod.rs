//! Experiment orchestration: randomized suites, residuals and the
//! viscosity comparison.

mod compare;
mod estimate;
mod residuals;
mod suites;

pub use compare::{compare_limits, reflected_datum, CompareRow, CompareTable};
pub use estimate::{estimate_suite, EstimateConfig, EstimateResult, ScatterRow, SuiteKind};
pub use residuals::{front_residuals, random_test_functions, residual_suite, ResidualConfig, ResidualResult, TestFunction};
pub use suites::{
    random_half_line_data, riemann_oracle_suite, tv_suite, OracleConfig, OracleResult, TvConfig, TvRun, TvSuiteResult,
};

use bdry_fronts::State;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator for run `index` of a suite seeded with `seed`; independent of
/// the worker count.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Maps `f` over `items` on a pool of `jobs` workers; output order is the
/// input order.
pub fn par_map<T, R, F>(jobs: usize, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    if jobs <= 1 {
        return items.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    pool.install(|| items.into_par_iter().map(f).collect())
}

pub(crate) fn max_abs_diff(a: &State, b: &State) -> f64 {
    (a - b).amax()
}

/// `true` when `b / a ∈ [1/factor, factor]`; two values below `floor` count
/// as equal.
pub fn stable_within(a: f64, b: f64, factor: f64, floor: f64) -> bool {
    if a.abs() <= floor && b.abs() <= floor {
        return true;
    }
    if !(a > 0.0 && b > 0.0) {
        return false;
    }
    let r = b / a;
    r <= factor && r >= 1.0 / factor
}
