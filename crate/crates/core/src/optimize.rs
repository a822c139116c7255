//! Seeded random-restart Nelder-Mead search.
//!
//! Every restart draws its starting point from its own ChaCha stream
//! (`stream = restart index` under `master_seed`), so results do not depend on
//! whether restarts run sequentially or on the rayon pool. The best value is
//! taken over restarts with ties going to the lowest restart index.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex iterations allowed per restart.
    pub max_iters: usize,
    pub objective_tol: f64,
    /// Edge length of the initial simplex, in radians.
    pub simplex_init_scale: f64,
    pub master_seed: u64,
    pub parallel: bool,
    /// Perturb-and-refine rounds after each restart's first descent; a
    /// round's result replaces the incumbent only if it is better.
    pub hops: usize,
    /// Standard deviation of the Gaussian kick applied to every coordinate
    /// at the start of a hop, in radians.
    pub hop_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            objective_tol: 1e-8,
            simplex_init_scale: 0.3,
            master_seed: 0,
            parallel: false,
            hops: 0,
            hop_scale: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_hops(mut self, hops: usize) -> Self {
        self.hops = hops;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.objective_tol > 0.0) || !(self.simplex_init_scale > 0.0) || !(self.hop_scale > 0.0) {
            return Err(Error::InvalidConfig("tolerances and simplex scale must be positive".into()));
        }
        Ok(())
    }

    /// Independent generator for restart `r`.
    pub fn restart_rng(&self, r: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(r as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Maximize => -1.0,
            Direction::Minimize => 1.0,
        }
    }

    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptReport {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub best_restart: usize,
    pub per_restart_values: Vec<f64>,
    pub evaluations: usize,
    /// Whether the winning restart met the convergence test.
    pub converged: bool,
}

pub(crate) struct LocalResult {
    pub(crate) x: Vec<f64>,
    pub(crate) value: f64,
    pub(crate) evaluations: usize,
    pub(crate) converged: bool,
}

/// Maximizes or minimizes `objective` over `R^param_count`.
///
/// Fails with [`Error::NonFiniteObjective`] as soon as the objective returns a
/// NaN or infinity.
pub fn optimize_scalar<F>(objective: F, param_count: usize, direction: Direction, config: &OptimizerConfig) -> Result<OptReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize_staged(std::slice::from_ref(&objective), param_count, direction, config)
}

/// Like [`optimize_scalar`], but each restart descends through `stages` in
/// order, starting every stage from the previous stage's optimum. Only the
/// last stage's values are reported; earlier stages act as surrogates that
/// steer the start point. Hops apply to the last stage.
pub fn optimize_staged<F>(stages: &[F], param_count: usize, direction: Direction, config: &OptimizerConfig) -> Result<OptReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    summarize(restart_endpoints(stages, param_count, direction, config)?, direction)
}

/// Endpoint of every restart, in restart order.
pub(crate) fn restart_endpoints<F>(stages: &[F], param_count: usize, direction: Direction, config: &OptimizerConfig) -> Result<Vec<LocalResult>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if param_count == 0 || stages.is_empty() {
        return Err(Error::InvalidConfig("need at least one stage and one parameter".into()));
    }
    let run = |r: usize| -> Result<LocalResult> {
        let mut rng = config.restart_rng(r);
        let mut x: Vec<f64> = (0..param_count).map(|_| rng.gen_range(-PI..PI)).collect();
        let mut evaluations = 0;
        let (last, surrogates) = stages.split_last().expect("non-empty stages");
        for stage in surrogates {
            let res = local_search(stage, x, direction, config)?;
            evaluations += res.evaluations;
            x = res.x;
        }
        let mut best = local_search(last, x, direction, config)?;
        if config.hops > 0 {
            let screen = OptimizerConfig {
                max_iters: (config.max_iters / 4).max(1),
                objective_tol: config.objective_tol * 100.0,
                ..config.clone()
            };
            let mut improved = false;
            for _ in 0..config.hops {
                let y = best.x.iter().map(|v| v + config.hop_scale * rng.sample::<f64, _>(StandardNormal)).collect();
                let trial = local_search(last, y, direction, &screen)?;
                best.evaluations += trial.evaluations;
                if direction.better(trial.value, best.value) {
                    best = LocalResult { evaluations: best.evaluations, ..trial };
                    improved = true;
                }
            }
            if improved {
                let polished = local_search(last, best.x.clone(), direction, config)?;
                let evaluations = best.evaluations + polished.evaluations;
                if !direction.better(best.value, polished.value) {
                    best = LocalResult { evaluations, ..polished };
                } else {
                    best.evaluations = evaluations;
                }
            }
        }
        best.evaluations += evaluations;
        Ok(best)
    };
    if config.parallel {
        (0..config.restarts).into_par_iter().map(run).collect()
    } else {
        (0..config.restarts).map(run).collect()
    }
}

pub(crate) fn summarize(results: Vec<LocalResult>, direction: Direction) -> Result<OptReport> {
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        if direction.better(r.value, results[best].value) {
            best = i;
        }
    }
    Ok(OptReport {
        best_value: results[best].value,
        best_params: results[best].x.clone(),
        best_restart: best,
        per_restart_values: results.iter().map(|r| r.value).collect(),
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        converged: results[best].converged,
    })
}

/// Local refinement from a given point; returns the refined point and value.
pub fn refine_from<F>(objective: F, x0: Vec<f64>, direction: Direction, config: &OptimizerConfig) -> Result<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> f64,
{
    let r = local_search(&objective, x0, direction, config)?;
    Ok((r.x, r.value, r.evaluations))
}

/// Nelder-Mead from `x0`, re-seeding the simplex at the incumbent whenever a
/// run stops early, until a fresh run no longer improves by `objective_tol`
/// or the iteration budget is spent.
fn local_search<F>(objective: &F, x0: Vec<f64>, direction: Direction, config: &OptimizerConfig) -> Result<LocalResult>
where
    F: Fn(&[f64]) -> f64,
{
    let sign = direction.sign();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        let v = objective(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { value: v });
        }
        Ok(sign * v)
    };

    let mut budget = config.max_iters;
    let mut x = x0;
    let mut fx = eval(&x)?;
    let mut converged = false;
    while budget > 0 {
        let run = nelder_mead(&mut eval, &x, fx, config.simplex_init_scale, budget, config.objective_tol)?;
        budget -= run.iterations;
        let improvement = fx - run.value;
        x = run.x;
        fx = run.value;
        converged = run.converged;
        if !run.converged || improvement < config.objective_tol {
            break;
        }
    }
    Ok(LocalResult { x, value: sign * fx, evaluations, converged })
}

struct SimplexRun {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

const STALL_WINDOW: usize = 50;
const MIN_DIAMETER: f64 = 1e-9;

/// Minimizes with adaptive coefficients (reflection 1, expansion 1 + 2/n,
/// contraction 3/4 − 1/2n, shrink 1 − 1/n).
fn nelder_mead<G>(eval: &mut G, x0: &[f64], f0: f64, scale: f64, max_iters: usize, tol: f64) -> Result<SimplexRun>
where
    G: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let nf = n as f64;
    let (rho, chi, gamma, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let f = eval(&x)?;
        simplex.push((x, f));
    }

    let mut history: Vec<f64> = Vec::with_capacity(max_iters.min(4096));
    let mut centroid = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        history.push(best);

        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < MIN_DIAMETER {
            converged = true;
            break;
        }
        if history.len() > STALL_WINDOW && history[history.len() - 1 - STALL_WINDOW] - best < tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let worst = simplex[n].1;
        let second_worst = simplex[n - 1].1;
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(rho, &simplex[n].0);
        let fr = eval(&xr)?;
        if fr < best {
            let xe = along(rho * chi, &simplex[n].0);
            let fe = eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < worst {
            let xc = along(rho * gamma, &simplex[n].0);
            let fc = eval(&xc)?;
            let ok = fc <= fr;
            (xc, fc, ok)
        } else {
            let xc = along(-gamma, &simplex[n].0);
            let fc = eval(&xc)?;
            let ok = fc < worst;
            (xc, fc, ok)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (x, f) in simplex.iter_mut().skip(1) {
            for (xi, ai) in x.iter_mut().zip(&anchor) {
                *xi = ai + sigma * (*xi - ai);
            }
            *f = eval(x)?;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(SimplexRun { x, value, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        (0..=n).map(|i| f(lo + (hi - lo) * i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn negative_norm_peaks_at_origin() {
        let cfg = OptimizerConfig::default().with_restarts(4);
        let rep = optimize_scalar(|x| -x.iter().map(|v| v * v).sum::<f64>(), 3, Direction::Maximize, &cfg).unwrap();
        assert!(rep.best_value.abs() < 1e-6);
        assert!(rep.best_value <= 0.0);
        assert!(rep.best_params.iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn constant_objective_converges() {
        let cfg = OptimizerConfig::default().with_restarts(2);
        let rep = optimize_scalar(|_| 7.0, 2, Direction::Minimize, &cfg).unwrap();
        assert_eq!(rep.best_value, 7.0);
        assert!(rep.converged);
    }

    #[test]
    fn sine_matches_grid_oracle() {
        let oracle = grid_max(f64::sin, -PI, PI, 100_000);
        let cfg = OptimizerConfig::default().with_restarts(4);
        let rep = optimize_scalar(|x| x[0].sin(), 1, Direction::Maximize, &cfg).unwrap();
        assert!((rep.best_value - oracle).abs() < 1e-6);
        assert!((rep.best_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_minimum() {
        let cfg = OptimizerConfig { max_iters: 5000, ..OptimizerConfig::default().with_restarts(4) };
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let rep = optimize_scalar(f, 2, Direction::Minimize, &cfg).unwrap();
        assert!(rep.best_value < 1e-8);
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let f = |x: &[f64]| (x[0] * 1.3).sin() * (x[1] - 0.2).cos() + 0.1 * x[2];
        let base = OptimizerConfig::default().with_restarts(8).with_seed(42);
        let a = optimize_scalar(f, 3, Direction::Maximize, &base).unwrap();
        let b = optimize_scalar(f, 3, Direction::Maximize, &base).unwrap();
        let c = optimize_scalar(f, 3, Direction::Maximize, &base.clone().with_parallel(true)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn larger_budget_never_worse() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + (5.0 * x[1]).cos() * x[0].cos();
        let small = optimize_scalar(f, 2, Direction::Maximize, &OptimizerConfig::default().with_restarts(8)).unwrap();
        let big = optimize_scalar(f, 2, Direction::Maximize, &OptimizerConfig::default().with_restarts(64)).unwrap();
        assert!(big.best_value >= small.best_value - 1e-12);
        assert_eq!(&big.per_restart_values[..8], &small.per_restart_values[..]);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let cfg = OptimizerConfig::default().with_restarts(1);
        let err = optimize_scalar(|x| if x[0] > 10.0 { 1.0 } else { f64::NAN }, 1, Direction::Minimize, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective { .. }));
    }

    #[test]
    fn best_is_extremum_of_restarts() {
        let f = |x: &[f64]| (x[0]).sin() * (2.0 * x[1]).sin();
        let rep = optimize_scalar(f, 2, Direction::Minimize, &OptimizerConfig::default().with_restarts(5)).unwrap();
        let min = rep.per_restart_values.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(rep.best_value, min);
    }

    #[test]
    fn invalid_configs() {
        let f = |_: &[f64]| 0.0;
        assert!(optimize_scalar(f, 1, Direction::Minimize, &OptimizerConfig::default().with_restarts(0)).is_err());
        assert!(optimize_scalar(f, 0, Direction::Minimize, &OptimizerConfig::default()).is_err());
    }
}
