//! Deterministic global-best particle swarm optimization over box-bounded
//! continuous decision vectors.
//!
//! The update rule is the canonical inertia-weight form
//! `v <- w*v + c1*r1.(pbest - x) + c2*r2.(gbest - x)` with per-dimension
//! velocity clamping to 20% of the box width and position clamping that
//! zeroes the velocity on the clamped dimension. The RNG is ChaCha8 keyed
//! via `seed_from_u64`; uniform draws happen in particle-major,
//! dimension-minor order, so equal seeds give bit-identical runs regardless
//! of how fitness evaluations are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Fraction of each dimension's box width used as the velocity clamp.
const VELOCITY_CLAMP_FRACTION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum PsoError {
    #[error("invalid PSO config: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid bounds: {0}")]
    InvalidBounds(&'static str),
}

/// Swarm hyperparameters. The defaults follow the widely used
/// constriction-equivalent setting (w = 0.72, c1 = c2 = 1.49).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Stop once the best fitness improves by less than this over
    /// `stagnation_window` iterations; zero disables the early stop.
    pub stagnation_tol: f64,
    pub stagnation_window: usize,
    /// Parallel fitness evaluations per iteration; 0 or 1 runs sequentially.
    pub threads: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 40,
            iterations: 300,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            seed: 0,
            stagnation_tol: 1e-8,
            stagnation_window: 50,
            threads: 0,
        }
    }
}

impl PsoConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), PsoError> {
        if self.swarm_size < 2 {
            return Err(PsoError::InvalidConfig("swarm_size must be at least 2"));
        }
        if self.iterations == 0 {
            return Err(PsoError::InvalidConfig("iterations must be positive"));
        }
        if !(0.0..1.0).contains(&self.inertia) {
            return Err(PsoError::InvalidConfig("inertia must lie in [0, 1)"));
        }
        let weight_ok = |w: f64| w.is_finite() && w > 0.0;
        if !weight_ok(self.cognitive) || !weight_ok(self.social) {
            return Err(PsoError::InvalidConfig(
                "cognitive and social weights must be positive",
            ));
        }
        if self.stagnation_window == 0 {
            return Err(PsoError::InvalidConfig(
                "stagnation_window must be positive",
            ));
        }
        if self.stagnation_tol.is_nan() || self.stagnation_tol < 0.0 {
            return Err(PsoError::InvalidConfig(
                "stagnation_tol must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Per-dimension `[lo, hi]` search box.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self, PsoError> {
        if intervals.is_empty() {
            return Err(PsoError::InvalidBounds("at least one dimension required"));
        }
        for (lo, hi) in &intervals {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(PsoError::InvalidBounds(
                    "each dimension needs finite lo < hi",
                ));
            }
        }
        Ok(Self(intervals))
    }

    /// Same `[lo, hi]` interval replicated over `dim` dimensions.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self, PsoError> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.0)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Iterations,
    Stagnation,
}

/// Outcome of one optimization run.
#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after initialization and after each iteration;
    /// non-increasing.
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub terminated_by: Termination,
    /// RNG algorithm identifier for cross-run reproducibility.
    pub generator: &'static str,
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_fitness: f64,
}

/// Minimizes `objective` over the box. Non-finite objective values are
/// treated as `+inf`. Equal seed and config give a bit-identical result.
pub fn optimize<F>(objective: F, bounds: &Bounds, config: &PsoConfig) -> Result<OptResult, PsoError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eval = |x: &[f64]| {
        let f = objective(x);
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    };
    let pool = (config.threads > 1)
        .then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .ok()
        })
        .flatten();
    let eval_all = |positions: &[Vec<f64>]| -> Vec<f64> {
        match &pool {
            Some(pool) => pool.install(|| positions.par_iter().map(|x| eval(x)).collect()),
            None => positions.iter().map(|x| eval(x)).collect(),
        }
    };

    let vmax: Vec<f64> = bounds
        .intervals()
        .iter()
        .map(|(lo, hi)| VELOCITY_CLAMP_FRACTION * (hi - lo))
        .collect();

    let positions: Vec<Vec<f64>> = (0..config.swarm_size)
        .map(|_| {
            bounds
                .intervals()
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let fitness = eval_all(&positions);
    let mut evaluations = config.swarm_size;

    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(&fitness)
        .map(|(position, &f)| Particle {
            velocity: vec![0.0; dim],
            best_position: position.clone(),
            best_fitness: f,
            position,
        })
        .collect();
    let best = swarm
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_fitness.total_cmp(&b.1.best_fitness))
        .map(|(i, _)| i)
        .expect("swarm_size >= 2");
    let mut gbest_position = swarm[best].best_position.clone();
    let mut gbest_fitness = swarm[best].best_fitness;
    let mut history = vec![gbest_fitness];

    let mut terminated_by = Termination::Iterations;
    for _ in 0..config.iterations {
        for particle in swarm.iter_mut() {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = config.inertia * particle.velocity[d]
                    + config.cognitive * r1 * (particle.best_position[d] - particle.position[d])
                    + config.social * r2 * (gbest_position[d] - particle.position[d]);
                particle.velocity[d] = v.clamp(-vmax[d], vmax[d]);
                particle.position[d] += particle.velocity[d];
                let (lo, hi) = bounds.intervals()[d];
                if particle.position[d] < lo {
                    particle.position[d] = lo;
                    particle.velocity[d] = 0.0;
                } else if particle.position[d] > hi {
                    particle.position[d] = hi;
                    particle.velocity[d] = 0.0;
                }
            }
        }

        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        let fitness = eval_all(&positions);
        evaluations += config.swarm_size;

        // Personal and global bests applied in particle order, independent
        // of evaluation scheduling.
        for (particle, &f) in swarm.iter_mut().zip(&fitness) {
            if f < particle.best_fitness {
                particle.best_fitness = f;
                particle.best_position.clone_from(&particle.position);
            }
            if f < gbest_fitness {
                gbest_fitness = f;
                gbest_position.clone_from(&particle.position);
            }
        }
        history.push(gbest_fitness);

        if config.stagnation_tol > 0.0 && history.len() > config.stagnation_window {
            let before = history[history.len() - 1 - config.stagnation_window];
            if before - gbest_fitness < config.stagnation_tol {
                terminated_by = Termination::Stagnation;
                break;
            }
        }
    }

    Ok(OptResult {
        best_position: gbest_position,
        best_fitness: gbest_fitness,
        history,
        evaluations,
        terminated_by,
        generator: "chacha8",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_converges_below_threshold() {
        let bounds = Bounds::uniform(3, -5.0, 5.0).unwrap();
        let config = PsoConfig::default().with_seed(42);
        let result = optimize(sphere, &bounds, &config).unwrap();
        assert!(
            result.best_fitness < 1e-4,
            "fitness {}",
            result.best_fitness
        );
        assert!(bounds.contains(&result.best_position));
        assert_eq!(result.generator, "chacha8");
    }

    #[test]
    fn one_dimensional_quadratic_locates_optimum() {
        let bounds = Bounds::uniform(1, -10.0, 10.0).unwrap();
        let config = PsoConfig::default().with_seed(7);
        let result = optimize(|x| (x[0] - 2.0) * (x[0] - 2.0), &bounds, &config).unwrap();
        assert!((result.best_position[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn constant_objective_flat_history() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let config = PsoConfig::default().with_seed(3);
        let result = optimize(|_| 4.5, &bounds, &config).unwrap();
        assert_eq!(result.best_fitness, 4.5);
        assert!(result.history.iter().all(|&f| f == 4.5));
        assert_eq!(result.terminated_by, Termination::Stagnation);
    }

    #[test]
    fn every_evaluated_position_is_inside_the_box() {
        let bounds = Bounds::new(vec![(-2.0, 1.0), (0.5, 3.0), (-4.0, -1.0)]).unwrap();
        let check = bounds.clone();
        let objective = move |x: &[f64]| {
            assert!(check.contains(x), "position outside bounds: {x:?}");
            sphere(x)
        };
        let config = PsoConfig {
            iterations: 80,
            ..PsoConfig::default().with_seed(11)
        };
        let result = optimize(objective, &bounds, &config).unwrap();
        assert!(bounds.contains(&result.best_position));
    }

    #[test]
    fn history_is_monotone_non_increasing() {
        let bounds = Bounds::uniform(4, -3.0, 3.0).unwrap();
        let result = optimize(
            |x| x.iter().map(|v| (v - 0.7).powi(2)).sum(),
            &bounds,
            &PsoConfig::default().with_seed(19),
        )
        .unwrap();
        for pair in result.history.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn equal_seeds_give_identical_runs() {
        let bounds = Bounds::uniform(3, -5.0, 5.0).unwrap();
        let config = PsoConfig::default().with_seed(42);
        let a = optimize(sphere, &bounds, &config).unwrap();
        let b = optimize(sphere, &bounds, &config).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best_position, b.best_position);
        assert_eq!(a.evaluations, b.evaluations);

        let c = optimize(sphere, &bounds, &config.with_seed(43)).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn parallel_evaluation_matches_sequential() {
        let bounds = Bounds::uniform(3, -5.0, 5.0).unwrap();
        let sequential = PsoConfig {
            iterations: 60,
            ..PsoConfig::default().with_seed(42)
        };
        let parallel = PsoConfig {
            threads: 4,
            ..sequential
        };
        let a = optimize(sphere, &bounds, &sequential).unwrap();
        let b = optimize(sphere, &bounds, &parallel).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best_position, b.best_position);
    }

    #[test]
    fn evaluation_count_matches_contract() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let config = PsoConfig {
            swarm_size: 7,
            iterations: 25,
            stagnation_tol: 0.0, // run to completion
            ..PsoConfig::default().with_seed(1)
        };
        let result = optimize(sphere, &bounds, &config).unwrap();
        assert_eq!(result.history.len(), 26);
        assert_eq!(result.evaluations, 7 * result.history.len());
        assert_eq!(result.terminated_by, Termination::Iterations);
    }

    #[test]
    fn non_finite_objective_treated_as_penalty() {
        let bounds = Bounds::uniform(1, -1.0, 1.0).unwrap();
        let result = optimize(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    x[0]
                }
            },
            &bounds,
            &PsoConfig::default().with_seed(5),
        )
        .unwrap();
        assert!(result.best_fitness.is_finite());
        assert!(result.best_position[0] >= 0.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Bounds::new(vec![]).is_err());
        assert!(Bounds::new(vec![(1.0, 1.0)]).is_err());
        assert!(Bounds::new(vec![(0.0, f64::INFINITY)]).is_err());

        let bounds = Bounds::uniform(1, 0.0, 1.0).unwrap();
        let bad = PsoConfig {
            swarm_size: 1,
            ..PsoConfig::default()
        };
        assert!(optimize(sphere, &bounds, &bad).is_err());
        let bad = PsoConfig {
            inertia: 1.0,
            ..PsoConfig::default()
        };
        assert!(optimize(sphere, &bounds, &bad).is_err());
    }
}
