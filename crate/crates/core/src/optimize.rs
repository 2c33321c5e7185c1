//! Annealed local search over constellations for well-conditioned frames.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coherent::UnitVector;
use crate::error::{Error, Result};
use crate::frames::{gram_matrix, random_constellation, Constellation, DEFAULT_TAU};
use crate::reconstruction::derive_seed;
use crate::spin::SpinParameter;

/// Spectral functional of the Gram matrix. All variants are minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `lambda_max / lambda_min`; `+inf` on singular frames.
    ConditionNumber,
    /// `-ln det G`; `+inf` on singular frames.
    LogDet,
    /// `-lambda_min`.
    MinSingularValue,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::ConditionNumber => "condition_number",
            Objective::LogDet => "log_det",
            Objective::MinSingularValue => "min_singular_value",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "condition_number" | "condition" | "cond" => Ok(Objective::ConditionNumber),
            "log_det" | "logdet" => Ok(Objective::LogDet),
            "min_singular_value" | "min_sv" => Ok(Objective::MinSingularValue),
            _ => Err(Error::InvalidArgument(format!("unknown objective {s:?}"))),
        }
    }
}

/// Lower-is-better objective value.
pub fn objective_eval(c: &Constellation, objective: Objective) -> f64 {
    let g = gram_matrix(c);
    let singular = g.is_singular(DEFAULT_TAU);
    match objective {
        Objective::ConditionNumber if singular => f64::INFINITY,
        Objective::ConditionNumber => g.condition_number(),
        Objective::LogDet if singular => f64::INFINITY,
        Objective::LogDet => -g.log_abs_det(),
        Objective::MinSingularValue => -g.lambda_min().max(0.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub objective: Objective,
    pub iterations: usize,
    pub restarts: usize,
    /// Cap radius of proposals at temperature 1, in radians.
    pub initial_step: f64,
    /// Per-iteration temperature factor.
    pub cooling: f64,
    pub seed: u64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            objective: Objective::ConditionNumber,
            iterations: 2000,
            restarts: 1,
            initial_step: 0.5,
            cooling: 0.998,
            seed: 0,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be >= 1".into()));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cooling must lie in (0, 1), got {}",
                self.cooling
            )));
        }
        if !(self.initial_step > 0.0 && self.initial_step <= std::f64::consts::PI) {
            return Err(Error::InvalidArgument(format!(
                "initial_step must lie in (0, pi], got {}",
                self.initial_step
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iteration: usize,
    pub temperature: f64,
    /// Objective of the chain's current state after this iteration.
    pub objective: f64,
    /// Best objective seen so far across all restarts.
    pub best: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizationTrace {
    pub rows: Vec<TraceRow>,
    pub initial_objective: f64,
    pub best: Constellation,
    pub best_objective: f64,
    pub accepted_moves: usize,
}

/// Relative worsening scale at temperature 1 for the Metropolis test.
const ACCEPTANCE_SCALE: f64 = 0.05;

/// Single-point annealing. Each restart starts from `initial` with its own RNG
/// stream; the best constellation over all restarts is returned, and it is
/// never worse than `initial`.
pub fn optimize(initial: &Constellation, cfg: &OptimizationConfig) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let initial_objective = objective_eval(initial, cfg.objective);
    let mut best = initial.clone();
    let mut best_objective = initial_objective;
    let mut rows = Vec::with_capacity(cfg.iterations * cfg.restarts);
    let mut accepted_moves = 0;

    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
        let mut current = initial.clone();
        let mut current_objective = initial_objective;
        let mut temperature = 1.0;
        for iteration in 0..cfg.iterations {
            let index = rng.random_range(0..current.len());
            let proposal_point =
                current.points()[index].sample_in_cap(cfg.initial_step * temperature, &mut rng);
            let proposal = current.with_point(index, proposal_point);
            let value = objective_eval(&proposal, cfg.objective);
            let u: f64 = rng.random();
            let accepted = if value <= current_objective {
                true
            } else if value.is_finite() {
                let scale = current_objective.abs().max(f64::MIN_POSITIVE);
                let delta = (value - current_objective) / scale;
                u < (-delta / (ACCEPTANCE_SCALE * temperature)).exp()
            } else {
                false
            };
            if accepted {
                current = proposal;
                current_objective = value;
                accepted_moves += 1;
                if current_objective < best_objective {
                    best_objective = current_objective;
                    best = current.clone();
                }
            }
            rows.push(TraceRow {
                restart,
                iteration,
                temperature,
                objective: current_objective,
                best: best_objective,
                accepted,
            });
            temperature *= cfg.cooling;
        }
    }

    Ok(OptimizationTrace {
        rows,
        initial_objective,
        best,
        best_objective,
        accepted_moves,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub seed: u64,
    pub condition_number: f64,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub twice_s: u32,
    pub n_seeds: usize,
    pub master_seed: u64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub singular_count: usize,
    pub records: Vec<BaselineRecord>,
}

/// Condition numbers of `n_seeds` random constellations with seeds
/// [`derive_seed`]`(master_seed, t)`.
pub fn baseline_sweep(
    spin: SpinParameter,
    n_seeds: usize,
    master_seed: u64,
    tau: f64,
) -> Result<BaselineSummary> {
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("n_seeds must be >= 1".into()));
    }
    let records: Vec<BaselineRecord> = (0..n_seeds as u64)
        .map(|t| {
            let seed = derive_seed(master_seed, t);
            let g = gram_matrix(&random_constellation(spin, seed));
            BaselineRecord {
                seed,
                condition_number: g.condition_number(),
                singular: g.is_singular(tau),
            }
        })
        .collect();
    let mut sorted: Vec<f64> = records.iter().map(|r| r.condition_number).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(BaselineSummary {
        twice_s: spin.twice_s(),
        n_seeds,
        master_seed,
        min: sorted[0],
        median,
        max: sorted[n - 1],
        singular_count: records.iter().filter(|r| r.singular).count(),
        records,
    })
}

/// A random proper rotation matrix (row-major).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 3]; 3] {
    // columns from Gram-Schmidt on two random directions
    let a = UnitVector::random(rng).to_array();
    let b = UnitVector::random(rng).to_array();
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let mut c = [b[0] - dot * a[0], b[1] - dot * a[1], b[2] - dot * a[2]];
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
    let d = [
        a[1] * c[2] - a[2] * c[1],
        a[2] * c[0] - a[0] * c[2],
        a[0] * c[1] - a[1] * c[0],
    ];
    [[a[0], c[0], d[0]], [a[1], c[1], d[1]], [a[2], c[2], d[2]]]
}
