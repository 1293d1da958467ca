//! Sequential importance sampler.
//!
//! Columns are filled one at a time, largest first. Column `k` places its
//! `c_k` ones among the rows with positive residual `s_i`, drawn from the
//! conditional-Poisson design with weights `s_i·exp(2γ s_i)`, where
//! `γ = [ρ]_2 / (2 [ρ]_1²)` over the columns still to come (`γ = 0` for the
//! last column). The replication returns the reciprocal probability of the
//! table it built, so its mean is the table count μ(r, c). A replication
//! that runs out of positive rows returns zero.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{
    cp_log_pmf, esp_build, sample_drafting_with, subsets, CpDistribution, DraftingMethod,
};
use crate::instance::{vector_falling_sum, Instance};
use crate::sequence::sequence_diagnostics;
use crate::{par, rng, Error, Result};

/// Residual row sums and running likelihood of one walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    pub residuals: Vec<usize>,
    /// Number of columns already placed.
    pub col_index: usize,
    /// Tilt of the current step.
    pub gamma: f64,
    /// `ln L` accumulated so far.
    pub log_l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    /// `ln L`; `NEG_INFINITY` when the walk got stuck.
    pub log_count_estimate: f64,
    pub completed: bool,
    /// Columns placed before stopping.
    pub steps_taken: usize,
    pub fourth_moment_score: f64,
    /// Inner-loop symmetric-sum updates spent on this replication.
    pub ops: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SisConfig {
    pub drafting: DraftingMethod,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchConfig {
    pub sis: SisConfig,
    pub execution: Execution,
}

/// `[ρ]_2 / (2 [ρ]_1²)` for the columns left after popping the current one.
pub fn step_gamma(remaining_cols: &[usize]) -> f64 {
    let sum: usize = remaining_cols.iter().sum();
    let falling2 = vector_falling_sum(remaining_cols, 2).expect("column sums fit in i128");
    gamma_from_sums(falling2, sum as u64)
}

fn gamma_from_sums(falling2: i128, sum: u64) -> f64 {
    if sum == 0 {
        return 0.0;
    }
    let s = sum as f64;
    falling2 as f64 / (2.0 * s * s)
}

/// One column's proposal: the design over the active rows, and the rows
/// each design unit stands for.
#[derive(Clone, Debug)]
pub struct ColumnDistribution {
    pub dist: CpDistribution,
    /// `active[u]` is the row index of design unit `u`.
    pub active: Vec<usize>,
}

/// Builds the proposal for placing `col_sum` ones given `state.residuals`
/// and `state.gamma`.
pub fn column_distribution(state: &WalkState, col_sum: usize) -> Result<ColumnDistribution> {
    let active: Vec<usize> = (0..state.residuals.len())
        .filter(|&i| state.residuals[i] > 0)
        .collect();
    if active.len() < col_sum {
        return Err(Error::InsufficientActiveRows {
            active: active.len(),
            needed: col_sum,
        });
    }
    let log_weights = active
        .iter()
        .map(|&i| {
            let s = state.residuals[i] as f64;
            s.ln() + 2.0 * state.gamma * s
        })
        .collect();
    Ok(ColumnDistribution {
        dist: CpDistribution::new(log_weights, col_sum)?,
        active,
    })
}

/// The next move of a walk.
#[derive(Clone, Debug)]
pub enum Step {
    Complete,
    Stuck { active: usize, needed: usize },
    Column(ColumnStep),
}

#[derive(Clone, Debug)]
pub struct ColumnStep {
    pub col_sum: usize,
    pub proposal: ColumnDistribution,
    /// `ln w̃(c, A)`, the proposal's normalizer.
    pub log_norm: f64,
}

/// Algorithm state for one replication, exposed so that callers can drive
/// the walk with their own choices (exact enumeration, scripted paths).
#[derive(Clone, Debug)]
pub struct Walk<'a> {
    instance: &'a Instance,
    state: WalkState,
    tail_sum: u64,
    tail_falling2: i128,
    ops: u64,
}

impl<'a> Walk<'a> {
    /// Expects a normalized instance.
    pub fn new(instance: &'a Instance) -> Self {
        Walk {
            instance,
            state: WalkState {
                residuals: instance.rows().to_vec(),
                col_index: 0,
                gamma: 0.0,
                log_l: 0.0,
            },
            tail_sum: instance.d() as u64,
            tail_falling2: vector_falling_sum(instance.cols(), 2).expect("column sums fit in i128"),
            ops: 0,
        }
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Pops the next column, sets its tilt and builds its proposal.
    pub fn next_step(&mut self) -> Step {
        let cols = self.instance.cols();
        let k = self.state.col_index;
        if k == cols.len() {
            return Step::Complete;
        }
        let col_sum = cols[k];
        let c = col_sum as i128;
        let rest_sum = self.tail_sum - col_sum as u64;
        let rest_falling2 = self.tail_falling2 - c * (c - 1);
        self.state.gamma = gamma_from_sums(rest_falling2, rest_sum);

        let proposal = match column_distribution(&self.state, col_sum) {
            Ok(p) => p,
            Err(Error::InsufficientActiveRows { active, needed }) => {
                return Step::Stuck { active, needed }
            }
            Err(e) => unreachable!("residual weights are finite: {e}"),
        };
        self.ops += proposal.active.len() as u64;
        let table = esp_build(&proposal.dist);
        self.ops += (col_sum * proposal.active.len()) as u64;
        Step::Column(ColumnStep {
            col_sum,
            log_norm: table.log_normalizer(),
            proposal,
        })
    }

    /// Applies the chosen design units (indices into `step.proposal.active`).
    pub fn apply(&mut self, step: &ColumnStep, chosen: &[usize]) {
        let lw = step.proposal.dist.log_weights();
        let drawn: f64 = chosen.iter().map(|&u| lw[u]).sum();
        self.state.log_l += step.log_norm - drawn;
        for &u in chosen {
            self.state.residuals[step.proposal.active[u]] -= 1;
        }
        let c = step.col_sum as i128;
        self.tail_sum -= step.col_sum as u64;
        self.tail_falling2 -= c * (c - 1);
        self.state.col_index += 1;
        debug_assert_eq!(
            self.state.residuals.iter().sum::<usize>() as u64,
            self.tail_sum,
            "residual mass must match the remaining column mass"
        );
    }

    fn add_ops(&mut self, ops: u64) {
        self.ops += ops;
    }
}

pub fn run_replication<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> ReplicationResult {
    run_replication_with(instance, SisConfig::default(), rng)
}

pub fn run_replication_with<R: Rng + ?Sized>(
    instance: &Instance,
    config: SisConfig,
    rng: &mut R,
) -> ReplicationResult {
    let score = sequence_diagnostics(instance.cols()).fourth_moment_score;
    replicate(instance, config, score, rng)
}

fn replicate<R: Rng + ?Sized>(
    instance: &Instance,
    config: SisConfig,
    fourth_moment_score: f64,
    rng: &mut R,
) -> ReplicationResult {
    let mut walk = Walk::new(instance);
    loop {
        match walk.next_step() {
            Step::Complete => {
                return ReplicationResult {
                    log_count_estimate: walk.state.log_l,
                    completed: true,
                    steps_taken: walk.state.col_index,
                    fourth_moment_score,
                    ops: walk.ops,
                }
            }
            Step::Stuck { .. } => {
                return ReplicationResult {
                    log_count_estimate: f64::NEG_INFINITY,
                    completed: false,
                    steps_taken: walk.state.col_index,
                    fourth_moment_score,
                    ops: walk.ops,
                }
            }
            Step::Column(step) => {
                let mut ops = 0;
                let chosen =
                    sample_drafting_with(&step.proposal.dist, config.drafting, rng, &mut ops);
                walk.add_ops(ops);
                walk.apply(&step, &chosen);
            }
        }
    }
}

/// `reps` replications seeded from `(seed, i)`.
pub fn run_batch(instance: &Instance, reps: usize, seed: u64) -> Vec<ReplicationResult> {
    run_batch_range(instance, 0..reps as u64, seed, &BatchConfig::default())
}

/// Replications with stream indices `indices`; the result for index `i` is
/// the same whatever the range, execution mode or thread count.
pub fn run_batch_range(
    instance: &Instance,
    indices: Range<u64>,
    seed: u64,
    config: &BatchConfig,
) -> Vec<ReplicationResult> {
    let score = sequence_diagnostics(instance.cols()).fourth_moment_score;
    let start = indices.start;
    let count = indices.end.saturating_sub(start) as usize;
    let parallel = config.execution == Execution::Parallel;
    par::map_indices(count, parallel, |offset| {
        let mut rng = rng::stream(seed, start + offset as u64);
        replicate(instance, config.sis, score, &mut rng)
    })
}

/// Exact law of the estimator obtained by enumerating every decision path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathEnumeration {
    /// `E[L]`, which should equal the table count.
    pub expected_estimate: f64,
    /// `E[L²]`.
    pub second_moment: f64,
    pub completed_paths: usize,
    /// Probability that the walk gets stuck.
    pub failure_probability: f64,
}

/// Enumerates all proposal decision paths of a (small) instance. Path
/// probabilities come from the conditional-Poisson pmf of each column;
/// `limit` bounds the number of paths visited.
pub fn enumerate_paths(instance: &Instance, limit: usize) -> Result<PathEnumeration> {
    fn visit(
        walk: Walk<'_>,
        prob: f64,
        acc: &mut PathEnumeration,
        visited: &mut usize,
        limit: usize,
    ) -> Result<()> {
        let mut walk = walk;
        match walk.next_step() {
            Step::Complete => {
                *visited += 1;
                if *visited > limit {
                    return Err(Error::InvalidParameter(format!(
                        "more than {limit} decision paths"
                    )));
                }
                let l = walk.state.log_l.exp();
                acc.expected_estimate += prob * l;
                acc.second_moment += prob * l * l;
                acc.completed_paths += 1;
            }
            Step::Stuck { .. } => acc.failure_probability += prob,
            Step::Column(step) => {
                for subset in subsets(step.proposal.dist.units(), step.col_sum) {
                    let p = cp_log_pmf(&step.proposal.dist, &subset)?.exp();
                    let mut child = walk.clone();
                    child.apply(&step, &subset);
                    visit(child, prob * p, acc, visited, limit)?;
                }
            }
        }
        Ok(())
    }

    let mut acc = PathEnumeration {
        expected_estimate: 0.0,
        second_moment: 0.0,
        completed_paths: 0,
        failure_probability: 0.0,
    };
    visit(Walk::new(instance), 1.0, &mut acc, &mut 0, limit)?;
    Ok(acc)
}
