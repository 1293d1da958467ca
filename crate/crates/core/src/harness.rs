//! Instance generation in the sparse regime and sampler/oracle comparisons.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{gale_ryser_feasible, Instance};
use crate::logspace::ln_biguint;
use crate::mckay::mckay_estimate;
use crate::oracle::dp_count;
use crate::sis::{run_batch_range, BatchConfig};
use crate::stats::{aggregate, EstimateSummary};
use crate::{rng, Error, Result};

pub const GENERATION_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Number of rows.
    pub m: usize,
    /// Row sums are drawn uniformly from `1..=r_max`.
    pub r_max: usize,
    /// Column sums are capped at `ceil(d^c_cap_exponent)`.
    pub c_cap_exponent: f64,
    pub seed: u64,
    /// Optional absolute cap applied on top of the exponent cap.
    #[serde(default)]
    pub max_col: Option<usize>,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        if self.r_max == 0 {
            return Err(Error::InvalidParameter("r_max must be at least 1".into()));
        }
        if !(self.c_cap_exponent > 0.0 && self.c_cap_exponent <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "c_cap_exponent {} outside (0, 0.5]",
                self.c_cap_exponent
            )));
        }
        if self.max_col == Some(0) {
            return Err(Error::InvalidParameter("max_col must be positive".into()));
        }
        Ok(())
    }

    /// Column cap for total `d`.
    pub fn col_cap(&self, d: usize) -> usize {
        let cap = (d as f64).powf(self.c_cap_exponent).ceil() as usize;
        let cap = self.max_col.map_or(cap, |m| cap.min(m));
        cap.max(1)
    }
}

/// Draws row sums, fills columns with unit mass up to the cap (a new column
/// opens only when every open one is full) and resamples the rows with the
/// next sub-seed until the margins pass Gale–Ryser.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    spec.validate()?;
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut rng = rng::stream(spec.seed, attempt as u64);
        let rows: Vec<usize> = (0..spec.m)
            .map(|_| rng.random_range(1..=spec.r_max))
            .collect();
        let d: usize = rows.iter().sum();
        let cap = spec.col_cap(d);
        let mut cols: Vec<usize> = Vec::new();
        for _ in 0..d {
            match cols.last_mut() {
                Some(open) if *open < cap => *open += 1,
                _ => cols.push(1),
            }
        }
        let instance = Instance::new(rows, cols)?;
        if gale_ryser_feasible(&instance) {
            return Ok(instance);
        }
    }
    Err(Error::GenerationExhausted {
        attempts: GENERATION_ATTEMPTS,
    })
}

/// `n × n` instance with every margin equal to `k`.
pub fn regular_instance(n: usize, k: usize) -> Instance {
    Instance::new(vec![k; n], vec![k; n]).expect("equal totals")
}

/// Every instance with `1..=max_m` rows, `1..=max_n` columns, margins in
/// `1..=max_margin` and equal totals. Rows range over all vectors, columns
/// over nonincreasing vectors; infeasible margins are included.
pub fn margin_grid(max_m: usize, max_n: usize, max_margin: usize) -> Vec<Instance> {
    fn vectors(len: usize, max: usize, nonincreasing: bool) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v: Vec<usize>| {
                    let top = if nonincreasing {
                        *v.last().unwrap_or(&max)
                    } else {
                        max
                    };
                    (1..=top).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    let mut grid = Vec::new();
    for m in 1..=max_m {
        let all_rows = vectors(m, max_margin, false);
        for n in 1..=max_n {
            let all_cols = vectors(n, max_margin, true);
            for rows in &all_rows {
                let total: usize = rows.iter().sum();
                for cols in all_cols.iter().filter(|c| c.iter().sum::<usize>() == total) {
                    grid.push(Instance::raw(rows.clone(), cols.clone()));
                }
            }
        }
    }
    grid
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub oracle_ms: f64,
    pub approx_ms: f64,
    pub sampler_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub log_mu_exact: f64,
    /// Exact count in decimal.
    pub mu_exact: String,
    pub log_mu_approx: f64,
    pub summary: EstimateSummary,
    /// `ln μ_approx − ln μ_exact`.
    pub log_err_approx: f64,
    /// `ln μ̂ − ln μ_exact`.
    pub log_err_sampler: f64,
    pub timing: PhaseTiming,
}

pub fn compare_run(instance: &Instance, reps: usize, seed: u64) -> Result<ComparisonRecord> {
    compare_run_with(instance, reps, seed, 0.95, &BatchConfig::default())
}

pub fn compare_run_with(
    instance: &Instance,
    reps: usize,
    seed: u64,
    confidence: f64,
    config: &BatchConfig,
) -> Result<ComparisonRecord> {
    let clock = Instant::now();
    let exact = dp_count(instance)?;
    let log_mu_exact = ln_biguint(&exact);
    let oracle_ms = ms(clock);

    let clock = Instant::now();
    let approx = mckay_estimate(instance)?;
    let approx_ms = ms(clock);

    let clock = Instant::now();
    let results = run_batch_range(instance, 0..reps as u64, seed, config);
    let summary = aggregate(&results, approx.log_eta, confidence)?;
    let sampler_ms = ms(clock);

    Ok(ComparisonRecord {
        log_mu_exact,
        mu_exact: exact.to_string(),
        log_mu_approx: approx.log_mu_approx,
        log_err_approx: approx.log_mu_approx - log_mu_exact,
        log_err_sampler: summary.log_mu_hat - log_mu_exact,
        summary,
        timing: PhaseTiming {
            oracle_ms,
            approx_ms,
            sampler_ms,
        },
    })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}
