use std::collections::BTreeMap;
use std::time::Instant;

use bct_core::harness::{compare_run_with, generate_instance, GeneratorSpec};
use bct_core::instance::gale_ryser_feasible;
use bct_core::logspace::ln_biguint;
use bct_core::mckay::{eta_log, mckay_estimate};
use bct_core::oracle::{brute_force_count, dp_count};
use bct_core::sequence::sequence_diagnostics;
use bct_core::sis::{run_batch_range, BatchConfig, Execution, ReplicationResult, SisConfig};
use bct_core::stats::{
    aggregate, chebyshev_plan, chernoff_plan, efficiency_report, EstimateSummary, RegimeFlags,
};
use bct_core::{Error, Instance};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, ExactMethod, Plan, RunConfig, Threads};
use crate::input::parse_instance_file;
use crate::output::*;
use crate::CliError;

type Timing = BTreeMap<&'static str, f64>;

/// Executes one subcommand and returns its document.
pub fn run(config: &RunConfig) -> Result<Document, CliError> {
    config.validate()?;
    let clock = Instant::now();
    let mut doc = with_threads(config.threads, || dispatch(config))??;
    doc.timing_ms.insert("total", ms(clock));
    Ok(doc)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Threads, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Threads::Auto => Ok(f()),
        Threads::Count(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: Threads, f: impl FnOnce() -> T) -> Result<T, CliError> {
    Ok(f())
}

fn dispatch(config: &RunConfig) -> Result<Document, CliError> {
    let mut timing = Timing::new();
    let (instance, method, results) = match config.command {
        Command::Gen => {
            let (instance, results) = generate(config)?;
            (instance, Value::Null, to_value(results))
        }
        command => {
            let path = config.instance_path.as_deref().expect("validated");
            let clock = Instant::now();
            let instance = parse_instance_file(path)?;
            timing.insert("parse", ms(clock));
            let (method, results) = match command {
                Command::Estimate => estimate(&instance, config, &mut timing)?,
                Command::Exact => exact(&instance, config, &mut timing)?,
                Command::Approx => approx(&instance, &mut timing)?,
                Command::Validate => (Value::Null, validate(&instance)),
                Command::Compare => compare(&instance, config, &mut timing)?,
                Command::Gen => unreachable!(),
            };
            (instance, method, results)
        }
    };
    let method = match method {
        Value::Null => serde_json::json!({ "name": config.command.as_str() }),
        m => m,
    };
    Ok(Document {
        schema_version: SCHEMA_VERSION,
        command: config.command.as_str(),
        instance: InstanceInfo::from(&instance),
        method,
        results,
        timing_ms: timing,
        seed: config.seed,
    })
}

fn batch_config(config: &RunConfig) -> BatchConfig {
    BatchConfig {
        sis: SisConfig {
            drafting: config.drafting.method(),
        },
        execution: if config.threads == Threads::Count(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    }
}

fn sampling_method(config: &RunConfig, plan: Plan) -> Value {
    let planned = plan != Plan::Fixed;
    to_value(SamplingMethod {
        name: "sis",
        drafting: config.drafting.as_str(),
        rng: "chacha20",
        plan: plan.as_str(),
        epsilon: planned.then_some(config.epsilon),
        delta: planned.then_some(config.delta),
        pilot_reps: planned.then_some(config.pilot),
        max_reps: planned.then_some(config.max_reps),
        confidence: config.confidence,
    })
}

fn estimate(
    instance: &Instance,
    config: &RunConfig,
    timing: &mut Timing,
) -> Result<(Value, Value), CliError> {
    let batch = batch_config(config);
    let seed = config.seed;
    let log_eta = eta_log(instance.cols(), instance.m()).ok();
    let eta_or_nan = log_eta.unwrap_or(f64::NAN);

    let clock = Instant::now();
    let (results, planned_reps, plan_used, pilot_cv_hat, truncated) = match config.plan {
        Plan::Fixed => {
            let results = run_batch_range(instance, 0..config.reps, seed, &batch);
            timing.insert("sampling", ms(clock));
            (results, None, "fixed", None, false)
        }
        plan => {
            let mut results = run_batch_range(instance, 0..config.pilot, seed, &batch);
            let pilot = aggregate(&results, eta_or_nan, config.confidence)?;
            timing.insert("pilot", ms(clock));
            let (k, used) = plan_replications(plan, &results, &pilot, config)?;
            let target = k.min(config.max_reps);
            let clock = Instant::now();
            if target > config.pilot {
                results.extend(run_batch_range(
                    instance,
                    config.pilot..target,
                    seed,
                    &batch,
                ));
            }
            timing.insert("sampling", ms(clock));
            (
                results,
                Some(k),
                used,
                Some(pilot.cv_hat),
                k > config.max_reps,
            )
        }
    };

    let summary = aggregate(&results, eta_or_nan, config.confidence)?;
    let total_ops: u128 = results.iter().map(|r| r.ops as u128).sum();
    let out = EstimateResults {
        log_mu_hat: summary.log_mu_hat,
        mu_hat_string: None,
        log_u_hat: log_eta.map(|_| summary.log_u_hat),
        cv_hat: summary.cv_hat,
        rel_std_err: summary.rel_std_err,
        ci_log: ci(&summary),
        confidence: summary.confidence,
        acceptance_rate: summary.acceptance_rate,
        completed: summary.completed,
        reps_used: results.len() as u64,
        planned_reps,
        plan_used,
        pilot_cv_hat,
        truncated,
        log_mu_approx: mckay_estimate(instance).ok().map(|a| a.log_mu_approx),
        mean_ops_per_replication: total_ops as f64 / results.len() as f64,
        regime_flags: RegimeFlags::of(instance),
        fourth_moment_score: sequence_diagnostics(instance.cols()).fourth_moment_score,
    };
    Ok((sampling_method(config, config.plan), to_value(out)))
}

/// Replication count for a planned run and the planner that produced it.
/// Chernoff falls back to Chebyshev when its rate estimate is degenerate.
fn plan_replications(
    plan: Plan,
    pilot_results: &[ReplicationResult],
    pilot: &EstimateSummary,
    config: &RunConfig,
) -> Result<(u64, &'static str), CliError> {
    let chebyshev = || chebyshev_plan(pilot.cv_hat, config.epsilon, config.delta);
    match plan {
        Plan::Fixed => unreachable!(),
        Plan::Chebyshev => Ok((chebyshev(), "chebyshev")),
        Plan::Chernoff => {
            let normalized: Vec<f64> = pilot_results
                .iter()
                .map(|r| (r.log_count_estimate - pilot.log_mu_hat).exp())
                .collect();
            match chernoff_plan(&normalized, config.epsilon, config.delta) {
                Ok(k) => Ok((k, "chernoff")),
                Err(Error::RateDegenerate { .. }) => Ok((chebyshev(), "chebyshev-fallback")),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn exact(
    instance: &Instance,
    config: &RunConfig,
    timing: &mut Timing,
) -> Result<(Value, Value), CliError> {
    let clock = Instant::now();
    let count = match config.exact_method {
        ExactMethod::Dp => dp_count(instance)?,
        ExactMethod::BruteForce => BigUint::from(brute_force_count(instance)?),
    };
    timing.insert("oracle", ms(clock));
    let feasible = count.bits() > 0;
    let log_mu = ln_biguint(&count);
    let log_eta = eta_log(instance.cols(), instance.m()).ok();
    let out = ExactResults {
        log_mu_hat: feasible.then_some(log_mu),
        mu_hat_string: count.to_string(),
        log_u_hat: log_eta.filter(|_| feasible).map(|eta| log_mu - eta),
        feasible,
    };
    let method = serde_json::json!({ "name": "exact", "algorithm": config.exact_method.as_str() });
    Ok((method, to_value(out)))
}

fn approx(instance: &Instance, timing: &mut Timing) -> Result<(Value, Value), CliError> {
    let clock = Instant::now();
    let a = mckay_estimate(instance)?;
    timing.insert("approx", ms(clock));
    let out = ApproxResults {
        log_mu_approx: a.log_mu_approx,
        log_phi: a.log_phi,
        alpha: a.alpha,
        log_eta: a.log_eta,
        log_v: a.log_v,
        regime_flags: RegimeFlags::of(instance),
    };
    Ok((serde_json::json!({ "name": "mckay" }), to_value(out)))
}

fn validate(instance: &Instance) -> Value {
    let diag = sequence_diagnostics(instance.cols());
    let out = ValidateResults {
        feasible: gale_ryser_feasible(instance),
        ratio_path: diag.ratio_path.iter().map(|r| r.value()).collect(),
        ratio_path_nonincreasing: diag.ratio_path_nonincreasing(),
        fourth_moment_score: diag.fourth_moment_score,
        regime_flags: RegimeFlags::of(instance),
        efficiency: efficiency_report(instance, None, &diag),
    };
    to_value(out)
}

fn generate(config: &RunConfig) -> Result<(Instance, GenResults), CliError> {
    let opts = &config.gen;
    let spec = GeneratorSpec {
        m: opts.m,
        r_max: opts.r_max,
        c_cap_exponent: opts.cap_exponent,
        seed: config.seed,
        max_col: opts.max_col,
    };
    let instance = generate_instance(&spec)?;
    if let Some(path) = &opts.instance_out {
        let file = serde_json::json!({ "rows": instance.rows(), "cols": instance.cols() });
        let text = serde_json::to_string(&file).expect("plain JSON") + "\n";
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let out = GenResults {
        col_cap: spec.col_cap(instance.d()),
        spec,
        rows: instance.rows().to_vec(),
        cols: instance.cols().to_vec(),
        feasible: gale_ryser_feasible(&instance),
    };
    Ok((instance, out))
}

fn compare(
    instance: &Instance,
    config: &RunConfig,
    timing: &mut Timing,
) -> Result<(Value, Value), CliError> {
    let record = compare_run_with(
        instance,
        config.reps as usize,
        config.seed,
        config.confidence,
        &batch_config(config),
    )?;
    timing.insert("oracle", record.timing.oracle_ms);
    timing.insert("approx", record.timing.approx_ms);
    timing.insert("sampling", record.timing.sampler_ms);
    let s = &record.summary;
    let out = CompareResults {
        log_mu_exact: record.log_mu_exact,
        mu_hat_string: record.mu_exact.clone(),
        log_mu_approx: record.log_mu_approx,
        log_mu_hat: s.log_mu_hat,
        log_err_approx: record.log_err_approx,
        log_err_sampler: record.log_err_sampler,
        cv_hat: s.cv_hat,
        rel_std_err: s.rel_std_err,
        ci_log: ci(s),
        acceptance_rate: s.acceptance_rate,
        reps_used: s.reps as u64,
        regime_flags: RegimeFlags::of(instance),
    };
    Ok((sampling_method(config, Plan::Fixed), to_value(out)))
}

fn ci(summary: &EstimateSummary) -> Option<[f64; 2]> {
    Some([summary.ci_log_lower?, summary.ci_log_upper?])
}

fn to_value<T: Serialize>(value: T) -> Value {
    serde_json::to_value(value).expect("result types serialize")
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}
