use std::collections::BTreeMap;

use bct_core::harness::GeneratorSpec;
use bct_core::stats::{EfficiencyReport, RegimeFlags};
use bct_core::Instance;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// One run's output. `results` holds only deterministic fields; wall-clock
/// measurements live in `timing_ms`.
#[derive(Clone, Debug, Serialize)]
pub struct Document {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub instance: InstanceInfo,
    pub method: Value,
    pub results: Value,
    pub timing_ms: BTreeMap<&'static str, f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceInfo {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub d: usize,
    pub m: usize,
    pub n: usize,
}

impl From<&Instance> for InstanceInfo {
    fn from(inst: &Instance) -> Self {
        InstanceInfo {
            rows: inst.rows().to_vec(),
            cols: inst.cols().to_vec(),
            d: inst.d(),
            m: inst.m(),
            n: inst.n(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorDocument<'a> {
    pub error: &'a str,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct SamplingMethod {
    pub name: &'static str,
    pub drafting: &'static str,
    pub rng: &'static str,
    pub plan: &'static str,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub pilot_reps: Option<u64>,
    pub max_reps: Option<u64>,
    pub confidence: f64,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct EstimateResults {
    pub log_mu_hat: f64,
    /// Exact decimals come only from the oracle, never from the sampler.
    pub mu_hat_string: Option<String>,
    pub log_u_hat: Option<f64>,
    pub cv_hat: f64,
    pub rel_std_err: f64,
    pub ci_log: Option<[f64; 2]>,
    pub confidence: f64,
    pub acceptance_rate: f64,
    pub completed: usize,
    pub reps_used: u64,
    pub planned_reps: Option<u64>,
    pub plan_used: &'static str,
    pub pilot_cv_hat: Option<f64>,
    pub truncated: bool,
    pub log_mu_approx: Option<f64>,
    pub mean_ops_per_replication: f64,
    pub regime_flags: RegimeFlags,
    pub fourth_moment_score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct ExactResults {
    pub log_mu_hat: Option<f64>,
    pub mu_hat_string: String,
    pub log_u_hat: Option<f64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct ApproxResults {
    pub log_mu_approx: f64,
    pub log_phi: f64,
    pub alpha: f64,
    pub log_eta: f64,
    pub log_v: f64,
    pub regime_flags: RegimeFlags,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct ValidateResults {
    pub feasible: bool,
    pub ratio_path: Vec<f64>,
    pub ratio_path_nonincreasing: bool,
    pub fourth_moment_score: f64,
    pub regime_flags: RegimeFlags,
    pub efficiency: EfficiencyReport,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct GenResults {
    pub spec: GeneratorSpec,
    pub col_cap: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct CompareResults {
    pub log_mu_exact: f64,
    pub mu_hat_string: String,
    pub log_mu_approx: f64,
    pub log_mu_hat: f64,
    pub log_err_approx: f64,
    pub log_err_sampler: f64,
    pub cv_hat: f64,
    pub rel_std_err: f64,
    pub ci_log: Option<[f64; 2]>,
    pub acceptance_rate: f64,
    pub reps_used: u64,
    pub regime_flags: RegimeFlags,
}
