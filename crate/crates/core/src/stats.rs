//! Aggregation of replications and replication planning.
//!
//! Estimates are combined on the log scale; a failed replication contributes
//! a zero, never gets dropped. Planning follows the two standard tail bounds
//! for a mean of i.i.d. copies of `L/μ`: Chebyshev needs
//! `k ≥ cv² / (ε² δ)`, while a Chernoff bound with rate
//! `I(h) = sup_θ θ(1+h) − ψ(θ)` needs `k ≥ ln(2/δ) / min(I(ε), I(−ε))`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::instance::{power_sum, Instance};
use crate::logspace::log_sum_exp;
use crate::sequence::SequenceDiagnostics;
use crate::sis::ReplicationResult;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub reps: usize,
    pub completed: usize,
    /// `ln` of the sample mean of `L_i`.
    pub log_mu_hat: f64,
    /// `ln` of the sample mean of `L_i²`.
    pub log_second_moment: f64,
    pub cv_hat: f64,
    /// `cv_hat / √reps`.
    pub rel_std_err: f64,
    pub acceptance_rate: f64,
    /// `log_mu_hat − ln η(c, m)`.
    pub log_u_hat: f64,
    pub confidence: f64,
    pub ci_log_lower: Option<f64>,
    pub ci_log_upper: Option<f64>,
}

/// Normal-approximation summary of a batch. `log_eta` converts the count
/// estimate into an estimate of `u = μ/η`.
pub fn aggregate(
    results: &[ReplicationResult],
    log_eta: f64,
    confidence: f64,
) -> Result<EstimateSummary> {
    if results.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: results.len(),
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let mut logs: Vec<f64> = results.iter().map(|r| r.log_count_estimate).collect();
    // sorting makes the floating-point sums independent of input order
    logs.sort_by(|a, b| a.total_cmp(b));
    let reps = logs.len();
    let k = reps as f64;
    let completed = results.iter().filter(|r| r.completed).count();
    let acceptance_rate = completed as f64 / k;

    let max = logs[reps - 1];
    if max == f64::NEG_INFINITY {
        let summary = EstimateSummary {
            reps,
            completed,
            log_mu_hat: f64::NEG_INFINITY,
            log_second_moment: f64::NEG_INFINITY,
            cv_hat: 0.0,
            rel_std_err: 0.0,
            acceptance_rate,
            log_u_hat: f64::NEG_INFINITY,
            confidence,
            ci_log_lower: None,
            ci_log_upper: None,
        };
        return Err(Error::AllFailed(Box::new(summary)));
    }

    let scaled: Vec<f64> = logs.iter().map(|&x| (x - max).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / k;
    let mean_sq = scaled.iter().map(|y| y * y).sum::<f64>() / k;
    let var = scaled.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / k;
    let cv_hat = var.max(0.0).sqrt() / mean;
    let rel_std_err = cv_hat / k.sqrt();
    let log_mu_hat = max + mean.ln();

    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    Ok(EstimateSummary {
        reps,
        completed,
        log_mu_hat,
        log_second_moment: 2.0 * max + mean_sq.ln(),
        cv_hat,
        rel_std_err,
        acceptance_rate,
        log_u_hat: log_mu_hat - log_eta,
        confidence,
        ci_log_lower: Some(log_mu_hat - z * rel_std_err),
        ci_log_upper: Some(log_mu_hat + z * rel_std_err),
    })
}

/// `ceil(cv² / (ε² δ))`, at least one replication.
pub fn chebyshev_plan(cv: f64, epsilon: f64, delta: f64) -> u64 {
    let needed = cv * cv / (epsilon * epsilon * delta);
    // absorb representation error such as 1/(0.1² · 0.05) = 2000.0000000000002
    let k = (needed * (1.0 - 1e-12)).ceil();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        (k as u64).max(1)
    }
}

/// Grid of tilts on which the empirical log-MGF is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid {
            lo: -4.0,
            hi: 4.0,
            points: 81,
        }
    }
}

impl ThetaGrid {
    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        let step = if self.points > 1 {
            (self.hi - self.lo) / (self.points - 1) as f64
        } else {
            0.0
        };
        (0..self.points).map(move |i| self.lo + step * i as f64)
    }
}

pub const CHERNOFF_MIN_SAMPLES: usize = 100;

/// `ψ̂(θ) = ln mean exp(θ x_i)`.
pub fn empirical_log_mgf(samples: &[f64], theta: f64) -> f64 {
    let scaled: Vec<f64> = samples.iter().map(|&x| theta * x).collect();
    log_sum_exp(&scaled) - (samples.len() as f64).ln()
}

/// `Î(h) = max_θ θ(1+h) − ψ̂(θ)` over the grid.
pub fn empirical_rate(samples: &[f64], h: f64, grid: &ThetaGrid) -> f64 {
    grid.thetas()
        .map(|t| t * (1.0 + h) - empirical_log_mgf(samples, t))
        .fold(0.0, f64::max)
}

pub fn chernoff_plan(normalized_samples: &[f64], epsilon: f64, delta: f64) -> Result<u64> {
    chernoff_plan_with_grid(normalized_samples, epsilon, delta, &ThetaGrid::default())
}

/// Plug-in Chernoff planner on samples of `L_i / μ̂`.
///
/// A sample without spread is a zero-variance estimator and gets a plan of
/// one replication. Otherwise fails with [`Error::RateDegenerate`] when the
/// smaller of the two grid rates is at most `1e-12`; callers then fall back
/// to [`chebyshev_plan`].
pub fn chernoff_plan_with_grid(
    normalized_samples: &[f64],
    epsilon: f64,
    delta: f64,
    grid: &ThetaGrid,
) -> Result<u64> {
    if normalized_samples.len() < CHERNOFF_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: CHERNOFF_MIN_SAMPLES,
            got: normalized_samples.len(),
        });
    }
    let first = normalized_samples[0];
    if normalized_samples.iter().all(|&x| x == first) {
        return Ok(1);
    }
    let rate = empirical_rate(normalized_samples, epsilon, grid).min(empirical_rate(
        normalized_samples,
        -epsilon,
        grid,
    ));
    if rate <= 1e-12 {
        return Err(Error::RateDegenerate { rate });
    }
    let k = ((2.0 / delta).ln() / rate).ceil();
    Ok((k as u64).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// `max c_j < d^{1/2}`: strong-efficiency regime.
    pub max_col_below_sqrt_d: bool,
    /// `max c_j < d^{1/4}`: exponential-efficiency regime.
    pub max_col_below_quarter_root_d: bool,
}

impl RegimeFlags {
    pub fn of(instance: &Instance) -> Self {
        let d = instance.d() as f64;
        let c = instance.max_col() as f64;
        RegimeFlags {
            max_col_below_sqrt_d: c < d.sqrt(),
            max_col_below_quarter_root_d: c < d.powf(0.25),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub cv_hat: Option<f64>,
    pub fourth_moment_score: f64,
    pub d: usize,
    pub max_row: usize,
    pub max_col: usize,
    pub sqrt_d: f64,
    pub quarter_root_d: f64,
    /// `[c²]_1 / d`, bounded in the guarantee regime.
    pub col_square_ratio: f64,
    pub flags: RegimeFlags,
    /// Set when the instance violates `max c_j < d^{1/2}`.
    pub outside_guarantee_regime: bool,
}

pub fn efficiency_report(
    instance: &Instance,
    summary: Option<&EstimateSummary>,
    diag: &SequenceDiagnostics,
) -> EfficiencyReport {
    let d = instance.d();
    let flags = RegimeFlags::of(instance);
    let squares = power_sum(instance.cols(), 2)
        .map(|s| s as f64)
        .unwrap_or(f64::INFINITY);
    EfficiencyReport {
        cv_hat: summary.map(|s| s.cv_hat),
        fourth_moment_score: diag.fourth_moment_score,
        d,
        max_row: instance.max_row(),
        max_col: instance.max_col(),
        sqrt_d: (d as f64).sqrt(),
        quarter_root_d: (d as f64).powf(0.25),
        col_square_ratio: if d == 0 { 0.0 } else { squares / d as f64 },
        flags,
        outside_guarantee_regime: !flags.max_col_below_sqrt_d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::sequence_diagnostics;
    use crate::sis::run_batch;
    use proptest::prelude::*;

    fn rep(log: f64) -> ReplicationResult {
        ReplicationResult {
            log_count_estimate: log,
            completed: log > f64::NEG_INFINITY,
            steps_taken: 0,
            fourth_moment_score: 0.0,
            ops: 0,
        }
    }

    #[test]
    fn constant_estimates() {
        let l2 = 2f64.ln();
        let s = aggregate(&[rep(l2), rep(l2), rep(l2)], 0.0, 0.95).unwrap();
        assert!((s.log_mu_hat - l2).abs() < 1e-15);
        assert_eq!(s.cv_hat, 0.0);
        assert_eq!(s.acceptance_rate, 1.0);
        assert_eq!(s.ci_log_lower, Some(s.log_mu_hat));
    }

    #[test]
    fn permutation_instance_summary() {
        let inst = Instance::new(vec![1; 5], vec![1; 5]).unwrap();
        let s = aggregate(&run_batch(&inst, 50, 1), 0.0, 0.95).unwrap();
        assert!((s.log_mu_hat - 120f64.ln()).abs() < 1e-12);
        assert_eq!(s.cv_hat, 0.0);
    }

    #[test]
    fn failures_count_as_zero() {
        let s = aggregate(&[rep(0.0), rep(f64::NEG_INFINITY)], 0.0, 0.95).unwrap();
        assert!((s.log_mu_hat - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(s.acceptance_rate, 0.5);
        assert!((s.cv_hat - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_failed() {
        match aggregate(&[rep(f64::NEG_INFINITY); 3], 0.0, 0.95) {
            Err(Error::AllFailed(s)) => {
                assert_eq!(s.log_mu_hat, f64::NEG_INFINITY);
                assert!(s.ci_log_lower.is_none());
            }
            other => panic!("expected AllFailed, got {other:?}"),
        }
    }

    #[test]
    fn rejects_too_few_reps() {
        assert!(aggregate(&[rep(0.0)], 0.0, 0.95).is_err());
    }

    #[test]
    fn ci_uses_normal_quantile() {
        let s = aggregate(&[rep(0.0), rep(2f64.ln())], 0.0, 0.95).unwrap();
        let half = s.ci_log_upper.unwrap() - s.log_mu_hat;
        assert!((half - 1.959963984540054 * s.rel_std_err).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_plan(1.0, 0.1, 0.05), 2000);
        assert_eq!(chebyshev_plan(0.0, 0.1, 0.05), 1);
        assert_eq!(chebyshev_plan(2.0, 0.5, 0.5), 32);
    }

    #[test]
    fn chernoff_constant_samples() {
        assert_eq!(chernoff_plan(&[1.0; 200], 0.1, 0.05).unwrap(), 1);
        assert!(chernoff_plan(&[1.0; 200], 0.1, 0.05).unwrap() <= chebyshev_plan(0.0, 0.1, 0.05));
    }

    #[test]
    fn chernoff_needs_samples() {
        assert!(matches!(
            chernoff_plan(&[1.0; 10], 0.1, 0.05),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    /// Exact two-point rate by golden-section search on the concave
    /// objective `θ(1+h) − ln(½e^{θ/2} + ½e^{3θ/2})`.
    fn two_point_rate(h: f64) -> f64 {
        let f = |t: f64| t * (1.0 + h) - (0.5 * (0.5 * t).exp() + 0.5 * (1.5 * t).exp()).ln();
        let (mut a, mut b) = (-200.0f64, 200.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..300 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f((a + b) / 2.0)
    }

    #[test]
    fn chernoff_two_point_is_conservative() {
        let samples: Vec<f64> = (0..200)
            .map(|i| if i % 2 == 0 { 0.5 } else { 1.5 })
            .collect();
        let (eps, delta) = (0.25, 0.05);
        let exact_rate = two_point_rate(eps).min(two_point_rate(-eps));
        let exact_k = ((2.0f64 / delta).ln() / exact_rate).ceil() as u64;
        let k = chernoff_plan(&samples, eps, delta).unwrap();
        assert!(k >= exact_k, "grid plan {k} < exact {exact_k}");
        // frozen from an independent scipy maximization: 0.130812035941137
        assert!(
            (exact_rate - 0.130_812_035_941_137).abs() < 1e-9,
            "{exact_rate}"
        );
    }

    #[test]
    fn chernoff_heavy_tail_boundary() {
        // ε = 1 with no mass at zero: the lower rate comes only from the grid
        let samples: Vec<f64> = (0..200)
            .map(|i| if i % 2 == 0 { 0.5 } else { 1.5 })
            .collect();
        let r = chernoff_plan(&samples, 1.0, 0.05);
        assert!(r.is_ok() || matches!(r, Err(Error::RateDegenerate { .. })));
    }

    #[test]
    fn efficiency_flags() {
        let ones = Instance::new(vec![1; 16], vec![1; 16]).unwrap();
        let r = efficiency_report(&ones, None, &sequence_diagnostics(ones.cols()));
        assert!(r.flags.max_col_below_sqrt_d && r.flags.max_col_below_quarter_root_d);
        assert!(!r.outside_guarantee_regime);
        assert_eq!(r.fourth_moment_score, 0.0);

        // one column covering every row: c_1 = m = d/2
        let wide = Instance::new(vec![2; 8], {
            let mut c = vec![8];
            c.extend(vec![1; 8]);
            c
        })
        .unwrap();
        let r = efficiency_report(&wide, None, &sequence_diagnostics(wide.cols()));
        assert!(r.outside_guarantee_regime);

        let reg = Instance::new(vec![2; 50], vec![2; 50]).unwrap();
        let r = efficiency_report(&reg, None, &sequence_diagnostics(reg.cols()));
        assert_eq!(r.fourth_moment_score, 0.0);
        assert!(!r.outside_guarantee_regime);
    }

    proptest! {
        #[test]
        fn aggregate_is_permutation_invariant(
            mut logs in prop::collection::vec(prop_oneof![Just(f64::NEG_INFINITY), -5.0f64..5.0], 2..40),
            seed in any::<u64>(),
        ) {
            prop_assume!(logs.iter().any(|x| x.is_finite()));
            let a = aggregate(&logs.iter().map(|&x| rep(x)).collect::<Vec<_>>(), 0.0, 0.9).unwrap();
            let n = logs.len();
            for i in (1..n).rev() {
                logs.swap(i, (seed as usize).wrapping_mul(i + 7) % (i + 1));
            }
            let b = aggregate(&logs.iter().map(|&x| rep(x)).collect::<Vec<_>>(), 0.0, 0.9).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn second_moment_dominates(logs in prop::collection::vec(-5.0f64..5.0, 2..40)) {
            let s = aggregate(&logs.iter().map(|&x| rep(x)).collect::<Vec<_>>(), 0.0, 0.9).unwrap();
            prop_assert!(s.log_second_moment >= 2.0 * s.log_mu_hat - 1e-12);
        }

        #[test]
        fn chebyshev_monotone(cv in 0.0f64..5.0, eps in 0.01f64..0.99, delta in 0.01f64..0.99) {
            let k = chebyshev_plan(cv, eps, delta);
            prop_assert!(chebyshev_plan(cv, (eps + 0.01).min(0.999), delta) <= k);
            prop_assert!(chebyshev_plan(cv, eps, (delta + 0.01).min(0.999)) <= k);
            prop_assert!(chebyshev_plan(cv + 0.1, eps, delta) >= k);
        }
    }
}
