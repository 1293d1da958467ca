//! Log-domain asymptotic approximation `μ(r, c) ≈ φ(r, c)·exp(−α(r, c))`
//! with `φ = d!/(r! c!)` and `α = [c]_2 [r]_2 / (2 d²)`, valid for sparse
//! margins. Also `η(c, m) = Π_j binom(m, c_j)`, the number of tables with
//! only the column sums fixed, so that `v = φ e^{−α} / η` approximates the
//! probability `u(r, c)` that a uniformly random such table has row sums `r`.

use serde::{Deserialize, Serialize};

use crate::instance::{vector_falling_sum, Instance};
use crate::logspace::{ln_binomial, ln_factorial};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxCount {
    pub log_phi: f64,
    pub alpha: f64,
    pub log_eta: f64,
    pub log_mu_approx: f64,
    pub log_v: f64,
}

/// `ln d! − Σ ln r_i! − Σ ln c_j!`.
pub fn phi_log(instance: &Instance) -> f64 {
    let margins: f64 = instance
        .rows()
        .iter()
        .chain(instance.cols())
        .map(|&x| ln_factorial(x as u64))
        .sum();
    ln_factorial(instance.d() as u64) - margins
}

/// `[c]_2 [r]_2 / (2 d²)`; zero for the empty instance.
pub fn alpha(instance: &Instance) -> Result<f64> {
    let d = instance.d() as f64;
    if instance.d() == 0 {
        return Ok(0.0);
    }
    let numer = vector_falling_sum(instance.cols(), 2)?
        .checked_mul(vector_falling_sum(instance.rows(), 2)?)
        .ok_or(Error::Overflow("alpha numerator"))?;
    Ok(numer as f64 / (2.0 * d * d))
}

/// `Σ_j ln binom(m, c_j)`.
pub fn eta_log(cols: &[usize], m: usize) -> Result<f64> {
    cols.iter().try_fold(0.0, |acc, &c| {
        if c > m {
            Err(Error::ColumnExceedsRows { col: c, rows: m })
        } else {
            Ok(acc + ln_binomial(m as u64, c as u64))
        }
    })
}

pub fn mckay_estimate(instance: &Instance) -> Result<ApproxCount> {
    let log_phi = phi_log(instance);
    let alpha = alpha(instance)?;
    let log_eta = eta_log(instance.cols(), instance.m())?;
    let log_mu_approx = log_phi - alpha;
    Ok(ApproxCount {
        log_phi,
        alpha,
        log_eta,
        log_mu_approx,
        log_v: log_mu_approx - log_eta,
    })
}
