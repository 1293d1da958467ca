//! Ground truth for small instances.
//!
//! - [`brute_force_count`] enumerates binary matrices row by row.
//! - [`dp_count`] sweeps columns over residual classes: rows with the same
//!   remaining sum are exchangeable, so a state is the vector `n_t` of how
//!   many rows still need `t` ones. Counts are exact big integers.
//! - [`exact_u_log`] and [`h_transform_kernel`] give the probability
//!   `u(s, ρ) = μ(s, ρ)/η(ρ, m)` that uniformly random columns land exactly on
//!   the residuals, and the zero-variance proposal built from it.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::cp::subsets;
use crate::instance::Instance;
use crate::logspace::{ln_biguint, ln_binomial};
use crate::mckay::eta_log;
use crate::{Error, Result};

pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// Number of 0-1 matrices with the instance's margins, by enumeration.
/// Limited to `m·n ≤ 25`.
pub fn brute_force_count(instance: &Instance) -> Result<u64> {
    let (m, n) = (instance.m(), instance.n());
    if m * n > 25 {
        return Err(Error::TooLarge { cells: m * n });
    }
    if instance.rows().iter().sum::<usize>() != instance.cols().iter().sum::<usize>() {
        return Ok(0);
    }
    let masks_by_sum: Vec<Vec<u32>> = (0..=n)
        .map(|r| {
            (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == r)
                .collect()
        })
        .collect();

    fn rec(
        row: usize,
        rows: &[usize],
        cols: &[usize],
        masks: &[Vec<u32>],
        filled: &mut [usize],
    ) -> u64 {
        if row == rows.len() {
            return u64::from(filled.iter().zip(cols).all(|(f, c)| f == c));
        }
        if rows[row] > cols.len() {
            return 0;
        }
        let mut total = 0;
        for &mask in &masks[rows[row]] {
            let fits = (0..cols.len()).all(|j| mask >> j & 1 == 0 || filled[j] < cols[j]);
            if !fits {
                continue;
            }
            for (j, f) in filled.iter_mut().enumerate() {
                *f += (mask >> j & 1) as usize;
            }
            total += rec(row + 1, rows, cols, masks, filled);
            for (j, f) in filled.iter_mut().enumerate() {
                *f -= (mask >> j & 1) as usize;
            }
        }
        total
    }

    Ok(rec(
        0,
        instance.rows(),
        instance.cols(),
        &masks_by_sum,
        &mut vec![0; n],
    ))
}

struct ResidualDp<'a> {
    cols: &'a [usize],
    binom: Vec<Vec<BigUint>>,
    memo: HashMap<(usize, Vec<u32>), BigUint>,
    budget: usize,
}

impl ResidualDp<'_> {
    fn count(&mut self, col: usize, classes: &[u32]) -> Result<BigUint> {
        if col == self.cols.len() {
            let m: u32 = classes.iter().sum();
            return Ok(if classes[0] == m {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        let key = (col, classes.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut total = BigUint::zero();
        let mut alloc = vec![0u32; classes.len()];
        self.allocate(
            col,
            classes,
            classes.len() - 1,
            self.cols[col] as u32,
            &mut alloc,
            &mut total,
        )?;
        if self.memo.len() >= self.budget {
            return Err(Error::StateSpaceExceeded {
                budget: self.budget,
            });
        }
        self.memo.insert(key, total.clone());
        Ok(total)
    }

    /// Chooses `alloc[t]` rows of class `t` (for `t ≥ 1`, highest first) to
    /// receive a one, then recurses into the next column.
    fn allocate(
        &mut self,
        col: usize,
        classes: &[u32],
        t: usize,
        left: u32,
        alloc: &mut [u32],
        total: &mut BigUint,
    ) -> Result<()> {
        if t == 0 {
            if left > 0 {
                return Ok(());
            }
            let mut ways = BigUint::one();
            let mut next = classes.to_vec();
            for s in 1..classes.len() {
                if alloc[s] > 0 {
                    ways *= &self.binom[classes[s] as usize][alloc[s] as usize];
                    next[s] -= alloc[s];
                    next[s - 1] += alloc[s];
                }
            }
            let rest = self.count(col + 1, &next)?;
            if !rest.is_zero() {
                *total += ways * rest;
            }
            return Ok(());
        }
        let lower_capacity: u32 = classes[1..t].iter().sum();
        let lo = left.saturating_sub(lower_capacity);
        for k in lo..=left.min(classes[t]) {
            alloc[t] = k;
            self.allocate(col, classes, t - 1, left - k, alloc, total)?;
        }
        alloc[t] = 0;
        Ok(())
    }
}

/// Exact count with the default memo budget.
pub fn dp_count(instance: &Instance) -> Result<BigUint> {
    dp_count_with_budget(instance, DEFAULT_STATE_BUDGET)
}

pub fn dp_count_with_budget(instance: &Instance, budget: usize) -> Result<BigUint> {
    let rows = instance.rows();
    let cols = instance.cols();
    if rows.iter().sum::<usize>() != cols.iter().sum::<usize>() {
        return Ok(BigUint::zero());
    }
    let m = rows.len();
    if cols.iter().any(|&c| c > m) {
        return Ok(BigUint::zero());
    }
    let r_max = rows.iter().copied().max().unwrap_or(0);
    let mut classes = vec![0u32; r_max + 1];
    for &r in rows {
        classes[r] += 1;
    }
    let mut binom = vec![vec![BigUint::one()]; m + 1];
    for a in 1..=m {
        let mut row = vec![BigUint::one(); a + 1];
        for b in 1..a {
            row[b] = &binom[a - 1][b - 1] + &binom[a - 1][b];
        }
        binom[a] = row;
    }
    let mut dp = ResidualDp {
        cols,
        binom,
        memo: HashMap::new(),
        budget,
    };
    dp.count(0, &classes)
}

/// `ln μ(r, c)`, `NEG_INFINITY` when no table exists.
pub fn dp_count_log(instance: &Instance) -> Result<f64> {
    Ok(ln_biguint(&dp_count(instance)?))
}

/// `ln u(s, ρ) = ln μ(s, ρ) − ln η(ρ, m)` for residuals `state` (zeros
/// allowed) and the columns still to place.
pub fn exact_u_log(state: &[usize], remaining_cols: &[usize], m: usize) -> Result<f64> {
    if remaining_cols.is_empty() {
        return Ok(if state.iter().all(|&s| s == 0) {
            0.0
        } else {
            f64::NEG_INFINITY
        });
    }
    let log_eta = eta_log(remaining_cols, m)?;
    let sub = Instance::raw(state.to_vec(), remaining_cols.to_vec());
    Ok(dp_count_log(&sub)? - log_eta)
}

/// One admissible placement of the next column.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    /// Rows receiving a one.
    pub rows: Vec<usize>,
    pub successor: Vec<usize>,
    pub probability: f64,
}

/// `Q*(s, s') = binom(m, c)^{-1} u(s', ρ') / u(s, ρ)` over all placements of
/// `remaining_cols[0]` that keep every residual non-negative.
pub fn h_transform_kernel(
    state: &[usize],
    remaining_cols: &[usize],
    m: usize,
) -> Result<Vec<Transition>> {
    let (&c, rest) = remaining_cols
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no column left to place".into()))?;
    if state.len() != m {
        return Err(Error::InvalidParameter(format!(
            "state has {} rows, expected {m}",
            state.len()
        )));
    }
    let log_u = exact_u_log(state, remaining_cols, m)?;
    if log_u == f64::NEG_INFINITY {
        return Err(Error::DeadState);
    }
    let log_uniform = -ln_binomial(m as u64, c as u64);
    let mut out = Vec::new();
    for rows in subsets(m, c) {
        if rows.iter().any(|&i| state[i] == 0) {
            continue;
        }
        let mut successor = state.to_vec();
        for &i in &rows {
            successor[i] -= 1;
        }
        let log_next = exact_u_log(&successor, rest, m)?;
        out.push(Transition {
            rows,
            successor,
            probability: (log_uniform + log_next - log_u).exp(),
        });
    }
    Ok(out)
}

/// A complete walk under `Q*` with its importance weight
/// `Π_k u(S_k, ρ_k)/u(S_{k+1}, ρ_{k+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroVariancePath {
    pub probability: f64,
    pub likelihood: f64,
}

/// Enumerates every positive-probability walk under `Q*`.
pub fn zero_variance_paths(instance: &Instance) -> Result<Vec<ZeroVariancePath>> {
    fn rec(
        state: Vec<usize>,
        cols: &[usize],
        m: usize,
        prob: f64,
        likelihood: f64,
        out: &mut Vec<ZeroVariancePath>,
    ) -> Result<()> {
        if cols.is_empty() {
            out.push(ZeroVariancePath {
                probability: prob,
                likelihood,
            });
            return Ok(());
        }
        let c = cols[0];
        for t in h_transform_kernel(&state, cols, m)? {
            if t.probability <= 0.0 {
                continue;
            }
            let step = (-ln_binomial(m as u64, c as u64)).exp() / t.probability;
            rec(
                t.successor,
                &cols[1..],
                m,
                prob * t.probability,
                likelihood * step,
                out,
            )?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(
        instance.rows().to_vec(),
        instance.cols(),
        instance.m(),
        1.0,
        1.0,
        &mut out,
    )?;
    Ok(out)
}

/// Samples one walk under `Q*` and returns its importance weight.
pub fn simulate_zero_variance<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Result<f64> {
    let m = instance.m();
    let mut state = instance.rows().to_vec();
    let mut likelihood = 1.0;
    let cols = instance.cols();
    for k in 0..cols.len() {
        let kernel = h_transform_kernel(&state, &cols[k..], m)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = kernel.iter().rev().find(|t| t.probability > 0.0);
        for t in &kernel {
            acc += t.probability;
            if u < acc {
                chosen = Some(t);
                break;
            }
        }
        let t = chosen.ok_or(Error::DeadState)?;
        likelihood *= (-ln_binomial(m as u64, cols[k] as u64)).exp() / t.probability;
        state = t.successor.clone();
    }
    Ok(likelihood)
}
