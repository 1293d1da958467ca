//! Conditional-Poisson sampling: draw `c` distinct units out of `m` with
//! `P(S) ∝ Π_{j∈S} w_j`. The normalizer is the elementary symmetric sum
//! `w̃(c, A)`, built by `w̃(i, A) = w̃(i, A∖{j}) + w̃(i−1, A∖{j}) w_j`.
//!
//! Everything is kept in natural logs. Two exact samplers are provided: the
//! drafting method (sequential draws, each unit picked with probability
//! `w̃(c−k, R∖{j}) w_j / ((c−k+1) w̃(c−k+1, R))` over the remaining set `R`)
//! and a backward scan over a single prefix table, used to cross-check it.

use std::collections::BTreeMap;

use rand::Rng;

use crate::logspace::log_add_exp;
use crate::{Error, Result};

/// Weighted fixed-size sampling design over units `0..units()`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpDistribution {
    log_weights: Vec<f64>,
    size: usize,
}

impl CpDistribution {
    pub fn new(log_weights: Vec<f64>, size: usize) -> Result<Self> {
        if size > log_weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "sample size {size} exceeds {} units",
                log_weights.len()
            )));
        }
        if let Some(bad) = log_weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "log-weight {bad} is not finite"
            )));
        }
        Ok(CpDistribution { log_weights, size })
    }

    /// Convenience constructor from strictly positive linear weights.
    pub fn from_weights(weights: &[f64], size: usize) -> Result<Self> {
        Self::new(weights.iter().map(|w| w.ln()).collect(), size)
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn units(&self) -> usize {
        self.log_weights.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// `ln w̃(i, {0..j})` for `i ≤ order`, `j ≤ units`.
#[derive(Clone, Debug)]
pub struct EspTable {
    order: usize,
    units: usize,
    cells: Vec<f64>,
}

impl EspTable {
    /// Log elementary symmetric sum of order `i` over the first `j` units.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > self.order || j > self.units {
            return f64::NEG_INFINITY;
        }
        self.cells[i * (self.units + 1) + j]
    }

    /// `ln w̃(order, all units)`.
    pub fn log_normalizer(&self) -> f64 {
        self.get(self.order, self.units)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn units(&self) -> usize {
        self.units
    }
}

fn build_table(log_weights: &[f64], order: usize, ops: &mut u64) -> EspTable {
    let units = log_weights.len();
    let width = units + 1;
    let mut cells = vec![f64::NEG_INFINITY; (order + 1) * width];
    cells[..width].fill(0.0);
    for i in 1..=order {
        for j in i..=units {
            let without = cells[i * width + j - 1];
            let with = cells[(i - 1) * width + j - 1] + log_weights[j - 1];
            cells[i * width + j] = log_add_exp(without, with);
        }
        *ops += (units + 1 - i.min(units + 1)) as u64;
    }
    EspTable {
        order,
        units,
        cells,
    }
}

/// Full `(c+1) × (units+1)` table of log elementary symmetric sums.
pub fn esp_build(dist: &CpDistribution) -> EspTable {
    build_table(&dist.log_weights, dist.size, &mut 0)
}

/// `ln w̃(order, ·)` over the given log-weights with a rolling buffer.
fn log_esp_top(log_weights: impl Iterator<Item = f64>, order: usize, ops: &mut u64) -> f64 {
    let mut e = vec![f64::NEG_INFINITY; order + 1];
    e[0] = 0.0;
    for (seen, w) in log_weights.enumerate() {
        for i in (1..=order.min(seen + 1)).rev() {
            e[i] = log_add_exp(e[i], e[i - 1] + w);
            *ops += 1;
        }
    }
    e[order]
}

fn check_subset(dist: &CpDistribution, subset: &[usize]) -> Result<()> {
    if subset.len() != dist.size {
        return Err(Error::WrongSubsetSize {
            expected: dist.size,
            got: subset.len(),
        });
    }
    let mut seen = vec![false; dist.units()];
    for &j in subset {
        if j >= dist.units() || seen[j] {
            return Err(Error::InvalidSubset { index: j });
        }
        seen[j] = true;
    }
    Ok(())
}

/// `Σ_{j∈S} ln w_j − ln w̃(c, A)`.
pub fn cp_log_pmf(dist: &CpDistribution, subset: &[usize]) -> Result<f64> {
    check_subset(dist, subset)?;
    let table = esp_build(dist);
    Ok(subset.iter().map(|&j| dist.log_weights[j]).sum::<f64>() - table.log_normalizer())
}

/// First-order inclusion probabilities `π_j = w_j w̃(c−1, A∖{j}) / w̃(c, A)`.
pub fn inclusion_probabilities(dist: &CpDistribution) -> Vec<f64> {
    let c = dist.size;
    if c == 0 {
        return vec![0.0; dist.units()];
    }
    let log_norm = esp_build(dist).log_normalizer();
    (0..dist.units())
        .map(|j| {
            let others = dist
                .log_weights
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &w)| w);
            let loo = log_esp_top(others, c - 1, &mut 0);
            (dist.log_weights[j] + loo - log_norm).exp()
        })
        .collect()
}

/// How the drafting method obtains `w̃(c−k, R∖{j})` for every remaining `j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DraftingMethod {
    /// Rebuild the symmetric sum over `R∖{j}` separately for each `j`:
    /// `O(c·|R|²)` per draw.
    Direct,
    /// Combine prefix and suffix tables over `R`: `O(c·|R|)` per draw.
    #[default]
    LeaveOneOut,
}

/// Probabilities of the next drafting draw.
///
/// `selected` holds the units drawn so far (in draw order). Returns
/// `(unit, probability)` for every unit not yet selected. The probabilities
/// sum to one up to rounding.
pub fn drafting_probabilities(
    dist: &CpDistribution,
    selected: &[usize],
    method: DraftingMethod,
    ops: &mut u64,
) -> Vec<(usize, f64)> {
    let slots = dist.size - selected.len();
    assert!(slots > 0, "all units already drafted");
    let mut taken = vec![false; dist.units()];
    for &j in selected {
        taken[j] = true;
    }
    let remaining: Vec<usize> = (0..dist.units()).filter(|&j| !taken[j]).collect();
    let lw: Vec<f64> = remaining.iter().map(|&j| dist.log_weights[j]).collect();

    let (log_norm, loo) = match method {
        DraftingMethod::Direct => {
            let log_norm = log_esp_top(lw.iter().copied(), slots, ops);
            let loo: Vec<f64> = (0..lw.len())
                .map(|skip| {
                    let others = lw
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &w)| w);
                    log_esp_top(others, slots - 1, ops)
                })
                .collect();
            (log_norm, loo)
        }
        DraftingMethod::LeaveOneOut => leave_one_out(&lw, slots, ops),
    };

    let log_scale = (slots as f64).ln() + log_norm;
    remaining
        .iter()
        .zip(lw.iter().zip(&loo))
        .map(|(&j, (&w, &l))| (j, (l + w - log_scale).exp()))
        .collect()
}

/// Returns `ln w̃(slots, R)` and `ln w̃(slots−1, R∖{j})` for each `j`.
fn leave_one_out(lw: &[f64], slots: usize, ops: &mut u64) -> (f64, Vec<f64>) {
    let units = lw.len();
    let order = slots - 1;
    // prefix[t][i] over lw[..t], suffix[t][i] over lw[t..]
    let mut prefix = vec![vec![f64::NEG_INFINITY; slots + 1]; units + 1];
    let mut suffix = vec![vec![f64::NEG_INFINITY; order + 1]; units + 1];
    prefix[0][0] = 0.0;
    suffix[units][0] = 0.0;
    for t in 0..units {
        let (head, tail) = prefix.split_at_mut(t + 1);
        let (prev, next) = (&head[t], &mut tail[0]);
        next[0] = 0.0;
        for i in 1..=slots.min(t + 1) {
            next[i] = log_add_exp(prev[i], prev[i - 1] + lw[t]);
            *ops += 1;
        }
    }
    for t in (0..units).rev() {
        let (head, tail) = suffix.split_at_mut(t + 1);
        let (next, prev) = (&mut head[t], &tail[0]);
        next[0] = 0.0;
        for i in 1..=order.min(units - t) {
            next[i] = log_add_exp(prev[i], prev[i - 1] + lw[t]);
            *ops += 1;
        }
    }
    let loo = (0..units)
        .map(|j| {
            let mut acc = f64::NEG_INFINITY;
            for a in 0..=order {
                acc = log_add_exp(acc, prefix[j][a] + suffix[j + 1][order - a]);
            }
            *ops += (order + 1) as u64;
            acc
        })
        .collect();
    (prefix[units][slots], loo)
}

fn pick<R: Rng + ?Sized>(probs: &[(usize, f64)], rng: &mut R) -> usize {
    let total: f64 = probs.iter().map(|p| p.1).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(j, p) in probs {
        acc += p;
        if target < acc {
            return j;
        }
    }
    probs
        .iter()
        .rev()
        .find(|p| p.1 > 0.0)
        .map(|p| p.0)
        .expect("at least one unit with positive probability")
}

/// Drafting sampler with the default [`DraftingMethod`].
pub fn sample_drafting<R: Rng + ?Sized>(dist: &CpDistribution, rng: &mut R) -> Vec<usize> {
    sample_drafting_with(dist, DraftingMethod::default(), rng, &mut 0)
}

/// Drafting sampler; `ops` accumulates inner-loop symmetric-sum updates.
/// Returns the selected units sorted ascending.
pub fn sample_drafting_with<R: Rng + ?Sized>(
    dist: &CpDistribution,
    method: DraftingMethod,
    rng: &mut R,
    ops: &mut u64,
) -> Vec<usize> {
    let mut selected = Vec::with_capacity(dist.size);
    while selected.len() < dist.size {
        let probs = drafting_probabilities(dist, &selected, method, ops);
        selected.push(pick(&probs, rng));
    }
    selected.sort_unstable();
    selected
}

/// Probability that the backward scan includes unit `j` (0-based) when
/// `slots` places are still open among units `0..=j`.
pub fn backward_inclusion_probability(
    dist: &CpDistribution,
    table: &EspTable,
    j: usize,
    slots: usize,
) -> f64 {
    if slots == 0 {
        return 0.0;
    }
    let p = (dist.log_weights[j] + table.get(slots - 1, j) - table.get(slots, j + 1)).exp();
    p.clamp(0.0, 1.0)
}

/// Exact sampler scanning units from last to first against one prefix table.
pub fn sample_backward<R: Rng + ?Sized>(dist: &CpDistribution, rng: &mut R) -> Vec<usize> {
    let table = esp_build(dist);
    let mut slots = dist.size;
    let mut selected = Vec::with_capacity(slots);
    for j in (0..dist.units()).rev() {
        if slots == 0 {
            break;
        }
        let p = backward_inclusion_probability(dist, &table, j, slots);
        if rng.random::<f64>() < p {
            selected.push(j);
            slots -= 1;
        }
    }
    selected.reverse();
    selected
}

/// Exact law of the set returned by the drafting sampler. Draw
/// probabilities depend only on the set drawn so far, so orders merge.
pub fn drafting_law(dist: &CpDistribution, method: DraftingMethod) -> BTreeMap<Vec<usize>, f64> {
    let mut layer: BTreeMap<Vec<usize>, f64> = BTreeMap::from([(vec![], 1.0)]);
    for _ in 0..dist.size() {
        let mut next = BTreeMap::new();
        for (set, p) in &layer {
            for (j, q) in drafting_probabilities(dist, set, method, &mut 0) {
                let mut grown = set.clone();
                grown.push(j);
                grown.sort_unstable();
                *next.entry(grown).or_insert(0.0) += p * q;
            }
        }
        layer = next;
    }
    layer
}

/// Exact law of the set returned by [`sample_backward`].
pub fn backward_law(dist: &CpDistribution) -> BTreeMap<Vec<usize>, f64> {
    let table = esp_build(dist);
    subsets(dist.units(), dist.size())
        .into_iter()
        .map(|subset| {
            let mut slots = dist.size();
            let mut p = 1.0;
            for j in (0..dist.units()).rev() {
                if slots == 0 {
                    break;
                }
                let q = backward_inclusion_probability(dist, &table, j, slots);
                if subset.contains(&j) {
                    p *= q;
                    slots -= 1;
                } else {
                    p *= 1.0 - q;
                }
            }
            (subset, p)
        })
        .collect()
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..=n - (k - cur.len()) {
            cur.push(j);
            extend(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        extend(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}
