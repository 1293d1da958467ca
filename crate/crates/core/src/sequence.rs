//! Diagnostics of a nonincreasing column-sum sequence.
//!
//! For `c_1 ≥ … ≥ c_n` the tail ratios `Σ_{j>k} c_j² / Σ_{j>k} c_j` never
//! increase with `k`, and the sum `Σ_k [c_{k+1}]_4 / (Σ_{j>k} c_j)²` controls
//! how far the sampler's likelihood ratio can drift from the asymptotic count.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Exact ratio `squares / total` of tail sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailRatio {
    pub squares: u128,
    pub total: u128,
}

impl TailRatio {
    pub fn value(&self) -> f64 {
        self.squares as f64 / self.total as f64
    }
}

impl PartialOrd for TailRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TailRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.squares * other.total).cmp(&(other.squares * self.total))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDiagnostics {
    /// `y_k^(2) / y_k^(1)` for every `k` with a positive tail.
    pub ratio_path: Vec<TailRatio>,
    pub fourth_moment_score: f64,
}

impl SequenceDiagnostics {
    pub fn ratio_path_nonincreasing(&self) -> bool {
        self.ratio_path.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Expects `cols` sorted nonincreasing with positive entries; zero entries
/// only produce skipped terms.
pub fn sequence_diagnostics(cols: &[usize]) -> SequenceDiagnostics {
    let n = cols.len();
    let mut tail_sum = vec![0u128; n + 1];
    let mut tail_sq = vec![0u128; n + 1];
    for k in (0..n).rev() {
        let c = cols[k] as u128;
        tail_sum[k] = tail_sum[k + 1] + c;
        tail_sq[k] = tail_sq[k + 1] + c * c;
    }

    let mut ratio_path = Vec::with_capacity(n);
    let mut score = 0.0;
    for k in 0..n {
        if tail_sum[k] == 0 {
            continue;
        }
        ratio_path.push(TailRatio {
            squares: tail_sq[k],
            total: tail_sum[k],
        });
        let c = cols[k] as f64;
        let falling4 = if cols[k] < 4 {
            0.0
        } else {
            c * (c - 1.0) * (c - 2.0) * (c - 3.0)
        };
        let denom = tail_sum[k] as f64;
        score += falling4 / (denom * denom);
    }
    SequenceDiagnostics {
        ratio_path,
        fourth_moment_score: score,
    }
}
