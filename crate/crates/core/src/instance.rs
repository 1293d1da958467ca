//! Problem definition and margin arithmetic.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row and column margins of a binary contingency table.
///
/// Values built through [`Instance::new`] are normalized: zero margins are
/// removed and the columns are sorted nonincreasing. Rows keep their order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    rows: Vec<usize>,
    cols: Vec<usize>,
    d: usize,
}

impl Instance {
    /// Builds and normalizes an instance.
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        Self::raw(rows, cols).normalize()
    }

    /// Wraps margins as given, without checking or reordering anything.
    /// `d` is taken from the row sums.
    pub fn raw(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let d = rows.iter().sum();
        Instance { rows, cols, d }
    }

    /// Strips zero margins, sorts columns nonincreasing and recomputes `d`.
    pub fn normalize(&self) -> Result<Self> {
        let row_total: usize = self.rows.iter().sum();
        let col_total: usize = self.cols.iter().sum();
        if row_total != col_total {
            return Err(Error::MarginMismatch {
                rows: row_total as u64,
                cols: col_total as u64,
            });
        }
        let rows: Vec<usize> = self.rows.iter().copied().filter(|&r| r > 0).collect();
        let mut cols: Vec<usize> = self.cols.iter().copied().filter(|&c| c > 0).collect();
        cols.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Instance {
            rows,
            cols,
            d: row_total,
        })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of rows.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns.
    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn max_row(&self) -> usize {
        self.rows.iter().copied().max().unwrap_or(0)
    }

    pub fn max_col(&self) -> usize {
        self.cols.iter().copied().max().unwrap_or(0)
    }

    /// Swaps the roles of rows and columns, then normalizes.
    pub fn transpose(&self) -> Result<Self> {
        Instance::new(self.cols.clone(), self.rows.clone())
    }
}

/// `[s]_k = s (s−1) ⋯ (s−k+1)`, with `[s]_0 = 1`.
pub fn falling_factorial(s: i64, k: u32) -> Result<i128> {
    if s >= 0 && (s as u64) < k as u64 {
        return Ok(0);
    }
    let mut acc: i128 = 1;
    for i in 0..k as i64 {
        acc = acc
            .checked_mul((s - i) as i128)
            .ok_or(Error::Overflow("falling factorial"))?;
    }
    Ok(acc)
}

/// `[s]_k = Σ_j [s_j]_k` for a vector of margins.
pub fn vector_falling_sum(s: &[usize], k: u32) -> Result<i128> {
    s.iter().try_fold(0i128, |acc, &x| {
        acc.checked_add(falling_factorial(x as i64, k)?)
            .ok_or(Error::Overflow("falling-factorial sum"))
    })
}

/// `[s^k]_1 = Σ_j s_j^k`.
pub fn power_sum(s: &[usize], k: u32) -> Result<i128> {
    s.iter().try_fold(0i128, |acc, &x| {
        let term = (x as i128)
            .checked_pow(k)
            .ok_or(Error::Overflow("power sum"))?;
        acc.checked_add(term).ok_or(Error::Overflow("power sum"))
    })
}

/// Gale–Ryser test: a 0-1 matrix with these margins exists iff the totals
/// agree and, with columns sorted nonincreasing,
/// `Σ_{j≤k} c_j ≤ Σ_i min(r_i, k)` for every `k`.
pub fn gale_ryser_feasible(instance: &Instance) -> bool {
    let rows = instance.rows();
    let mut cols = instance.cols().to_vec();
    if rows.iter().sum::<usize>() != cols.iter().sum::<usize>() {
        return false;
    }
    cols.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = 0usize;
    for (idx, &c) in cols.iter().enumerate() {
        let k = idx + 1;
        prefix += c;
        let capacity: usize = rows.iter().map(|&r| r.min(k)).sum();
        if prefix > capacity {
            return false;
        }
    }
    true
}
