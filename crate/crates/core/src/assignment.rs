//! Minimum-cost bipartite assignment (Hungarian method) with distance
//! gating.
//!
//! Both the pixel-space pose tracker and the world-space tracker associate
//! predictions with detections by building a cost matrix of distances,
//! gating out implausible pairs, and solving for the cheapest matching.
//! Infeasible pairs are a distinct sentinel rather than a large float, so a
//! fully gated-out row can never pollute cost totals.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    /// Cost entries must be finite and nonnegative (or infeasible).
    #[error("cost at ({row}, {col}) is negative or non-finite")]
    InvalidCost { row: usize, col: usize },
}

/// A rectangular matrix of nonnegative costs; `None` marks an infeasible
/// pair that no assignment may use.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Option<f64>>,
}

impl CostMatrix {
    /// Builds a matrix from row slices, rejecting negative or non-finite
    /// costs.
    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Result<Self, AssignmentError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged cost matrix");
            for (j, &cell) in row.iter().enumerate() {
                if let Some(c) = cell {
                    if !c.is_finite() || c < 0.0 {
                        return Err(AssignmentError::InvalidCost { row: i, col: j });
                    }
                }
                entries.push(cell);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    /// Builds a matrix by evaluating `f` at every (row, col). Unlike
    /// [`CostMatrix::from_rows`], this preserves `n_cols` even when
    /// `n_rows` is zero.
    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Result<Self, AssignmentError> {
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                let cell = f(i, j);
                if let Some(c) = cell {
                    if !c.is_finite() || c < 0.0 {
                        return Err(AssignmentError::InvalidCost { row: i, col: j });
                    }
                }
                entries.push(cell);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries[row * self.n_cols + col]
    }
}

/// Replaces every finite entry greater than `gate` with the infeasible
/// sentinel.
pub fn gate_costs(c: &CostMatrix, gate: f64) -> CostMatrix {
    debug_assert!(gate > 0.0);
    CostMatrix {
        n_rows: c.n_rows,
        n_cols: c.n_cols,
        entries: c
            .entries
            .iter()
            .map(|&cell| cell.filter(|&v| v <= gate))
            .collect(),
    }
}

/// Result of a bipartite assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched (row, col) pairs, sorted by row index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
    /// Sum of matched costs, accumulated in row order.
    pub total_cost: f64,
}

/// Solves the minimum-cost assignment.
///
/// Among all matchings that avoid infeasible entries, returns one of
/// maximum cardinality with minimum total cost. Rectangular inputs are
/// padded internally; pairs touching padding are reported as unmatched.
pub fn solve(c: &CostMatrix) -> Assignment {
    let (r, k) = (c.n_rows, c.n_cols);
    let n = r.max(k);
    if n == 0 {
        return Assignment {
            pairs: Vec::new(),
            unmatched_rows: Vec::new(),
            unmatched_cols: Vec::new(),
            total_cost: 0.0,
        };
    }

    // Padding cost chosen so one extra real edge always beats any saving
    // from dropping one: big > sum of all finite entries.
    let big = c
        .entries
        .iter()
        .map(|cell| cell.unwrap_or(0.0))
        .sum::<f64>()
        + 1.0;
    let cost = |i: usize, j: usize| -> f64 {
        if i < r && j < k {
            c.get(i, j).unwrap_or(big)
        } else {
            big
        }
    };

    // Shortest-augmenting-path Hungarian with potentials, O(n^3).
    // col_to_row[j] holds the row currently assigned to column j; the
    // virtual column `n` is the staging slot for the row being inserted.
    let mut row_potential = vec![0.0f64; n + 1];
    let mut col_potential = vec![0.0f64; n + 1];
    let mut col_to_row = vec![usize::MAX; n + 1];
    let mut path = vec![0usize; n + 1];

    for new_row in 0..n {
        col_to_row[n] = new_row;
        let mut j_cur = n;
        let mut min_to_col = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];

        loop {
            visited[j_cur] = true;
            let i_cur = col_to_row[j_cur];
            let mut delta = f64::INFINITY;
            let mut j_next = n;
            for j in 0..n {
                if visited[j] {
                    continue;
                }
                let reduced = cost(i_cur, j) - row_potential[i_cur] - col_potential[j];
                if reduced < min_to_col[j] {
                    min_to_col[j] = reduced;
                    path[j] = j_cur;
                }
                if min_to_col[j] < delta {
                    delta = min_to_col[j];
                    j_next = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    row_potential[col_to_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_to_col[j] -= delta;
                }
            }
            j_cur = j_next;
            if col_to_row[j_cur] == usize::MAX {
                break;
            }
        }

        // unwind the augmenting path
        while j_cur != n {
            let j_prev = path[j_cur];
            col_to_row[j_cur] = col_to_row[j_prev];
            j_cur = j_prev;
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 0..n {
        if col_to_row[j] != usize::MAX {
            row_to_col[col_to_row[j]] = j;
        }
    }

    let mut pairs = Vec::new();
    let mut total_cost = 0.0;
    for (i, &j) in row_to_col.iter().enumerate().take(r) {
        if j < k {
            if let Some(cost) = c.get(i, j) {
                pairs.push((i, j));
                total_cost += cost;
            }
        }
    }
    let matched_rows: Vec<bool> = {
        let mut m = vec![false; r];
        for &(i, _) in &pairs {
            m[i] = true;
        }
        m
    };
    let matched_cols: Vec<bool> = {
        let mut m = vec![false; k];
        for &(_, j) in &pairs {
            m[j] = true;
        }
        m
    };
    Assignment {
        pairs,
        unmatched_rows: (0..r).filter(|&i| !matched_rows[i]).collect(),
        unmatched_cols: (0..k).filter(|&j| !matched_cols[j]).collect(),
        total_cost,
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Exhaustive reference solver used only by tests.
    //!
    //! Enumerates every injective partial row -> column map via a bitmask
    //! DP, maximizing cardinality then minimizing cost — independent of the
    //! augmenting-path implementation above.

    use super::CostMatrix;
    use alloc::vec;

    /// Returns (max cardinality, min cost at that cardinality).
    pub fn best_matching(c: &CostMatrix) -> (usize, f64) {
        let (r, k) = (c.n_rows(), c.n_cols());
        assert!(k <= 20, "oracle is exponential in columns");
        let masks = 1usize << k;
        // dp[mask] = best (cardinality, cost) over processed rows with
        // exactly `mask` columns consumed
        let mut dp = vec![None::<(usize, f64)>; masks];
        dp[0] = Some((0, 0.0));
        for i in 0..r {
            let mut next = dp.clone(); // row unmatched: state carries over
            for mask in 0..masks {
                let Some((card, cost)) = dp[mask] else {
                    continue;
                };
                for j in 0..k {
                    if mask & (1 << j) != 0 {
                        continue;
                    }
                    let Some(edge) = c.get(i, j) else { continue };
                    let cand = (card + 1, cost + edge);
                    let slot = &mut next[mask | (1 << j)];
                    let better = match slot {
                        None => true,
                        Some((bc, bcost)) => {
                            cand.0 > *bc || (cand.0 == *bc && cand.1 < *bcost)
                        }
                    };
                    if better {
                        *slot = Some(cand);
                    }
                }
            }
            dp = next;
        }
        dp.into_iter()
            .flatten()
            .fold((0, 0.0), |best, cand| {
                if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                    cand
                } else {
                    best
                }
            })
    }
}
