//! Square linear assignment by shortest augmenting paths (Hungarian method
//! with row/column potentials).

/// Optimal assignment of an `n×n` row-major cost matrix.
#[derive(Debug, Clone)]
pub struct Assignment {
    /// `row_to_col[i]` is the column matched to row `i`.
    pub row_to_col: Vec<usize>,
    /// Row potentials; `u[i] + v[j] ≤ c[i][j]` with equality on matched pairs.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Assignment {
    /// `Σ_i c[i][row_to_col[i]]`, summed in row order.
    pub fn total(&self, cost: &[f64]) -> f64 {
        let n = self.row_to_col.len();
        self.row_to_col.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum()
    }
}

/// Solves `min_σ Σ_i c[i][σ(i)]`. Ties in the Dijkstra-like scan are broken
/// towards the lowest column index, so the result is deterministic.
pub fn solve_assignment(cost: &[f64], n: usize) -> Assignment {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Assignment { row_to_col: vec![], u: vec![], v: vec![] };
    }
    // 1-based arrays; index 0 is the virtual source column
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_row[j] - 1] = j - 1;
    }
    Assignment { row_to_col, u: u[1..].to_vec(), v: v[1..].to_vec() }
}
