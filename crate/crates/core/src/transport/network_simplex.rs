//! Primal network simplex for the balanced transportation problem
//! `min Σ c_ij x_ij` subject to `Σ_j x_ij = a_i`, `Σ_i x_ij = b_j`, `x ≥ 0`.
//!
//! The basis is a spanning tree over the `m + n` row and column nodes.
//! Entering cells are chosen by block pricing; after a run of degenerate
//! pivots the solver falls back to Bland's rule, which cannot cycle.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TransportationSolution {
    /// Basic cells `(row, col, flow)`, zero flows dropped.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Dual potentials with `u_i + v_j ≤ c_ij` (up to rounding) and equality
    /// on basic cells.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Tree {
    m: usize,
    n: usize,
    // basic cells: (row, col, flow)
    cells: Vec<(usize, usize, f64)>,
    // adjacency: node -> (neighbour node, basic cell index)
    adj: Vec<Vec<(usize, usize)>>,
    parent: Vec<usize>,
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Tree {
    fn add(&mut self, i: usize, j: usize, x: f64) {
        let k = self.cells.len();
        self.cells.push((i, j, x));
        self.adj[i].push((self.m + j, k));
        self.adj[self.m + j].push((i, k));
    }

    fn replace(&mut self, leaving: usize, i: usize, j: usize, x: f64) {
        let (li, lj, _) = self.cells[leaving];
        let m = self.m;
        self.adj[li].retain(|&(_, k)| k != leaving);
        self.adj[m + lj].retain(|&(_, k)| k != leaving);
        self.cells[leaving] = (i, j, x);
        self.adj[i].push((m + j, leaving));
        self.adj[m + j].push((i, leaving));
    }

    /// Recomputes potentials, parents and depths by BFS from row 0.
    fn refresh(&mut self, cost: &[f64]) {
        let (m, n) = (self.m, self.n);
        let total = m + n;
        let mut seen = vec![false; total];
        let mut queue = VecDeque::with_capacity(total);
        seen[0] = true;
        self.u[0] = 0.0;
        self.depth[0] = 0;
        self.parent[0] = usize::MAX;
        queue.push_back(0);
        while let Some(node) = queue.pop_front() {
            for idx in 0..self.adj[node].len() {
                let (nb, k) = self.adj[node][idx];
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                self.parent[nb] = node;
                self.parent_cell[nb] = k;
                self.depth[nb] = self.depth[node] + 1;
                let (i, j, _) = self.cells[k];
                let c = cost[i * n + j];
                if nb >= m {
                    self.v[nb - m] = c - self.u[node];
                } else {
                    self.u[nb] = c - self.v[node - m];
                }
                queue.push_back(nb);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis is not a spanning tree");
    }

    /// Tree path from row `i` to column node `m + j`, as basic cell indices
    /// listed starting from the column end.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let mut a = i;
        let mut b = self.m + j;
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        while self.depth[a] > self.depth[b] {
            from_a.push(self.parent_cell[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            from_b.push(self.parent_cell[b]);
            b = self.parent[b];
        }
        while a != b {
            from_a.push(self.parent_cell[a]);
            a = self.parent[a];
            from_b.push(self.parent_cell[b]);
            b = self.parent[b];
        }
        from_b.extend(from_a.into_iter().rev());
        from_b
    }
}

/// Solves the transportation problem for a dense row-major `m×n` cost.
/// `a` and `b` must have equal sums.
pub fn solve_transportation(cost: &[f64], a: &[f64], b: &[f64]) -> Result<TransportationSolution> {
    let m = a.len();
    let n = b.len();
    assert_eq!(cost.len(), m * n);
    let cmax = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * (1.0 + cmax);

    let mut tree = Tree {
        m,
        n,
        cells: Vec::with_capacity(m + n - 1),
        adj: vec![Vec::new(); m + n],
        parent: vec![usize::MAX; m + n],
        parent_cell: vec![usize::MAX; m + n],
        depth: vec![0; m + n],
        u: vec![0.0; m],
        v: vec![0.0; n],
    };
    northwest_corner(&mut tree, a, b);
    let mut basic = vec![false; m * n];
    for &(i, j, _) in &tree.cells {
        basic[i * n + j] = true;
    }

    let cells = m * n;
    let block = ((cells as f64).sqrt().ceil() as usize).max(16).min(cells);
    let max_pivots = 200 * (m + n) + 10_000;
    let mut cursor = 0usize;
    let mut degenerate_run = 0usize;
    let mut pivots = 0usize;

    loop {
        tree.refresh(cost);
        let bland = degenerate_run > m + n;
        let entering = if bland {
            first_negative(cost, &tree, &basic, tol)
        } else {
            block_search(cost, &tree, &basic, tol, block, &mut cursor)
        };
        let Some((ei, ej)) = entering else { break };
        if pivots >= max_pivots {
            let gap = reduced_cost(cost, &tree, ei, ej).abs();
            return Err(Error::NonConvergence { iterations: pivots, gap });
        }
        pivots += 1;

        let path = tree.path(ei, ej);
        // cells at even positions along the path (starting from the column
        // end) lose flow
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 != 0 {
                continue;
            }
            let x = tree.cells[k].2;
            let better = x < theta || (x == theta && bland && cell_index(&tree, k, n) < cell_index(&tree, leaving, n));
            if better {
                theta = x;
                leaving = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let x = &mut tree.cells[k].2;
                *x = if k == leaving { 0.0 } else { (*x - theta).max(0.0) };
            } else {
                tree.cells[k].2 += theta;
            }
        }
        if theta <= 1e-300 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        let (li, lj, _) = tree.cells[leaving];
        basic[li * n + lj] = false;
        basic[ei * n + ej] = true;
        tree.replace(leaving, ei, ej, theta);
    }

    let mut flows: Vec<(usize, usize, f64)> = tree.cells.iter().copied().filter(|c| c.2 > 0.0).collect();
    flows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let cost_value = flows.iter().map(|&(i, j, x)| x * cost[i * n + j]).sum();
    Ok(TransportationSolution { flows, cost: cost_value, u: tree.u, v: tree.v, pivots })
}

fn cell_index(tree: &Tree, k: usize, n: usize) -> usize {
    if k == usize::MAX {
        return usize::MAX;
    }
    let (i, j, _) = tree.cells[k];
    i * n + j
}

#[inline]
fn reduced_cost(cost: &[f64], tree: &Tree, i: usize, j: usize) -> f64 {
    cost[i * tree.n + j] - tree.u[i] - tree.v[j]
}

fn first_negative(cost: &[f64], tree: &Tree, basic: &[bool], tol: f64) -> Option<(usize, usize)> {
    let n = tree.n;
    (0..cost.len()).find(|&c| !basic[c] && reduced_cost(cost, tree, c / n, c % n) < -tol).map(|c| (c / n, c % n))
}

fn block_search(
    cost: &[f64],
    tree: &Tree,
    basic: &[bool],
    tol: f64,
    block: usize,
    cursor: &mut usize,
) -> Option<(usize, usize)> {
    let n = tree.n;
    let total = cost.len();
    let mut best = -tol;
    let mut best_cell = usize::MAX;
    let mut scanned = 0usize;
    let mut in_block = 0usize;
    let mut c = *cursor;
    while scanned < total {
        if !basic[c] {
            let r = reduced_cost(cost, tree, c / n, c % n);
            if r < best {
                best = r;
                best_cell = c;
            }
        }
        scanned += 1;
        in_block += 1;
        c += 1;
        if c == total {
            c = 0;
        }
        if in_block == block {
            if best_cell != usize::MAX {
                break;
            }
            in_block = 0;
        }
    }
    *cursor = c;
    (best_cell != usize::MAX).then(|| (best_cell / n, best_cell % n))
}

fn northwest_corner(tree: &mut Tree, a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    let mut ra = a.to_vec();
    let mut rb = b.to_vec();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        tree.add(i, j, x);
        if i == m - 1 && j == n - 1 {
            break;
        }
        let row_done = ra[i] <= rb[j];
        ra[i] -= x;
        rb[j] -= x;
        if (row_done && i < m - 1) || j == n - 1 {
            ra[i] = 0.0;
            i += 1;
        } else {
            rb[j] = 0.0;
            j += 1;
        }
    }
}
