//! Log-domain Sinkhorn iterations for entropic optimal transport, followed by
//! a rounding step that turns the approximate plan into an exactly feasible
//! one.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SinkhornPlan {
    /// Dense row-major plan after rounding.
    pub plan: Vec<f64>,
    pub iterations: usize,
    /// L¹ marginal violation of the unrounded plan at exit.
    pub marginal_gap: f64,
}

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + values.map(|v| (v - mx).exp()).sum::<f64>().ln()
}

#[allow(clippy::too_many_arguments)]
fn sweep(cost: &[f64], log_a: &[f64], log_b: &[f64], a: &[f64], b: &[f64], reg: f64, f: &mut [f64], g: &mut [f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let row = &cost[i * n..(i + 1) * n];
        let lse = logsumexp((0..n).map(|j| (g[j] - row[j]) / reg));
        f[i] = if a[i] > 0.0 { reg * (log_a[i] - lse) } else { f64::NEG_INFINITY };
    }
    for j in 0..n {
        let lse = logsumexp((0..m).map(|i| (f[i] - cost[i * n + j]) / reg));
        g[j] = if b[j] > 0.0 { reg * (log_b[j] - lse) } else { f64::NEG_INFINITY };
    }
}

/// Runs log-domain Sinkhorn on a dense `m×n` cost with regularization `reg`
/// until the L¹ marginal violation drops below `tol`, then rounds the plan
/// onto the transport polytope.
pub fn sinkhorn_log(cost: &[f64], a: &[f64], b: &[f64], reg: f64, max_iter: usize, tol: f64) -> Result<SinkhornPlan> {
    let (m, n) = (a.len(), b.len());
    let log_a: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    // regularization annealed from the cost scale down to `reg`, each stage
    // warm-started from the previous potentials
    let cmax = cost.iter().fold(0.0f64, |acc, c| acc.max(*c));
    let mut stages = Vec::new();
    let mut r = reg;
    while r < cmax {
        stages.push(r);
        r *= 4.0;
    }
    stages.reverse();
    for &stage_reg in stages.iter().take(stages.len().saturating_sub(1)) {
        for _ in 0..50 {
            sweep(cost, &log_a, &log_b, a, b, stage_reg, &mut f, &mut g);
        }
    }
    while iterations < max_iter {
        iterations += 1;
        sweep(cost, &log_a, &log_b, a, b, reg, &mut f, &mut g);
        // columns are exact after the g update; measure the row violation
        gap = (0..m)
            .map(|i| {
                let row = &cost[i * n..(i + 1) * n];
                let r: f64 = (0..n).map(|j| ((f[i] + g[j] - row[j]) / reg).exp()).sum();
                (r - a[i]).abs()
            })
            .sum();
        if gap <= tol {
            break;
        }
    }
    if !(gap <= tol) {
        return Err(Error::NonConvergence { iterations, gap });
    }
    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            plan[i * n + j] = ((f[i] + g[j] - cost[i * n + j]) / reg).exp();
        }
    }
    round_to_feasible(&mut plan, a, b);
    Ok(SinkhornPlan { plan, iterations, marginal_gap: gap })
}

/// Projects a nonnegative matrix onto `{X ≥ 0 : X1 = a, Xᵀ1 = b}` by row and
/// column down-scaling followed by a rank-one correction of the deficits.
pub fn round_to_feasible(plan: &mut [f64], a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let row = &mut plan[i * n..(i + 1) * n];
        let r: f64 = row.iter().sum();
        if r > a[i] {
            let s = a[i] / r;
            row.iter_mut().for_each(|x| *x *= s);
        }
    }
    let mut col = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            col[j] += plan[i * n + j];
        }
    }
    for j in 0..n {
        if col[j] > b[j] {
            let s = b[j] / col[j];
            for i in 0..m {
                plan[i * n + j] *= s;
            }
        }
    }
    let err_r: Vec<f64> = (0..m).map(|i| (a[i] - plan[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0)).collect();
    let err_c: Vec<f64> = (0..n).map(|j| (b[j] - (0..m).map(|i| plan[i * n + j]).sum::<f64>()).max(0.0)).collect();
    let total: f64 = err_r.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan[i * n + j] += err_r[i] * err_c[j] / total;
            }
        }
    }
}
