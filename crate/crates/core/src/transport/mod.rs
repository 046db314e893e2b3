//! Discrete optimal transport between weighted point clouds.

pub mod assignment;
pub mod io;
mod measure;
pub mod network_simplex;
pub mod sinkhorn;

pub use measure::{cost_matrix, ground_cost, DiscreteMeasure, TransportPlan};

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// Largest support product handled by the general LP solver.
pub const MAX_LP_CELLS: usize = 2048 * 2048;

/// An optimal plan together with Kantorovich dual potentials certifying it.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    /// `dist_{MK,p}`, the p-th root of the optimal cost.
    pub distance: f64,
    pub plan: TransportPlan,
    /// Dual potential on the support of the source measure.
    pub source_potential: Vec<f64>,
    /// Dual potential on the support of the target measure.
    pub target_potential: Vec<f64>,
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return invalid(format!("exponent must be ≥ 1, got {p}"));
    }
    if mu.dim() != nu.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", mu.dim(), nu.dim()));
    }
    let (sa, sb): (f64, f64) = (mu.weights().iter().sum(), nu.weights().iter().sum());
    if (sa - sb).abs() > 1e-12 {
        return invalid(format!("total masses differ: {sa} vs {sb}"));
    }
    Ok(())
}

/// Exact `dist_{MK,p}(mu, nu)` with ground cost `|x−y|^p`.
///
/// Equal-size clouds with equal weights are solved as an assignment problem;
/// anything else goes through the transportation simplex.
pub fn wasserstein_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<(f64, TransportPlan)> {
    let sol = solve_exact(mu, nu, p)?;
    Ok((sol.distance, sol.plan))
}

/// Same as [`wasserstein_exact`], also returning the dual potentials.
pub fn solve_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<ExactSolution> {
    check_pair(mu, nu, p)?;
    let (m, n) = (mu.len(), nu.len());
    if m * n > MAX_LP_CELLS {
        return Err(Error::Resource(format!("transport problem {m}×{n} exceeds the {MAX_LP_CELLS}-cell limit")));
    }
    let cost = cost_matrix(mu, nu, p);
    if m == n && mu.is_uniform() && nu.is_uniform() {
        let a = assignment::solve_assignment(&cost, n);
        let total = a.total(&cost) / n as f64;
        let entries = a.row_to_col.iter().enumerate().map(|(i, &j)| (i, j, mu.weights()[i])).collect();
        return Ok(ExactSolution {
            distance: total.powf(1.0 / p),
            plan: TransportPlan { entries, cost: total, p },
            source_potential: a.u,
            target_potential: a.v,
        });
    }
    let sol = network_simplex::solve_transportation(&cost, mu.weights(), nu.weights())?;
    let total = sol.cost.max(0.0);
    Ok(ExactSolution {
        distance: total.powf(1.0 / p),
        plan: TransportPlan { entries: sol.flows, cost: total, p },
        source_potential: sol.u,
        target_potential: sol.v,
    })
}

/// Result of an entropic transport solve.
#[derive(Debug, Clone)]
pub struct SinkhornResult {
    /// p-th root of the rounded plan's transport cost; an upper bound on
    /// the exact distance.
    pub distance: f64,
    pub plan: TransportPlan,
    pub iterations: usize,
    pub marginal_gap: f64,
}

/// Entropic approximation of `dist_{MK,p}`. The plan is rounded onto the
/// feasible set before it is costed, so the reported value never undercuts
/// the true optimum.
pub fn wasserstein_sinkhorn(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    reg: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    check_pair(mu, nu, p)?;
    if !(reg > 0.0) {
        return invalid(format!("regularization must be positive, got {reg}"));
    }
    let n = nu.len();
    let cost = cost_matrix(mu, nu, p);
    let s = sinkhorn::sinkhorn_log(&cost, mu.weights(), nu.weights(), reg, max_iter, tol)?;
    let mut entries = Vec::new();
    let mut total = 0.0;
    for (k, &x) in s.plan.iter().enumerate() {
        if x > 0.0 {
            entries.push((k / n, k % n, x));
            total += x * cost[k];
        }
    }
    Ok(SinkhornResult {
        distance: total.powf(1.0 / p),
        plan: TransportPlan { entries, cost: total, p },
        iterations: s.iterations,
        marginal_gap: s.marginal_gap,
    })
}

/// Duality gap `Σ π c − (∫a dμ + ∫b dν)` of a plan against a dual pair.
///
/// The pair must satisfy `a_i + b_j ≤ |x_i − y_j|^p` on all support pairs; a
/// gap below 1e−9 certifies that the plan is optimal.
pub fn kantorovich_gap(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    plan: &TransportPlan,
    a: &[f64],
    b: &[f64],
) -> Result<f64> {
    check_pair(mu, nu, p)?;
    if a.len() != mu.len() || b.len() != nu.len() {
        return invalid("dual potentials do not match the supports");
    }
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            let c = ground_cost(mu.point(i), nu.point(j), p);
            if a[i] + b[j] > c + 1e-9 * (1.0 + c) {
                return invalid(format!("dual pair infeasible at ({i},{j}): {} > {c}", a[i] + b[j]));
            }
        }
    }
    let primal = TransportPlan { p, ..plan.clone() }.evaluate_cost(mu, nu);
    let dual: f64 = a.iter().zip(mu.weights()).map(|(x, w)| x * w).sum::<f64>()
        + b.iter().zip(nu.weights()).map(|(x, w)| x * w).sum::<f64>();
    Ok((primal - dual).max(0.0))
}

/// Monte-Carlo estimate of the distance between two large equal-weight
/// clouds.
#[derive(Debug, Clone, Serialize)]
pub struct SubsampleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub values: Vec<f64>,
}

/// Averages `wasserstein_exact` over `repeats` pairs of `m`-point subsamples
/// drawn without replacement. The estimator is biased upwards by the
/// sampling distance of each subsample to its parent cloud; callers compare
/// against a same-law baseline rather than zero.
pub fn subsample_distance(
    cloud_a: &DiscreteMeasure,
    cloud_b: &DiscreteMeasure,
    p: f64,
    m: usize,
    repeats: usize,
    seed: u64,
) -> Result<SubsampleEstimate> {
    check_pair(cloud_a, cloud_b, p)?;
    if m == 0 || m > cloud_a.len().min(cloud_b.len()) {
        return invalid(format!("subsample size {m} out of range"));
    }
    if repeats == 0 {
        return invalid("at least one repeat is required");
    }
    if !cloud_a.is_uniform() || !cloud_b.is_uniform() {
        return invalid("subsampling requires equal-weight clouds");
    }
    let values: Vec<f64> = (0..repeats)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut rng = stream_rng(seed, r as u64);
            let mut ia = index::sample(&mut rng, cloud_a.len(), m).into_vec();
            let mut ib = index::sample(&mut rng, cloud_b.len(), m).into_vec();
            ia.sort_unstable();
            ib.sort_unstable();
            let sa = cloud_a.uniform_subset(&ia)?;
            let sb = cloud_b.uniform_subset(&ib)?;
            Ok(wasserstein_exact(&sa, &sb, p)?.0)
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(SubsampleEstimate { mean, stderr, values })
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_cloud(rng: &mut impl Rng, m: usize, dim: usize) -> DiscreteMeasure {
        DiscreteMeasure::uniform(dim, (0..m * dim).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn dirac_pair_distance() {
        let a = DiscreteMeasure::dirac(&[0.0, 0.0]).unwrap();
        let b = DiscreteMeasure::dirac(&[3.0, 4.0]).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let (d, plan) = wasserstein_exact(&a, &b, p).unwrap();
            assert!((d - 5.0).abs() < 1e-12);
            assert_eq!(plan.entries, vec![(0, 0, 1.0)]);
        }
    }

    #[test]
    fn identical_measures_zero() {
        let mut rng = stream_rng(4, 0);
        let a = random_cloud(&mut rng, 7, 3);
        assert_eq!(wasserstein_exact(&a, &a, 2.0).unwrap().0, 0.0);
        let w = DiscreteMeasure::normalized(1, vec![0.0, 1.0, 5.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(wasserstein_exact(&w, &w, 1.0).unwrap().0 < 1e-15);
    }

    #[test]
    fn five_points_match_permutation_enumeration() {
        let mut rng = stream_rng(5, 0);
        let a = random_cloud(&mut rng, 5, 2);
        let b = random_cloud(&mut rng, 5, 2);
        let c = cost_matrix(&a, &b, 2.0);
        let best = permutations(5)
            .iter()
            .map(|s| s.iter().enumerate().map(|(i, &j)| c[i * 5 + j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let (d, plan) = wasserstein_exact(&a, &b, 2.0).unwrap();
        assert_eq!(plan.cost, best / 5.0);
        assert!((d * d - best / 5.0).abs() < 1e-14);
    }

    #[test]
    fn sinkhorn_close_to_exact() {
        let mut rng = stream_rng(5, 0);
        let a = random_cloud(&mut rng, 5, 2);
        let b = random_cloud(&mut rng, 5, 2);
        let (exact, _) = wasserstein_exact(&a, &b, 2.0).unwrap();
        let s = wasserstein_sinkhorn(&a, &b, 2.0, 1e-3, 100_000, 1e-10).unwrap();
        assert!(s.distance >= exact - 1e-12);
        assert!((s.distance - exact).abs() <= 0.01 * exact, "{} vs {exact}", s.distance);
        assert!(s.plan.marginal_error(&a, &b) < 1e-10);

        let same = wasserstein_sinkhorn(&a, &a, 2.0, 1e-3, 100_000, 1e-10).unwrap();
        assert!(same.distance <= 1e-3, "{}", same.distance);
    }

    #[test]
    fn two_point_lp_by_hand() {
        let mu = DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let nu = DiscreteMeasure::dirac(&[0.0]).unwrap();
        let (d, plan) = wasserstein_exact(&mu, &nu, 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert!(plan.marginal_error(&mu, &nu) < 1e-15);
        let s = wasserstein_sinkhorn(&mu, &nu, 1.0, 1e-2, 1000, 1e-12).unwrap();
        assert!(s.distance >= 0.5 - 1e-15);
    }

    #[test]
    fn duality_gap_certificates() {
        let mut rng = stream_rng(9, 0);
        let a = random_cloud(&mut rng, 6, 2);
        let b = random_cloud(&mut rng, 6, 2);
        let sol = solve_exact(&a, &b, 2.0).unwrap();
        let gap = kantorovich_gap(&a, &b, 2.0, &sol.plan, &sol.source_potential, &sol.target_potential).unwrap();
        assert!(gap <= 1e-9);

        let w =
            DiscreteMeasure::normalized(2, (0..10).map(|k| k as f64 * 0.3).collect(), vec![1.0, 2.0, 3.0, 1.0, 1.0])
                .unwrap();
        let sol = solve_exact(&w, &b, 1.5).unwrap();
        let gap = kantorovich_gap(&w, &b, 1.5, &sol.plan, &sol.source_potential, &sol.target_potential).unwrap();
        assert!(gap <= 1e-9);

        let z = vec![0.0; 6];
        assert_eq!(kantorovich_gap(&a, &a, 2.0, &solve_exact(&a, &a, 2.0).unwrap().plan, &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn suboptimal_plan_gap_is_excess() {
        // sources 0 and 1, targets 1 and 0: the identity pairing crosses
        let mu = DiscreteMeasure::uniform(1, vec![0.0, 1.0]).unwrap();
        let nu = DiscreteMeasure::uniform(1, vec![1.0, 0.0]).unwrap();
        let sol = solve_exact(&mu, &nu, 2.0).unwrap();
        assert_eq!(sol.plan.cost, 0.0);
        let crossed = TransportPlan { entries: vec![(0, 0, 0.5), (1, 1, 0.5)], cost: 1.0, p: 2.0 };
        let gap = kantorovich_gap(&mu, &nu, 2.0, &crossed, &sol.source_potential, &sol.target_potential).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_duals_rejected() {
        let mu = DiscreteMeasure::dirac(&[0.0]).unwrap();
        let nu = DiscreteMeasure::dirac(&[1.0]).unwrap();
        let plan = TransportPlan { entries: vec![(0, 0, 1.0)], cost: 1.0, p: 2.0 };
        assert!(kantorovich_gap(&mu, &nu, 2.0, &plan, &[1.0], &[0.5]).is_err());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = DiscreteMeasure::dirac(&[0.0]).unwrap();
        let b = DiscreteMeasure::dirac(&[0.0, 1.0]).unwrap();
        assert!(wasserstein_exact(&a, &b, 2.0).is_err());
        assert!(wasserstein_exact(&a, &a, 0.5).is_err());
    }

    #[test]
    fn subsample_full_size_equals_exact() {
        let mut rng = stream_rng(12, 0);
        let a = random_cloud(&mut rng, 40, 2);
        let b = random_cloud(&mut rng, 40, 2);
        let est = subsample_distance(&a, &b, 2.0, 40, 1, 3).unwrap();
        let (d, _) = wasserstein_exact(&a, &b, 2.0).unwrap();
        assert_eq!(est.mean, d);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn subsample_baseline_and_translation() {
        let mut rng = stream_rng(13, 0);
        let a = random_cloud(&mut rng, 400, 2);
        let base = subsample_distance(&a, &a, 2.0, 100, 8, 1).unwrap();
        assert!(base.mean > 0.0);
        let shifted = a.translate(&[3.0, 0.0]);
        let est = subsample_distance(&a, &shifted, 2.0, 100, 8, 1).unwrap();
        assert!(est.mean >= 3.0 - base.mean);
    }
}
