use meanfield_core::transport::{cost_matrix, kantorovich_gap, solve_exact, wasserstein_exact, DiscreteMeasure};
use proptest::prelude::*;

fn cloud(dim: usize, max_len: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1..=max_len).prop_flat_map(move |m| {
        prop::collection::vec(-3.0f64..3.0, m * dim).prop_map(move |pts| DiscreteMeasure::uniform(dim, pts).unwrap())
    })
}

fn weighted(dim: usize, len: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (prop::collection::vec(-3.0f64..3.0, len * dim), prop::collection::vec(0.05f64..1.0, len))
        .prop_map(move |(pts, w)| DiscreteMeasure::normalized(dim, pts, w).unwrap())
}

fn equal_pair(dim: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    (1usize..=6).prop_flat_map(move |m| {
        (prop::collection::vec(-3.0f64..3.0, m * dim), prop::collection::vec(-3.0f64..3.0, m * dim)).prop_map(
            move |(a, b)| (DiscreteMeasure::uniform(dim, a).unwrap(), DiscreteMeasure::uniform(dim, b).unwrap()),
        )
    })
}

fn brute_force(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    fn rec(c: &[f64], n: usize, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                rec(c, n, row + 1, used, acc + c[row * n + j], best);
                used[j] = false;
            }
        }
    }
    let n = a.len();
    let c = cost_matrix(a, b, 2.0);
    let mut best = f64::INFINITY;
    rec(&c, n, 0, &mut vec![false; n], 0.0, &mut best);
    best / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn symmetric(a in weighted(2, 5), b in weighted(2, 4), p in 1.0f64..3.0) {
        let (dab, _) = wasserstein_exact(&a, &b, p).unwrap();
        let (dba, _) = wasserstein_exact(&b, &a, p).unwrap();
        prop_assert!((dab - dba).abs() <= 1e-12 * (1.0 + dab));
    }

    #[test]
    fn triangle(a in weighted(2, 4), b in weighted(2, 4), c in weighted(2, 4), p in 1.0f64..3.0) {
        let ab = wasserstein_exact(&a, &b, p).unwrap().0;
        let bc = wasserstein_exact(&b, &c, p).unwrap().0;
        let ac = wasserstein_exact(&a, &c, p).unwrap().0;
        prop_assert!(ac <= ab + bc + 1e-10);
    }

    #[test]
    fn plans_are_feasible(a in weighted(3, 7), b in cloud(3, 9), p in 1.0f64..3.0) {
        let (_, plan) = wasserstein_exact(&a, &b, p).unwrap();
        prop_assert!(plan.marginal_error(&a, &b) <= 1e-10);
        prop_assert!(plan.entries.iter().all(|e| e.2 >= 0.0));
    }

    #[test]
    fn assignment_matches_enumeration((a, b) in equal_pair(2)) {
        let (_, plan) = wasserstein_exact(&a, &b, 2.0).unwrap();
        prop_assert_eq!(plan.cost, brute_force(&a, &b));
    }

    #[test]
    fn dilation_scales_distance(a in weighted(2, 5), b in weighted(2, 5), s in 0.1f64..5.0, p in 1.0f64..3.0) {
        let d = wasserstein_exact(&a, &b, p).unwrap().0;
        let ds = wasserstein_exact(&a.dilate(s), &b.dilate(s), p).unwrap().0;
        prop_assert!((ds - s * d).abs() <= 1e-10 * (1.0 + s * d));
    }

    #[test]
    fn duals_certify_optimality(a in weighted(2, 6), b in weighted(2, 5), p in 1.0f64..3.0) {
        let sol = solve_exact(&a, &b, p).unwrap();
        let gap = kantorovich_gap(&a, &b, p, &sol.plan, &sol.source_potential, &sol.target_potential).unwrap();
        prop_assert!(gap <= 1e-9, "gap {}", gap);
    }
}

#[test]
fn larger_weighted_problem_is_certified() {
    use rand::Rng;
    let mut rng = meanfield_core::rng::stream_rng(77, 0);
    let mut gen = |m: usize| {
        let pts = (0..2 * m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        DiscreteMeasure::normalized(2, pts, w).unwrap()
    };
    let a = gen(300);
    let b = gen(250);
    let sol = solve_exact(&a, &b, 2.0).unwrap();
    assert!(sol.plan.marginal_error(&a, &b) <= 1e-10);
    let gap = kantorovich_gap(&a, &b, 2.0, &sol.plan, &sol.source_potential, &sol.target_potential).unwrap();
    assert!(gap <= 1e-9, "gap {gap}");
}
