use meanfield_core::quantum::{
    coherent_husimi, coherent_state, coherent_wigner, coupling_symbol, coupling_symbol_cost, dobrushin_mixed,
    husimi_on, husimi_transform, mk_eps_lower, mk_eps_upper, qp_cost_trace, reduced_density,
    symmetrize_initial_coupling, toeplitz_lift_expectation, toeplitz_operator, trace_distance, wigner_transform,
    DensityMatrix, GridSpec, MixedState, SymbolMeasure,
};
use meanfield_core::rng::stream_rng;
use meanfield_core::transport::{wasserstein_exact, DiscreteMeasure, TransportPlan};
use rand::Rng;

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn coherent_state_moments_against_quadrature() {
    let eps = 0.25;
    let g = GridSpec::single(256, 8.0, eps).unwrap();
    let psi = coherent_state(&g, 0.0, 0.0).unwrap();
    let dens = |x: f64| (-(x * x) / eps).exp() / (std::f64::consts::PI * eps).sqrt();
    let oracle_m2 = simpson(|x| x * x * dens(x), -8.0, 8.0, 20_000);
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    let (m1, var) = rho.position_moments();
    assert!(m1.abs() < 1e-14);
    assert!((var - oracle_m2).abs() < 1e-10, "{var} vs {oracle_m2}");
    assert!((oracle_m2 - eps / 2.0).abs() < 1e-10);
}

#[test]
fn coherent_overlap_modulus() {
    let eps = 0.5;
    let g = GridSpec::single(256, 10.0, eps).unwrap();
    let (q1, p1, q2, p2) = (-0.4, 0.3, 0.9, -0.5);
    let a = coherent_state(&g, q1, p1).unwrap();
    let b = coherent_state(&g, q2, p2).unwrap();
    let grid_overlap = a.inner(&b).norm();
    // oracle: the overlap integral evaluated by fine quadrature, real and imaginary parts
    let pre = 1.0 / (std::f64::consts::PI * eps).sqrt();
    let env = |x: f64| pre * (-((x - q1).powi(2) + (x - q2).powi(2)) / (2.0 * eps)).exp();
    let re = simpson(|x| env(x) * ((p2 - p1) * x / eps).cos(), -10.0, 10.0, 40_000);
    let im = simpson(|x| env(x) * ((p2 - p1) * x / eps).sin(), -10.0, 10.0, 40_000);
    let oracle = (re * re + im * im).sqrt();
    let dz2 = (q1 - q2).powi(2) + (p1 - p2).powi(2);
    assert!((oracle - (-dz2 / (4.0 * eps)).exp()).abs() < 1e-12);
    assert!((grid_overlap - oracle).abs() < 1e-12, "{grid_overlap} vs {oracle}");
}

#[test]
fn wigner_of_coherent_state_at_256_points() {
    let eps = 0.25;
    let g = GridSpec::single(256, 8.0, eps).unwrap();
    let (q, p) = (1.0, -0.5);
    let rho = DensityMatrix::from_pure(&coherent_state(&g, q, p).unwrap()).unwrap();
    let w = wigner_transform(&rho).unwrap();
    let err = w.max_error(|x, xi| coherent_wigner(q, p, eps, x, xi));
    assert!(err < 1e-6, "{err}");
    assert!((w.integral() - 1.0).abs() < 1e-6);
}

fn random_symbol(rng: &mut impl Rng, atoms: usize, spread: f64) -> SymbolMeasure {
    let points: Vec<f64> = (0..2 * atoms).map(|_| rng.random_range(-spread..spread)).collect();
    let weights: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    SymbolMeasure::new(1, DiscreteMeasure::normalized(2, points, weights).unwrap()).unwrap()
}

#[test]
fn toeplitz_trace_identity_for_random_symbols() {
    let eps = 0.25;
    let g = GridSpec::single(128, 8.0, eps).unwrap();
    let mut rng = stream_rng(7, 0);
    let state_symbol = random_symbol(&mut rng, 3, 1.5);
    let r = toeplitz_operator(&g, &state_symbol).unwrap();
    for _ in 0..10 {
        let mu = random_symbol(&mut rng, 4, 2.0);
        let t = toeplitz_operator(&g, &mu).unwrap();
        let n = t.dim();
        let lhs: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (t.matrix[i * n + j] * r.matrix[j * n + i]).re)
            .sum();
        let mut rhs = 0.0;
        for m in 0..mu.len() {
            let z = mu.atom(m);
            let h = husimi_on(&r, &[z[0]], &[z[1]]).unwrap();
            rhs += mu.weight(m) * 2.0 * std::f64::consts::PI * eps * h.values[0];
        }
        assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs(), "{lhs} vs {rhs}");
    }
}

#[test]
fn toeplitz_lift_of_quadratic_symbol() {
    let eps = 0.25;
    let g = GridSpec::single(256, 8.0, eps).unwrap();
    let (q0, p0) = (0.7, -0.3);
    let rho = DensityMatrix::from_pure(&coherent_state(&g, q0, p0).unwrap()).unwrap();
    let s = eps.sqrt();
    let lattice = |c: f64| -> Vec<f64> { (-42..=42).map(|j| c + j as f64 * s / 6.0).collect() };
    let e = toeplitz_lift_expectation(&rho, |q, _| q * q, &lattice(q0), &lattice(p0)).unwrap();
    let (m, var) = rho.position_moments();
    let weyl = m * m + var;
    assert!((weyl - (q0 * q0 + eps / 2.0)).abs() < 1e-10);
    // anti-Wick lift adds ε/2 · (Δf/2) on top of trace(x²ρ)
    assert!((e - (weyl + eps / 2.0)).abs() < 1e-4, "{e} vs {}", weyl + eps / 2.0);
}

#[test]
fn husimi_of_mixtures_is_nonnegative_and_normalized() {
    let eps = 0.5;
    let g = GridSpec::single(128, 8.0, eps).unwrap();
    let mut rng = stream_rng(9, 0);
    for _ in 0..5 {
        let r = toeplitz_operator(&g, &random_symbol(&mut rng, 3, 1.5)).unwrap();
        let h = husimi_transform(&r).unwrap();
        assert!(h.min() >= -1e-12);
        assert!((h.integral() - 1.0).abs() < 1e-6, "{}", h.integral());
    }
    let rho = DensityMatrix::from_pure(&coherent_state(&g, 0.5, 0.5).unwrap()).unwrap();
    let h = husimi_transform(&rho).unwrap();
    assert!(h.max_error(|x, xi| coherent_husimi(0.5, 0.5, eps, x, xi)) < 1e-10);
}

#[test]
fn bracket_for_point_symbols() {
    let eps = 0.25;
    let a = SymbolMeasure::dirac(1, &[0.5, 0.0]).unwrap();
    let b = SymbolMeasure::dirac(1, &[-0.5, 1.0]).unwrap();
    assert!((mk_eps_upper(&a, &a, eps).unwrap() - 0.5).abs() < 1e-15);
    assert!((mk_eps_upper(&a, &b, eps).unwrap() - 2.5).abs() < 1e-14);

    let g = GridSpec::single(128, 8.0, eps).unwrap();
    let ra = toeplitz_operator(&g, &a).unwrap();
    let rb = toeplitz_operator(&g, &b).unwrap();
    // equal-covariance Husimi Gaussians: W₂² is the squared mean distance
    let low = mk_eps_lower(&ra, &rb).unwrap();
    assert!((low - (2.0 - 0.5)).abs() < 1e-8, "{low}");
}

#[test]
fn upper_bound_equals_lifted_optimal_plan_cost() {
    let eps = 0.25;
    let g = GridSpec::single(128, 8.0, eps).unwrap();
    let mut rng = stream_rng(13, 0);
    for _ in 0..3 {
        let s1 = random_symbol(&mut rng, 3, 1.5);
        let s2 = random_symbol(&mut rng, 2, 1.5);
        let upper = mk_eps_upper(&s1, &s2, eps).unwrap();
        let (_, plan) = wasserstein_exact(&s1.measure, &s2.measure, 2.0).unwrap();
        let lift = MixedState::toeplitz_coupling(&g, &coupling_symbol(&plan, &s1, &s2).unwrap()).unwrap();
        let cost = qp_cost_trace(&lift).unwrap();
        assert!((cost - upper).abs() <= 1e-4 * upper, "{cost} vs {upper}");
    }
}

#[test]
fn lower_bound_never_exceeds_a_coupling_cost() {
    let mut rng = stream_rng(17, 0);
    for k in 0..20 {
        let eps = [0.5, 0.25, 0.1][k % 3];
        let g = GridSpec::single(128, 6.0, eps).unwrap();
        let s1 = random_symbol(&mut rng, 2, 1.0);
        let s2 = random_symbol(&mut rng, 2, 1.0);
        let r1 = toeplitz_operator(&g, &s1).unwrap();
        let r2 = toeplitz_operator(&g, &s2).unwrap();
        let low = mk_eps_lower(&r1, &r2).unwrap();
        let (_, plan) = wasserstein_exact(&s1.measure, &s2.measure, 2.0).unwrap();
        let lift = MixedState::toeplitz_coupling(&g, &coupling_symbol(&plan, &s1, &s2).unwrap()).unwrap();
        let cost = qp_cost_trace(&lift).unwrap();
        assert!(low <= cost + 1e-6, "{low} > {cost}");
        assert!(cost >= 2.0 * eps - 1e-6);
    }
}

#[test]
fn symmetrization_preserves_the_coupling_cost() {
    let eps = 0.5;
    let g = GridSpec::single(32, 6.0, eps).unwrap();
    // N = 2: one asymmetric atom on each side
    let source = SymbolMeasure::dirac(1, &[-0.5, 0.2, 0.8, 0.0]).unwrap();
    let target = SymbolMeasure::dirac(1, &[-0.3, 0.0, 0.4, -0.4]).unwrap();
    let plan = TransportPlan { entries: vec![(0, 0, 1.0)], cost: 0.0, p: 2.0 };
    let raw = coupling_symbol(&plan, &source, &target).unwrap();
    let sym = symmetrize_initial_coupling(&plan, &source, &target).unwrap();
    assert_eq!(sym.len(), 2);
    let lifted_raw = dobrushin_mixed(&MixedState::toeplitz_coupling(&g, &raw).unwrap(), 2).unwrap();
    let lifted_sym = dobrushin_mixed(&MixedState::toeplitz_coupling(&g, &sym).unwrap(), 2).unwrap();
    let symbolic = coupling_symbol_cost(&sym, eps).unwrap();
    assert!((lifted_raw - lifted_sym).abs() < 1e-12);
    assert!((lifted_sym - symbolic).abs() < 1e-8, "{lifted_sym} vs {symbolic}");
    // the symmetrized coupling has equal one-particle marginals on each side
    let mix = MixedState::toeplitz_coupling(&g, &sym).unwrap();
    let marginal = |axis: usize| {
        let mut acc: Option<DensityMatrix> = None;
        for (w, phi) in &mix.components {
            let r = reduced_density(phi, axis, 1).unwrap();
            match acc.as_mut() {
                None => acc = Some(DensityMatrix { matrix: r.matrix.iter().map(|z| z * w).collect(), ..r }),
                Some(a) => a.matrix.iter_mut().zip(&r.matrix).for_each(|(x, y)| *x += y * w),
            }
        }
        acc.unwrap()
    };
    for (a, b) in [(0, 1), (2, 3)] {
        assert!(trace_distance(&marginal(a), &marginal(b)).unwrap() < 1e-12);
    }
}
