use meanfield_core::potential::make_gaussian_potential;
use meanfield_core::quantum::{
    coherent_product, coherent_state, dobrushin_quantum_functional, hartree_energy, partial_trace, reduced_density,
    trace_distance, CoupledStep, DensityMatrix, GridSpec, HartreeStep, SplitStep, WaveFunction,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Closed-form free evolution of `|q + ip, ε⟩` under `iε∂_tψ = −(ε²/2)ψ''`.
fn free_coherent(eps: f64, q: f64, p: f64, t: f64, x: f64) -> Complex64 {
    let one_it = Complex64::new(1.0, t);
    let z = x - q - p * t;
    let pre = (std::f64::consts::PI * eps).powf(-0.25) / one_it.sqrt();
    let gauss = (-(z * z) / (2.0 * eps * one_it)).exp();
    let phase = Complex64::from_polar(1.0, (p * x - 0.5 * p * p * t) / eps);
    pre * gauss * phase
}

#[test]
fn free_evolution_matches_closed_form() {
    let eps = 0.25;
    let g = GridSpec::single(256, 12.0, eps).unwrap();
    let (q, p) = (-1.0, 1.5);
    let mut psi = coherent_state(&g, q, p).unwrap();
    let zero = make_gaussian_potential(0.0, 1.0, 1).unwrap();
    let step = SplitStep::nbody(&g, &zero, 0.01).unwrap();
    for _ in 0..100 {
        step.step(&mut psi).unwrap();
    }
    let t = psi.time;
    let xs = g.coordinates();
    let err = psi.values.iter().zip(&xs).map(|(z, &x)| (z - free_coherent(eps, q, p, t, x)).norm()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    assert!((psi.position_mean(0) - (q + p * t)).abs() < 1e-8);
}

#[test]
fn nbody_unitarity_over_a_thousand_steps() {
    let g = GridSpec::new(1, 2, 64, 8.0, 0.5).unwrap();
    let v = make_gaussian_potential(1.0, 1.0, 1).unwrap();
    let mut psi = coherent_product(&g, &[(-0.5, 0.2), (0.5, -0.2)]).unwrap();
    let step = SplitStep::nbody(&g, &v, 0.01).unwrap();
    for _ in 0..1000 {
        step.step(&mut psi).unwrap();
    }
    assert!((psi.norm() - 1.0).abs() < 1e-10, "{}", psi.norm());
}

/// Dense spectral Laplacian `(1/M) Σ_k (−k²) cos(k(x_j − x_l))`.
fn dense_laplacian(g: &GridSpec) -> DMatrix<f64> {
    let m = g.points_per_axis;
    let xs = g.coordinates();
    let ks = g.wavenumbers();
    DMatrix::from_fn(m, m, |j, l| ks.iter().map(|k| -k * k * (k * (xs[j] - xs[l])).cos()).sum::<f64>() / m as f64)
}

#[test]
fn split_step_local_error_is_third_order() {
    let eps = 1.0;
    let g = GridSpec::single(32, 6.0, eps).unwrap();
    let u = |x: f64| 1.5 * (-0.5 * x * x).exp();
    let xs = g.coordinates();
    let h = dense_laplacian(&g) * (-0.5 * eps * eps)
        + DMatrix::from_diagonal(&DVector::from_iterator(32, xs.iter().map(|&x| u(x))));
    let eig = SymmetricEigen::new(h);
    let psi0 = coherent_state(&g, 0.5, 0.3).unwrap();
    let exact = |dt: f64| -> Vec<Complex64> {
        let c: Vec<Complex64> =
            (0..32).map(|k| (0..32).map(|i| psi0.values[i] * eig.eigenvectors[(i, k)]).sum()).collect();
        (0..32)
            .map(|i| {
                (0..32)
                    .map(|k| {
                        c[k] * eig.eigenvectors[(i, k)] * Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt / eps)
                    })
                    .sum()
            })
            .collect()
    };
    let local_error = |dt: f64| {
        let mut psi = psi0.clone();
        SplitStep::external(&g, u, dt).unwrap().step(&mut psi).unwrap();
        let e = exact(dt);
        (psi.values.iter().zip(&e).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * g.spacing()).sqrt()
    };
    let (e1, e2, e3) = (local_error(0.04), local_error(0.02), local_error(0.01));
    let s1 = (e1 / e2).log2();
    let s2 = (e2 / e3).log2();
    assert!((s1 - 3.0).abs() <= 0.3 && (s2 - 3.0).abs() <= 0.3, "slopes {s1} {s2} ({e1:e} {e2:e} {e3:e})");
}

fn hartree_drift(dt: f64) -> f64 {
    let g = GridSpec::single(64, 8.0, 0.5).unwrap();
    let v = make_gaussian_potential(3.0, 0.7, 1).unwrap();
    let mut psi = coherent_state(&g, 0.3, 0.8).unwrap();
    let e0 = hartree_energy(&psi, &v).unwrap();
    let step = HartreeStep::new(&g, &v, dt).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..(1.0 / dt).round() as usize {
        step.step(&mut psi).unwrap();
        worst = worst.max((hartree_energy(&psi, &v).unwrap() - e0).abs());
    }
    worst
}

#[test]
fn hartree_energy_drift_is_second_order() {
    let ratio = hartree_drift(0.02) / hartree_drift(0.01);
    assert!((ratio - 4.0).abs() <= 0.8, "{ratio}");
}

#[test]
fn hartree_mass_is_conserved() {
    let g = GridSpec::single(128, 8.0, 0.5).unwrap();
    let v = make_gaussian_potential(1.0, 1.0, 1).unwrap();
    let mut psi = coherent_state(&g, 0.0, 0.5).unwrap();
    let step = HartreeStep::new(&g, &v, 0.01).unwrap();
    for _ in 0..1000 {
        step.step(&mut psi).unwrap();
    }
    assert!((psi.norm_sq() - 1.0).abs() < 1e-12, "{}", psi.norm_sq() - 1.0);
}

#[test]
fn symmetrized_two_mode_state_has_half_half_marginal() {
    let eps = 0.25;
    let g = GridSpec::new(1, 2, 128, 8.0, eps).unwrap();
    let a = coherent_state(&g, -2.0, 0.0).unwrap();
    let b = coherent_state(&g, 2.0, 0.0).unwrap();
    let ab = WaveFunction::product(&[&a, &b]).unwrap();
    let ba = WaveFunction::product(&[&b, &a]).unwrap();
    let v = ab.values.iter().zip(&ba.values).map(|(x, y)| x + y).collect();
    let mut psi = WaveFunction::from_values(g, 2, v).unwrap();
    psi.normalize().unwrap();
    let rho = partial_trace(&psi, 1).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-10);
    let (mut vals, _) = rho.eigen();
    vals.sort_by(|x, y| y.total_cmp(x));
    // overlap e^{−16/(4ε)} = e^{−16} sets the deviation from ½
    assert!((vals[0] - 0.5).abs() < 1e-6 && (vals[1] - 0.5).abs() < 1e-6, "{vals:?}");
    assert!(vals[2].abs() < 1e-10);
}

/// For independent copies of one coherent state the free flow spreads the
/// relative displacement: `D(t) = ε(2 + t²)`.
#[test]
fn free_coupling_keeps_equal_marginals() {
    let g = GridSpec::new(1, 2, 32, 6.0, 0.5).unwrap();
    let zero = make_gaussian_potential(0.0, 1.0, 1).unwrap();
    let phi0 = coherent_state(&g, 0.3, 0.4).unwrap();
    let mut phi = WaveFunction::product(&[&phi0, &phi0, &phi0, &phi0]).unwrap();
    let mut reference = phi0.clone();
    let d0 = dobrushin_quantum_functional(&phi, 2).unwrap();
    assert!((d0 - 1.0).abs() < 1e-10, "{d0}");
    let step = CoupledStep::new(&g, &zero, 0.02).unwrap();
    for _ in 0..25 {
        step.step(&mut phi, &mut reference).unwrap();
    }
    let d1 = dobrushin_quantum_functional(&phi, 2).unwrap();
    let t = phi.time;
    assert!((d1 - 0.5 * (2.0 + t * t)).abs() < 1e-8, "{d1} at t={t}");
    let x = reduced_density(&phi, 0, 1).unwrap();
    let y = reduced_density(&phi, 2, 1).unwrap();
    assert!(trace_distance(&x, &y).unwrap() < 1e-10);
}

#[test]
fn coupled_first_half_tracks_hartree_square() {
    let g = GridSpec::new(1, 2, 32, 6.0, 0.5).unwrap();
    let v = make_gaussian_potential(1.0, 1.0, 1).unwrap();
    let phi0 = coherent_state(&g, 0.0, 0.3).unwrap();
    let mut phi = WaveFunction::product(&[&phi0, &phi0, &phi0, &phi0]).unwrap();
    let mut reference = phi0.clone();
    let mut solo = phi0.clone();
    let step = CoupledStep::new(&g, &v, 0.02).unwrap();
    let hartree = HartreeStep::new(&g, &v, 0.02).unwrap();
    for _ in 0..20 {
        step.step(&mut phi, &mut reference).unwrap();
        hartree.step(&mut solo).unwrap();
    }
    assert!((phi.norm() - 1.0).abs() < 1e-12);
    let x_half = reduced_density(&phi, 0, 2).unwrap();
    let square = DensityMatrix::from_pure(&WaveFunction::product(&[&solo, &solo]).unwrap()).unwrap();
    let td = trace_distance(&x_half, &square).unwrap();
    assert!(td < 1e-8, "{td}");
    let d = dobrushin_quantum_functional(&phi, 2).unwrap();
    assert!(d >= 1.0 - 1e-6, "{d}");
}
