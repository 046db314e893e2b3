//! Monte-Carlo sample of the coupled flow pairing the tensorized mean-field
//! dynamics `(X_N, Ξ_N)` with the N-body dynamics `(Y_N, H_N)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forces::{nbody_force, ForceEvaluation, MeanFieldForce};
use super::init::InitialData;
use super::state::{PhaseState, VlasovCloud};
use super::verlet::{kick, kick_drift};
use super::vlasov::self_force;
use crate::error::{invalid, Error, Result};
use crate::potential::Potential;
use crate::rng::child_seed;
use crate::transport::{mean_stderr, DiscreteMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledEnsemble {
    /// Samples of `(X_N, Ξ_N)`, driven by the reference cloud's mean field.
    pub mean_field: Vec<PhaseState>,
    /// Samples of `(Y_N, H_N)`, driven by their own pairwise forces.
    pub nbody: Vec<PhaseState>,
    /// High-resolution approximation of the Vlasov solution `f(t)`.
    pub reference: VlasovCloud,
    pub seed: u64,
}

impl CoupledEnsemble {
    pub fn new(mean_field: Vec<PhaseState>, nbody: Vec<PhaseState>, reference: VlasovCloud, seed: u64) -> Result<Self> {
        if mean_field.is_empty() || mean_field.len() != nbody.len() {
            return invalid("coupled sides must be nonempty and of equal length");
        }
        let (d, n) = (mean_field[0].dim, mean_field[0].n_particles());
        if mean_field.iter().chain(&nbody).any(|s| s.dim != d || s.n_particles() != n) {
            return invalid("all samples must share N and d");
        }
        if reference.dim() != d {
            return invalid("reference cloud dimension differs from the ensemble");
        }
        Ok(CoupledEnsemble { mean_field, nbody, reference, seed })
    }

    /// Diagonal coupling of `(f^in)^{⊗N}` with itself: each N-body sample
    /// starts as an exact copy of its mean-field partner.
    pub fn diagonal(
        init: &InitialData,
        d: usize,
        n: usize,
        samples: usize,
        reference_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let reference = init.sample_cloud(d, reference_size, child_seed(seed, 1))?;
        let mean_field = init.sample_product(d, n, samples, child_seed(seed, 2), 0)?;
        let nbody = mean_field.clone();
        Self::new(mean_field, nbody, reference, seed)
    }

    pub fn n_particles(&self) -> usize {
        self.mean_field[0].n_particles()
    }

    pub fn n_samples(&self) -> usize {
        self.mean_field.len()
    }

    pub fn dim(&self) -> usize {
        self.mean_field[0].dim
    }

    pub fn time(&self) -> f64 {
        self.mean_field[0].time
    }
}

/// Advances the coupled ensemble and its reference cloud in lockstep by
/// `n_steps` velocity-Verlet steps.
pub fn coupled_advance(
    ens: &CoupledEnsemble,
    v: &Potential,
    dt: f64,
    n_steps: usize,
    mode: ForceEvaluation,
) -> Result<CoupledEnsemble> {
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    if v.dim() != ens.dim() {
        return invalid("potential and ensemble dimensions differ");
    }
    let lag = (ens.time() - ens.reference.time()).abs();
    if lag > 0.5 * dt {
        return Err(Error::InvalidState(format!(
            "ensemble at t={} but reference cloud at t={}",
            ens.time(),
            ens.reference.time()
        )));
    }
    let mut out = ens.clone();
    let start = ens.time();
    let mut f_ref = vec![0.0; out.reference.state.positions.len()];
    self_force(v, &out.reference.state.positions, mode, &mut f_ref);
    let mut f_mf: Vec<Vec<f64>> = out.mean_field.iter().map(|s| vec![0.0; s.positions.len()]).collect();
    let mut f_nb = f_mf.clone();
    sample_forces(v, &out, mode, &mut f_mf, &mut f_nb);

    for step in 0..n_steps {
        let t = start + (step + 1) as f64 * dt;
        kick_drift(&mut out.reference.state, &f_ref, dt);
        out.mean_field.par_iter_mut().zip(&f_mf).for_each(|(s, f)| kick_drift(s, f, dt));
        out.nbody.par_iter_mut().zip(&f_nb).for_each(|(s, f)| kick_drift(s, f, dt));

        self_force(v, &out.reference.state.positions, mode, &mut f_ref);
        sample_forces(v, &out, mode, &mut f_mf, &mut f_nb);

        kick(&mut out.reference.state.momenta, &f_ref, 0.5 * dt);
        out.reference.state.time = t;
        for (states, forces) in [(&mut out.mean_field, &f_mf), (&mut out.nbody, &f_nb)] {
            states.par_iter_mut().zip(forces).for_each(|(s, f)| {
                kick(&mut s.momenta, f, 0.5 * dt);
                s.time = t;
            });
        }
    }
    Ok(out)
}

fn sample_forces(
    v: &Potential,
    ens: &CoupledEnsemble,
    mode: ForceEvaluation,
    f_mf: &mut [Vec<f64>],
    f_nb: &mut [Vec<f64>],
) {
    let field = MeanFieldForce::new(v, &ens.reference.state.positions, mode);
    f_mf.par_iter_mut().zip(&ens.mean_field).for_each(|(f, s)| field.eval_all(&s.positions, f));
    f_nb.par_iter_mut().zip(&ens.nbody).for_each(|(f, s)| nbody_force(v, &s.positions, f));
}

fn dobrushin_terms(ens: &CoupledEnsemble, p: f64) -> Result<Vec<f64>> {
    if !(p >= 1.0) {
        return invalid(format!("exponent must be ≥ 1, got {p}"));
    }
    if ens.mean_field.is_empty() {
        return invalid("empty ensemble");
    }
    let d = ens.dim();
    let n = ens.n_particles();
    let pow = |r2: f64| if p == 2.0 { r2 } else { r2.sqrt().powf(p) };
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    Ok(ens
        .mean_field
        .par_iter()
        .zip(&ens.nbody)
        .map(|(a, b)| {
            let mut per_particle: Vec<f64> = (0..n)
                .map(|j| {
                    let r = j * d..(j + 1) * d;
                    pow(dist2(&a.positions[r.clone()], &b.positions[r.clone()]))
                        + pow(dist2(&a.momenta[r.clone()], &b.momenta[r]))
                })
                .collect();
            // summing in sorted order makes the result invariant under
            // joint relabeling of the particles
            per_particle.sort_by(f64::total_cmp);
            per_particle.iter().sum::<f64>() / n as f64
        })
        .collect())
}

/// Monte-Carlo estimate of `D^p_N = E[(1/N) Σ_j (|x_j−y_j|^p + |ξ_j−η_j|^p)]`.
pub fn dobrushin_functional(ens: &CoupledEnsemble, p: f64) -> Result<f64> {
    Ok(dobrushin_estimate(ens, p)?.0)
}

/// `D^p_N` with its Monte-Carlo standard error.
pub fn dobrushin_estimate(ens: &CoupledEnsemble, p: f64) -> Result<(f64, f64)> {
    Ok(mean_stderr(&dobrushin_terms(ens, p)?))
}

/// Equal-weight cloud of the first `n` particles' phase coordinates, one atom
/// per sample, with coordinates `(x_1,…,x_n, ξ_1,…,ξ_n)`.
pub fn marginal_cloud(side: &[PhaseState], n: usize) -> Result<DiscreteMeasure> {
    let Some(first) = side.first() else {
        return invalid("empty ensemble side");
    };
    if n == 0 || n > first.n_particles() {
        return invalid(format!("marginal order {n} outside 1..={}", first.n_particles()));
    }
    let d = first.dim;
    let mut pts = Vec::with_capacity(side.len() * 2 * n * d);
    for s in side {
        pts.extend_from_slice(&s.positions[..n * d]);
        pts.extend_from_slice(&s.momenta[..n * d]);
    }
    DiscreteMeasure::uniform(2 * n * d, pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_gaussian_potential;
    use crate::rng::stream_rng;
    use rand::seq::SliceRandom;

    fn single(x: f64, xi: f64) -> PhaseState {
        PhaseState::new(1, vec![x], vec![xi], 0.0).unwrap()
    }

    #[test]
    fn functional_arithmetic() {
        let r = VlasovCloud::new(single(0.0, 0.0));
        let e = CoupledEnsemble::new(vec![single(3.0, 4.0)], vec![single(0.0, 0.0)], r, 0).unwrap();
        assert_eq!(dobrushin_functional(&e, 2.0).unwrap(), 25.0);
        assert_eq!(dobrushin_functional(&e, 1.0).unwrap(), 7.0);
        assert!(dobrushin_functional(&e, 0.5).is_err());
    }

    #[test]
    fn diagonal_start_is_zero_and_free_flow_keeps_it() {
        let init = InitialData::standard_normal(1);
        let e = CoupledEnsemble::diagonal(&init, 1, 8, 50, 200, 3).unwrap();
        assert_eq!(dobrushin_functional(&e, 2.0).unwrap(), 0.0);
        let v = make_gaussian_potential(0.0, 1.0, 1).unwrap();
        let e = coupled_advance(&e, &v, 0.05, 20, ForceEvaluation::Tabulated).unwrap();
        assert_eq!(e.mean_field, e.nbody);
        assert_eq!(dobrushin_functional(&e, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_particle_sides_diverge() {
        let init = InitialData::standard_normal(1);
        let e = CoupledEnsemble::diagonal(&init, 1, 1, 20, 500, 4).unwrap();
        let v = make_gaussian_potential(1.0, 1.0, 1).unwrap();
        let e = coupled_advance(&e, &v, 0.05, 10, ForceEvaluation::Direct).unwrap();
        assert!(dobrushin_functional(&e, 2.0).unwrap() > 0.0);
        // the N = 1 body side is free streaming
        let first = CoupledEnsemble::diagonal(&init, 1, 1, 20, 500, 4).unwrap();
        for (a, b) in e.nbody.iter().zip(&first.nbody) {
            assert!((a.positions[0] - (b.positions[0] + 0.5 * b.momenta[0])).abs() < 1e-13);
        }
    }

    #[test]
    fn misaligned_reference_rejected() {
        let init = InitialData::standard_normal(1);
        let mut e = CoupledEnsemble::diagonal(&init, 1, 2, 3, 10, 0).unwrap();
        e.reference.state.time = 1.0;
        let v = make_gaussian_potential(1.0, 1.0, 1).unwrap();
        assert!(matches!(coupled_advance(&e, &v, 0.1, 1, ForceEvaluation::Direct), Err(Error::InvalidState(_))));
    }

    #[test]
    fn joint_relabeling_leaves_functional_unchanged() {
        let init = InitialData::standard_normal(2);
        let e = CoupledEnsemble::diagonal(&init, 2, 9, 30, 100, 5).unwrap();
        let v = make_gaussian_potential(1.0, 1.0, 2).unwrap();
        let e = coupled_advance(&e, &v, 0.05, 8, ForceEvaluation::Direct).unwrap();
        let mut rng = stream_rng(1, 0);
        let mut relabeled = e.clone();
        for (a, b) in relabeled.mean_field.iter_mut().zip(relabeled.nbody.iter_mut()) {
            let mut perm: Vec<usize> = (0..9).collect();
            perm.shuffle(&mut rng);
            *a = a.permuted(&perm);
            *b = b.permuted(&perm);
        }
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(dobrushin_functional(&e, p).unwrap(), dobrushin_functional(&relabeled, p).unwrap());
        }
    }

    #[test]
    fn marginal_shapes() {
        let init = InitialData::standard_normal(2);
        let e = CoupledEnsemble::diagonal(&init, 2, 3, 7, 10, 0).unwrap();
        let m1 = marginal_cloud(&e.mean_field, 1).unwrap();
        assert_eq!((m1.len(), m1.dim()), (7, 4));
        let m3 = marginal_cloud(&e.mean_field, 3).unwrap();
        assert_eq!(m3.dim(), 12);
        assert!(marginal_cloud(&e.mean_field, 4).is_err());
        assert!(marginal_cloud(&e.mean_field, 0).is_err());
    }
}
