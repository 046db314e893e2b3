use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{PhaseState, VlasovCloud};
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

/// One-particle initial phase-space distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialData {
    /// Independent normal coordinates with the given means and variances
    /// (one entry per axis).
    Gaussian { mean_x: Vec<f64>, mean_xi: Vec<f64>, var_x: Vec<f64>, var_xi: Vec<f64> },
    /// Uniform on `Π[−hx, hx] × Π[−hξ, hξ]`.
    UniformBox { half_width_x: f64, half_width_xi: f64 },
}

impl InitialData {
    /// Standard normal in `(x, ξ) ∈ R^{2d}`.
    pub fn standard_normal(d: usize) -> Self {
        InitialData::Gaussian { mean_x: vec![0.0; d], mean_xi: vec![0.0; d], var_x: vec![1.0; d], var_xi: vec![1.0; d] }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            InitialData::Gaussian { mean_x, mean_xi, var_x, var_xi } => {
                if [mean_x, mean_xi, var_x, var_xi].iter().any(|v| v.len() != d) {
                    return invalid(format!("gaussian initial data needs {d} entries per field"));
                }
                if var_x.iter().chain(var_xi).any(|s| !(*s >= 0.0)) {
                    return invalid("variances must be nonnegative");
                }
            }
            InitialData::UniformBox { half_width_x, half_width_xi } => {
                if !(*half_width_x >= 0.0 && *half_width_xi >= 0.0) {
                    return invalid("box half-widths must be nonnegative");
                }
            }
        }
        Ok(())
    }

    /// Draws one particle `(x, ξ)` into the given slices.
    pub fn sample_into<R: Rng>(&self, rng: &mut R, x: &mut [f64], xi: &mut [f64]) {
        match self {
            InitialData::Gaussian { mean_x, mean_xi, var_x, var_xi } => {
                for c in 0..x.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    x[c] = mean_x[c] + var_x[c].sqrt() * z;
                }
                for c in 0..xi.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    xi[c] = mean_xi[c] + var_xi[c].sqrt() * z;
                }
            }
            InitialData::UniformBox { half_width_x, half_width_xi } => {
                for v in x.iter_mut() {
                    *v = half_width_x * rng.random_range(-1.0..=1.0);
                }
                for v in xi.iter_mut() {
                    *v = half_width_xi * rng.random_range(-1.0..=1.0);
                }
            }
        }
    }

    /// `n` i.i.d. particles drawn from RNG stream `stream`.
    pub fn sample_state(&self, d: usize, n: usize, seed: u64, stream: u64) -> Result<PhaseState> {
        self.validate(d)?;
        let mut rng = stream_rng(seed, stream);
        let mut x = vec![0.0; n * d];
        let mut xi = vec![0.0; n * d];
        for k in 0..n {
            self.sample_into(&mut rng, &mut x[k * d..(k + 1) * d], &mut xi[k * d..(k + 1) * d]);
        }
        PhaseState::new(d, x, xi, 0.0)
    }

    pub fn sample_cloud(&self, d: usize, m: usize, seed: u64) -> Result<VlasovCloud> {
        Ok(VlasovCloud::new(self.sample_state(d, m, seed, 0)?))
    }

    /// `m` independent samples of `(f^in)^{⊗n}`; sample `s` uses stream
    /// `first_stream + s`.
    pub fn sample_product(
        &self,
        d: usize,
        n: usize,
        m: usize,
        seed: u64,
        first_stream: u64,
    ) -> Result<Vec<PhaseState>> {
        (0..m).into_par_iter().map(|s| self.sample_state(d, n, seed, first_stream + s as u64)).collect()
    }
}
